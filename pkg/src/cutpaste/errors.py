"""Exception taxonomy shared across the package.

Two failure families matter to callers. ValidationError means the input
itself is malformed (bad dimensions, bad config fields) and maps to CLI
exit code 2. Refusal means the input was well formed but a precondition
gate declined to run (theory hypotheses, enumeration budgets, Monte Carlo
certification), and maps to CLI exit code 3.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Malformed input or configuration."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class Refusal(RuntimeError):
    """A computation declined to run for a stated, machine-readable reason."""

    code = "refused"

    def __init__(self, reason, **details):
        super().__init__(reason)
        self.reason = reason
        self.details = details

    def payload(self):
        return {"code": self.code, "reason": self.reason, "details": self.details}


class TheoryRefusal(Refusal):
    """A theoretical precondition (ergodicity, exchangeability, density) is not established."""

    code = "theory_gate"


class BudgetRefusal(Refusal):
    """An exact enumeration would exceed the configured budget."""

    code = "budget_exceeded"


class InconclusiveRefusal(Refusal):
    """Monte Carlo error bands were too wide to certify the requested threshold."""

    code = "inconclusive"
