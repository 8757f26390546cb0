"""Shared pytest wiring: a one-line verdict per acceptance criterion.

Tests named ``test_criterion_NN_*`` in test_acceptance.py are the acceptance
gate. This plugin collects their outcomes and prints a compact block at the
end of the run, one line per criterion, so the gate can be read off without
scrolling through the full report. Supplement tests (``_supplement`` in the
name) document which clauses of a failing criterion do hold; they get no
line of their own.
"""

from __future__ import annotations

import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)_([a-z0-9_]+)")

_results: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call":
        return
    m = _CRITERION.match(item.name)
    if m is None or "_supplement" in item.name:
        return
    number = int(m.group(1))
    label = m.group(2).replace("_", " ")
    if rep.passed:
        verdict = "pass"
    elif rep.skipped and hasattr(rep, "wasxfail"):
        verdict = "fail (expected)"
    elif rep.failed:
        verdict = "FAIL"
    else:
        verdict = rep.outcome
    _results[number] = (label, verdict)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_results):
        label, verdict = _results[number]
        terminalreporter.write_line(f"ACCEPTANCE {number:02d} {label}: {verdict}")
