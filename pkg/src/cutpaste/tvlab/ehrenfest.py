"""Batch-refresh chain: coupling bounds and exact TV to stationarity.

The exact pass never enumerates the 2^n configurations. Reading the moves
most-recent-first, each site keeps the coin of the first batch that contains
it, so the word is assembled by a covering process: a batch covers h fresh
sites, all h share one fair coin. The pair (covered sites, ones among
covered) is then a Markov chain on a quadratic state space, the one-count
N1 = s + (n - c) is a sufficient statistic by exchangeability, and the
stationary law is the same process run to full coverage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ..chains import EhrenfestParams
from ..errors import BudgetRefusal, TheoryRefusal, ValidationError
from ..partitions import Coloring
from .exact import TVEstimate, _half_l1

DEFAULT_EXACT_N_LIMIT = 1100


def coupling_upper(params: EhrenfestParams, t: float) -> float:
    """Mean residual-coupling bound n * (1 - a/n)^t; can exceed 1 early on."""
    if t < 0:
        raise ValidationError("need t >= 0", field="t")
    n, a = params.n, params.batch_size
    return n * (1.0 - a / n) ** t


@dataclass(frozen=True)
class EhrenfestBounds:
    """Coupling bounds, optionally evaluated on the beta schedules
    t = (n / 2a) log n +/- beta n / a."""

    n: int
    batch_size: int
    t: float | None = None
    upper_at_t: float | None = None
    beta: float | None = None
    t_upper_schedule: float | None = None
    upper_at_schedule: float | None = None
    t_lower_schedule: float | None = None
    lower_at_schedule: float | None = None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "batch_size": self.batch_size,
            "t": self.t,
            "upper_at_t": self.upper_at_t,
            "beta": self.beta,
            "t_upper_schedule": self.t_upper_schedule,
            "upper_at_schedule": self.upper_at_schedule,
            "t_lower_schedule": self.t_lower_schedule,
            "lower_at_schedule": self.lower_at_schedule,
        }


def ehrenfest_bounds(params: EhrenfestParams, t: float | None = None, beta: float | None = None) -> EhrenfestBounds:
    """Upper bound at a given t, and/or both schedule bounds at a given beta.

    The lower bound 1 - 8 exp(1 - 2 beta) at the early schedule time needs
    the refresh fraction at or below one half; larger batches are refused
    for the lower bound (the upper bound has no such restriction).
    """
    if t is None and beta is None:
        raise ValidationError("provide t, beta, or both")
    n, a = params.n, params.batch_size
    out = {"n": n, "batch_size": a}
    if t is not None:
        out["t"] = float(t)
        out["upper_at_t"] = coupling_upper(params, float(t))
    if beta is not None:
        beta = float(beta)
        if params.alpha > 0.5:
            raise TheoryRefusal(
                "the schedule lower bound needs refresh fraction alpha <= 1/2",
                alpha=params.alpha,
            )
        base = (n / (2.0 * a)) * math.log(n)
        shift = beta * n / a
        out["beta"] = beta
        out["t_upper_schedule"] = base + shift
        out["upper_at_schedule"] = coupling_upper(params, base + shift)
        out["t_lower_schedule"] = base - shift
        out["lower_at_schedule"] = 1.0 - 8.0 * math.exp(1.0 - 2.0 * beta)
    return EhrenfestBounds(**out)


@dataclass(frozen=True)
class LogLogSchedule:
    """Large-batch schedule: refresh fraction 1 - exp(-log n / log log n)
    run for (1 + beta) log log n steps, against the target n^-beta."""

    n: int
    beta: float
    alpha: float
    batch_size: int
    t: float
    upper_rate: float
    upper_batch: float
    target: float

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "beta": self.beta,
            "alpha": self.alpha,
            "batch_size": self.batch_size,
            "t": self.t,
            "upper_rate": self.upper_rate,
            "upper_batch": self.upper_batch,
            "target": self.target,
        }


def loglog_schedule(n: int, beta: float) -> LogLogSchedule:
    """Evaluate the coupling bound on the aggressive-batch schedule.

    upper_rate uses the exact fraction alpha and satisfies
    upper_rate <= n^-beta by direct algebra; upper_batch uses the integer
    batch floor(alpha n) that an actual chain must use, which weakens the
    rate slightly.
    """
    if n < 3:
        raise ValidationError("schedule needs n >= 3 so log log n > 0", field="n")
    if beta <= 0:
        raise ValidationError("need beta > 0", field="beta")
    lln = math.log(math.log(n))
    alpha = 1.0 - math.exp(-math.log(n) / lln)
    t = (1.0 + beta) * lln
    params = EhrenfestParams(n, alpha)
    return LogLogSchedule(
        n=n,
        beta=float(beta),
        alpha=alpha,
        batch_size=params.batch_size,
        t=t,
        upper_rate=n * (1.0 - alpha) ** t,
        upper_batch=coupling_upper(params, t),
        target=float(n) ** (-beta),
    )


def _log_binom(n, k):
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    n, k = np.broadcast_arrays(n, k)
    out = np.full(n.shape, -np.inf)
    ok = (k >= 0) & (k <= n)
    out[ok] = gammaln(n[ok] + 1) - gammaln(k[ok] + 1) - gammaln(n[ok] - k[ok] + 1)
    return out


def _coverage_weights(n: int, a: int) -> np.ndarray:
    """W[c, h] = P(a uniform batch hits h of the n - c uncovered sites)."""
    c = np.arange(n + 1)[:, None]
    h = np.arange(a + 1)[None, :]
    logw = _log_binom(n - c, h) + _log_binom(c, a - h) - _log_binom(n, a)
    return np.exp(logw)


def _dp_step(p: np.ndarray, w: np.ndarray, a: int) -> np.ndarray:
    """One covering move on the (covered, ones-among-covered) law: h fresh
    sites join, and one fair coin either adds all h to the ones or none."""
    n1 = p.shape[0]
    new = np.zeros_like(p)
    for h in range(a + 1):
        contrib = p * w[:, h][:, None]
        if h == 0:
            new += contrib
        else:
            half = 0.5 * contrib[: n1 - h, :]
            new[h:, :] += half
            new[h:, h:] += half[:, : n1 - h]
    return new


def _counts_from_state(p: np.ndarray) -> np.ndarray:
    """Push (c, s) mass onto the one-count N1 = s + (n - c), for the
    all-ones start (uncovered sites still show color 1)."""
    n = p.shape[0] - 1
    counts = np.zeros(n + 1)
    for c in range(n + 1):
        counts[n - c :] += p[c, : c + 1]
    return counts


def _stationary_counts(n: int, a: int, w: np.ndarray) -> np.ndarray:
    """One-count law at full coverage, by the jump chain conditioned on
    covering at least one fresh site per move. Coverage grows every jump, so
    n rounds absorb all mass exactly."""
    if a == 1:
        i = np.arange(n + 1)
        return np.exp(_log_binom(n, i) - n * math.log(2.0))
    p = np.zeros((n + 1, n + 1))
    p[0, 0] = 1.0
    pi = np.zeros(n + 1)
    stay = 1.0 - w[:, 0]
    jump = np.zeros_like(w)
    active = stay > 0
    jump[active] = w[active] / stay[active, None]
    for _ in range(n):
        new = np.zeros_like(p)
        for h in range(1, a + 1):
            contrib = p * jump[:, h][:, None]
            half = 0.5 * contrib[: n + 1 - h, :]
            new[h:, :] += half
            new[h:, h:] += half[:, : n + 1 - h]
        pi += new[n, :]
        new[n, :] = 0.0
        p = new
        if p.sum() < 1e-16:
            break
    return pi


def _check_exact_inputs(params: EhrenfestParams, x0, n_limit: int) -> None:
    n = params.n
    if n > n_limit:
        raise BudgetRefusal(
            "exact pass is limited to moderate n; use the coupling bounds instead",
            n=n, limit=n_limit,
        )
    if x0 is not None:
        if not isinstance(x0, Coloring) or x0.k != 2 or x0.n != n:
            raise ValidationError("x0 must be a 2-coloring of the chain's sites", field="x0")
        if len(set(x0.word)) != 1:
            raise TheoryRefusal(
                "the exact pass covers constant initial colorings only",
                x0=x0.to_string(),
            )


def ehrenfest_tv_profile(
    params: EhrenfestParams,
    t_grid,
    x0: Coloring | None = None,
    n_limit: int = DEFAULT_EXACT_N_LIMIT,
) -> list[tuple[int, TVEstimate]]:
    """Exact TV to stationarity at every horizon in t_grid, in one forward
    DP sweep. The two constant starts are symmetric, so the all-ones law
    computed here covers both."""
    _check_exact_inputs(params, x0, n_limit)
    grid = sorted({int(t) for t in t_grid})
    if not grid or grid[0] < 0:
        raise ValidationError("t_grid must be non-empty with t >= 0", field="t_grid")
    n, a = params.n, params.batch_size
    w = _coverage_weights(n, a)
    pi = _stationary_counts(n, a, w)
    p = np.zeros((n + 1, n + 1))
    p[0, 0] = 1.0
    out = []
    want = set(grid)
    for t in range(grid[-1] + 1):
        if t > 0:
            p = _dp_step(p, w, a)
        if t in want:
            out.append((t, TVEstimate(_half_l1(_counts_from_state(p), pi), "exact")))
    return out


def ehrenfest_tv_exact(
    params: EhrenfestParams,
    t: int,
    x0: Coloring | None = None,
    n_limit: int = DEFAULT_EXACT_N_LIMIT,
) -> TVEstimate:
    """Exact TV between the chain's law at horizon t (from a constant start)
    and its stationary law."""
    return ehrenfest_tv_profile(params, [t], x0, n_limit)[0][1]


def ehrenfest_mixing_time(
    params: EhrenfestParams,
    epsilon: float,
    t_max: int | None = None,
    n_limit: int = DEFAULT_EXACT_N_LIMIT,
) -> int:
    """Smallest t with exact TV below epsilon. TV to stationarity is
    non-increasing in t, so the first crossing found by the forward sweep is
    the mixing time."""
    if not 0.0 < epsilon < 1.0:
        raise ValidationError("epsilon must lie in (0, 1)", field="epsilon")
    _check_exact_inputs(params, None, n_limit)
    n, a = params.n, params.batch_size
    if t_max is None:
        t_max = int(math.ceil(2.0 * (n / a) * math.log(n))) + 8 * int(math.ceil(n / a))
    w = _coverage_weights(n, a)
    pi = _stationary_counts(n, a, w)
    p = np.zeros((n + 1, n + 1))
    p[0, 0] = 1.0
    for t in range(t_max + 1):
        if t > 0:
            p = _dp_step(p, w, a)
        if _half_l1(_counts_from_state(p), pi) < epsilon:
            return t
    raise BudgetRefusal(
        "no horizon below epsilon within the step allowance",
        epsilon=epsilon, t_max=t_max,
    )
