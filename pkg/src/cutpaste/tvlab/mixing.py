"""Mixing-time search and cutoff experiments over growing n.

A mixing-time query first runs the collapse diagnostic; without a certified
collapsing product the chain need not mix to a unique law and the search is
refused. Distance to stationarity is tracked through the worst designed
initial-state pair, and a horizon only counts as mixed when its estimate is
certified below epsilon (exact value below, or mean plus three standard
errors below for MC).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import BudgetRefusal, TheoryRefusal, ValidationError
from ..paintbox import PaintboxLaw
from ..partitions import Coloring
from ..products import collapse_diagnostic, estimate_lyapunov
from ..rng import as_stream
from .exact import DEFAULT_ENUMERATION_BUDGET, TVEstimate, tv_exact_atomic
from .mc import make_constant_pair, tv_upper_mc

METHODS = ("exact_atomic", "mc_sandwich")


def designed_pairs(n: int, k: int) -> list[tuple[Coloring, Coloring]]:
    """Initial-state pairs whose worst-case TV drives the mixing search: the
    constant colorings in each unordered color pair. Constant pairs refine
    into a single cell, so their exact statistic has n+1 states and the
    search scales to large n."""
    return [make_constant_pair(n, k, i, j) for i, j in itertools.combinations(range(1, k + 1), 2)]


def certified_below(est: TVEstimate, epsilon: float) -> bool:
    if est.kind == "exact":
        return est.value < epsilon
    return est.value + 3.0 * est.mc_std_error < epsilon


@dataclass(frozen=True)
class MixingProfile:
    """Search record for one chain size: every probed horizon's worst-pair
    estimate, and the smallest certified horizon per epsilon (None when the
    search could not certify one)."""

    n: int
    epsilons: tuple[float, ...]
    estimates: tuple[tuple[int, TVEstimate], ...]
    t_mix: dict[float, int | None]
    method: str
    theta_hat: float | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        ms = [m for m, _ in self.estimates]
        if ms != sorted(set(ms)):
            raise ValidationError("estimates must be sorted by distinct m")
        if set(self.t_mix) != set(self.epsilons):
            raise ValidationError("t_mix must cover exactly the epsilon grid")
        known = [(e, t) for e, t in sorted(self.t_mix.items()) if t is not None]
        for (_, ta), (_, tb) in zip(known, known[1:]):
            if tb > ta:
                raise ValidationError("t_mix must be non-increasing in epsilon")

    def estimate_at(self, m: int) -> TVEstimate | None:
        for mm, est in self.estimates:
            if mm == m:
                return est
        return None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "epsilons": list(self.epsilons),
            "estimates": [{"m": m, **est.to_json()} for m, est in self.estimates],
            "t_mix": [{"epsilon": e, "m": self.t_mix[e]} for e in self.epsilons],
            "method": self.method,
            "theta_hat": self.theta_hat,
            "flags": list(self.flags),
        }


def mixing_time(
    law: PaintboxLaw,
    n: int,
    k: int,
    epsilon=0.25,
    method: str = "mc_sandwich",
    seed=0,
    replicates: int = 2000,
    m_max: int = 4096,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    theta_hat: float | None = None,
) -> MixingProfile:
    """Smallest horizon with certified worst-pair TV below each epsilon.

    Doubles the horizon until certified, then bisects; a final pass takes the
    minimum certified horizon over everything probed. Estimates share one
    seed per pair across horizons, so MC probes at different m see the same
    paintbox path prefixes. Certification failures (budget or band width)
    leave t_mix None for that epsilon and add a flag instead of raising.
    """
    if law.k != k:
        raise ValidationError(f"law has k={law.k}, asked for k={k}", field="k")
    if n < 1:
        raise ValidationError("need n >= 1", field="n")
    if method not in METHODS:
        raise ValidationError(f"method must be one of {METHODS}", field="method")
    if m_max < 1:
        raise ValidationError("need m_max >= 1", field="m_max")
    try:
        eps_grid = tuple(sorted({float(e) for e in epsilon}))
    except TypeError:
        eps_grid = (float(epsilon),)
    for e in eps_grid:
        if not 0.0 < e < 1.0:
            raise ValidationError("epsilon must lie in (0, 1)", field="epsilon")

    stream = as_stream(seed)
    gate = collapse_diagnostic(law, seed=stream.derive("collapse-gate"))
    if gate.verdict != "yes":
        raise TheoryRefusal(
            "mixing-time search needs a certified collapsing product",
            diagnostic=gate.to_json(),
        )

    pairs = designed_pairs(n, k)
    cache: dict[int, TVEstimate] = {}
    flags: list[str] = []

    def d_bar(m: int) -> TVEstimate:
        if m not in cache:
            best: TVEstimate | None = None
            for idx, (a, b) in enumerate(pairs):
                if method == "exact_atomic":
                    est = tv_exact_atomic(law, a, b, m, budget=budget)
                else:
                    est = tv_upper_mc(law, a, b, m, replicates, stream.derive("pair", idx))
                if best is None or est.value > best.value:
                    best = est
            cache[m] = best
        return cache[m]

    budget_note = None
    for eps in sorted(eps_grid, reverse=True):
        lo, hi = 0, 1
        while hi <= m_max:
            try:
                est = d_bar(hi)
            except BudgetRefusal as exc:
                budget_note = f"enumeration budget reached at m={hi} ({exc.details['required']} needed)"
                hi = None
                break
            if certified_below(est, eps):
                break
            lo, hi = hi, hi * 2
        else:
            hi = None
            if method == "mc_sandwich":
                flags.append(
                    f"inconclusive for epsilon={eps:g}: bands too wide within m <= {m_max} "
                    f"at {replicates} replicates"
                )
            else:
                flags.append(f"no certified horizon <= {m_max} for epsilon={eps:g}")
        if hi is None:
            continue
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if certified_below(d_bar(mid), eps):
                hi = mid
            else:
                lo = mid
    if budget_note is not None:
        flags.append(budget_note)

    t_mix: dict[float, int | None] = {}
    for eps in eps_grid:
        hits = [m for m, est in cache.items() if certified_below(est, eps)]
        t_mix[eps] = min(hits) if hits else None

    return MixingProfile(
        n=n,
        epsilons=eps_grid,
        estimates=tuple(sorted(cache.items())),
        t_mix=t_mix,
        method=method,
        theta_hat=theta_hat,
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class CutoffReport:
    """Cutoff evidence across a size grid: mixing horizons at epsilon and
    1 - epsilon, their least-squares slopes against log n, the Lyapunov
    prediction theta_hat, and the window-to-log-n ratios."""

    law_config: dict
    k: int
    epsilon: float
    n_grid: tuple[int, ...]
    lambda1_hat: float
    theta_hat: float
    profiles: tuple[MixingProfile, ...]
    slope_high: float | None
    slope_low: float | None
    window_ratios: tuple[float | None, ...]
    window_nonincreasing: bool | None
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "law": self.law_config,
            "k": self.k,
            "epsilon": self.epsilon,
            "n_grid": list(self.n_grid),
            "lambda1_hat": self.lambda1_hat,
            "theta_hat": self.theta_hat,
            "profiles": [p.to_json() for p in self.profiles],
            "slope_high": self.slope_high,
            "slope_low": self.slope_low,
            "window_ratios": list(self.window_ratios),
            "window_nonincreasing": self.window_nonincreasing,
            "flags": list(self.flags),
        }


def cutoff_experiment(
    law: PaintboxLaw,
    k: int,
    n_grid,
    epsilon: float = 0.25,
    seed=0,
    method: str = "mc_sandwich",
    replicates: int = 2000,
    m_max: int = 4096,
    lyapunov_m: int = 2000,
    lyapunov_replicates: int = 32,
) -> CutoffReport:
    """Mixing horizons at epsilon and 1 - epsilon across n_grid, compared to
    the Lyapunov prediction theta = -1 / (2 log lambda1).

    Only laws with a smooth paintbox density qualify; finitely supported
    laws are refused because the sharp-threshold scaling has no content for
    them. Sizes whose certification fails are reported with a flag and
    excluded from the slope fits.
    """
    if law.k != k:
        raise ValidationError(f"law has k={law.k}, asked for k={k}", field="k")
    if not law.has_smooth_density:
        raise TheoryRefusal(
            "cutoff experiments need a paintbox law with a smooth density",
            law=law.config(),
        )
    if not 0.0 < epsilon < 0.5:
        raise ValidationError("epsilon must lie in (0, 0.5)", field="epsilon")
    n_grid = tuple(int(n) for n in n_grid)
    if len(n_grid) < 2 or sorted(set(n_grid)) != list(n_grid):
        raise ValidationError("n_grid must be at least two strictly increasing sizes", field="n_grid")

    stream = as_stream(seed)
    lyap = estimate_lyapunov(law, lyapunov_m, lyapunov_replicates, stream.derive("lyapunov"))
    if not 0.0 < lyap.lambda1 < 1.0:
        raise TheoryRefusal(
            "cutoff prediction needs a top growth rate strictly inside (0, 1)",
            lyapunov=lyap.to_json(),
        )
    theta = -1.0 / (2.0 * math.log(lyap.lambda1))

    flags: list[str] = []
    profiles: list[MixingProfile] = []
    for n in n_grid:
        prof = mixing_time(
            law,
            n,
            k,
            (epsilon, 1.0 - epsilon),
            method,
            stream.derive("mixing-profile", n),
            replicates=replicates,
            m_max=m_max,
            theta_hat=theta,
        )
        if prof.flags:
            flags.extend(f"n={n}: {f}" for f in prof.flags)
        profiles.append(prof)

    logs = np.log(np.array(n_grid, dtype=float))

    def fit(eps: float) -> float | None:
        xs = [math.log(p.n) for p in profiles if p.t_mix[eps] is not None]
        ys = [p.t_mix[eps] for p in profiles if p.t_mix[eps] is not None]
        if len(xs) < 2:
            return None
        return float(np.polyfit(xs, ys, 1)[0])

    ratios: list[float | None] = []
    for p, ln in zip(profiles, logs):
        hi, lo = p.t_mix[epsilon], p.t_mix[1.0 - epsilon]
        ratios.append((hi - lo) / ln if hi is not None and lo is not None else None)
    seen = [r for r in ratios if r is not None]
    noninc = all(b <= a + 1e-9 for a, b in zip(seen, seen[1:])) if len(seen) >= 2 else None

    return CutoffReport(
        law_config=law.config(),
        k=k,
        epsilon=epsilon,
        n_grid=n_grid,
        lambda1_hat=lyap.lambda1,
        theta_hat=theta,
        profiles=tuple(profiles),
        slope_high=fit(epsilon),
        slope_low=fit(1.0 - epsilon),
        window_ratios=tuple(ratios),
        window_nonincreasing=noninc,
        flags=tuple(flags),
    )
