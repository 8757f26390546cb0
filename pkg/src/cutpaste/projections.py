"""Unlabeled projections of runs and the mixing-equivalence check.

Forgetting the color labels of a trajectory is only guaranteed to leave a
Markov chain when the driving paintbox law is row-column exchangeable. The
projection is still computed for other laws, but the run is flagged as
diagnostic. The equivalence check computes both chains' exact distance
profiles on small state spaces and compares their epsilon-crossing times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chains import ChainRun
from .errors import BudgetRefusal, TheoryRefusal, ValidationError
from .paintbox import PaintboxLaw
from .partitions import UnlabeledPartition, project
from .smallspace import (
    exact_kernel,
    lumped_kernel,
    projection_classes,
    state_count,
    stationary_distribution,
)

DEFAULT_STATE_BUDGET = 4096


@dataclass(frozen=True)
class ProjectedRun:
    """A run with its trajectory pushed onto unlabeled partitions."""

    base: ChainRun
    trajectory: tuple[UnlabeledPartition, ...]
    markov_certified: bool
    flags: tuple[str, ...] = ()


def project_run(run: ChainRun) -> ProjectedRun:
    """Project every recorded coloring of a run onto its unlabeled partition.

    The projected sequence is certified Markov only when the driving law is
    row-column exchangeable; otherwise the result carries a diagnostic flag
    and no Markov claim.
    """
    traj = tuple(project(x) for x in run.trajectory)
    flags: list[str] = []
    certified = False
    if run.law is None:
        flags.append("diagnostic only: run has no recorded paintbox law")
    else:
        rce = run.law.is_rce()
        if rce:
            certified = True
        else:
            flags.append(f"diagnostic only: projection may be non-Markov ({rce.reason})")
    return ProjectedRun(run, traj, certified, tuple(flags))


@dataclass(frozen=True)
class EquivalenceReport:
    """Exact distance profiles of a labeled chain and its projection, with
    their epsilon-crossing times."""

    n: int
    k: int
    epsilons: tuple[float, ...]
    profile: tuple[tuple[int, float, float], ...]
    t_labeled: dict[float, int | None]
    t_projected: dict[float, int | None]
    equal_crossings: bool
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "epsilons": list(self.epsilons),
            "profile": [
                {"m": m, "tv_labeled": a, "tv_projected": b, "kind": "exact"}
                for m, a, b in self.profile
            ],
            "t_labeled": [{"epsilon": e, "m": self.t_labeled[e]} for e in self.epsilons],
            "t_projected": [{"epsilon": e, "m": self.t_projected[e]} for e in self.epsilons],
            "equal_crossings": self.equal_crossings,
            "flags": list(self.flags),
        }


def _worst_tv(rows: np.ndarray, pi: np.ndarray) -> float:
    return float(0.5 * np.abs(rows - pi[None, :]).sum(axis=1).max())


def projected_mixing_equivalence(
    law: PaintboxLaw,
    n: int,
    k: int,
    epsilon=(0.5, 0.25),
    seed=0,
    state_budget: int = DEFAULT_STATE_BUDGET,
    m_max: int = 512,
) -> EquivalenceReport:
    """Exact worst-start TV profiles for the labeled chain and its unlabeled
    projection, with the smallest horizon under each epsilon.

    Needs a row-column exchangeable, finitely supported law on a state space
    within budget; the projected kernel is the lumping of the labeled one and
    the projected stationary law is the pushforward of the labeled one. The
    seed parameter is accepted for interface uniformity; the computation is
    deterministic.
    """
    del seed
    if law.k != k:
        raise ValidationError(f"law has k={law.k}, asked for k={k}", field="k")
    rce = law.is_rce()
    if not rce:
        raise TheoryRefusal(
            "projection equivalence holds under row-column exchangeability only",
            rce_reason=rce.reason,
        )
    try:
        eps_grid = tuple(sorted({float(e) for e in epsilon}, reverse=True))
    except TypeError:
        eps_grid = (float(epsilon),)
    for e in eps_grid:
        if not 0.0 < e < 1.0:
            raise ValidationError("epsilon must lie in (0, 1)", field="epsilon")
    states = state_count(n, k)
    if states > state_budget:
        raise BudgetRefusal(
            "labeled state space too large for the exact equivalence check",
            required=states, budget=state_budget,
        )

    kernel = exact_kernel(law, n)
    pi = stationary_distribution(kernel)
    labels, reps = projection_classes(n, k)
    lumped = lumped_kernel(kernel, labels)
    pi_proj = np.bincount(labels, weights=pi, minlength=len(reps))

    flags: list[str] = []
    profile: list[tuple[int, float, float]] = []
    t_lab: dict[float, int | None] = {e: None for e in eps_grid}
    t_proj: dict[float, int | None] = {e: None for e in eps_grid}
    power = np.eye(states)
    power_proj = np.eye(len(reps))
    for m in range(1, m_max + 1):
        power = power @ kernel
        power_proj = power_proj @ lumped
        tv_lab = _worst_tv(power, pi)
        tv_pr = _worst_tv(power_proj, pi_proj)
        profile.append((m, tv_lab, tv_pr))
        if tv_pr > tv_lab + 1e-9:
            flags.append(f"pushforward contraction violated at m={m}")
        for e in eps_grid:
            if t_lab[e] is None and tv_lab < e:
                t_lab[e] = m
            if t_proj[e] is None and tv_pr < e:
                t_proj[e] = m
        if all(t_lab[e] is not None and t_proj[e] is not None for e in eps_grid):
            break
    else:
        flags.append(f"profile truncated at m_max={m_max} before all crossings")

    equal = all(
        t_lab[e] is not None and t_lab[e] == t_proj[e] for e in eps_grid
    )
    return EquivalenceReport(
        n=n,
        k=k,
        epsilons=eps_grid,
        profile=tuple(profile),
        t_labeled=t_lab,
        t_projected=t_proj,
        equal_crossings=equal,
        flags=tuple(flags),
    )
