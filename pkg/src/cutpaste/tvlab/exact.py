"""Exact total-variation computations on count statistics.

Everything in this module reduces a TV distance between laws of colorings to
a finite sum over a sufficient count statistic: per-block color-count vectors
for product-multinomial laws, and their weighted mixtures for finitely
supported paintbox laws. Probabilities are assembled from log-space per-block
terms, and the final half-L1 sums use compensated accumulation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, xlogy

from ..errors import BudgetRefusal, TheoryRefusal, ValidationError
from ..paintbox import PaintboxLaw, StochasticMatrix
from ..partitions import Coloring

DEFAULT_ENUMERATION_BUDGET = 20_000_000

_KINDS = ("exact", "upper_bound", "lower_bound")


@dataclass(frozen=True)
class TVEstimate:
    """A TV value with its provenance: exact, or a Monte Carlo bound."""

    value: float
    kind: str
    mc_std_error: float = 0.0
    replicates: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown estimate kind {self.kind!r}", field="kind")
        v = float(self.value)
        if not -1e-9 <= v <= 1.0 + 1e-9:
            raise ValidationError(f"TV value {v} outside [0, 1]", field="value")
        object.__setattr__(self, "value", min(1.0, max(0.0, v)))
        if self.kind == "exact" and self.mc_std_error != 0.0:
            raise ValidationError("exact estimates carry no MC error", field="mc_std_error")
        if self.mc_std_error < 0.0:
            raise ValidationError("negative standard error", field="mc_std_error")

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "kind": self.kind,
            "mc_std_error": self.mc_std_error,
            "replicates": self.replicates,
        }


@dataclass(frozen=True)
class ProductMultinomialLaw:
    """Independent blocks of sites; block j holds n_j sites colored i.i.d.
    from the distribution s_j."""

    blocks: tuple

    def __post_init__(self):
        cleaned = []
        k = None
        for b in self.blocks:
            size, s = b
            size = int(size)
            if size < 0:
                raise ValidationError("block sizes must be >= 0", field="blocks")
            s = np.array(s, dtype=float)
            if s.ndim != 1:
                raise ValidationError("cell distribution must be a vector", field="blocks")
            if k is None:
                k = len(s)
            elif len(s) != k:
                raise ValidationError("blocks must share one k", field="blocks")
            if s.min() < -1e-12 or abs(s.sum() - 1.0) > 1e-9:
                raise ValidationError(f"{s.tolist()} is not a distribution", field="blocks")
            s = np.clip(s, 0.0, None)
            s /= s.sum()
            cleaned.append((size, tuple(s.tolist())))
        if not cleaned:
            raise ValidationError("need at least one block", field="blocks")
        object.__setattr__(self, "blocks", tuple(cleaned))

    @property
    def k(self) -> int:
        return len(self.blocks[0][1])

    @property
    def n(self) -> int:
        return sum(size for size, _ in self.blocks)


@lru_cache(maxsize=256)
def _compositions(n: int, k: int) -> np.ndarray:
    """All count vectors of length k summing to n, lexicographic."""
    if k == 1:
        out = np.array([[n]], dtype=np.int64)
    else:
        parts = []
        for first in range(n + 1):
            rest = _compositions(n - first, k - 1)
            block = np.empty((rest.shape[0], k), dtype=np.int64)
            block[:, 0] = first
            block[:, 1:] = rest
            parts.append(block)
        out = np.vstack(parts)
    out.setflags(write=False)
    return out


def _block_pmf(size: int, s) -> np.ndarray:
    """Multinomial count pmf over _compositions(size, k), via log space."""
    s = np.asarray(s, dtype=float)
    counts = _compositions(size, len(s))
    logp = (
        gammaln(size + 1)
        - gammaln(counts + 1).sum(axis=1)
        + xlogy(counts, s[None, :]).sum(axis=1)
    )
    return np.exp(logp)


def _half_l1(p: np.ndarray, q: np.ndarray) -> float:
    d = np.abs(p - q)
    if d.size <= 1 << 16:
        return 0.5 * math.fsum(d.tolist())
    return 0.5 * float(np.sum(d))


def _joint_pmf(blocks) -> np.ndarray:
    vec = np.array([1.0])
    for size, s in blocks:
        vec = np.multiply.outer(vec, _block_pmf(size, s)).ravel()
    return vec


def tv_exact_product_multinomial(
    p: ProductMultinomialLaw,
    q: ProductMultinomialLaw,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> TVEstimate:
    """Exact TV between two product-multinomial laws over the per-block
    count-vector statistic, which is sufficient for the pair.

    Blocks whose two cell distributions coincide exactly factor out of the
    half-L1 sum and are skipped.
    """
    if len(p.blocks) != len(q.blocks) or p.k != q.k:
        raise ValidationError("laws must share block structure")
    kept = []
    for (np_, sp), (nq, sq) in zip(p.blocks, q.blocks):
        if np_ != nq:
            raise ValidationError("laws must share block sizes")
        if sp != sq:
            kept.append((np_, sp, sq))
    if not kept:
        return TVEstimate(0.0, "exact")
    size = 1
    for n_j, _, _ in kept:
        size *= _compositions(n_j, p.k).shape[0]
    if size > budget:
        raise BudgetRefusal(
            "joint count statistic too large to enumerate",
            required=size, budget=budget,
        )
    vec_p = _joint_pmf([(n_j, sp) for n_j, sp, _ in kept])
    vec_q = _joint_pmf([(n_j, sq) for n_j, _, sq in kept])
    return TVEstimate(_half_l1(vec_p, vec_q), "exact")


def _entries(qm) -> np.ndarray:
    if isinstance(qm, StochasticMatrix):
        return qm.entries
    return StochasticMatrix(qm).entries


def refinement_cells(x0: Coloring, x0_tilde: Coloring) -> list[tuple[int, int, int]]:
    """Cells of the common refinement of two colorings: (color in x0, color
    in x0_tilde, number of sites), ordered by first site occurrence."""
    if x0.n != x0_tilde.n or x0.k != x0_tilde.k:
        raise ValidationError("initial states must share n and k")
    cells: dict[tuple[int, int], int] = {}
    for a, b in zip(x0.word, x0_tilde.word):
        cells[(a, b)] = cells.get((a, b), 0) + 1
    return [(a, b, cnt) for (a, b), cnt in cells.items()]


def tv_exact_conditional(qm, x0: Coloring, x0_tilde: Coloring) -> TVEstimate:
    """Exact TV between the two chains' conditional laws at a fixed composed
    paintbox qm: given the paintbox trace, each chain is product-multinomial
    over the refinement cells of the initial pair, with cell distributions
    read from the columns of qm."""
    e = _entries(qm)
    if e.shape[0] != x0.k:
        raise ValidationError("paintbox and states must share k")
    cells = refinement_cells(x0, x0_tilde)
    blocks_p = []
    blocks_q = []
    for a, b, cnt in cells:
        blocks_p.append((cnt, tuple(e[:, a - 1].tolist())))
        blocks_q.append((cnt, tuple(e[:, b - 1].tolist())))
    return tv_exact_product_multinomial(
        ProductMultinomialLaw(tuple(blocks_p)), ProductMultinomialLaw(tuple(blocks_q))
    )


def tv_exact_atomic(
    law: PaintboxLaw,
    x0: Coloring,
    x0_tilde: Coloring,
    m: int,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> TVEstimate:
    """Exact TV between the two chains' unconditional laws at step m, for a
    finitely supported paintbox law: enumerate all atom sequences, mix the
    conditional count-statistic laws with the sequence weights, and take the
    half-L1 distance of the mixtures.

    The count statistic over the shared refinement cells stays sufficient
    under mixing because the conditional configuration law given the counts
    does not depend on the paintbox.
    """
    if m < 0:
        raise ValidationError("need m >= 0", field="m")
    atomic = law.as_atomic()
    if atomic is None:
        raise TheoryRefusal(
            "exact TV enumeration needs a finitely supported paintbox law",
            law=law.config(),
        )
    if law.k != x0.k:
        raise ValidationError("law and states must share k")
    cells = refinement_cells(x0, x0_tilde)
    if m == 0:
        return TVEstimate(0.0 if x0 == x0_tilde else 1.0, "exact")
    r = len(atomic.atoms)
    joint_size = 1
    for _, _, cnt in cells:
        joint_size *= _compositions(cnt, law.k).shape[0]
    required = (r**m) * joint_size
    if required > budget:
        raise BudgetRefusal(
            "atom-sequence enumeration exceeds the budget",
            required=required, budget=budget,
        )
    stack = [a.entries for a in atomic.atoms]
    weights = np.asarray(atomic.weights, dtype=float)
    mix_p = np.zeros(joint_size)
    mix_q = np.zeros(joint_size)
    for seq in itertools.product(range(r), repeat=m):
        q = np.eye(law.k)
        w = 1.0
        for t in seq:
            q = stack[t] @ q
            w *= weights[t]
        if w == 0.0:
            continue
        vec_p = _joint_pmf([(cnt, q[:, a - 1]) for a, _, cnt in cells])
        vec_q = _joint_pmf([(cnt, q[:, b - 1]) for _, b, cnt in cells])
        mix_p += w * vec_p
        mix_q += w * vec_q
    return TVEstimate(_half_l1(mix_p, mix_q), "exact")


@dataclass(frozen=True)
class LikelihoodCertificate:
    """Outcome of the likelihood-ratio tail check: when the reference law
    puts mass below epsilon on the set where the ratio strays from 1 by more
    than epsilon, the TV distance is certified below 2 * epsilon."""

    certified: bool
    epsilon: float
    tail_mass: float
    bound: float | None

    def to_json(self) -> dict:
        return {
            "certified": self.certified,
            "epsilon": self.epsilon,
            "tail_mass": self.tail_mass,
            "bound": self.bound,
        }


def tv_likelihood_bound(p, q, epsilon: float) -> LikelihoodCertificate:
    """Certify TV(p, q) < 2*epsilon from the likelihood-ratio tail of q.

    Points where q vanishes but p does not count as ratio-divergent by
    convention; points where both vanish are neutral.
    """
    if not epsilon > 0.0:
        raise ValidationError("epsilon must be positive", field="epsilon")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValidationError("laws must be vectors on a shared support")
    for name, v in (("p", p), ("q", q)):
        if v.min() < -1e-12 or abs(v.sum() - 1.0) > 1e-6:
            raise ValidationError(f"{name} is not a probability vector", field=name)
    pos = q > 0.0
    in_b = np.zeros(p.shape, dtype=bool)
    in_b[pos] = np.abs(p[pos] / q[pos] - 1.0) > epsilon
    in_b[~pos] = p[~pos] > 0.0
    tail = float(q[in_b].sum())
    certified = tail < epsilon
    return LikelihoodCertificate(certified, float(epsilon), tail, 2.0 * epsilon if certified else None)
