"""Chain simulators on k-colorings of [n].

Two equivalent constructions of the paintbox-directed chain (whole-step
partition matrices versus independent per-coordinate jumps), the induced
chain on the color simplex, the two-color batch-refresh (Ehrenfest) family,
and the cyclic-shift group chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TheoryRefusal, ValidationError
from .paintbox import PaintboxLaw, StochasticMatrix, sample_M_given_S, sample_S
from .partitions import Coloring, act
from .rng import RngStream, as_stream


@dataclass(frozen=True)
class ChainRun:
    """A simulated trajectory. trajectory[0] is always x0; with thin = 0 only
    the endpoints are stored, with thin = d every d-th state plus the final
    one. paintbox_trace / move_trace hold the driving randomness when the
    caller asked for it."""

    law: PaintboxLaw | None
    x0: Coloring
    steps: int
    thin: int
    trajectory: tuple[Coloring, ...]
    paintbox_trace: tuple[StochasticMatrix, ...] | None
    move_trace: tuple[tuple[int, int], ...] | None
    seed: RngStream

    @property
    def final(self) -> Coloring:
        return self.trajectory[-1]


@dataclass(frozen=True)
class SimplexPoint:
    """A probability vector over the k colors."""

    k: int
    coords: tuple[float, ...]

    def __post_init__(self):
        if len(self.coords) != self.k:
            raise ValidationError("need one coordinate per color", field="coords")
        arr = np.array(self.coords, dtype=float)
        if arr.min() < -1e-12 or abs(arr.sum() - 1.0) > 1e-12:
            raise ValidationError(
                f"{self.coords} is not a point of the simplex", field="coords"
            )
        arr = np.clip(arr, 0.0, None)
        arr /= arr.sum()
        object.__setattr__(self, "coords", tuple(arr.tolist()))


@dataclass(frozen=True)
class EhrenfestParams:
    """Two-color batch-refresh chain: each step recolors a uniform random
    subset of floor(alpha * n) sites with one shared fresh coin.

    variant "standard" is the single-site case, reached by alpha = 1/n
    through the same code path rather than a special one.
    """

    n: int
    alpha: float
    variant: str = "general"

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"need n >= 1, got {self.n}", field="n")
        if not 0.0 < self.alpha < 1.0 + 1e-15:
            if not (self.variant == "standard" and self.alpha <= 1.0):
                raise ValidationError(
                    f"alpha={self.alpha} outside (0, 1)", field="alpha"
                )
        if self.variant not in ("general", "standard"):
            raise ValidationError(f"unknown variant {self.variant!r}", field="variant")
        if self.batch_size < 1:
            raise ValidationError(
                f"floor(alpha*n) = {self.batch_size} must be >= 1", field="alpha"
            )

    @property
    def batch_size(self) -> int:
        return math.floor(self.alpha * self.n)


def standard_ehrenfest(n: int) -> EhrenfestParams:
    return EhrenfestParams(n, 1.0 / n, "standard")


def _keep(step: int, thin: int, total: int) -> bool:
    return step == total or (thin > 0 and step % thin == 0)


def _check_run(law: PaintboxLaw, x0: Coloring, m_steps: int) -> None:
    if law.k != x0.k:
        raise ValidationError("law and initial state must share k")
    if m_steps < 0:
        raise ValidationError(f"need m_steps >= 0, got {m_steps}", field="m_steps")


def run_efcp_matrix(
    law: PaintboxLaw,
    x0: Coloring,
    m_steps: int,
    seed,
    *,
    thin: int = 0,
    record_paintbox: bool = False,
    paintbox_sequence=None,
) -> ChainRun:
    """Whole-step construction: per step draw S from the law, then a random
    partition matrix with the product law given S, and apply it to the state.

    paintbox_sequence injects a fixed sequence of stochastic matrices in
    place of fresh draws (the per-step matrix draw still uses the stream),
    which is how the two constructions are compared at a shared paintbox.
    """
    _check_run(law, x0, m_steps)
    stream = as_stream(seed)
    # separate streams for the paintbox draws and the matrix draws, so that
    # injecting a recorded paintbox sequence replays the same matrices
    gen_s = stream.derive("efcp-matrix-paintbox").generator()
    gen_m = stream.derive("efcp-matrix-moves").generator()
    seq = None
    if paintbox_sequence is not None:
        seq = [s if isinstance(s, StochasticMatrix) else StochasticMatrix(s) for s in paintbox_sequence]
        if len(seq) < m_steps:
            raise ValidationError("paintbox_sequence shorter than m_steps")
    x = x0
    traj = [x0]
    trace: list[StochasticMatrix] = []
    for t in range(1, m_steps + 1):
        s = seq[t - 1] if seq is not None else sample_S(law, gen_s)
        m = sample_M_given_S(s, x0.n, gen_m)
        x = act(m, x)
        if record_paintbox:
            trace.append(s)
        if _keep(t, thin, m_steps):
            traj.append(x)
    return ChainRun(
        law, x0, m_steps, thin, tuple(traj),
        tuple(trace) if record_paintbox else None, None, stream,
    )


def run_efcp_coordinate(
    law: PaintboxLaw,
    x0: Coloring,
    m_steps: int,
    seed,
    *,
    thin: int = 0,
    record_paintbox: bool = False,
    paintbox_sequence=None,
) -> ChainRun:
    """Coordinate construction: per step draw S, then move every site
    independently from its color c to color r with probability S[r, c].
    Given the same paintbox sequence this has the same law as the
    whole-matrix construction."""
    _check_run(law, x0, m_steps)
    stream = as_stream(seed)
    gen_s = stream.derive("efcp-coordinate-paintbox").generator()
    gen_jump = stream.derive("efcp-coordinate-jumps").generator()
    seq = None
    if paintbox_sequence is not None:
        seq = [s if isinstance(s, StochasticMatrix) else StochasticMatrix(s) for s in paintbox_sequence]
        if len(seq) < m_steps:
            raise ValidationError("paintbox_sequence shorter than m_steps")
    k = law.k
    word = np.array(x0.word, dtype=np.int64) - 1
    traj = [x0]
    trace: list[StochasticMatrix] = []
    for t in range(1, m_steps + 1):
        s = seq[t - 1] if seq is not None else sample_S(law, gen_s)
        cum = np.cumsum(s.entries, axis=0)
        cum[-1, :] = 1.0
        u = gen_jump.random(x0.n)
        new = np.empty_like(word)
        for c in range(k):
            mask = word == c
            if mask.any():
                new[mask] = np.searchsorted(cum[:, c], u[mask], side="right")
        word = new
        if record_paintbox:
            trace.append(s)
        if _keep(t, thin, m_steps):
            traj.append(Coloring(x0.n, k, tuple(int(v) + 1 for v in word)))
    return ChainRun(
        law, x0, m_steps, thin, tuple(traj),
        tuple(trace) if record_paintbox else None, None, stream,
    )


def run_induced_simplex(law: PaintboxLaw, y0: SimplexPoint, m_steps: int, seed) -> list[SimplexPoint]:
    """The color-frequency chain Y_t = S_t Y_{t-1} on the simplex."""
    if law.k != y0.k:
        raise ValidationError("law and y0 must share k")
    if m_steps < 0:
        raise ValidationError("need m_steps >= 0", field="m_steps")
    gen = as_stream(seed).derive("induced-simplex").generator()
    out = [y0]
    if m_steps == 0:
        return out
    batch = law.sample_batch(gen, m_steps)
    y = np.array(y0.coords)
    for t in range(m_steps):
        y = batch[t] @ y
        y = np.clip(y, 0.0, None)
        y /= y.sum()
        out.append(SimplexPoint(law.k, tuple(y.tolist())))
    return out


def _uniform_subset(gen: np.random.Generator, n: int, a: int) -> np.ndarray:
    """Uniform a-subset of 0..n-1 by partial Fisher-Yates: O(a) time and
    memory over an implicit identity array."""
    swaps: dict[int, int] = {}
    picked = np.empty(a, dtype=np.int64)
    for t in range(a):
        j = int(gen.integers(t, n))
        vt = swaps.get(t, t)
        vj = swaps.get(j, j)
        swaps[t], swaps[j] = vj, vt
        picked[t] = vj
    return picked


def run_ehrenfest(
    params: EhrenfestParams,
    x0: Coloring,
    m_steps: int,
    seed,
    *,
    thin: int = 0,
    moves=None,
    record_moves: bool = False,
) -> ChainRun:
    """Batch-refresh chain: per step pick a uniform subset A of fixed size and
    one coin I in {1, 2}, and set every site of A to color I.

    moves injects a fixed sequence of (site bitmask, color) pairs, which is
    how two chains are coupled on identical refresh histories; record_moves
    stores the realized pairs in move_trace.
    """
    if x0.k != 2:
        raise ValidationError("batch-refresh chain is defined for k = 2", field="x0")
    if x0.n != params.n:
        raise ValidationError("params.n and x0.n differ")
    if m_steps < 0:
        raise ValidationError("need m_steps >= 0", field="m_steps")
    gen = as_stream(seed).derive("ehrenfest").generator()
    a = params.batch_size
    injected = None
    if moves is not None:
        injected = [(int(m), int(c)) for m, c in moves]
        if len(injected) < m_steps:
            raise ValidationError("moves shorter than m_steps")
    word = np.array(x0.word, dtype=np.int64)
    traj = [x0]
    trace: list[tuple[int, int]] = []
    for t in range(1, m_steps + 1):
        if injected is not None:
            mask, color = injected[t - 1]
            sites = [i for i in range(params.n) if (mask >> i) & 1]
            word[sites] = color
        else:
            subset = _uniform_subset(gen, params.n, a)
            color = int(gen.integers(1, 3))
            word[subset] = color
            mask = 0
            for i in subset:
                mask |= 1 << int(i)
        if record_moves:
            trace.append((mask, color))
        if _keep(t, thin, m_steps):
            traj.append(Coloring(params.n, 2, tuple(int(v) for v in word)))
    return ChainRun(
        None, x0, m_steps, thin, tuple(traj), None,
        tuple(trace) if record_moves else None, as_stream(seed),
    )


def check_group_weights(lambda_weights, k: int) -> np.ndarray:
    """Validate and normalize the increment law for the cyclic group chain.

    The analysis of convergence to the uniform law is stated for weight
    vectors with lambda(j) = lambda(k-j+1) > 0; anything else is refused.
    """
    w = np.array(lambda_weights, dtype=float)
    if w.shape != (k,):
        raise ValidationError("need one weight per color", field="lambda_weights")
    if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
        raise ValidationError("weights must be strictly positive", field="lambda_weights")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValidationError(f"weights sum to {w.sum()}, not 1", field="lambda_weights")
    w /= w.sum()
    if np.max(np.abs(w - w[::-1])) > 1e-12:
        raise TheoryRefusal(
            "group-chain weights must satisfy lambda(j) = lambda(k-j+1) > 0",
            lambda_weights=w.tolist(),
        )
    return w


def run_group_chain(lambda_weights, x0: Coloring, m_steps: int, seed, *, thin: int = 0) -> ChainRun:
    """Cyclic group chain: every step adds an increment coloring with i.i.d.
    lambda-distributed coordinates, acting by coordinatewise addition mod k
    (color arithmetic: y = ((x - 1) + (l - 1)) mod k + 1)."""
    if m_steps < 0:
        raise ValidationError("need m_steps >= 0", field="m_steps")
    k = x0.k
    w = check_group_weights(lambda_weights, k)
    gen = as_stream(seed).derive("group-chain").generator()
    word = np.array(x0.word, dtype=np.int64) - 1
    traj = [x0]
    for t in range(1, m_steps + 1):
        increments = gen.choice(k, size=x0.n, p=w)
        word = (word + increments) % k
        if _keep(t, thin, m_steps):
            traj.append(Coloring(x0.n, k, tuple(int(v) + 1 for v in word)))
    return ChainRun(None, x0, m_steps, thin, tuple(traj), None, None, as_stream(seed))
