"""Products of sampled stochastic matrices and their contraction behavior.

The all-ones vector is a fixed left eigenvector of every column-stochastic
matrix, so products act invariantly on the subspace V orthogonal to it.
Everything here measures that restricted action: singular values of Q_m|V,
the diameter of the image simplex, and growth-rate (Lyapunov) estimates
accumulated through per-step QR re-orthonormalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError
from .paintbox import PaintboxLaw, StochasticMatrix
from .rng import as_stream

_LOGDET_FLOOR = -700.0


@lru_cache(maxsize=None)
def _helmert(k: int) -> np.ndarray:
    h = np.zeros((k, k - 1))
    for j in range(1, k):
        scale = 1.0 / math.sqrt(j * (j + 1))
        h[:j, j - 1] = scale
        h[j, j - 1] = -j * scale
    h.setflags(write=False)
    return h


def helmert_basis(k: int) -> np.ndarray:
    """Orthonormal basis of V (the subspace orthogonal to the all-ones vector),
    as the columns of a k x (k-1) array. Read-only and cached."""
    if k < 1:
        raise ValidationError(f"k={k} must be positive", field="k")
    return _helmert(k)


def _entries(q) -> np.ndarray:
    if isinstance(q, StochasticMatrix):
        return q.entries
    return np.asarray(q, dtype=float)


def restrict_to_V(q) -> np.ndarray:
    """The (k-1) x (k-1) matrix of q acting on V in the Helmert basis."""
    e = _entries(q)
    h = helmert_basis(e.shape[0])
    return h.T @ e @ h


def jacobi_eigenvalues(a, tol: float = 1e-14, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
    returned in descending order."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValidationError("need a square matrix")
    if n == 0:
        return np.zeros(0)
    scale = max(1.0, float(np.abs(a).max()))
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.tril(a, -1) ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
                for r in range(n):
                    if r == p or r == q:
                        continue
                    arp, arq = a[r, p], a[r, q]
                    a[r, p] = a[p, r] = c * arp - s * arq
                    a[r, q] = a[q, r] = s * arp + c * arq
    return np.sort(np.diag(a))[::-1]


def singular_values_on_V(q) -> np.ndarray:
    """Singular values of q restricted to V, descending."""
    b = restrict_to_V(q)
    eigs = jacobi_eigenvalues(b.T @ b)
    return np.sqrt(np.clip(eigs, 0.0, None))


def top_singular_on_V(q) -> float:
    """Largest singular value of q|V; the Lipschitz constant of v -> qv on the
    simplex. Always within 1e-10 of [0, 1] for column-stochastic q."""
    e = _entries(q)
    if e.shape[0] == 1:
        return 0.0
    return float(singular_values_on_V(e)[0])


def log_abs_det_on_V(q) -> float:
    """log |det(q|V)|; -inf when the restriction is singular."""
    b = restrict_to_V(q)
    if b.shape[0] == 0:
        return 0.0
    sign, logdet = np.linalg.slogdet(b)
    if sign == 0.0:
        return float("-inf")
    return float(logdet)


def simplex_diameter(q) -> float:
    """Euclidean diameter of the image of the simplex under v -> qv.

    The image is the convex hull of the columns, so the diameter is attained
    at a pair of column vectors.
    """
    e = _entries(q)
    diff = e[:, :, None] - e[:, None, :]
    return float(np.sqrt((diff**2).sum(axis=0)).max())


@dataclass
class ProductState:
    """Running product Q_m with a QR-maintained orthonormal frame in V.

    log_r_sums[i] accumulates the log of diagonal entry i of each step's
    triangular factor; log_r_sums / m are the per-direction growth-rate
    estimates. degenerate marks a numerically collapsed frame direction
    (its accumulated sum is -inf from then on).
    """

    q: np.ndarray
    m: int
    frame: np.ndarray
    log_r_sums: np.ndarray
    degenerate: bool = False


def new_product_state(k: int) -> ProductState:
    if k < 2:
        raise ValidationError(f"need k >= 2, got {k}", field="k")
    return ProductState(np.eye(k), 0, _helmert(k).copy(), np.zeros(k - 1), False)


_COLLAPSE_EPS = 1e-13


def step(state: ProductState, s) -> ProductState:
    """Advance the running product by one matrix and refresh the frame.

    The QR happens in Helmert coordinates: simple ambient multiplication lets
    float error feed the neutral all-ones direction, which then outgrows the
    contracting frame exponentially, so every step must project back onto V.
    Triangular diagonal entries below 1e-13 count as collapsed directions
    (log increment -inf, degenerate flag).
    """
    e = _entries(s)
    if e.shape[0] != state.q.shape[0]:
        raise ValidationError("dimension mismatch in product step")
    h = _helmert(e.shape[0])
    q = e @ state.q
    qv, r = np.linalg.qr(h.T @ (e @ state.frame))
    d = np.diag(r)
    qv = qv * np.where(d < 0.0, -1.0, 1.0)
    absd = np.abs(d)
    collapsed = absd < _COLLAPSE_EPS
    with np.errstate(divide="ignore"):
        logs = np.where(collapsed, -np.inf, np.log(np.maximum(absd, 1e-300)))
    return ProductState(
        q,
        state.m + 1,
        h @ qv,
        state.log_r_sums + logs,
        state.degenerate or bool(collapsed.any()),
    )


@dataclass(frozen=True)
class LyapunovEstimate:
    lambda1: float
    spectrum: tuple[float, ...]
    kappa_hat: float
    std_error: float
    m: int
    replicates: int
    flags: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "spectrum": list(self.spectrum),
            "kappa_hat": self.kappa_hat,
            "std_error": self.std_error,
            "m": self.m,
            "replicates": self.replicates,
            "flags": list(self.flags),
        }


def estimate_lyapunov(law: PaintboxLaw, m: int, replicates: int, seed) -> LyapunovEstimate:
    """Growth rates of Q_m|V estimated by QR accumulation.

    Per replicate, runs m steps and takes log_r_sums / m as the per-direction
    exponent vector; lambda1 is exp of the mean top exponent across replicates
    and std_error its sampling error on the lambda1 scale. kappa_hat is the
    mean per-step log |det(S|V)|, floored at -700 against underflow (flagged
    when the floor is hit). A collapsed direction yields lambda1 = 0 and the
    super_exponential_collapse flag.
    """
    if law.k < 2:
        raise ValidationError("growth rates need k >= 2", field="k")
    if m < 1:
        raise ValidationError(f"need m >= 1, got {m}", field="m")
    if replicates < 1:
        raise ValidationError("need at least one replicate", field="replicates")
    base = as_stream(seed)
    h = helmert_basis(law.k)
    exponents = np.zeros((replicates, law.k - 1))
    kappa_sum = 0.0
    flags: set[str] = set()
    for rep in range(replicates):
        gen = base.derive("lyapunov-replicate", rep).generator()
        batch = law.sample_batch(gen, m)
        state = new_product_state(law.k)
        for t in range(m):
            state = step(state, batch[t])
            restricted = h.T @ batch[t] @ h
            sign, logdet = np.linalg.slogdet(restricted)
            if sign == 0.0 or logdet < _LOGDET_FLOOR:
                logdet = _LOGDET_FLOOR
                flags.add("logdet_floored")
            kappa_sum += logdet
        if state.degenerate:
            flags.add("super_exponential_collapse")
        exponents[rep] = state.log_r_sums / m
    kappa_hat = kappa_sum / (replicates * m)
    mean_exp = exponents.mean(axis=0)
    if "super_exponential_collapse" in flags:
        lambda1 = 0.0
        std_error = 0.0
    else:
        lambda1 = float(np.exp(mean_exp.max()))
        per_rep_lambda1 = np.exp(exponents.max(axis=1))
        if replicates > 1:
            std_error = float(per_rep_lambda1.std(ddof=1) / math.sqrt(replicates))
        else:
            std_error = 0.0
    spectrum = tuple(float(v) for v in np.sort(np.exp(mean_exp))[::-1])
    return LyapunovEstimate(
        lambda1=lambda1,
        spectrum=spectrum,
        kappa_hat=float(kappa_hat),
        std_error=std_error,
        m=m,
        replicates=replicates,
        flags=tuple(sorted(flags)),
    )


def lyapunov_trace(law: PaintboxLaw, m: int, seed) -> np.ndarray:
    """Running per-direction exponent estimates along one path: row t-1 holds
    log_r_sums / t after t steps. For convergence plots."""
    if law.k < 2:
        raise ValidationError("growth rates need k >= 2", field="k")
    gen = as_stream(seed).derive("lyapunov-replicate", 0).generator()
    batch = law.sample_batch(gen, m)
    state = new_product_state(law.k)
    out = np.zeros((m, law.k - 1))
    for t in range(m):
        state = step(state, batch[t])
        out[t] = state.log_r_sums / (t + 1)
    return out


@dataclass(frozen=True)
class CollapseReport:
    """Sampling evidence for eventual collapse of the image simplex.

    verdict is "yes" when some sampled product either contracted V (top
    singular value below 1 - delta) or had all entries positive; sampling
    cannot prove the negative, so the alternative verdict is "undetermined".
    """

    verdict: str
    first_contraction_m: int | None
    first_positivity_m: int | None
    p_contract: tuple[float, ...]
    p_positive: tuple[float, ...]
    delta: float
    m_max: int
    replicates: int

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "first_contraction_m": self.first_contraction_m,
            "first_positivity_m": self.first_positivity_m,
            "p_contract": list(self.p_contract),
            "p_positive": list(self.p_positive),
            "delta": self.delta,
            "m_max": self.m_max,
            "replicates": self.replicates,
        }


def collapse_diagnostic(
    law: PaintboxLaw,
    m_max: int = 32,
    replicates: int = 200,
    seed=0,
    delta: float = 1e-6,
) -> CollapseReport:
    """Estimate P(top singular value of Q_m|V < 1 - delta) and P(all entries of
    Q_m positive) for m = 1..m_max; either event occurring certifies collapse."""
    if m_max < 1 or replicates < 1:
        raise ValidationError("m_max and replicates must be positive")
    base = as_stream(seed)
    k = law.k
    contract = np.zeros(m_max)
    positive = np.zeros(m_max)
    for rep in range(replicates):
        gen = base.derive("collapse-replicate", rep).generator()
        batch = law.sample_batch(gen, m_max)
        q = np.eye(k)
        for t in range(m_max):
            q = batch[t] @ q
            if top_singular_on_V(q) < 1.0 - delta:
                contract[t] += 1
            if np.all(q > 0.0):
                positive[t] += 1
    contract /= replicates
    positive /= replicates
    first_c = int(np.argmax(contract > 0)) + 1 if np.any(contract > 0) else None
    first_p = int(np.argmax(positive > 0)) + 1 if np.any(positive > 0) else None
    verdict = "yes" if (first_c is not None or first_p is not None) else "undetermined"
    return CollapseReport(
        verdict=verdict,
        first_contraction_m=first_c,
        first_positivity_m=first_p,
        p_contract=tuple(contract.tolist()),
        p_positive=tuple(positive.tolist()),
        delta=delta,
        m_max=m_max,
        replicates=replicates,
    )
