"""Exact distributions on small state spaces.

Enumerates all k^n colorings, builds one-step transition kernels for finitely
supported paintbox laws, and lumps kernels onto unlabeled (color-permutation)
classes. Everything here is dense linear algebra, so callers must keep k^n
within a few thousand states.
"""

from __future__ import annotations

import numpy as np

from .errors import TheoryRefusal, ValidationError
from .paintbox import PaintboxLaw
from .partitions import Coloring


def state_count(n: int, k: int) -> int:
    return k**n


def words(n: int, k: int) -> np.ndarray:
    """All colorings as an (k^n, n) array of 0-based color words, in
    lexicographic order (site 1 is the most significant digit)."""
    if n < 1 or k < 1:
        raise ValidationError("need n >= 1 and k >= 1")
    total = k**n
    if total > 1 << 20:
        raise ValidationError(f"k^n = {total} is too large to enumerate")
    idx = np.arange(total)
    out = np.empty((total, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        out[:, i] = idx % k
        idx //= k
    return out


def enumerate_colorings(n: int, k: int) -> list[Coloring]:
    return [Coloring(n, k, tuple(int(v) + 1 for v in row)) for row in words(n, k)]


def state_index(x: Coloring) -> int:
    """Position of a coloring in the words(n, k) enumeration."""
    i = 0
    for v in x.word:
        i = i * x.k + (v - 1)
    return i


def product_kernel_given_S(s, n: int) -> np.ndarray:
    """K[x, y] = prod_i s[y_i, x_i]: the one-step kernel of n coordinates
    jumping independently through the column of their current color. Both
    chain constructions share this conditional kernel given the paintbox."""
    entries = np.asarray(getattr(s, "entries", s), dtype=float)
    k = entries.shape[0]
    w = words(n, k)
    total = w.shape[0]
    kernel = np.ones((total, total))
    for i in range(n):
        kernel *= entries[w[None, :, i], w[:, None, i]]
    return kernel


def exact_kernel(law: PaintboxLaw, n: int) -> np.ndarray:
    """One-step kernel of the paintbox chain, averaged over the law's atoms.

    Only finitely supported laws can be enumerated; laws with a density are
    refused rather than approximated.
    """
    atoms = law.as_atomic()
    if atoms is None:
        raise TheoryRefusal(
            "exact kernels need a finitely supported paintbox law",
            law=law.config(),
        )
    total = law.k**n
    kernel = np.zeros((total, total))
    for s, wgt in zip(atoms.atoms, atoms.weights):
        kernel += float(wgt) * product_kernel_given_S(s, n)
    return kernel


def kernel_power(kernel: np.ndarray, m: int) -> np.ndarray:
    out = np.eye(kernel.shape[0])
    base = kernel.copy()
    e = m
    while e > 0:
        if e & 1:
            out = out @ base
        base = base @ base
        e >>= 1
    return out


def stationary_distribution(kernel: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Left eigenvector for eigenvalue 1, normalized to a probability vector.

    Raises if the eigenvalue-1 eigenspace is not one-dimensional (the chain
    is not ergodic on the full space).
    """
    vals, vecs = np.linalg.eig(kernel.T)
    close = np.where(np.abs(vals - 1.0) < 1e-8)[0]
    if len(close) != 1:
        raise ValidationError(
            f"kernel has {len(close)} unit eigenvalues; stationary law not unique"
        )
    pi = np.real(vecs[:, close[0]])
    pi = np.clip(pi / pi.sum(), 0.0, None)
    pi /= pi.sum()
    if np.max(np.abs(pi @ kernel - pi)) > tol:
        raise ValidationError("stationary solve failed its residual check")
    return pi


def canonical_relabel(word: tuple[int, ...]) -> tuple[int, ...]:
    """First-occurrence relabeling: color names are replaced by the order in
    which they first appear, which indexes the orbit under color
    permutations (the unlabeled partition)."""
    seen: dict[int, int] = {}
    out = []
    for v in word:
        if v not in seen:
            seen[v] = len(seen) + 1
        out.append(seen[v])
    return tuple(out)


def projection_classes(n: int, k: int) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Map every state index to its orbit index under color permutations.

    Returns (labels, reps) where labels[i] is the orbit of state i and
    reps[c] is the canonical word of orbit c, in order of first appearance.
    """
    w = words(n, k)
    reps: list[tuple[int, ...]] = []
    where: dict[tuple[int, ...], int] = {}
    labels = np.empty(w.shape[0], dtype=np.int64)
    for i, row in enumerate(w):
        rep = canonical_relabel(tuple(int(v) + 1 for v in row))
        if rep not in where:
            where[rep] = len(reps)
            reps.append(rep)
        labels[i] = where[rep]
    return labels, reps


def lumped_kernel(kernel: np.ndarray, labels: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Kernel of the projected chain on orbit classes.

    Sums transition mass into each class and checks the result is constant
    across the source class (the lumpability condition); a violation means
    the law was not exchangeable enough to project and is reported loudly.
    """
    classes = int(labels.max()) + 1
    total = kernel.shape[0]
    mass = np.zeros((total, classes))
    for c in range(classes):
        mass[:, c] = kernel[:, labels == c].sum(axis=1)
    lumped = np.empty((classes, classes))
    for c in range(classes):
        rows = mass[labels == c]
        if np.max(np.abs(rows - rows[0])) > atol:
            raise ValidationError(
                f"kernel is not lumpable over class {c}: projected rows disagree"
            )
        lumped[c] = rows[0]
    return lumped
