"""Paintbox laws: distributions over k x k column-stochastic matrices.

One chain step is directed by a sampled matrix S: a site currently colored c
moves to color r with probability S[r-1, c-1], independently across sites
given S. sample_M_given_S turns a matrix draw into a random partition matrix
with exactly that product law, column by column.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .partitions import MAX_COLORS, PartitionMatrix
from .rng import as_stream

_COLSUM_TOL = 1e-9
_WEIGHT_TOL = 1e-9
_NEG_CLIP = -1e-12
_ATOM_TOL = 1e-12


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return as_stream(rng).generator()


class StochasticMatrix:
    """A column-stochastic k x k matrix. entries[r, c] = P(next color r+1 | color c+1).

    Columns must be probability vectors: entries nonnegative (values above
    -1e-12 are clipped to zero) and column sums within 1e-9 of 1, after which
    each column is renormalized to sum to 1 exactly up to float roundoff.
    The entries array is read-only.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError("entries must form a square matrix", field="entries")
        k = arr.shape[0]
        if not 1 <= k <= MAX_COLORS:
            raise ValidationError(f"k={k} outside 1..{MAX_COLORS}", field="entries")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("entries must be finite", field="entries")
        if arr.min() < _NEG_CLIP:
            raise ValidationError("negative entry in stochastic matrix", field="entries")
        arr = np.clip(arr, 0.0, None)
        sums = arr.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > _COLSUM_TOL):
            raise ValidationError(
                f"column sums {sums.tolist()} not within {_COLSUM_TOL} of 1",
                field="entries",
            )
        arr /= sums
        arr.setflags(write=False)
        self.entries = arr

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]

    def to_lists(self) -> list[list[float]]:
        return self.entries.tolist()

    def __eq__(self, other):
        return isinstance(other, StochasticMatrix) and np.array_equal(
            self.entries, other.entries
        )

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"StochasticMatrix({self.entries.tolist()!r})"


def uniform_matrix(k: int) -> StochasticMatrix:
    return StochasticMatrix(np.full((k, k), 1.0 / k))


@dataclass(frozen=True)
class RceResult:
    """Outcome of the row-column exchangeability test.

    value is True/False when decided structurally, None when the law kind
    admits no structural test. Truthiness means "certified exchangeable".
    """

    value: bool | None
    reason: str

    def __bool__(self) -> bool:
        return self.value is True


class PaintboxLaw:
    """Base class for distributions over column-stochastic matrices."""

    kind = "abstract"

    @property
    def k(self) -> int:
        raise NotImplementedError

    def sample(self, rng) -> StochasticMatrix:
        return StochasticMatrix(self.sample_batch(rng, 1)[0])

    def sample_batch(self, rng, size: int) -> np.ndarray:
        """Draw `size` matrices as a (size, k, k) array."""
        raise NotImplementedError

    def is_rce(self) -> RceResult:
        """Whether the law is invariant under row and column permutations."""
        return RceResult(None, f"no structural exchangeability test for kind {self.kind}")

    @property
    def has_smooth_density(self) -> bool:
        """True when the law is absolutely continuous on the product of column
        simplices with a density of class L^p for some p > 1. The Dirichlet
        families qualify (any strictly positive parameters); discrete laws do not.
        """
        return False

    def as_atomic(self) -> "Atomic | None":
        """A finitely supported representation of this law, if one exists."""
        return None

    def config(self) -> dict:
        raise NotImplementedError


def _merge_atoms(mats: list[np.ndarray], weights: list[float]):
    reps: list[np.ndarray] = []
    wts: list[float] = []
    for a, w in zip(mats, weights):
        for i, r in enumerate(reps):
            if np.max(np.abs(a - r)) <= _ATOM_TOL:
                wts[i] += w
                break
        else:
            reps.append(a)
            wts.append(w)
    return reps, wts


def _matches_multiset(transformed, reps, wts) -> bool:
    used = [False] * len(reps)
    for a, w in transformed:
        for i, (r, wr) in enumerate(zip(reps, wts)):
            if not used[i] and np.max(np.abs(a - r)) <= _ATOM_TOL and abs(w - wr) <= _WEIGHT_TOL:
                used[i] = True
                break
        else:
            return False
    return all(used)


def _atomic_rce(mats, weights, k) -> RceResult:
    """Closure of a weighted atom set under row/column swaps decides RCE.

    Adjacent transpositions generate the symmetric group on each side, so the
    law is permutation-invariant iff the merged weighted atom multiset is fixed
    by every adjacent row swap and every adjacent column swap.
    """
    reps, wts = _merge_atoms(mats, weights)
    for t in range(k - 1):
        rows = [(a[_swap_index(k, t), :], w) for a, w in zip(reps, wts)]
        if not _matches_multiset(rows, reps, wts):
            return RceResult(False, f"atom set not closed under swapping rows {t + 1},{t + 2}")
        cols = [(a[:, _swap_index(k, t)], w) for a, w in zip(reps, wts)]
        if not _matches_multiset(cols, reps, wts):
            return RceResult(False, f"atom set not closed under swapping columns {t + 1},{t + 2}")
    return RceResult(True, "atom set closed under row and column permutations with matched weights")


def _swap_index(k: int, t: int) -> np.ndarray:
    idx = np.arange(k)
    idx[t], idx[t + 1] = idx[t + 1], idx[t]
    return idx


class PointMass(PaintboxLaw):
    """The degenerate law concentrated at one matrix."""

    kind = "point_mass"

    def __init__(self, matrix):
        if not isinstance(matrix, StochasticMatrix):
            matrix = StochasticMatrix(matrix)
        self.matrix = matrix

    @property
    def k(self) -> int:
        return self.matrix.k

    def sample_batch(self, rng, size):
        return np.tile(self.matrix.entries, (size, 1, 1))

    def is_rce(self):
        if np.max(np.abs(self.matrix.entries - 1.0 / self.k)) <= _ATOM_TOL:
            return RceResult(True, "point mass at the uniform-column matrix")
        return RceResult(False, "a point mass is permutation-invariant only at the uniform-column matrix")

    def as_atomic(self):
        return Atomic([self.matrix], [1.0])

    def config(self):
        return {"kind": self.kind, "matrix": self.matrix.to_lists()}


class Atomic(PaintboxLaw):
    """A finite mixture of point masses with the given weights."""

    kind = "atomic"

    def __init__(self, atoms, weights):
        atoms = tuple(
            a if isinstance(a, StochasticMatrix) else StochasticMatrix(a) for a in atoms
        )
        if not atoms:
            raise ValidationError("need at least one atom", field="atoms")
        k = atoms[0].k
        if any(a.k != k for a in atoms):
            raise ValidationError("atoms must share one k", field="atoms")
        w = np.array(weights, dtype=float)
        if w.shape != (len(atoms),):
            raise ValidationError("need one weight per atom", field="weights")
        if np.any(w < -_ATOM_TOL) or not np.all(np.isfinite(w)):
            raise ValidationError("weights must be nonnegative", field="weights")
        w = np.clip(w, 0.0, None)
        total = w.sum()
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValidationError(f"weights sum to {total}, not 1", field="weights")
        w /= total
        w.setflags(write=False)
        self.atoms = atoms
        self.weights = w
        self._stack = np.stack([a.entries for a in atoms])
        self._stack.setflags(write=False)

    @property
    def k(self) -> int:
        return self.atoms[0].k

    def sample_batch(self, rng, size):
        gen = _as_generator(rng)
        idx = gen.choice(len(self.atoms), size=size, p=self.weights)
        return self._stack[idx]

    def is_rce(self):
        return _atomic_rce(list(self._stack), list(self.weights), self.k)

    def as_atomic(self):
        return self

    def config(self):
        return {
            "kind": self.kind,
            "atoms": [a.to_lists() for a in self.atoms],
            "weights": self.weights.tolist(),
        }


class PermutationMix(PaintboxLaw):
    """A mixture of permutation matrices.

    perms lists permutations as 1-based image vectors (entry j is the color
    that color j+1 maps to); perms=None means uniform over all k! permutations.
    """

    kind = "permutation_mix"

    def __init__(self, k, perms=None, weights=None):
        if not 1 <= k <= MAX_COLORS:
            raise ValidationError(f"k={k} outside 1..{MAX_COLORS}", field="k")
        self._k = k
        if perms is None:
            if weights is not None:
                raise ValidationError("weights require an explicit perm list", field="weights")
            self.perms = None
            self.weights = None
            return
        cleaned = []
        for p in perms:
            p = tuple(int(c) - 1 for c in p)
            if sorted(p) != list(range(k)):
                raise ValidationError(f"{p} is not a permutation of 1..{k}", field="perms")
            cleaned.append(p)
        if not cleaned:
            raise ValidationError("need at least one permutation", field="perms")
        if weights is None:
            w = np.full(len(cleaned), 1.0 / len(cleaned))
        else:
            w = np.array(weights, dtype=float)
            if w.shape != (len(cleaned),):
                raise ValidationError("need one weight per permutation", field="weights")
            if np.any(w < -_ATOM_TOL):
                raise ValidationError("weights must be nonnegative", field="weights")
            w = np.clip(w, 0.0, None)
            if abs(w.sum() - 1.0) > _WEIGHT_TOL:
                raise ValidationError(f"weights sum to {w.sum()}, not 1", field="weights")
            w /= w.sum()
        w.setflags(write=False)
        self.perms = tuple(cleaned)
        self.weights = w

    @property
    def k(self) -> int:
        return self._k

    def _perm_matrix(self, p) -> np.ndarray:
        m = np.zeros((self._k, self._k))
        m[np.array(p), np.arange(self._k)] = 1.0
        return m

    def sample_batch(self, rng, size):
        gen = _as_generator(rng)
        k = self._k
        out = np.zeros((size, k, k))
        if self.perms is None:
            # argsort of i.i.d. uniforms is a uniform random permutation
            order = np.argsort(gen.random((size, k)), axis=1)
        else:
            idx = gen.choice(len(self.perms), size=size, p=self.weights)
            order = np.array(self.perms)[idx]
        out[np.arange(size)[:, None], order, np.arange(k)[None, :]] = 1.0
        return out

    def is_rce(self):
        if self.perms is None:
            return RceResult(True, "uniform over all permutation matrices")
        k = self._k
        merged: dict[tuple, float] = {}
        for p, w in zip(self.perms, self.weights):
            merged[p] = merged.get(p, 0.0) + float(w)

        def invariant(transform):
            image = {}
            for p, w in merged.items():
                q = transform(p)
                image[q] = image.get(q, 0.0) + w
            return set(image) == set(merged) and all(
                abs(image[p] - merged[p]) <= _WEIGHT_TOL for p in merged
            )

        for t in range(k - 1):
            swap = list(range(k))
            swap[t], swap[t + 1] = swap[t + 1], swap[t]
            if not invariant(lambda p: tuple(swap[c] for c in p)):
                return RceResult(False, f"permutation set not closed under swapping rows {t + 1},{t + 2}")
            if not invariant(lambda p: tuple(p[swap[j]] for j in range(k))):
                return RceResult(False, f"permutation set not closed under swapping columns {t + 1},{t + 2}")
        return RceResult(True, "permutation set closed under row and column permutations with matched weights")

    def as_atomic(self):
        if self.perms is not None:
            return Atomic([self._perm_matrix(p) for p in self.perms], self.weights)
        if math.factorial(self._k) > 720:
            return None
        perms = list(itertools.permutations(range(self._k)))
        w = [1.0 / len(perms)] * len(perms)
        return Atomic([self._perm_matrix(p) for p in perms], w)

    def config(self):
        cfg: dict = {"kind": self.kind, "k": self._k}
        if self.perms is not None:
            cfg["perms"] = [[c + 1 for c in p] for p in self.perms]
            cfg["weights"] = self.weights.tolist()
        return cfg


class DirichletColumns(PaintboxLaw):
    """Independent Dirichlet columns; column j has parameter vector alpha[:, j].

    Sampling normalizes independent Gamma draws per column, which is the
    standard exact construction.
    """

    kind = "dirichlet_columns"

    def __init__(self, alpha_columns):
        arr = np.array(alpha_columns, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(
                "need one length-k parameter vector per column", field="alpha_columns"
            )
        # config lists column vectors; internally alpha[r, c] aligns with entries
        arr = arr.T.copy()
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValidationError("Dirichlet parameters must be strictly positive")
        k = arr.shape[0]
        if not 1 <= k <= MAX_COLORS:
            raise ValidationError(f"k={k} outside 1..{MAX_COLORS}")
        arr.setflags(write=False)
        self.alpha = arr

    @property
    def k(self) -> int:
        return self.alpha.shape[0]

    def sample_batch(self, rng, size):
        gen = _as_generator(rng)
        out = gen.standard_gamma(self.alpha, size=(size, self.k, self.k))
        sums = out.sum(axis=1, keepdims=True)
        # a column of exact zeros is astronomically rare (tiny parameters plus
        # float underflow); redraw those samples so columns stay stochastic
        while np.any(sums == 0.0):
            bad = np.unique(np.nonzero(sums == 0.0)[0])
            out[bad] = gen.standard_gamma(self.alpha, size=(len(bad), self.k, self.k))
            sums = out.sum(axis=1, keepdims=True)
        return out / sums

    def is_rce(self):
        first = self.alpha[:, :1]
        if np.max(np.abs(self.alpha - first)) > _ATOM_TOL:
            return RceResult(False, "columns have distinct Dirichlet parameters")
        if np.max(np.abs(first - first[0])) > _ATOM_TOL:
            return RceResult(False, "shared Dirichlet parameter vector is not symmetric")
        return RceResult(True, "i.i.d. columns with a symmetric Dirichlet parameter")

    @property
    def has_smooth_density(self) -> bool:
        return True

    def config(self):
        return {"kind": self.kind, "alpha_columns": self.alpha.T.tolist()}


class SelfSimilar(DirichletColumns):
    """Columns i.i.d. Dirichlet with one shared parameter vector nu."""

    kind = "self_similar"

    def __init__(self, nu):
        nu = np.atleast_1d(np.array(nu, dtype=float))
        if nu.ndim != 1:
            raise ValidationError("nu must be a vector", field="nu")
        super().__init__(np.tile(nu, (len(nu), 1)))
        self.nu = self.alpha[:, 0]

    def is_rce(self):
        if np.max(np.abs(self.nu - self.nu[0])) > _ATOM_TOL:
            return RceResult(False, "nu is not symmetric")
        return RceResult(True, "i.i.d. columns with a symmetric Dirichlet parameter")

    def config(self):
        return {"kind": self.kind, "nu": self.nu.tolist()}


def law_from_config(obj) -> PaintboxLaw:
    """Build a PaintboxLaw from its JSON-style config dict."""
    if not isinstance(obj, dict):
        raise ValidationError("law config must be a mapping")
    kind = obj.get("kind")
    try:
        if kind == PointMass.kind:
            return PointMass(obj["matrix"])
        if kind == Atomic.kind:
            return Atomic(obj["atoms"], obj["weights"])
        if kind == PermutationMix.kind:
            return PermutationMix(int(obj["k"]), obj.get("perms"), obj.get("weights"))
        if kind == DirichletColumns.kind:
            return DirichletColumns(obj["alpha_columns"])
        if kind == SelfSimilar.kind:
            return SelfSimilar(obj["nu"])
    except KeyError as e:
        raise ValidationError(f"law config missing field {e.args[0]!r}", field=kind) from None
    raise ValidationError(f"unknown law kind {kind!r}", field="kind")


def sample_S(law: PaintboxLaw, rng) -> StochasticMatrix:
    """One draw from the law. rng may be an RngStream, a seed, or a Generator."""
    return law.sample(_as_generator(rng))


def _bits_to_mask(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def sample_M_given_S(s: StochasticMatrix, n: int, rng) -> PartitionMatrix:
    """Random partition matrix given s: in column j, each site lands in row r
    with probability s[r, j], independently over sites and columns."""
    if n < 1:
        raise ValidationError(f"need at least one site, got n={n}", field="n")
    gen = _as_generator(rng)
    k = s.k
    cum = np.cumsum(s.entries, axis=0)
    cum[-1, :] = 1.0
    u = gen.random((n, k))
    cells = []
    for r in range(k):
        cells.append([0] * k)
    for j in range(k):
        rows = np.searchsorted(cum[:, j], u[:, j], side="right")
        for r in range(k):
            cells[r][j] = _bits_to_mask(rows == r)
    return PartitionMatrix(n, k, tuple(tuple(row) for row in cells))
