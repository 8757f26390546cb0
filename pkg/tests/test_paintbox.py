import math

import numpy as np
import pytest

from cutpaste.errors import ValidationError
from cutpaste.paintbox import (
    Atomic,
    DirichletColumns,
    PermutationMix,
    PointMass,
    SelfSimilar,
    StochasticMatrix,
    law_from_config,
    sample_M_given_S,
    sample_S,
    uniform_matrix,
)
from cutpaste.partitions import identity_matrix, mask_to_sites
from cutpaste.rng import RngStream


def test_stochastic_matrix_normalizes_and_protects():
    s = StochasticMatrix([[0.7, 0.2], [0.3, 0.8]])
    assert s.k == 2
    assert np.allclose(s.entries.sum(axis=0), 1.0, atol=1e-15)
    # near-1 column sums are renormalized, tiny negatives clipped
    s2 = StochasticMatrix([[0.7 + 3e-10, -1e-13], [0.3, 1.0]])
    assert np.all(s2.entries >= 0.0)
    assert np.allclose(s2.entries.sum(axis=0), 1.0, atol=1e-15)
    with pytest.raises(ValidationError):
        StochasticMatrix([[0.5, 0.5]])
    with pytest.raises(ValidationError):
        StochasticMatrix([[0.9, 0.2], [0.3, 0.8]])
    with pytest.raises(ValidationError):
        StochasticMatrix([[1.2, 0.2], [-0.2, 0.8]])
    with pytest.raises(ValidationError):
        Atomic([np.eye(2)], [0.9])


def test_point_mass_sampling_is_exact():
    s = StochasticMatrix([[0.7, 0.2], [0.3, 0.8]])
    law = PointMass(s)
    assert sample_S(law, RngStream(1)) == s
    batch = law.sample_batch(RngStream(2), 5)
    assert batch.shape == (5, 2, 2)
    assert np.array_equal(batch[3], s.entries)


def test_atomic_frequencies_and_reproducibility():
    a = StochasticMatrix([[1.0, 0.0], [0.0, 1.0]])
    b = uniform_matrix(2)
    law = Atomic([a, b], [0.3, 0.7])
    draws = law.sample_batch(RngStream(11), 100_000)
    freq = np.mean([np.array_equal(d, a.entries) for d in draws])
    sigma = math.sqrt(0.3 * 0.7 / 100_000)
    assert abs(freq - 0.3) < 3 * sigma
    again = law.sample_batch(RngStream(11), 100_000)
    assert np.array_equal(draws, again)
    other = law.sample_batch(RngStream(11).derive("replicate", 1), 100)
    assert not np.array_equal(draws[:100], other)


def test_dirichlet_means():
    law = SelfSimilar([1.0, 1.0, 1.0])
    draws = law.sample_batch(RngStream(21), 100_000)
    assert draws.shape == (100_000, 3, 3)
    assert np.allclose(draws.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(draws >= 0.0)
    # Dirichlet(1,1,1) component variance is 1/18
    sigma = math.sqrt((1.0 / 18.0) / 100_000)
    assert np.max(np.abs(draws.mean(axis=0) - 1.0 / 3.0)) < 3 * sigma

    alpha_cols = [[1.0, 2.0, 3.0], [2.0, 2.0, 2.0], [0.5, 1.0, 1.5]]
    law2 = DirichletColumns(alpha_cols)
    draws2 = law2.sample_batch(RngStream(22), 100_000)
    for j, alpha in enumerate(alpha_cols):
        alpha = np.array(alpha)
        a0 = alpha.sum()
        mean = alpha / a0
        var = alpha * (a0 - alpha) / (a0 * a0 * (a0 + 1.0))
        err = np.abs(draws2[:, :, j].mean(axis=0) - mean)
        assert np.all(err < 3 * np.sqrt(var / 100_000) + 1e-12)


def test_permutation_mix_sampling():
    law = PermutationMix(3)
    draws = law.sample_batch(RngStream(31), 60_000)
    assert np.all(draws.sum(axis=1) == 1.0)
    assert np.all(draws.sum(axis=2) == 1.0)
    # all 6 permutations appear with frequency ~ 1/6
    keys = {}
    for d in draws:
        keys[d.argmax(axis=0).tobytes()] = keys.get(d.argmax(axis=0).tobytes(), 0) + 1
    assert len(keys) == 6
    sigma = math.sqrt((1 / 6) * (5 / 6) / 60_000)
    for count in keys.values():
        assert abs(count / 60_000 - 1 / 6) < 4 * sigma

    law2 = PermutationMix(2, perms=[[2, 1]])
    d2 = law2.sample_batch(RngStream(32), 4)
    assert np.array_equal(d2[0], [[0.0, 1.0], [1.0, 0.0]])


def test_rce_decisions():
    assert SelfSimilar([1.0, 1.0, 1.0, 1.0]).is_rce().value is True
    assert SelfSimilar([1.0, 2.0]).is_rce().value is False
    assert DirichletColumns([[2.0, 2.0], [2.0, 2.0]]).is_rce().value is True
    assert DirichletColumns([[1.0, 2.0], [1.0, 2.0]]).is_rce().value is False
    assert DirichletColumns([[1.0, 1.0], [2.0, 2.0]]).is_rce().value is False

    assert PointMass(uniform_matrix(3)).is_rce().value is True
    assert PointMass(np.eye(2)).is_rce().value is False

    ident = np.eye(2)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert Atomic([ident, swap], [0.5, 0.5]).is_rce().value is True
    assert Atomic([ident, swap], [0.3, 0.7]).is_rce().value is False
    # duplicated atoms merge before the closure check
    assert Atomic([ident, swap, ident], [0.25, 0.5, 0.25]).is_rce().value is True

    assert PermutationMix(4).is_rce().value is True
    full = PermutationMix(3).as_atomic()
    assert len(full.atoms) == 6
    assert full.is_rce().value is True
    assert PermutationMix(2, perms=[[1, 2]]).is_rce().value is False

    assert bool(PointMass(np.eye(2)).is_rce()) is False
    assert bool(PermutationMix(4).is_rce()) is True


def test_smooth_density_flags():
    assert SelfSimilar([0.5, 0.5]).has_smooth_density
    assert DirichletColumns([[1.0, 2.0], [3.0, 4.0]]).has_smooth_density
    assert not PointMass(np.eye(2)).has_smooth_density
    assert not Atomic([np.eye(2)], [1.0]).has_smooth_density
    assert not PermutationMix(2).has_smooth_density


def test_config_round_trips():
    laws = [
        PointMass(StochasticMatrix([[0.7, 0.2], [0.3, 0.8]])),
        Atomic([np.eye(2), uniform_matrix(2).entries], [0.4, 0.6]),
        DirichletColumns([[1.0, 2.0], [0.5, 1.5]]),
        SelfSimilar([2.0, 1.0, 0.5]),
        PermutationMix(3),
        PermutationMix(2, perms=[[2, 1], [1, 2]], weights=[0.25, 0.75]),
    ]
    for law in laws:
        cfg = law.config()
        rebuilt = law_from_config(cfg)
        assert type(rebuilt) is type(law)
        assert rebuilt.k == law.k
        assert rebuilt.config() == cfg
        a = law.sample_batch(RngStream(99), 8)
        b = rebuilt.sample_batch(RngStream(99), 8)
        assert np.array_equal(a, b)
    with pytest.raises(ValidationError):
        law_from_config({"kind": "mystery"})
    with pytest.raises(ValidationError):
        law_from_config({"kind": "atomic", "atoms": [np.eye(2).tolist()]})
    with pytest.raises(ValidationError):
        law_from_config([1, 2])


def test_sample_m_identity():
    s = StochasticMatrix(np.eye(3))
    m = sample_M_given_S(s, 9, RngStream(41))
    assert m == identity_matrix(9, 3)


def test_sample_m_binomial_counts():
    s = StochasticMatrix([[0.3, 0.9], [0.7, 0.1]])
    gen = RngStream(42).generator()
    sizes = []
    for _ in range(300):
        m = sample_M_given_S(s, 1000, gen)
        sizes.append(bin(m.cells[0][0]).count("1"))
    mean = np.mean(sizes)
    sigma = math.sqrt(1000 * 0.3 * 0.7 / 300)
    assert abs(mean - 300.0) < 3 * sigma


def test_sample_m_exact_distribution_small():
    # n=2, k=2: all 16 partition matrices, P(M|s) = prod over columns and sites
    s = StochasticMatrix([[0.7, 0.2], [0.3, 0.8]])
    gen = RngStream(43).generator()
    counts = {}
    reps = 100_000
    for _ in range(reps):
        m = sample_M_given_S(s, 2, gen)
        counts[m.cells] = counts.get(m.cells, 0) + 1
    assert len(counts) == 16
    for cells, c in counts.items():
        p = 1.0
        for j in range(2):
            for site in (1, 2):
                row = 0 if site in mask_to_sites(cells[0][j]) else 1
                p *= s.entries[row, j]
        sigma = math.sqrt(p * (1 - p) / reps)
        assert abs(c / reps - p) < 4.5 * sigma


def test_marginal_row_probabilities():
    s = StochasticMatrix([[0.5, 0.1, 0.3], [0.2, 0.6, 0.3], [0.3, 0.3, 0.4]])
    gen = RngStream(44).generator()
    reps = 400
    n = 500
    hits = np.zeros((3, 3))
    for _ in range(reps):
        m = sample_M_given_S(s, n, gen)
        for r in range(3):
            for j in range(3):
                hits[r, j] += bin(m.cells[r][j]).count("1")
    freq = hits / (reps * n)
    sigma = np.sqrt(s.entries * (1 - s.entries) / (reps * n))
    assert np.all(np.abs(freq - s.entries) < 4 * sigma)
