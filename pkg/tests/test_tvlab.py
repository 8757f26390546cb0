import itertools
import math

import numpy as np
import pytest

from _oracles import (
    ehrenfest_exhaustive_kernel,
    ehrenfest_exhaustive_tv,
    product_step_kernel,
    tv_distance,
    words_array,
)
from cutpaste.chains import EhrenfestParams, standard_ehrenfest
from cutpaste.errors import BudgetRefusal, TheoryRefusal, ValidationError
from cutpaste.paintbox import (
    Atomic,
    DirichletColumns,
    PermutationMix,
    PointMass,
    SelfSimilar,
    StochasticMatrix,
)
from cutpaste.partitions import Coloring
from cutpaste.tvlab import (
    MixingProfile,
    ProductMultinomialLaw,
    TVEstimate,
    coupling_upper,
    cutoff_experiment,
    ehrenfest_bounds,
    ehrenfest_mixing_time,
    ehrenfest_tv_exact,
    ehrenfest_tv_profile,
    loglog_schedule,
    make_constant_pair,
    make_test_pair,
    mixing_time,
    tv_exact_atomic,
    tv_exact_conditional,
    tv_exact_product_multinomial,
    tv_likelihood_bound,
    tv_lower_mc,
    tv_upper_mc,
)


def random_stochastic(rng, k):
    arr = rng.random((k, k)) + 1e-3
    return arr / arr.sum(axis=0)


def configuration_tv(blocks_p, blocks_q):
    """TV between two product laws over colorings by summing all k^n words.

    blocks_*: list of (size, cell distribution). Site colors are drawn
    independently, block by block, so each word's probability is a plain
    product. No count statistic anywhere: this is the full configuration
    space.
    """
    k = len(blocks_p[0][1])
    n = sum(size for size, _ in blocks_p)
    words = words_array(n, k)
    site_p = np.concatenate([[list(s)] * size for size, s in blocks_p if size], axis=0)
    site_q = np.concatenate([[list(s)] * size for size, s in blocks_q if size], axis=0)
    mass_p = np.prod(site_p[np.arange(n)[None, :], words], axis=1)
    mass_q = np.prod(site_q[np.arange(n)[None, :], words], axis=1)
    return tv_distance(mass_p, mass_q)


# ---------------------------------------------------------------- exact TV


def test_tv_estimate_validation():
    est = TVEstimate(0.5, "upper_bound", 0.01, 100)
    assert est.to_json() == {
        "value": 0.5,
        "kind": "upper_bound",
        "mc_std_error": 0.01,
        "replicates": 100,
    }
    assert TVEstimate(1.0 + 5e-10, "exact").value == 1.0
    assert TVEstimate(-5e-10, "exact").value == 0.0
    with pytest.raises(ValidationError):
        TVEstimate(0.5, "approximate")
    with pytest.raises(ValidationError):
        TVEstimate(1.2, "exact")
    with pytest.raises(ValidationError):
        TVEstimate(0.5, "exact", mc_std_error=0.1)
    with pytest.raises(ValidationError):
        TVEstimate(0.5, "upper_bound", mc_std_error=-0.1)


def test_product_multinomial_law_validation():
    law = ProductMultinomialLaw(((3, (0.2, 0.8)), (2, (0.5, 0.5))))
    assert law.k == 2
    assert law.n == 5
    with pytest.raises(ValidationError):
        ProductMultinomialLaw(())
    with pytest.raises(ValidationError):
        ProductMultinomialLaw(((2, (0.2, 0.9)),))
    with pytest.raises(ValidationError):
        ProductMultinomialLaw(((-1, (0.5, 0.5)),))
    with pytest.raises(ValidationError):
        ProductMultinomialLaw(((2, (0.5, 0.5)), (1, (0.2, 0.3, 0.5))))


def test_tv_exact_identical_laws_is_zero():
    law = ProductMultinomialLaw(((4, (0.1, 0.6, 0.3)), (2, (0.4, 0.4, 0.2))))
    est = tv_exact_product_multinomial(law, law)
    assert est.kind == "exact"
    assert est.value == 0.0


def test_tv_exact_bernoulli_single_site():
    for p1, q1 in [(0.3, 0.8), (0.5, 0.5), (0.0, 1.0), (0.25, 0.3)]:
        p = ProductMultinomialLaw(((1, (p1, 1 - p1)),))
        q = ProductMultinomialLaw(((1, (q1, 1 - q1)),))
        assert abs(tv_exact_product_multinomial(p, q).value - abs(p1 - q1)) < 1e-12


def test_tv_exact_two_blocks_vs_configuration_oracle():
    blocks_p = [(3, (0.2, 0.8)), (2, (0.7, 0.3))]
    blocks_q = [(3, (0.45, 0.55)), (2, (0.7, 0.3))]
    got = tv_exact_product_multinomial(
        ProductMultinomialLaw(tuple(blocks_p)), ProductMultinomialLaw(tuple(blocks_q))
    )
    assert abs(got.value - configuration_tv(blocks_p, blocks_q)) < 1e-12


def test_tv_exact_structure_mismatch_rejected():
    p = ProductMultinomialLaw(((2, (0.5, 0.5)),))
    with pytest.raises(ValidationError):
        tv_exact_product_multinomial(p, ProductMultinomialLaw(((3, (0.5, 0.5)),)))
    with pytest.raises(ValidationError):
        tv_exact_product_multinomial(
            p, ProductMultinomialLaw(((2, (0.5, 0.5)), (1, (1.0, 0.0))))
        )


def test_count_statistic_matches_configuration_space():
    # sufficiency: the per-block count vectors lose nothing for this pair
    rng = np.random.default_rng(20)
    for _ in range(30):
        k = int(rng.integers(2, 4))
        sizes = []
        while sum(sizes) < 2 or k ** sum(sizes) > 4096:
            sizes = list(rng.integers(1, 5, size=rng.integers(1, 4)))
            if k ** sum(sizes) > 4096:
                sizes = []
        blocks_p = [(s, tuple(rng.dirichlet(np.ones(k)))) for s in sizes]
        blocks_q = [(s, tuple(rng.dirichlet(np.ones(k)))) for s in sizes]
        got = tv_exact_product_multinomial(
            ProductMultinomialLaw(tuple(blocks_p)), ProductMultinomialLaw(tuple(blocks_q))
        ).value
        assert abs(got - configuration_tv(blocks_p, blocks_q)) < 1e-10


def test_tv_axioms_on_exact_values():
    rng = np.random.default_rng(21)
    make = lambda: ProductMultinomialLaw(
        ((3, tuple(rng.dirichlet([1, 1]))), (2, tuple(rng.dirichlet([1, 1]))))
    )
    for _ in range(25):
        a, b, c = make(), make(), make()
        d_ab = tv_exact_product_multinomial(a, b).value
        d_ba = tv_exact_product_multinomial(b, a).value
        d_bc = tv_exact_product_multinomial(b, c).value
        d_ac = tv_exact_product_multinomial(a, c).value
        assert abs(d_ab - d_ba) < 1e-12
        assert 0.0 <= d_ab <= 1.0
        assert d_ac <= d_ab + d_bc + 1e-12


def test_tv_exact_budget_refusal():
    p = ProductMultinomialLaw(((30, (0.3, 0.3, 0.2, 0.2)),))
    q = ProductMultinomialLaw(((30, (0.25, 0.25, 0.25, 0.25)),))
    with pytest.raises(BudgetRefusal) as exc:
        tv_exact_product_multinomial(p, q, budget=100)
    assert exc.value.details["required"] > 100


# ----------------------------------------------------- conditional / atomic


def test_tv_conditional_equal_states_zero():
    qm = StochasticMatrix([[0.7, 0.2], [0.3, 0.8]])
    x = Coloring(4, 2, (1, 2, 2, 1))
    assert tv_exact_conditional(qm, x, x).value == 0.0


def test_tv_conditional_rank_one_matrix_zero():
    rank1 = StochasticMatrix([[0.3, 0.3], [0.7, 0.7]])
    rng = np.random.default_rng(3)
    for _ in range(10):
        w1 = tuple(int(c) for c in rng.integers(1, 3, size=5))
        w2 = tuple(int(c) for c in rng.integers(1, 3, size=5))
        est = tv_exact_conditional(rank1, Coloring(5, 2, w1), Coloring(5, 2, w2))
        assert est.value < 1e-12


def test_tv_conditional_matches_exhaustive_enumeration():
    rng = np.random.default_rng(4)
    for n, k in [(4, 2), (5, 2), (4, 3)]:
        kernels = {}
        for _ in range(8):
            s = random_stochastic(rng, k)
            key = s.tobytes()
            if key not in kernels:
                kernels[key] = product_step_kernel(s, n)
            kernel = kernels[key]
            w1 = tuple(int(c) for c in rng.integers(1, k + 1, size=n))
            w2 = tuple(int(c) for c in rng.integers(1, k + 1, size=n))
            x1, x2 = Coloring(n, k, w1), Coloring(n, k, w2)
            got = tv_exact_conditional(StochasticMatrix(s), x1, x2).value
            place = k ** np.arange(n - 1, -1, -1)
            i1 = int(((np.array(w1) - 1) * place).sum())
            i2 = int(((np.array(w2) - 1) * place).sum())
            assert abs(got - tv_distance(kernel[i1], kernel[i2])) < 1e-10


def test_tv_atomic_m0_is_indicator():
    law = Atomic([np.eye(2), [[0.5, 0.5], [0.5, 0.5]]], [0.5, 0.5])
    x = Coloring.constant(4, 2, 1)
    y = Coloring.constant(4, 2, 2)
    assert tv_exact_atomic(law, x, y, 0).value == 1.0
    assert tv_exact_atomic(law, x, x, 0).value == 0.0


def test_tv_atomic_single_atom_equals_conditional_power():
    s = np.array([[0.8, 0.3], [0.2, 0.7]])
    law = Atomic([s], [1.0])
    x = Coloring(4, 2, (1, 1, 2, 2))
    y = Coloring(4, 2, (1, 2, 1, 2))
    for m in range(1, 5):
        got = tv_exact_atomic(law, x, y, m).value
        want = tv_exact_conditional(np.linalg.matrix_power(s, m), x, y).value
        assert abs(got - want) < 1e-12


def test_tv_atomic_matches_full_state_brute_force():
    atoms = [
        np.array([[0.8, 0.3], [0.2, 0.7]]),
        np.array([[0.4, 0.9], [0.6, 0.1]]),
    ]
    weights = [0.3, 0.7]
    law = Atomic(atoms, weights)
    n, k = 4, 2
    one_step = weights[0] * product_step_kernel(atoms[0], n) + weights[1] * product_step_kernel(atoms[1], n)
    x = Coloring(n, k, (1, 1, 1, 2))
    y = Coloring(n, k, (2, 1, 2, 2))
    place = k ** np.arange(n - 1, -1, -1)
    ix = int(((np.array(x.word) - 1) * place).sum())
    iy = int(((np.array(y.word) - 1) * place).sum())
    kernel = np.eye(k**n)
    for m in range(1, 4):
        kernel = kernel @ one_step
        got = tv_exact_atomic(law, x, y, m).value
        assert abs(got - tv_distance(kernel[ix], kernel[iy])) < 1e-12


def test_tv_atomic_gates():
    law = Atomic([np.eye(2), [[0.5, 0.5], [0.5, 0.5]]], [0.5, 0.5])
    x, y = make_constant_pair(6, 2)
    with pytest.raises(BudgetRefusal) as exc:
        tv_exact_atomic(law, x, y, 5, budget=10)
    assert exc.value.details["required"] > 10
    with pytest.raises(TheoryRefusal):
        tv_exact_atomic(DirichletColumns(np.ones((2, 2))), x, y, 2)
    with pytest.raises(ValidationError):
        tv_exact_atomic(law, x, y, -1)


# ------------------------------------------------------------ MC estimators


def test_tv_upper_equal_states_is_exact_zero():
    law = SelfSimilar([1.0, 1.0])
    x = Coloring(4, 2, (1, 2, 1, 2))
    est = tv_upper_mc(law, x, x, m=3, replicates=50, seed=1)
    assert est.value == 0.0
    assert est.mc_std_error == 0.0
    assert est.kind == "upper_bound"


def test_tv_upper_point_mass_equals_exact():
    s = np.array([[0.85, 0.25], [0.15, 0.75]])
    law = PointMass(s)
    x, y = make_constant_pair(10, 2)
    for m in (1, 3, 6):
        up = tv_upper_mc(law, x, y, m, replicates=7, seed=3)
        ex = tv_exact_atomic(law, x, y, m)
        assert up.mc_std_error < 1e-15
        assert abs(up.value - ex.value) < 1e-10


def test_tv_upper_point_mass_general_pair_uses_cell_kernel():
    # three informative cells at k=3 exercises the per-replicate path
    s = random_stochastic(np.random.default_rng(9), 3)
    law = PointMass(s)
    x = Coloring(6, 3, (1, 1, 2, 2, 3, 3))
    y = Coloring(6, 3, (1, 2, 3, 2, 1, 3))
    up = tv_upper_mc(law, x, y, m=2, replicates=4, seed=0)
    ex = tv_exact_atomic(law, x, y, 2)
    assert abs(up.value - ex.value) < 1e-10


def test_tv_upper_dominates_exact_for_atomic_law():
    law = Atomic(
        [[[0.8, 0.3], [0.2, 0.7]], [[0.6, 0.45], [0.4, 0.55]]], [0.5, 0.5]
    )
    x, y = make_constant_pair(8, 2)
    for m in (1, 2, 3):
        ex = tv_exact_atomic(law, x, y, m)
        up = tv_upper_mc(law, x, y, m, replicates=400, seed=11)
        assert up.value + 3.0 * up.mc_std_error >= ex.value - 1e-12


def test_tv_upper_pathwise_monotone_in_m():
    # same seed shares the paintbox prefix, so the coupling mean cannot rise
    law = SelfSimilar([1.0, 1.0])
    x, y = make_constant_pair(12, 2)
    values = [tv_upper_mc(law, x, y, m, replicates=60, seed=5).value for m in range(1, 7)]
    for a, b in zip(values, values[1:]):
        assert b <= a + 1e-12


def test_tv_upper_collapsing_law_drives_to_zero():
    law = SelfSimilar([1.0, 1.0])
    x, y = make_constant_pair(16, 2)
    early = tv_upper_mc(law, x, y, 1, replicates=300, seed=2)
    late = tv_upper_mc(law, x, y, 10, replicates=300, seed=2)
    assert late.value < 0.02
    assert late.value < early.value


def test_make_test_pair_layout():
    x, y = make_test_pair(8, 2)
    assert x.word == (1, 1, 1, 1, 2, 2, 2, 2)
    assert y.word == (1, 1, 2, 2, 2, 2, 1, 1)
    x3, y3 = make_test_pair(24, 3)
    assert x3.word[:4] == (1, 1, 1, 1) and y3.word[:4] == (1, 1, 2, 2)
    # every color pair shows up as a refinement cell once blocks merge
    assert x3.n == 24 and len(set(zip(x3.word, y3.word))) == 9
    with pytest.raises(ValidationError):
        make_test_pair(10, 2)
    with pytest.raises(ValidationError):
        make_test_pair(8, 1)


def test_tv_lower_m0_distinct_designs():
    law = SelfSimilar([1.0, 1.0])
    x, y = make_test_pair(8, 2)
    est = tv_lower_mc(law, x, y, m=0, replicates=20, seed=0)
    assert est.value == 1.0
    assert est.mc_std_error == 0.0
    assert est.kind == "lower_bound"


def binom_pmf(n, p):
    return np.array([math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(n + 1)])


def test_tv_lower_point_mass_matches_convolution_oracle():
    s = np.array([[0.8, 0.35], [0.2, 0.65]])
    law = PointMass(s)
    n_prime = 3
    x, y = make_test_pair(4 * n_prime, 2)
    for m in (1, 2, 4):
        q = np.linalg.matrix_power(s, m)
        pmf_p = np.convolve(binom_pmf(n_prime, q[1, 0]), binom_pmf(n_prime, q[0, 1]))
        pmf_q = np.convolve(binom_pmf(n_prime, q[1, 1]), binom_pmf(n_prime, q[0, 0]))
        want = tv_distance(pmf_p, pmf_q)
        est = tv_lower_mc(law, x, y, m, replicates=5, seed=7)
        assert est.mc_std_error < 1e-14
        assert abs(est.value - want) < 1e-10


def test_tv_lower_requires_block_design():
    law = SelfSimilar([1.0, 1.0])
    x, y = make_constant_pair(8, 2)
    with pytest.raises(TheoryRefusal):
        tv_lower_mc(law, x, y, m=1, replicates=10, seed=0)
    with pytest.raises(TheoryRefusal):
        # right n, wrong words
        a, b = make_test_pair(8, 2)
        tv_lower_mc(law, b, a, m=1, replicates=10, seed=0)
    with pytest.raises(TheoryRefusal):
        tv_lower_mc(law, Coloring.constant(10, 2, 1), Coloring.constant(10, 2, 2), 1)


def test_sandwich_lower_exact_upper():
    law = Atomic(
        [[[0.8, 0.3], [0.2, 0.7]], [[0.6, 0.45], [0.4, 0.55]]], [0.4, 0.6]
    )
    x, y = make_test_pair(16, 2)
    for m in (1, 2):
        ex = tv_exact_atomic(law, x, y, m)
        lo = tv_lower_mc(law, x, y, m, replicates=500, seed=13)
        up = tv_upper_mc(law, x, y, m, replicates=500, seed=13)
        assert lo.value <= ex.value + 1e-9
        assert ex.value <= up.value + 3.0 * up.mc_std_error + 1e-9


# ------------------------------------------------------------ trend checks


def test_product_multinomial_tv_shrinks_with_subcritical_gap():
    # sup-norm gap n^(-0.6) beats the n^(-1/2) detection scale
    values = []
    for n in (10, 100, 1000):
        gap = n**-0.6
        p = ProductMultinomialLaw(((n, (0.5 + gap / 2, 0.5 - gap / 2)),))
        q = ProductMultinomialLaw(((n, (0.5 - gap / 2, 0.5 + gap / 2)),))
        values.append(tv_exact_product_multinomial(p, q).value)
    assert values[0] > values[1] > values[2]


def test_bernoulli_product_tv_grows_with_supercritical_gap():
    # per-coordinate gap m^(-0.4) loses to the sqrt(m) accumulation
    values = []
    for m in (10, 100, 1000):
        gap = m**-0.4
        p = ProductMultinomialLaw(((m, (0.5 + gap / 2, 0.5 - gap / 2)),))
        q = ProductMultinomialLaw(((m, (0.5 - gap / 2, 0.5 + gap / 2)),))
        values.append(tv_exact_product_multinomial(p, q).value)
    assert values[0] < values[1] < values[2]


# ------------------------------------------------------- likelihood bound


def test_likelihood_bound_equal_laws():
    p = np.array([0.2, 0.5, 0.3])
    for eps in (0.01, 0.25, 0.9):
        cert = tv_likelihood_bound(p, p, eps)
        assert cert.certified
        assert cert.bound == 2 * eps


def test_likelihood_bound_bernoulli_perturbation():
    delta = 0.01
    p = np.array([0.5, 0.5])
    q = np.array([0.5 - delta, 0.5 + delta])
    cert = tv_likelihood_bound(p, q, 4 * delta)
    assert cert.certified
    assert cert.bound == 8 * delta


def test_likelihood_bound_disjoint_supports():
    p = np.array([1.0, 0.0])
    q = np.array([0.0, 1.0])
    for eps in (0.1, 0.5, 0.99):
        assert not tv_likelihood_bound(p, q, eps).certified


# ------------------------------------------------------------- mixing time


def rank_one_plus_identity():
    return Atomic([[[1.0, 1.0], [0.0, 0.0]], np.eye(2)], [0.5, 0.5])


def slow_two_atom_law():
    return Atomic(
        [[[0.8, 0.3], [0.2, 0.7]], [[0.6, 0.45], [0.4, 0.55]]], [0.5, 0.5]
    )


def test_mixing_profile_invariants():
    est = TVEstimate(0.4, "exact")
    with pytest.raises(ValidationError):
        MixingProfile(4, (0.25,), ((3, est), (1, est)), {0.25: 3}, "exact_atomic")
    with pytest.raises(ValidationError):
        MixingProfile(4, (0.25,), ((1, est),), {0.5: 1}, "exact_atomic")
    with pytest.raises(ValidationError):
        MixingProfile(4, (0.5, 0.25), ((1, est),), {0.5: 3, 0.25: 1}, "exact_atomic")
    prof = MixingProfile(4, (0.5, 0.25), ((1, est), (2, est)), {0.5: 1, 0.25: 2}, "exact_atomic")
    assert prof.estimate_at(2) is est
    assert prof.estimate_at(7) is None
    blob = prof.to_json()
    assert blob["n"] == 4
    assert {row["epsilon"]: row["m"] for row in blob["t_mix"]} == {0.5: 1, 0.25: 2}


def test_mixing_time_rank_one_constant_in_n():
    law = rank_one_plus_identity()
    for n in (16, 64):
        prof = mixing_time(law, n, 2, epsilon=(0.75, 0.25), method="exact_atomic", seed=0)
        assert prof.t_mix[0.25] == 3
        assert prof.t_mix[0.75] == 1
        for m, est in prof.estimates:
            assert est.kind == "exact"
            assert abs(est.value - 0.5**m) < 1e-12


def test_mixing_time_methods_agree():
    law = slow_two_atom_law()
    exact = mixing_time(law, 12, 2, epsilon=0.25, method="exact_atomic", seed=0)
    mc = mixing_time(law, 12, 2, epsilon=0.25, method="mc_sandwich", seed=0, replicates=3000)
    assert exact.t_mix[0.25] is not None
    assert exact.t_mix[0.25] == mc.t_mix[0.25]


def test_mixing_time_epsilon_grid_monotone():
    law = slow_two_atom_law()
    prof = mixing_time(law, 32, 2, epsilon=(0.5, 0.25, 0.1), method="exact_atomic", seed=0)
    ts = [prof.t_mix[e] for e in (0.5, 0.25, 0.1)]
    assert all(t is not None for t in ts)
    assert ts[0] <= ts[1] <= ts[2]


def test_mixing_time_refuses_without_collapse_certificate():
    with pytest.raises(TheoryRefusal) as exc:
        mixing_time(PermutationMix(2), 8, 2, epsilon=0.25, method="exact_atomic", seed=0)
    assert "diagnostic" in exc.value.details


def test_mixing_time_budget_flags_inconclusive():
    law = slow_two_atom_law()
    # budget admits only m=1 (2 sequences x 9 counts); d-bar(1) is far above 1/4
    prof = mixing_time(law, 8, 2, epsilon=0.25, method="exact_atomic", seed=0, budget=20)
    assert prof.t_mix[0.25] is None
    assert any("budget" in f for f in prof.flags)


def test_mixing_time_m_max_exhausted_flags():
    law = slow_two_atom_law()
    prof = mixing_time(law, 64, 2, epsilon=1e-9, method="exact_atomic", seed=0, m_max=2)
    assert prof.t_mix[1e-9] is None
    assert prof.flags


def test_mixing_time_validation():
    law = rank_one_plus_identity()
    with pytest.raises(ValidationError):
        mixing_time(law, 8, 2, epsilon=0.0, method="exact_atomic")
    with pytest.raises(ValidationError):
        mixing_time(law, 8, 2, epsilon=0.25, method="secret")
    with pytest.raises(ValidationError):
        mixing_time(law, 8, 3, epsilon=0.25, method="exact_atomic")


# ------------------------------------------------------------------ cutoff


def test_cutoff_requires_smooth_family():
    with pytest.raises(TheoryRefusal):
        cutoff_experiment(PointMass(np.eye(2)), 2, (16, 32), epsilon=0.25, seed=0)
    with pytest.raises(TheoryRefusal):
        cutoff_experiment(rank_one_plus_identity(), 2, (16, 32), epsilon=0.25, seed=0)


def test_cutoff_validation():
    law = SelfSimilar([1.0, 1.0])
    with pytest.raises(ValidationError):
        cutoff_experiment(law, 2, (16, 32), epsilon=0.5, seed=0)
    with pytest.raises(ValidationError):
        cutoff_experiment(law, 2, (32, 16), epsilon=0.25, seed=0)
    with pytest.raises(ValidationError):
        cutoff_experiment(law, 2, (16,), epsilon=0.25, seed=0)


def test_cutoff_smoke_report_shape():
    law = SelfSimilar([1.0, 1.0])
    report = cutoff_experiment(
        law, 2, (16, 32, 64), epsilon=0.25, seed=4,
        replicates=400, m_max=64, lyapunov_m=400, lyapunov_replicates=16,
    )
    assert 0.0 < report.lambda1_hat < 1.0
    assert report.theta_hat > 0.0
    assert len(report.profiles) == 3
    assert len(report.window_ratios) == 3
    blob = report.to_json()
    assert blob["theta_hat"] == report.theta_hat
    assert len(blob["profiles"]) == 3


# --------------------------------------------------------------- Ehrenfest


def test_ehrenfest_exact_matches_exhaustive_oracle():
    for n, a in [(2, 1), (3, 1), (3, 2), (4, 2), (4, 3)]:
        params = EhrenfestParams(n, a / n)
        assert params.batch_size == a
        for t in (0, 1, 2, 3, 5):
            got = ehrenfest_tv_exact(params, t).value
            want = ehrenfest_exhaustive_tv(n, a, t)
            assert abs(got - want) < 1e-10, (n, a, t)


def test_ehrenfest_t0_point_mass_vs_stationary():
    for n in (3, 6, 10):
        est = ehrenfest_tv_exact(standard_ehrenfest(n), 0)
        assert abs(est.value - (1.0 - 2.0**-n)) < 1e-12


def test_ehrenfest_profile_monotone_and_consistent():
    params = EhrenfestParams(20, 0.2)
    profile = ehrenfest_tv_profile(params, range(0, 26, 5))
    values = [est.value for _, est in profile]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    lone = ehrenfest_tv_exact(params, 15)
    assert abs(dict(profile)[15].value - lone.value) < 1e-15


def test_ehrenfest_exact_gates():
    with pytest.raises(BudgetRefusal):
        ehrenfest_tv_exact(EhrenfestParams(4000, 0.25), 3)
    params = EhrenfestParams(6, 0.5)
    with pytest.raises(ValidationError):
        ehrenfest_tv_exact(params, 2, x0=Coloring.constant(5, 2, 1))
    with pytest.raises(TheoryRefusal):
        ehrenfest_tv_exact(params, 2, x0=Coloring(6, 2, (1, 2, 1, 1, 1, 1)))
    with pytest.raises(ValidationError):
        ehrenfest_tv_profile(params, [])
    with pytest.raises(ValidationError):
        ehrenfest_tv_profile(params, [-1, 2])


def test_ehrenfest_mixing_time_matches_brute_force_n12():
    n = 12
    total = 1 << n
    idx = np.arange(total)
    kernel = np.zeros((total, total))
    for i in range(n):
        bit = 1 << (n - 1 - i)
        for c in (0, 1):
            dest = np.where(c == 1, idx | bit, idx & ~bit)
            np.add.at(kernel, (idx, dest), 1.0 / (2 * n))
    # single-site refresh is doubly stochastic, so stationarity is uniform
    assert np.allclose(kernel.sum(axis=0), 1.0, atol=1e-12)
    pi = np.full(total, 1.0 / total)

    # one representative start per ones-count class (site relabeling symmetry)
    ones = np.array([bin(x).count("1") for x in range(total)])
    reps = [int(np.flatnonzero(ones == c)[0]) for c in range(n + 1)]
    dist = np.zeros((len(reps), total))
    for r, x in enumerate(reps):
        dist[r, x] = 1.0
    t = 0
    while True:
        t += 1
        dist = dist @ kernel
        if 0.5 * np.abs(dist - pi).sum(axis=1).max() < 0.25:
            break
    assert ehrenfest_mixing_time(standard_ehrenfest(n), 0.25) == t


def test_ehrenfest_constant_start_extremal_only_for_single_site():
    # the exact profile tracks the constant start; for batch refreshes that
    # start is not worst-case, which is why the profile never claims max
    kernel, pi = ehrenfest_exhaustive_kernel(8, 1)
    p3 = np.linalg.matrix_power(kernel, 3)
    tvs = 0.5 * np.abs(p3 - pi).sum(axis=1)
    assert tvs[0] >= tvs.max() - 1e-12
    kernel2, pi2 = ehrenfest_exhaustive_kernel(8, 2)
    q3 = np.linalg.matrix_power(kernel2, 3)
    tvs2 = 0.5 * np.abs(q3 - pi2).sum(axis=1)
    assert tvs2[0] < tvs2.max() - 1e-3


def test_ehrenfest_mixing_time_budget():
    with pytest.raises(BudgetRefusal):
        ehrenfest_mixing_time(standard_ehrenfest(32), 1e-12, t_max=3)
    with pytest.raises(ValidationError):
        ehrenfest_mixing_time(standard_ehrenfest(8), 1.5)


def test_ehrenfest_bounds_and_schedule_gates():
    params = EhrenfestParams(64, 0.25)
    bounds = ehrenfest_bounds(params, t=10, beta=1.0)
    assert abs(bounds.upper_at_t - 64 * (1 - 16 / 64) ** 10) < 1e-12
    assert abs(coupling_upper(params, 0) - 64.0) < 1e-12
    uppers = [ehrenfest_bounds(params, beta=b).upper_at_schedule for b in (1.0, 2.0, 3.0)]
    assert uppers[0] > uppers[1] > uppers[2]
    with pytest.raises(ValidationError):
        ehrenfest_bounds(params)
    with pytest.raises(TheoryRefusal):
        ehrenfest_bounds(EhrenfestParams(64, 0.75), beta=1.0)


def test_loglog_schedule_hits_target_rate():
    for n, beta in [(100, 1.0), (1000, 3.0), (10**6, 2.0)]:
        sched = loglog_schedule(n, beta)
        assert sched.upper_rate <= float(n) ** -beta * (1 + 1e-12)
        assert sched.upper_batch >= sched.upper_rate - 1e-15
    with pytest.raises(ValidationError):
        loglog_schedule(2, 1.0)
    with pytest.raises(ValidationError):
        loglog_schedule(100, 0.0)
