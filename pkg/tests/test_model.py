import itertools
import math

import numpy as np
import pytest

from randsum.laws import (
    Bernoulli,
    Binomial,
    ExactPmf,
    FiniteCount,
    FiniteIntPmf,
    FiniteLatticePmf,
    GammaMixedPoisson,
    LawError,
    Poisson,
    point_claim,
    rademacher,
)
from randsum.metrics import tv_pmf
from randsum.model import (
    RandomSumModel,
    comonotone_pmf,
    coupled_gap_exact,
    coupled_gap_mc,
    exact_pmf,
    exact_pmf_size_bias_lhs,
    exact_pmf_size_bias_rhs,
    mean_var,
    sample_sum,
)
from randsum.transforms import quantile_coupling_joint, shifted_size_bias_pmf, size_bias_pmf


def enumerate_law(model):
    """Law of Y by brute force over (branch, count, claim outcomes)."""
    counts = model.count.exact_pmf(1e-16)
    xs, ps = model.claim.atoms, model.claim.probs
    out = {}
    for n, pn in zip(counts.atoms.astype(int), counts.probs):
        for x, px in zip(xs, ps):
            out[n * x] = out.get(n * x, 0.0) + model.rho * pn * px
        for combo in itertools.product(range(xs.size), repeat=n):
            y = float(sum(xs[i] for i in combo))
            out[y] = out.get(y, 0.0) + (1 - model.rho) * pn * float(np.prod([ps[i] for i in combo]))
    return ExactPmf.from_dict(out)


def enumerate_gap(model):
    """E|sum_{j<=M} X'_j - Y| with (N, M) quantile-coupled, M = N^s - 1, by brute force."""
    xn, xm, w = quantile_coupling_joint(model.count.exact_pmf(1e-16), shifted_size_bias_pmf(model.count, 1e-16))
    xs, ps = model.claim.atoms, model.claim.probs
    total = 0.0
    for n, m, weight in zip(xn.astype(int), xm.astype(int), w):
        # independent branch: the shorter sum is a prefix of the longer one
        k = abs(m - n)
        e = 0.0
        for combo in itertools.product(range(xs.size), repeat=k):
            e += float(np.prod([ps[i] for i in combo])) * abs(sum(xs[i] for i in combo))
        total += (1 - model.rho) * weight * e
        # comonotone branch: Y = n X_1, primed sum starts with X_1 when m >= 1
        e = 0.0
        rest = max(m - 1, 0)
        for first in range(xs.size):
            for combo in itertools.product(range(xs.size), repeat=rest):
                p = ps[first] * float(np.prod([ps[i] for i in combo]))
                primed = (xs[first] if m >= 1 else 0.0) + sum(xs[i] for i in combo)
                e += p * abs(primed - n * xs[first])
        total += model.rho * weight * e
    return total


SMALL_MODELS = [
    RandomSumModel(FiniteCount({1: 0.5, 2: 0.5}), Bernoulli(0.5), 0.4),
    RandomSumModel(FiniteCount({0: 0.3, 3: 0.7}), FiniteIntPmf({0: 0.2, 1: 0.3, 3: 0.5}), 0.0),
    RandomSumModel(Binomial(4, 0.3), FiniteLatticePmf({-1: 0.5, 2: 0.25, 3: 0.25}), 0.7),
    RandomSumModel(FiniteCount({2: 0.6, 4: 0.4}), FiniteLatticePmf({"-1/2": 0.5, "1/2": 0.5}), 1.0),
]


class TestModel:
    def test_rho_range(self):
        with pytest.raises(LawError):
            RandomSumModel(Poisson(1.0), Bernoulli(0.5), 1.5)

    def test_comonotone_sampler(self):
        model = RandomSumModel(FiniteCount({3: 1.0}), Bernoulli(0.5), 1.0)
        y = sample_sum(model, np.random.default_rng(42), 100_000)
        assert set(np.unique(y)) == {0.0, 3.0}
        assert abs(np.mean(y == 3.0) - 0.5) < 5 * math.sqrt(0.25 / y.size)

    def test_independent_sampler_is_binomial(self):
        model = RandomSumModel(FiniteCount({2: 1.0}), Bernoulli(0.5), 0.0)
        y = sample_sum(model, np.random.default_rng(7), 10**6)
        counts = np.array([np.sum(y == k) for k in range(3)])
        expected = 10**6 * np.array([0.25, 0.5, 0.25])
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        assert chi2 < 13.8  # 99.9% point of chi-square with 2 degrees of freedom

    def test_mixture_probability(self):
        model = RandomSumModel(FiniteCount({2: 1.0}), Bernoulli(0.5), 0.5)
        assert exact_pmf(model).prob(2.0) == pytest.approx(0.375)

    def test_comonotone_exact(self):
        pmf = exact_pmf(RandomSumModel(FiniteCount({2: 1.0}), Bernoulli(0.3), 1.0))
        assert pmf.prob(0.0) == pytest.approx(0.7)
        assert pmf.prob(2.0) == pytest.approx(0.3)
        assert pmf.mass == pytest.approx(1.0)

    def test_unit_claims_give_count_law(self):
        pmf = exact_pmf(RandomSumModel(Poisson(2.5), point_claim(1), 0.0), 1e-14)
        ref = Poisson(2.5).exact_pmf(1e-14)
        np.testing.assert_allclose(pmf.probs, ref.probs, atol=1e-12)

    @pytest.mark.parametrize("model", SMALL_MODELS)
    def test_exact_pmf_against_enumeration(self, model):
        assert tv_pmf(exact_pmf(model), enumerate_law(model)).value < 1e-13

    def test_comonotone_pmf_collisions(self):
        # N in {1, 2}, X in {1, 2}: N X = 2 arises twice
        pmf = comonotone_pmf(FiniteIntPmf({1: 0.5, 2: 0.5}), FiniteCount({1: 0.5, 2: 0.5}).exact_pmf())
        assert pmf.prob(2.0) == pytest.approx(0.5)

    def test_mean_var_poisson_case(self):
        mean, var = mean_var(RandomSumModel(Poisson(2.0), Bernoulli(0.5), 0.5))
        assert mean == pytest.approx(1.0)
        assert var == pytest.approx(1.5)

    def test_mean_var_centred_case(self):
        count = Binomial(9, 0.4)
        model = RandomSumModel(count, rademacher(2), 0.3)
        n1, n2, _ = count.raw_moments()
        assert mean_var(model)[1] == pytest.approx(4.0 * (n1 + 0.3 * (n2 - n1)))

    @pytest.mark.parametrize(
        "model",
        [
            RandomSumModel(GammaMixedPoisson(3.0, 0.4), FiniteIntPmf({0: 0.2, 1: 0.3, 3: 0.5}), 0.25),
            RandomSumModel(Binomial(15, 0.6), FiniteLatticePmf({-1: 0.3, 2: 0.7}), 0.6),
            RandomSumModel(Poisson(6.0), Bernoulli(0.2), 0.0),
        ],
    )
    def test_mean_var_matches_exact_pmf(self, model):
        pmf = exact_pmf(model, 1e-16)
        mean, var = mean_var(model)
        assert pmf.mean() == pytest.approx(mean, rel=1e-9)
        assert pmf.variance() == pytest.approx(var, rel=1e-9)

    def test_mean_var_monte_carlo(self):
        model = RandomSumModel(GammaMixedPoisson(2.0, 0.5), FiniteIntPmf({1: 0.5, 4: 0.5}), 0.0)
        y = sample_sum(model, np.random.default_rng(3), 10**6)
        _, var = mean_var(model)
        # standard error of the sample variance from the fourth central moment
        pmf = exact_pmf(model, 1e-14)
        m4 = float(np.dot(pmf.probs, (pmf.atoms - pmf.mean()) ** 4))
        se = math.sqrt((m4 - var**2) / y.size)
        assert abs(y.var() - var) < 5 * se

    def test_exact_vs_monte_carlo(self):
        model = RandomSumModel(Poisson(4.0), FiniteIntPmf({0: 0.3, 1: 0.4, 2: 0.3}), 0.3)
        pmf = exact_pmf(model)
        y = sample_sum(model, np.random.default_rng(11), 10**6)
        atoms, counts = np.unique(y, return_counts=True)
        tv = tv_pmf(pmf, ExactPmf(atoms, counts / y.size)).value
        assert tv <= 5 * math.sqrt(pmf.atoms.size / 1e6)

    def test_sampling_is_reproducible(self):
        model = RandomSumModel(Poisson(3.0), rademacher(1), 0.2)
        a = sample_sum(model, np.random.default_rng(5), 1000)
        b = sample_sum(model, np.random.default_rng(5), 1000)
        np.testing.assert_array_equal(a, b)

    def test_non_lattice_claim_rejected(self):
        claim = FiniteLatticePmf({math.sqrt(2): 0.5, 1: 0.5})
        with pytest.raises(LawError, match="lattice"):
            exact_pmf(RandomSumModel(Poisson(1.0), claim, 0.0))


class TestSizeBiasRepresentation:
    @pytest.mark.parametrize("rho", [0.0, 0.4, 1.0])
    def test_lhs_equals_rhs(self, rho):
        model = RandomSumModel(Poisson(2.0), Bernoulli(0.3), rho)
        lhs = exact_pmf_size_bias_lhs(model, 1e-15)
        rhs = exact_pmf_size_bias_rhs(model, 1e-15)
        assert tv_pmf(lhs, rhs).value <= 1e-10

    def test_lhs_is_direct_reweighting(self):
        model = RandomSumModel(Poisson(2.0), Bernoulli(0.3), 0.4)
        y = exact_pmf(model, 1e-15)
        lhs = exact_pmf_size_bias_lhs(model, 1e-15)
        for a, p in zip(lhs.atoms, lhs.probs):
            assert p == pytest.approx(a * y.prob(a) / 0.6, rel=1e-12)

    def test_point_mass(self):
        model = RandomSumModel(FiniteCount({3: 1.0}), point_claim(2), 0.5)
        lhs = exact_pmf_size_bias_lhs(model)
        np.testing.assert_array_equal(lhs.atoms, [6.0])

    def test_poisson_second_form(self):
        # with a Poisson count, N^s - 1 has the law of N
        model = RandomSumModel(Poisson(3.0), FiniteIntPmf({0: 0.5, 1: 0.25, 2: 0.25}), 0.35)
        rhs = exact_pmf_size_bias_rhs(model, 1e-15)
        counts = Poisson(3.0).exact_pmf(1e-15)
        comon = size_bias_pmf(comonotone_pmf(model.claim, counts))
        sb_claim = size_bias_pmf(model.claim)
        indep = exact_pmf(model.with_rho(0.0), 1e-15)
        mix = {}
        for a, p in zip(comon.atoms, comon.probs):
            mix[a] = mix.get(a, 0.0) + 0.35 * p
        for a, p in zip(sb_claim.atoms, sb_claim.probs):
            for b, q in zip(indep.atoms, indep.probs):
                mix[a + b] = mix.get(a + b, 0.0) + 0.65 * p * q
        assert tv_pmf(rhs, ExactPmf.from_dict(mix)).value <= 1e-10

    def test_needs_non_negative(self):
        with pytest.raises(LawError):
            exact_pmf_size_bias_lhs(RandomSumModel(Poisson(2.0), rademacher(1), 0.0))


class TestCoupledGap:
    @pytest.mark.parametrize("model", SMALL_MODELS)
    def test_exact_against_enumeration(self, model):
        assert coupled_gap_exact(model, 1e-16).value == pytest.approx(enumerate_gap(model), rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize(
        "model",
        [
            RandomSumModel(Binomial(30, 0.4), rademacher(1), 0.1),
            RandomSumModel(GammaMixedPoisson(4.0, 0.5), FiniteIntPmf({0: 0.5, 1: 0.2, 4: 0.3}), 0.5),
        ],
    )
    def test_monte_carlo_agrees(self, model):
        exact = coupled_gap_exact(model).value
        mc = coupled_gap_mc(model, np.random.default_rng(2024), 400_000)
        assert mc.standard_error > 0
        assert abs(mc.value - exact) < 4 * mc.standard_error

    def test_rho_zero_non_negative_claims(self):
        # nested sums of non-negative claims: the gap is E|N + 1 - N^s| E[X]
        model = RandomSumModel(Binomial(12, 0.3), FiniteIntPmf({1: 0.5, 3: 0.5}), 0.0)
        assert coupled_gap_exact(model).value == pytest.approx(0.3 * 2.0, rel=1e-12)

    def test_rho_zero_centred_claims_are_smaller(self):
        model = RandomSumModel(Binomial(12, 0.3), rademacher(1), 0.0)
        assert coupled_gap_exact(model).value <= 0.3 + 1e-12
