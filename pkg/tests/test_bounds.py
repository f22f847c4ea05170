import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randsum.bounds import (
    BOUND_KINDS,
    BoundError,
    beta,
    bound_gamma_stoploss,
    bound_normal_count_coupling_alt,
    bound_normal_poisson,
    bound_normal_zero_mean,
    bound_poisson_tv,
    bound_poisson_wasserstein,
    compute_bound,
    gamma_params,
    sigma,
    stein_factor_cr,
    tau,
)
from randsum.laws import (
    Bernoulli,
    Binomial,
    ExactPmf,
    FiniteCount,
    FiniteIntPmf,
    FiniteLatticePmf,
    GammaMixedPoisson,
    Hypergeometric,
    Poisson,
    point_claim,
    rademacher,
)
from randsum.model import RandomSumModel, exact_pmf
from randsum.transforms import abs_mean_from_density, bias_density


def cr_oracle(r):
    return (math.sqrt(2 * math.pi) + math.exp(-1)) / math.sqrt(r + 2) + 2 / (r + 2)


class TestMixingWeights:
    def test_tau_values(self):
        assert tau(RandomSumModel(Poisson(2.0), rademacher(1), 0.0)) == 0.0
        assert tau(RandomSumModel(FiniteCount({4: 1.0}), rademacher(1), 1.0)) == pytest.approx(1.0)
        assert tau(RandomSumModel(Poisson(2.0), rademacher(1), 0.5)) == pytest.approx(0.75)

    def test_sigma_values(self):
        assert sigma(2.0, Bernoulli(0.5), 0.0) == 0.0
        assert sigma(2.0, Bernoulli(0.5), 1.0) == pytest.approx(1.0)
        assert sigma(2.0, Bernoulli(0.5), 0.5) == pytest.approx(2 / 3)
        assert sigma(3.0, point_claim(2), 0.35) == pytest.approx(0.35)

    @settings(max_examples=200, deadline=None)
    @given(
        lam=st.floats(0.01, 1e4),
        p=st.floats(0.01, 1.0),
        rho=st.floats(0.0, 1.0),
        a=st.integers(1, 5),
    )
    def test_sigma_at_least_rho(self, lam, p, rho, a):
        claim = FiniteIntPmf({0: 1 - p, a: p}) if p < 1 else point_claim(a)
        s = sigma(lam, claim, rho)
        assert rho - 1e-12 <= s <= 1 + 1e-12


class TestGammaConstants:
    def test_gamma_params(self):
        r, s = gamma_params(100.0, Bernoulli(0.5), 0.0)
        assert (r, s) == (pytest.approx(50.0), pytest.approx(1.0))
        r, s = gamma_params(7.0, point_claim(3), 0.4)
        assert (r, s) == (pytest.approx(7.0), pytest.approx(1 / 3))
        r, s = gamma_params(2.0, Bernoulli(0.5), 0.5)
        assert (r, s) == (pytest.approx(2 / 3), pytest.approx(2 / 3))

    def test_stein_factor(self):
        # the constant 2.874508 rounds sqrt(2 pi) + 1/e; the closed form is used
        assert stein_factor_cr(50.0) == pytest.approx(0.437084037, abs=1e-9)
        assert stein_factor_cr(2.0) == pytest.approx(1.937254, abs=1e-6)
        values = [stein_factor_cr(r) for r in (1, 10, 100, 1000)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_beta(self):
        assert beta(1.0, point_claim(1)) == pytest.approx(1.5)
        assert beta(2.0, Bernoulli(0.5)) == pytest.approx(2.0)
        lam, p = 4.0, 0.3
        expect = p * ((lam**2 + 3 * lam + 1) - lam * (lam + 1) * p) / (2 * (p + lam * p * (1 - p)))
        assert beta(lam, Bernoulli(p)) == pytest.approx(expect)


class TestWorkedValues:
    def test_poisson_rademacher(self):
        assert bound_normal_zero_mean(RandomSumModel(Poisson(100.0), rademacher(1), 0.0)).value == pytest.approx(0.1)

    def test_binomial_display(self):
        n, p = 40, 0.25
        claim = FiniteLatticePmf({-2: 0.25, 1: 0.5, 0: 0.25})
        mo = claim.moments()
        expect = 2 / math.sqrt(n * p * mo.variance) * (mo.m3abs / (2 * mo.variance) + p * mo.m1abs)
        got = bound_normal_zero_mean(RandomSumModel(Binomial(n, p), claim, 0.0)).value
        assert got == pytest.approx(expect, rel=1e-12)

    def test_negative_binomial(self):
        value = bound_normal_zero_mean(RandomSumModel(GammaMixedPoisson(100.0, 0.5), rademacher(1), 0.0)).value
        assert value == pytest.approx(0.3, abs=1e-12)

    def test_normal_poisson_rho_zero(self):
        assert bound_normal_poisson(100.0, Bernoulli(0.5), 0.0).value == pytest.approx(0.5 / (10 * 0.5**1.5))
        assert bound_normal_poisson(100.0, rademacher(1), 0.0).value == pytest.approx(0.1)

    def test_gamma_stoploss_values(self):
        rep = bound_gamma_stoploss(100.0, Bernoulli(0.5), 0.0)
        assert rep.value == pytest.approx(2 * math.sqrt(50 * cr_oracle(50) * 0.5), abs=1e-12)
        assert rep.value == pytest.approx(6.611, abs=1e-3)
        unit = bound_gamma_stoploss(1.0, point_claim(1), 0.0)
        assert unit.value == pytest.approx(2 * math.sqrt(cr_oracle(1) * 0.5), rel=1e-12)
        assert unit.value == pytest.approx(2.157, abs=1e-3)

    def test_gamma_stoploss_comonotone(self):
        rep = bound_gamma_stoploss(5.0, point_claim(1), 1.0)
        assert rep.constants["sigma"] == pytest.approx(1.0)
        assert math.isfinite(rep.value) and rep.value > 0

    def test_gamma_depends_on_lambda_p_only(self):
        a = bound_gamma_stoploss(100.0, Bernoulli(0.5), 0.0).value
        b = bound_gamma_stoploss(500.0, Bernoulli(0.1), 0.0).value
        assert a == pytest.approx(b, rel=1e-12)

    @pytest.mark.parametrize("rho", [0.0, 0.5, 1.0])
    def test_poisson_unit_claims_zero(self, rho):
        model = RandomSumModel(Poisson(3.0), point_claim(1), rho)
        assert bound_poisson_wasserstein(model).value == pytest.approx(0.0, abs=1e-9)
        assert bound_poisson_tv(model).value == pytest.approx(0.0, abs=1e-9)

    def test_poisson_tv_binomial(self):
        assert bound_poisson_tv(RandomSumModel(Binomial(5, 0.2), Bernoulli(0.5), 0.0)).value == pytest.approx(0.1)
        assert bound_poisson_tv(RandomSumModel(Binomial(30, 0.15), point_claim(1), 0.0)).value == pytest.approx(0.15)

    def test_poisson_wasserstein_displays(self):
        claim = FiniteIntPmf({0: 0.2, 1: 0.3, 3: 0.5})
        mo = claim.moments()
        n, p = 12, 0.3
        expect = 3 * math.sqrt(n * p * mo.mean) * (mo.m2 / mo.mean - 1 + p * mo.mean)
        got = bound_poisson_wasserstein(RandomSumModel(Binomial(n, p), claim, 0.0)).value
        assert got == pytest.approx(expect, rel=1e-12)
        count = GammaMixedPoisson(3.0, 0.4)
        el, vl = count.rate_mean, count.rate_variance
        expect = 3 * math.sqrt(el * mo.mean) * (mo.m2 / mo.mean - 1 + vl / el * mo.mean)
        got = bound_poisson_wasserstein(RandomSumModel(count, claim, 0.0)).value
        assert got == pytest.approx(expect, rel=1e-9)

    def test_alt_bound_poisson_count(self):
        claim = FiniteLatticePmf({-2: 1 / 3, 1: 2 / 3})
        mo = claim.moments()
        rep = bound_normal_count_coupling_alt(RandomSumModel(Poisson(25.0), claim, 0.0))
        assert rep.constants["dw_count_poisson"] == pytest.approx(0.0, abs=1e-12)
        assert rep.value == pytest.approx(mo.m3abs / (5.0 * mo.variance**1.5), rel=1e-9)

    def test_alt_bound_point_count(self):
        # d_W(Po(1), delta_1) = E|M - 1| = 2 / e
        rep = bound_normal_count_coupling_alt(RandomSumModel(FiniteCount({1: 1.0}), rademacher(1), 0.0))
        assert rep.constants["dw_count_poisson"] == pytest.approx(2 / math.e, abs=1e-11)


class TestCrossChecks:
    @pytest.mark.parametrize("claim", [rademacher(1), rademacher(3), FiniteLatticePmf({-2: 1 / 3, 1: 2 / 3})])
    @pytest.mark.parametrize("lam", [0.5, 10.0, 400.0])
    def test_zero_mean_and_poisson_agree(self, claim, lam):
        model = RandomSumModel(Poisson(lam), claim, 0.0)
        a = bound_normal_zero_mean(model).value
        b = bound_normal_poisson(lam, claim, 0.0).value
        assert a == pytest.approx(b, rel=1e-12, abs=0)

    def test_normal_poisson_constants_from_exact_laws(self):
        lam, p, rho = 10.0, 0.5, 0.1
        claim = Bernoulli(p)
        rep = bound_normal_poisson(lam, claim, rho)
        y = exact_pmf(RandomSumModel(Poisson(lam), claim, rho), 1e-16)
        var_y = y.variance()
        ey2 = float(np.dot(y.probs, y.atoms**2))
        # law of N X_1 and its non-zero bias, built directly
        counts = Poisson(lam).exact_pmf(1e-16)
        nx = ExactPmf.from_dict({0.0: (1 - p) + p * counts.probs[0], **{float(k): p * q for k, q in zip(counts.atoms[1:], counts.probs[1:])}})
        nz = abs_mean_from_density(*bias_density(nx, "non_zero"))
        sig = rho * (p + lam * p * (1 - p)) / (p + lam * rho * p * (1 - p))
        alpha = math.sqrt(ey2) + nz
        # E|X' - X| for independent Bernoulli copies is 2 p (1 - p)
        diff = 2 * p * (1 - p)
        expect = (2 * sig * alpha + (1 - sig) * p / p + 2 * lam * (1 - sig) * diff) / math.sqrt(var_y)
        assert rep.constants["sigma"] == pytest.approx(sig, rel=1e-12)
        assert rep.constants["var_y"] == pytest.approx(var_y, rel=1e-10)
        assert rep.constants["alpha"] == pytest.approx(alpha, rel=1e-10)
        assert rep.value == pytest.approx(expect, rel=1e-10)

    @pytest.mark.parametrize(
        "kind, model",
        [
            ("normal_zero_mean", RandomSumModel(Binomial(20, 0.4), rademacher(1), 0.3)),
            ("normal_zero_mean_indep", RandomSumModel(Hypergeometric(40, 15, 10), rademacher(2), 0.0)),
            ("normal_poisson", RandomSumModel(Poisson(20.0), Bernoulli(0.3), 0.2)),
            ("gamma_stoploss", RandomSumModel(Poisson(8.0), FiniteIntPmf({1: 0.5, 2: 0.5}), 0.4)),
            ("poisson_wasserstein", RandomSumModel(GammaMixedPoisson(4.0, 0.5), Bernoulli(0.6), 0.25)),
            ("poisson_tv", RandomSumModel(Binomial(8, 0.5), FiniteIntPmf({0: 0.5, 1: 0.25, 2: 0.25}), 0.6)),
            ("normal_count_coupling_alt", RandomSumModel(Binomial(50, 0.1), rademacher(1), 0.0)),
        ],
    )
    def test_reevaluates_from_constants(self, kind, model):
        rep = compute_bound(kind, model)
        assert rep.bound_kind == kind
        assert rep.reevaluate() == rep.value
        assert rep.conservative_value == rep.value
        assert rep.to_dict()["constants"] == dict(sorted(rep.constants.items()))

    def test_monte_carlo_gap(self):
        model = RandomSumModel(Binomial(20, 0.4), rademacher(1), 0.3)
        exact = compute_bound("normal_zero_mean", model)
        mc = compute_bound("normal_zero_mean", model, d_method="mc", mc_budget=200_000, rng=np.random.default_rng(4))
        assert len(mc.mc_terms) == 1
        _, est, se = mc.mc_terms[0]
        assert abs(est - exact.constants["gap"]) < 5 * se
        assert mc.conservative_value > mc.value
        assert mc.reevaluate() == mc.value

    def test_assembled_label(self):
        rep = bound_poisson_tv(RandomSumModel(Binomial(8, 0.5), Bernoulli(0.5), 0.3))
        assert rep.notes == "assembled"
        assert bound_poisson_tv(RandomSumModel(Binomial(8, 0.5), Bernoulli(0.5), 0.0)).notes == ""


class TestPreconditions:
    @pytest.mark.parametrize(
        "kind, model",
        [
            ("normal_zero_mean", RandomSumModel(Poisson(2.0), Bernoulli(0.5), 0.0)),
            ("normal_zero_mean_indep", RandomSumModel(Poisson(2.0), rademacher(1), 0.2)),
            ("normal_poisson", RandomSumModel(Binomial(4, 0.5), Bernoulli(0.5), 0.0)),
            ("gamma_stoploss", RandomSumModel(Poisson(2.0), rademacher(1), 0.0)),
            ("poisson_wasserstein", RandomSumModel(Poisson(2.0), rademacher(1), 0.0)),
            ("poisson_tv", RandomSumModel(Poisson(2.0), FiniteLatticePmf({"1/2": 1.0}), 0.0)),
            ("normal_count_coupling_alt", RandomSumModel(Poisson(2.0), rademacher(1), 0.5)),
            ("kolmogorov", RandomSumModel(Poisson(2.0), rademacher(1), 0.0)),
        ],
    )
    def test_rejected(self, kind, model):
        with pytest.raises(BoundError):
            compute_bound(kind, model)

    def test_unknown_d_method(self):
        with pytest.raises(BoundError, match="d_method"):
            compute_bound("poisson_tv", RandomSumModel(Poisson(2.0), Bernoulli(0.5), 0.5), d_method="guess")

    def test_kinds_listed(self):
        assert len(BOUND_KINDS) == 7
