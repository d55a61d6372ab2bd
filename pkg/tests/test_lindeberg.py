import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from netclt.lindeberg import (
    DegenerateProjectionError,
    ProjectionSpec,
    lindeberg_L,
    lindeberg_L_mc,
    max_share_bound,
    normal_tail_second_moment,
    script_L,
    tau_k,
    tau_quadratic,
)
from netclt.lindeberg import _density_tail_second_moment
from netclt.models import (
    Schedule,
    bounded_rademacher_pair,
    gaussian_iid_corr,
    gaussian_varying_schedule,
    independent_nongaussian,
    rademacher_product,
)

ONE_ONE = ProjectionSpec(1, 1)


def normal_tail_oracle(z):
    """E[Z**2 ; |Z| > z] for standard normal Z, in closed form."""
    return 2.0 * (z * norm.pdf(z) + norm.sf(z))


def exponential_tail_oracle(a):
    # xi = E - 1; antiderivative of x**2 exp(-(x+1)) is -exp(-(x+1)) (x**2 + 2x + 2)
    F = lambda x: -math.exp(-(x + 1)) * (x * x + 2 * x + 2)
    upper = -F(a)
    lower = F(-a) - F(-1.0) if a < 1 else 0.0
    return upper + lower


def uniform_tail_oracle(a):
    r3 = math.sqrt(3)
    return max(0.0, (3 * r3 - a**3) / (3 * r3)) if a < r3 else 0.0


class TestTau:
    def test_quadratic(self):
        assert tau_quadratic(1, 1, 0) == 2
        assert tau_quadratic(1, 1, -1) == 0
        assert tau_quadratic(1, 2, 0.5) == 7

    def test_rejects_bad_rho(self):
        with pytest.raises(ValueError):
            tau_quadratic(1, 1, 1.5)

    def test_alternating_even(self):
        m = gaussian_varying_schedule(Schedule("alternating", 0.9))
        for k in (2, 10, 1000):
            assert tau_k(m, k, 1, 1) == 2

    @pytest.mark.parametrize("k", [1, 5, 10**6])
    def test_constant_schedule(self, k):
        assert tau_k(gaussian_iid_corr(0.25), k, 1, 2) == tau_quadratic(1, 2, 0.25)

    def test_origin_direction(self):
        assert tau_k(gaussian_iid_corr(0.7), 9, 0, 0) == 0

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-1, 1))
    def test_nonnegative(self, s, t, rho):
        assert tau_quadratic(s, t, rho) >= -1e-12 * (s * s + t * t)


class TestTailMoments:
    @pytest.mark.parametrize("z", [0.0, 0.3, 1.0, 2.5, 5.0, 8.0])
    def test_normal_quadrature_vs_closed_form(self, z):
        assert normal_tail_second_moment(1.0, z * z) == pytest.approx(normal_tail_oracle(z), rel=1e-9)

    def test_normal_variance_scaling(self):
        assert normal_tail_second_moment(4.0, 9.0) == pytest.approx(4 * normal_tail_oracle(1.5), rel=1e-9)

    @pytest.mark.parametrize("a", [0.0, 0.4, 0.99, 1.0, 2.0, 6.0])
    def test_exponential_vs_closed_form(self, a):
        assert _density_tail_second_moment("exponential", 1.0, a * a) == pytest.approx(exponential_tail_oracle(a), rel=1e-9, abs=1e-15)

    @pytest.mark.parametrize("a", [0.0, 0.5, 1.7, 2.0])
    def test_uniform_vs_closed_form(self, a):
        assert _density_tail_second_moment("uniform", 1.0, a * a) == pytest.approx(uniform_tail_oracle(a), rel=1e-9, abs=1e-15)


class TestLindebergL:
    @pytest.mark.parametrize("k", [3, 4, 10, 1000, 10**6])
    def test_bounded_vanishes_exactly(self, k):
        m = bounded_rademacher_pair(Fraction(0))
        val = lindeberg_L(m, ONE_ONE, k, 1)
        assert val == 0
        assert isinstance(val, (int, Fraction))

    def test_bounded_small_k_exact(self):
        m = bounded_rademacher_pair(Fraction(0))
        # k = 1: threshold c**2 = 2, the agreeing atoms |W| = 2 carry all the variance
        assert lindeberg_L(m, ONE_ONE, 1, 1) == 1
        assert lindeberg_L(m, ONE_ONE, 1, Fraction(3, 2)) == 0

    def test_bounded_exact_fraction(self):
        m = bounded_rademacher_pair(Fraction(1, 3))
        val = lindeberg_L(m, ProjectionSpec(1, Fraction(1, 2)), 2, Fraction(1, 2))
        assert isinstance(val, Fraction)
        assert 0 <= val <= 1

    @pytest.mark.parametrize(
        "model",
        [gaussian_iid_corr(0.4), rademacher_product(), bounded_rademacher_pair(0.2), independent_nongaussian()],
        ids=lambda m: m.variant,
    )
    def test_infinite_epsilon(self, model):
        assert lindeberg_L(model, ONE_ONE, 7, math.inf) == 0

    def test_single_normal_reduction(self):
        val = lindeberg_L(gaussian_iid_corr(0.0), ProjectionSpec(1, 0), 100, 0.5)
        assert val == pytest.approx(normal_tail_oracle(5.0), rel=1e-9)
        assert val == pytest.approx(1.5440498e-5, rel=1e-6)

    @pytest.mark.parametrize(
        "model,spec,k,eps",
        [
            (gaussian_iid_corr(0.5), ONE_ONE, 1, 0.5),
            (gaussian_iid_corr(-0.3), ProjectionSpec(2, 1), 4, 0.4),
            (rademacher_product(), ONE_ONE, 2, 0.6),
            (gaussian_varying_schedule(Schedule("alternating", 0.9)), ProjectionSpec(1, 0.5), 3, 0.5),
        ],
        ids=["gauss", "gauss-neg", "mixture", "alternating"],
    )
    def test_quadrature_matches_monte_carlo(self, model, spec, k, eps):
        exact = lindeberg_L(model, spec, k, eps)
        est, se = lindeberg_L_mc(model, spec, k, eps, draws=200_000, seed=17)
        assert se > 0
        assert abs(est - exact) <= 3 * se

    def test_monte_carlo_fallback_for_independent_pair(self):
        m = independent_nongaussian()
        val = lindeberg_L(m, ONE_ONE, 1, 0.5)
        est, se = lindeberg_L_mc(m, ONE_ONE, 1, 0.5)
        assert val == est
        assert 0 < val < 1 and se < 0.01

    @pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
    @pytest.mark.parametrize(
        "model",
        [gaussian_iid_corr(0.5), gaussian_iid_corr(0.0), rademacher_product(), bounded_rademacher_pair(0.3)],
        ids=lambda m: m.label,
    )
    def test_vanishes_at_large_k(self, model, eps):
        assert lindeberg_L(model, ONE_ONE, 10**4, eps) < 1e-3

    def test_skewed_marginal_decays_in_k(self):
        m = independent_nongaussian()
        spec = ProjectionSpec(1, 0)
        vals = [lindeberg_L(m, spec, k, 0.1) for k in (10**2, 10**3, 10**4, 10**5)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-3

    def test_degenerate_direction(self):
        with pytest.raises(DegenerateProjectionError):
            lindeberg_L(gaussian_iid_corr(-1.0), ONE_ONE, 10, 0.5)
        with pytest.raises(DegenerateProjectionError):
            lindeberg_L(bounded_rademacher_pair(1), ProjectionSpec(1, -1), 10, 0.5)

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            lindeberg_L(gaussian_iid_corr(0.1), ONE_ONE, 0, 0.5)
        with pytest.raises(ValueError):
            lindeberg_L(gaussian_iid_corr(0.1), ONE_ONE, 5, 0)

    @settings(max_examples=60, deadline=None)
    @given(
        st.fractions(-1, 1, max_denominator=10),
        st.integers(1, 50),
        st.fractions(Fraction(1, 20), 3, max_denominator=20),
        st.fractions(Fraction(1, 20), 3, max_denominator=20),
    )
    def test_bounds_and_monotone_in_epsilon(self, rho, k, e1, e2):
        m = bounded_rademacher_pair(rho)
        spec = ProjectionSpec(1, Fraction(1, 2))
        lo, hi = sorted((e1, e2))
        a, b = lindeberg_L(m, spec, k, lo), lindeberg_L(m, spec, k, hi)
        assert 0 <= b <= a <= 1
        assert script_L(m, spec, k, hi) <= script_L(m, spec, k, lo)

    @pytest.mark.parametrize("model", [gaussian_iid_corr(0.5), rademacher_product()], ids=lambda m: m.variant)
    def test_monotone_in_epsilon_quadrature(self, model):
        vals = [lindeberg_L(model, ONE_ONE, 5, e) for e in (0.05, 0.2, 0.5, 1.0, 2.0)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        assert 0 <= vals[-1] and vals[0] <= 1 + 1e-12


class TestScriptL:
    def test_unit_scaling(self):
        m = bounded_rademacher_pair(Fraction(1, 4))
        assert script_L(m, ONE_ONE.scaled(1), 9, Fraction(1, 2)) == script_L(m, ONE_ONE, 9, Fraction(1, 2))

    def test_doubling(self):
        m = bounded_rademacher_pair(Fraction(1, 4))
        for k in (1, 2, 3, 5, 16):
            for eps in (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(4)):
                lhs = script_L(m, ProjectionSpec(2, 2), k, eps)
                assert lhs == 4 * script_L(m, ONE_ONE, k, eps / 2)

    @settings(max_examples=80, deadline=None)
    @given(
        st.fractions(-1, 1, max_denominator=12),
        st.integers(1, 40),
        st.fractions(Fraction(1, 10), 5, max_denominator=10),
        st.fractions(Fraction(-3), 3, max_denominator=6).filter(lambda g: g != 0),
        st.fractions(-2, 2, max_denominator=4),
        st.fractions(-2, 2, max_denominator=4),
    )
    def test_scaling_law(self, rho, k, eps, gamma, s, t):
        m = bounded_rademacher_pair(rho)
        spec = ProjectionSpec(s, t)
        assert script_L(m, spec.scaled(gamma), k, eps) == gamma**2 * script_L(m, spec, k, eps / abs(gamma))

    @settings(max_examples=80, deadline=None)
    @given(
        st.fractions(-1, 1, max_denominator=12),
        st.integers(1, 40),
        st.fractions(Fraction(1, 10), 5, max_denominator=10),
        st.fractions(-2, 2, max_denominator=4),
        st.fractions(-2, 2, max_denominator=4),
        st.fractions(-2, 2, max_denominator=4),
        st.fractions(-2, 2, max_denominator=4),
    )
    def test_subadditivity(self, rho, k, eps, s1, t1, s2, t2):
        m = bounded_rademacher_pair(rho)
        a, b = ProjectionSpec(s1, t1), ProjectionSpec(s2, t2)
        lhs = script_L(m, a + b, k, eps)
        rhs = 4 * script_L(m, a, k, eps / 2) + 4 * script_L(m, b, k, eps / 2)
        assert lhs <= rhs

    def test_named_subadditivity_case(self):
        m = bounded_rademacher_pair(Fraction(1, 2))
        eps = Fraction(1, 2)
        for k in (1, 2, 3, 8):
            lhs = script_L(m, ProjectionSpec(1, 1) + ProjectionSpec(1, -1), k, eps)
            assert lhs <= 4 * script_L(m, ProjectionSpec(1, 1), k, eps / 2) + 4 * script_L(m, ProjectionSpec(1, -1), k, eps / 2)

    def test_relation_to_normalized(self):
        m = gaussian_iid_corr(0.3)
        tk = tau_k(m, 12, 1, 1)
        assert script_L(m, ONE_ONE, 12, 0.4 * math.sqrt(tk)) == pytest.approx(tk * lindeberg_L(m, ONE_ONE, 12, 0.4), rel=1e-10)


class TestMaxShareBound:
    @pytest.mark.parametrize("k", [1, 2, 17, 1000])
    def test_iid_share(self, k):
        rep = max_share_bound(bounded_rademacher_pair(Fraction(1, 5)), ONE_ONE, k, Fraction(1, 2))
        assert rep.a_k_sq == Fraction(1, k)
        assert rep.bound_check

    def test_first_index(self):
        assert max_share_bound(gaussian_iid_corr(0.5), ONE_ONE, 1, 0.3).a_k_sq == 1

    def test_bounded_slack(self):
        rep = max_share_bound(bounded_rademacher_pair(0.3), ONE_ONE, 100, 0.3)
        assert rep.a_k_sq == pytest.approx(0.01)
        assert rep.bound_check and rep.a_k_sq <= 0.09 + rep.L_k

    def test_varying_schedule_share(self):
        m = gaussian_varying_schedule(Schedule("alternating", 0.9))
        rep = max_share_bound(m, ONE_ONE, 10, 0.5)
        assert rep.a_k_sq == pytest.approx(3.8 / 20)
        assert rep.bound_check

    @pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
    @pytest.mark.parametrize("k", [1, 2, 5, 10, 100, 1000])
    @pytest.mark.parametrize(
        "model",
        [gaussian_iid_corr(0.5), rademacher_product(), bounded_rademacher_pair(0.3), gaussian_varying_schedule(Schedule("decay", 0.9, 0.5))],
        ids=lambda m: m.label,
    )
    def test_bound_holds_across_sweep(self, model, k, eps):
        rep = max_share_bound(model, ProjectionSpec(1, 0.5), k, eps)
        assert rep.bound_check
        assert rep.a_k_sq <= eps**2 + rep.L_k + 1e-12
        assert rep.L_k >= 0 and rep.script_L >= 0 and rep.tau_k > 0

    def test_degenerate_report(self):
        rep = max_share_bound(gaussian_iid_corr(-1.0), ONE_ONE, 10, 0.5)
        assert rep.degenerate and not rep.bound_check
        assert rep.tau_k == 0 and math.isnan(rep.L_k)
