import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from netclt.charfn import CfGrid, EmpiricalCf, cf_psi_rho, empirical_cf
from netclt.convergence import (
    Thresholds,
    assess,
    bivariate_normal_sample,
    cf_sup_distance,
    energy_distance,
    energy_statistic,
    energy_test,
    ks_statistic,
    limit_variances,
)
from netclt.models import gaussian_iid_corr, make_generator, rademacher_product
from netclt.netpath import make_point
from netclt.stats import replicate, rho_star


def normal_pairs(size, rho, seed):
    return bivariate_normal_sample(size, rho, make_generator(seed))


class TestCfSupDistance:
    def test_analytic_self_distance_is_zero(self):
        g = CfGrid.lattice()
        for rho in (-0.7, 0.0, 0.5):
            exact = EmpiricalCf(g, cf_psi_rho(g.points[:, 0], g.points[:, 1], rho).astype(complex), 1)
            assert cf_sup_distance(exact, rho) == 0

    def test_large_sample_close(self):
        emp = empirical_cf(normal_pairs(100_000, 0.0, 1), CfGrid.lattice())
        assert cf_sup_distance(emp, 0.0) <= 0.02

    def test_wrong_target_gap(self):
        emp = empirical_cf(normal_pairs(20_000, 0.0, 2), CfGrid.lattice())
        gap = abs(emp.value_at(1, 1) - cf_psi_rho(1, 1, 0.8))
        assert gap >= math.exp(-1) - math.exp(-1.8) - 0.02
        assert cf_sup_distance(emp, 0.8) >= gap

    def test_origin_contributes_nothing(self):
        g = CfGrid(np.array([[0.0, 0.0]]))
        assert cf_sup_distance(empirical_cf(np.zeros((1, 2)), g), 0.0) == 0

    def test_monotone_discrimination(self):
        g = CfGrid.lattice()
        p = make_point(1000, 1000)
        dists = [cf_sup_distance(empirical_cf(replicate(gaussian_iid_corr(r), p, 20000, 7).samples, g), 0.0)
                 for r in (0.0, 0.25, 0.5, 0.8)]
        assert dists == sorted(dists)


class TestKs:
    def test_single_value(self):
        assert ks_statistic([0.0], 1.0) == 0.5

    def test_matches_scipy(self):
        x = make_generator(3).standard_normal(5000) * 1.3
        for theta in (1.0, 1.69, 0.5):
            ref = sps.kstest(x, "norm", args=(0, math.sqrt(theta))).statistic
            assert ks_statistic(x, theta) == pytest.approx(ref, rel=1e-12)

    def test_calibrated(self):
        x = make_generator(4).standard_normal(20000) * math.sqrt(0.6)
        assert ks_statistic(x, 0.6) <= 1.63 / math.sqrt(20000)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.01, 100), st.integers(0, 1000))
    def test_scale_invariance(self, theta, seed):
        z = make_generator(seed).standard_normal(300)
        assert ks_statistic(z * math.sqrt(theta), theta) == pytest.approx(ks_statistic(z, 1.0), abs=1e-12)

    def test_point_mass(self):
        assert ks_statistic([0.0, 0.0], 0.0) == 0
        assert ks_statistic([0.0, 1.0, -1.0, 2.0], 0.0) == 0.5

    def test_bounded(self):
        x = make_generator(5).standard_cauchy(1000) + 10
        assert 0 <= ks_statistic(x, 1.0) <= 1

    def test_errors(self):
        with pytest.raises(ValueError):
            ks_statistic([], 1.0)
        with pytest.raises(ValueError):
            ks_statistic([np.inf], 1.0)
        with pytest.raises(ValueError):
            ks_statistic([0.0], -1.0)


class TestEnergy:
    def test_self_comparison_is_zero(self):
        x = normal_pairs(700, 0.3, 8)
        assert energy_statistic(x, x) == 0
        assert energy_distance(x, 0.3, seed=1, reference=x) == 0

    def test_nonnegative_and_symmetric(self):
        x, y = normal_pairs(400, 0.0, 9), normal_pairs(300, 0.9, 10)
        assert energy_statistic(x, y) > 0
        assert energy_statistic(x, y) == pytest.approx(energy_statistic(y, x), rel=1e-12)

    def test_pooled_route_matches_direct(self):
        x, y = normal_pairs(800, 0.0, 11), normal_pairs(800, 0.5, 12)
        res = energy_test(x, 0.5, seed=3, reference=y, permutations=5)
        assert res.statistic == pytest.approx(energy_statistic(x, y), rel=1e-10)

    def test_same_law_below_quantile(self):
        x = normal_pairs(3000, 0.4, 13)
        res = energy_test(x, 0.4, seed=14)
        assert res.passed and 0 <= res.statistic <= res.threshold

    def test_detects_correlation_gap(self):
        x = normal_pairs(5000, 0.0, 15)
        res = energy_test(x, 0.8, seed=16)
        assert not res.passed and res.statistic > res.threshold

    def test_subsampling_is_seeded(self):
        x = normal_pairs(12000, 0.0, 17)
        a = energy_distance(x, 0.0, seed=5, max_points=1000)
        assert a == energy_distance(x, 0.0, seed=5, max_points=1000)
        assert a != energy_distance(x, 0.0, seed=6, max_points=1000)

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            energy_distance(np.zeros((1, 2)), 0.0, seed=1)


class TestAssess:
    def test_uncorrelated_dependent_pair_passes(self):
        b = replicate(rademacher_product(), make_point(2000, 2000), 20000, 31)
        rep = assess(b, 0.0, seed=1)
        assert rep.passed, rep.verdict
        assert set(rep.verdict) == {"cf", "ks_w", "ks_u", "energy"}

    def test_correlated_gaussian_against_own_limit(self):
        b = replicate(gaussian_iid_corr(0.5), make_point(1000, 1000), 20000, 32)
        rep = assess(b, 0.5, seed=2)
        assert rep.passed, rep.verdict
        assert rep.theta_w == pytest.approx(1 - rho_star(0.5, 1, 1))
        assert rep.ks_w <= 1.63 / math.sqrt(20000)

    def test_correlated_gaussian_against_independent_limit_fails(self):
        b = replicate(gaussian_iid_corr(0.5), make_point(1000, 1000), 20000, 33)
        rep = assess(b, 0.0, seed=3)
        assert not rep.verdict["cf"]
        assert rep.cf_sup_dist > 0.03

    def test_limit_variances(self):
        assert limit_variances(0.5, 1.0, 2.0, 1.0) == pytest.approx((0.6, 1.4))
        assert limit_variances(0.0, 1.0, 2.0, 3.0) == (1.0, 1.0)

    def test_report_fields(self):
        b = replicate(gaussian_iid_corr(0.2), make_point(50, 80), 500, 34)
        rep = assess(b, 0.2, Thresholds(permutations=20), seed=4)
        d = rep.as_dict()
        assert d["point"] == [50, 80]
        assert all(d[k] >= 0 for k in ("cf_sup_dist", "ks_w", "ks_u", "energy_dist"))
        assert rep.ks_limit == pytest.approx(1.63 / math.sqrt(500))
