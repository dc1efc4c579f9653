import math

import numpy as np
import pytest

from mimobc.errors import InadmissibleSourceError, LoewnerOrderError
from mimobc.fixtures import (
    admissible_channel_for,
    admissible_mixture_for,
    gaussian_source,
    random_channel,
    random_hierarchy,
    random_mixture,
    rng_for,
    scalar_channel,
    two_component_scalar_source,
)
from mimobc.model import aggregate_covariance, gaussian_entropy
from mimobc.verifier import (
    check_cramer_rao,
    check_debruijn,
    check_dembo,
    check_f_epsilon,
    check_fisher_convolution,
    check_fisher_dpi,
    check_fisher_shift,
    check_line_integral_entropy,
    converse_walkthrough,
    run_inequality_suite,
    solve_fixed_point,
)

# frozen oracle values for the hand-checked scalar fixture
# p=(1/2,1/2), component variances (1,3), unit perturbations.
CRAMER_RAO_GAP = 0.375 - 1.0 / 3.0          # 0.0416667 with equal means
FISHER_SHIFT_GAP = 1.75 - 5.0 / 3.0         # 0.0833333 for sigma 1 -> 2


def _scalar_equal_means():
    from mimobc.model import MixtureSource

    return MixtureSource(
        weights=np.array([0.5, 0.5]),
        means=np.zeros((2, 1)),
        comp_covs=np.array([[[1.0]], [[3.0]]]),
    )


class TestCramerRao:
    def test_scalar_gap(self):
        rep = check_cramer_rao(_scalar_equal_means(), np.eye(1))
        assert rep.passed
        assert rep.residual("min_eig(J - inv(Cov))") == pytest.approx(
            CRAMER_RAO_GAP, abs=1e-10
        )

    def test_gaussian_equality(self):
        rep = check_cramer_rao(gaussian_source(np.array([[2.0]])), np.eye(1))
        assert rep.passed
        assert abs(rep.residual("equality_gap")) <= 1e-12

    def test_random_mixtures(self):
        for seed in range(20):
            src = random_mixture(rng_for(301, seed), 2, 3)
            assert check_cramer_rao(src, np.eye(2)).passed


class TestFisherShift:
    def test_scalar_gap(self):
        rep = check_fisher_shift(_scalar_equal_means(), np.eye(1), 2 * np.eye(1))
        assert rep.passed
        assert rep.residual("min_eig(big_side - small_side)") == pytest.approx(
            FISHER_SHIFT_GAP, abs=1e-10
        )

    def test_gaussian_equality(self):
        rep = check_fisher_shift(
            gaussian_source(np.array([[2.0]])), np.eye(1), 3 * np.eye(1)
        )
        assert rep.passed
        assert abs(rep.residual("min_eig(big_side - small_side)")) <= 1e-12

    def test_order_violation_raises(self):
        with pytest.raises(LoewnerOrderError):
            check_fisher_shift(_scalar_equal_means(), 2 * np.eye(1), np.eye(1))

    def test_random_matrix_cases(self):
        for seed in range(10):
            rng = rng_for(302, seed)
            src = random_mixture(rng, 2, 2)
            from mimobc.fixtures import random_spd

            a = random_spd(rng, 2, 0.5, 1.5)
            b = a + random_spd(rng, 2, 0.1, 1.0)
            assert check_fisher_shift(src, a, b, tol=1e-8).passed


class TestDeBruijn:
    def test_scalar(self):
        rep = check_debruijn(two_component_scalar_source(), np.eye(1))
        assert rep.passed

    def test_matrix_mixtures(self):
        for seed in range(5):
            src = random_mixture(rng_for(303, seed), 2, 3)
            rep = check_debruijn(src, np.eye(2), fd_step=1e-4, tol=1e-6)
            assert rep.passed, rep.to_dict()

    def test_step_guard(self):
        with pytest.raises(ValueError):
            check_debruijn(two_component_scalar_source(), 1e-6 * np.eye(1), fd_step=1e-4)


class TestDembo:
    def test_mixture_strict(self):
        rep = check_dembo(two_component_scalar_source(), np.eye(1))
        assert rep.passed
        assert rep.residual("entropy_minus_bound") > 1e-4

    def test_gaussian_equality(self):
        rep = check_dembo(gaussian_source(np.array([[1.3]])), np.eye(1))
        assert rep.passed
        assert abs(rep.residual("equality_gap")) <= 1e-12

    def test_random(self):
        for seed in range(20):
            src = random_mixture(rng_for(304, seed), 3, 2)
            assert check_dembo(src, np.eye(3)).passed


class TestFisherDpi:
    def test_three_level(self):
        h = random_hierarchy(rng_for(305), 1, (4, 2))
        rep = check_fisher_dpi(h, 2, 3, np.eye(1))
        assert rep.passed

    def test_same_level_equality(self):
        h = random_hierarchy(rng_for(306), 1, (3, 2))
        rep = check_fisher_dpi(h, 2, 2, np.eye(1))
        assert rep.passed
        assert abs(rep.residuals[0].value) <= 1e-10

    def test_level_order_enforced(self):
        h = random_hierarchy(rng_for(307), 1, (3, 2))
        with pytest.raises(ValueError):
            check_fisher_dpi(h, 3, 2, np.eye(1))

    def test_two_dimensional(self):
        h = random_hierarchy(rng_for(308), 2, (3, 2))
        rep = check_fisher_dpi(h, 2, 3, np.eye(2))
        assert rep.passed, rep.to_dict()


class TestFisherConvolution:
    def test_scalar(self):
        rep = check_fisher_convolution(
            two_component_scalar_source(), np.eye(1), np.eye(1)
        )
        assert rep.passed

    def test_gaussian_equality(self):
        rep = check_fisher_convolution(
            gaussian_source(np.array([[1.0]])), np.eye(1), 2 * np.eye(1)
        )
        assert rep.passed
        assert abs(rep.residuals[0].value) <= 1e-12

    def test_random_matrix(self):
        for seed in range(10):
            rng = rng_for(309, seed)
            src = random_mixture(rng, 2, 3)
            from mimobc.fixtures import random_spd

            a = random_spd(rng, 2, 0.5, 1.5)
            b = random_spd(rng, 2, 0.5, 1.5)
            assert check_fisher_convolution(src, a, b).passed


class TestLineIntegralEntropy:
    def test_scalar_closed_form(self):
        # Gaussian X with variance 1: h difference 0.5 ln((1+2)/(1+1)) along
        # the noise path 1 -> 2.
        g = gaussian_source(np.array([[1.0]]))
        rep = check_line_integral_entropy(g, np.eye(1), 2 * np.eye(1))
        assert rep.passed
        assert abs(rep.residual("integral_minus_entropy_gap")) <= 1e-10

    def test_mixture(self):
        rep = check_line_integral_entropy(
            two_component_scalar_source(), np.eye(1), 2 * np.eye(1)
        )
        assert rep.passed

    def test_matrix_random(self):
        for seed in range(5):
            rng = rng_for(310, seed)
            src = random_mixture(rng, 2, 2)
            from mimobc.fixtures import random_spd

            a = random_spd(rng, 2, 0.5, 1.5)
            b = a + random_spd(rng, 2, 0.1, 1.0)
            rep = check_line_integral_entropy(src, a, b)
            assert rep.passed, rep.to_dict()


class TestFEpsilon:
    EPS = (1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0)

    def test_gaussian_identically_zero(self):
        rep = check_f_epsilon(gaussian_source(np.array([[1.5]])), np.eye(1), self.EPS)
        assert rep.passed
        for r in rep.residuals:
            if r.kind == "eq":
                assert abs(r.value) <= 1e-10

    def test_mixture(self):
        rep = check_f_epsilon(two_component_scalar_source(), np.eye(1), self.EPS)
        assert rep.passed, rep.to_dict()

    def test_matrix(self):
        src = random_mixture(rng_for(311), 2, 2)
        rep = check_f_epsilon(src, np.eye(2), self.EPS)
        assert rep.passed, rep.to_dict()


class TestFixedPoint:
    def test_gaussian_t_zero(self):
        # Matched Gaussian: the lower endpoint already satisfies the entropy
        # match, so t* = 0 and A equals the source covariance.
        C = np.array([[0.6]])
        src = gaussian_source(C)
        ch = scalar_channel()
        res = solve_fixed_point(src, ch, 1, ch.input_cap)
        assert res.t_star == 0.0
        assert abs(res.A[0, 0] - 0.6) <= 1e-8
        assert res.entropy_match_residual <= 1e-10

    def test_mixture_bracketed(self):
        ch = scalar_channel(S=2.5)
        src = two_component_scalar_source()
        res = solve_fixed_point(src, ch, 2, ch.input_cap)
        assert res.bracketed
        assert 0.0 <= res.t_star <= 1.0
        assert abs(res.entropy_match_residual) <= 1e-8
        assert res.sandwich_lower_residual >= -1e-8
        assert res.sandwich_upper_residual >= -1e-8

    def test_random_two_user(self):
        for seed in range(10):
            rng = rng_for(312, seed)
            ch = random_channel(rng, 2, 2)
            src = admissible_mixture_for(ch, rng, 2)
            res = solve_fixed_point(src, ch, 2, ch.input_cap)
            assert abs(res.entropy_match_residual) <= 1e-8
            assert res.sandwich_lower_residual >= -1e-8
            assert res.sandwich_upper_residual >= -1e-8

    def test_bad_user_index(self):
        ch = scalar_channel()
        with pytest.raises(ValueError):
            solve_fixed_point(gaussian_source(np.array([[0.5]])), ch, 3, ch.input_cap)


class TestConverseWalkthrough:
    def test_two_user_mixture(self):
        ch = scalar_channel(S=2.5)
        rep = converse_walkthrough(two_component_scalar_source(), ch, samples=20000)
        assert rep.passed
        assert rep.dominated
        assert len(rep.stages) == 1
        assert len(rep.achieved_rates) == 2
        # split recovered from the stage covariances adds up to the cap
        total = sum(rep.split)
        assert np.allclose(total, ch.input_cap, atol=1e-8)

    def test_gaussian_tight(self):
        # X Gaussian with Cov(X) = S: achieved rates should sit on the
        # boundary, matching the region point of the recovered split.
        ch = scalar_channel()
        rep = converse_walkthrough(gaussian_source(np.array([[1.0]])), ch, samples=20000)
        assert rep.passed
        assert np.allclose(rep.achieved_rates, rep.region_rates, atol=1e-6)

    def test_inadmissible_raises(self):
        ch = scalar_channel()  # cap 1 < Cov(X) = 2.0625
        with pytest.raises(InadmissibleSourceError):
            converse_walkthrough(two_component_scalar_source(), ch, samples=2000)

    def test_three_user_hierarchy(self):
        rng = rng_for(313)
        h = random_hierarchy(rng, 1, (3, 2))
        ch = admissible_channel_for(aggregate_covariance(h.base), rng, 3)
        rep = converse_walkthrough(h, ch, samples=20000)
        assert rep.passed, [r.to_dict() for r in rep.reports]
        assert len(rep.stages) == 2
        assert len(rep.achieved_rates) == 3

    def test_mc_method_agrees(self):
        ch = scalar_channel(S=2.5)
        src = two_component_scalar_source()
        a = converse_walkthrough(src, ch, samples=50000, method="quad")
        b = converse_walkthrough(src, ch, samples=50000, method="mc")
        assert b.passed
        assert np.allclose(a.achieved_rates, b.achieved_rates, atol=0.05)


class TestInequalitySuite:
    def test_scalar_fixture_all_pass(self):
        reports = run_inequality_suite(two_component_scalar_source())
        assert reports, "suite must not be empty"
        names = {r.name for r in reports}
        assert {
            "cramer_rao",
            "fisher_shift",
            "de_bruijn",
            "dembo",
            "fisher_dpi",
            "fisher_convolution",
            "line_integral_entropy",
            "f_epsilon",
        } <= names
        for r in reports:
            assert r.passed, r.to_dict()

    def test_gaussian_all_pass(self):
        for r in run_inequality_suite(gaussian_source(np.array([[1.0, 0.2], [0.2, 2.0]]))):
            assert r.passed, r.to_dict()

    def test_random_matrix_mixtures(self):
        for seed in range(5):
            src = random_mixture(rng_for(314, seed), 2, 3)
            for r in run_inequality_suite(src):
                assert r.passed, r.to_dict()
