import math

import numpy as np
import pytest

from magspec.asymptotics import (
    airy_zero,
    epsilon_leading,
    fit_leading_coefficient,
    gap_coefficient,
    lambda_neg_asymptote,
    neumann_inflection,
)
from magspec.core import BoundaryCondition
from magspec.oscillator import EigenBranch, OscillatorGrid, branch_sample


def synthetic_branch(n, etas, gap_fn, bc=None):
    etas = np.asarray(etas, dtype=float)
    lam = (2 * n + 1) + gap_fn(etas)
    return EigenBranch(
        bc=bc or BoundaryCondition.dirichlet(),
        n=n,
        eta_samples=etas,
        lambda_samples=lam,
        boundary_values=np.zeros_like(etas),
        boundary_derivatives=np.zeros_like(etas),
        grid=OscillatorGrid(),
    )


class TestEpsilonLeading:
    def test_ground_coefficient(self):
        assert gap_coefficient(0) == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-12)
        assert gap_coefficient(0) == pytest.approx(1.1283792, abs=5e-8)

    def test_first_excited_coefficient(self):
        assert gap_coefficient(1) == pytest.approx(4.0 / math.sqrt(math.pi), rel=1e-12)

    def test_value_at_three(self):
        want = (2.0 / math.sqrt(math.pi)) * 3.0 * math.exp(-9.0)
        got = epsilon_leading(BoundaryCondition.dirichlet(), 0, 3.0)
        assert got == pytest.approx(want, rel=1e-12)
        assert got == pytest.approx(4.178e-4, rel=1e-3)

    def test_requires_positive_eta(self):
        with pytest.raises(ValueError):
            epsilon_leading(BoundaryCondition.dirichlet(), 0, -1.0)


class TestFit:
    def test_recovers_planted_coefficient(self):
        etas = np.linspace(2.5, 3.5, 11)
        br = synthetic_branch(0, etas, lambda e: 1.2 * e * np.exp(-e * e))
        c0, c1 = fit_leading_coefficient(br, (2.5, 3.5))
        assert c0 == pytest.approx(1.2, abs=1e-6)
        assert abs(c1) < 1e-6

    def test_recovers_two_term_model(self):
        etas = np.linspace(2.5, 3.5, 11)
        br = synthetic_branch(0, etas, lambda e: (0.9 + 0.3 / e**2) * e * np.exp(-e * e))
        c0, c1 = fit_leading_coefficient(br, (2.5, 3.5))
        assert c0 == pytest.approx(0.9, abs=1e-8)
        assert c1 == pytest.approx(0.3, abs=1e-8)

    def test_dirichlet_branch_close_to_theory(self, grid, bc_d, caches):
        etas = np.linspace(2.5, 3.5, 11)
        br = branch_sample(bc_d, 0, etas, grid, cache=caches(bc_d))
        c0, _ = fit_leading_coefficient(br, (2.5, 3.5))
        assert abs(c0 - gap_coefficient(0)) / gap_coefficient(0) < 0.10

    def test_neumann_branch_from_below(self, grid, bc_n, caches):
        etas = np.linspace(2.5, 3.5, 11)
        br = branch_sample(bc_n, 0, etas, grid, cache=caches(bc_n))
        assert np.all(br.lambda_samples < 1.0)
        c0, _ = fit_leading_coefficient(br, (2.5, 3.5))
        assert abs(c0 - gap_coefficient(0)) / gap_coefficient(0) < 0.10

    def test_too_few_samples(self):
        br = synthetic_branch(0, [2.6, 2.8, 3.0], lambda e: 1.2 * e * np.exp(-e * e))
        with pytest.raises(ValueError):
            fit_leading_coefficient(br, (2.5, 3.5))

    def test_bad_model_rejected(self):
        etas = np.linspace(2.5, 3.5, 11)
        br = synthetic_branch(0, etas, lambda e: np.exp(-e))  # wrong decay law
        with pytest.raises(ValueError):
            fit_leading_coefficient(br, (2.5, 3.5))

    def test_window_left_bound(self):
        etas = np.linspace(1.0, 3.5, 20)
        br = synthetic_branch(0, etas, lambda e: 1.2 * e * np.exp(-e * e))
        with pytest.raises(ValueError):
            fit_leading_coefficient(br, (1.0, 3.5))


class TestAiryZero:
    def test_first_ai_zero(self):
        assert airy_zero("Ai", 1) == pytest.approx(2.3381074, abs=1e-6)

    def test_first_aiprime_zero(self):
        assert airy_zero("AiPrime", 1) == pytest.approx(1.0187929, abs=1e-6)

    def test_ordering(self):
        assert airy_zero("Ai", 2) > airy_zero("Ai", 1)
        assert airy_zero("AiPrime", 2) > airy_zero("AiPrime", 1)

    def test_against_special_function_library(self):
        # independent corroboration: the oracle never calls scipy itself
        from scipy.special import airy as sp_airy

        for k in (1, 2, 5, 10):
            assert abs(sp_airy(-airy_zero("Ai", k))[0]) < 1e-12
            assert abs(sp_airy(-airy_zero("AiPrime", k))[1]) < 1e-12

    def test_range_checks(self):
        with pytest.raises(ValueError):
            airy_zero("Ai", 0)
        with pytest.raises(ValueError):
            airy_zero("Ai", 11)
        with pytest.raises(ValueError):
            airy_zero("Bi", 1)


class TestDeepWallAsymptote:
    def test_dirichlet_formula(self):
        want = 64.0 + 16.0 ** (2.0 / 3.0) * airy_zero("Ai", 1)
        got = lambda_neg_asymptote(BoundaryCondition.dirichlet(), 0, -8.0)
        assert got == pytest.approx(want, rel=1e-12)

    def test_neumann_below_dirichlet(self):
        d = lambda_neg_asymptote(BoundaryCondition.dirichlet(), 0, -8.0)
        n = lambda_neg_asymptote(BoundaryCondition.neumann(), 0, -8.0)
        assert n < d

    def test_excess_grows_like_two_thirds_power(self):
        bc = BoundaryCondition.dirichlet()
        e1 = lambda_neg_asymptote(bc, 0, -4.0) - 16.0
        e2 = lambda_neg_asymptote(bc, 0, -16.0) - 256.0
        assert e2 / e1 == pytest.approx(4.0 ** (2.0 / 3.0), rel=1e-12)

    def test_matches_solver_at_minus_eight(self, grid, bc_d, bc_n, caches):
        for bc in (bc_d, bc_n):
            lam = caches(bc).lam(-8.0, 0)
            pred = lambda_neg_asymptote(bc, 0, -8.0)
            assert abs(lam - pred) / (lam - 64.0) < 0.05

    def test_regime_guard(self):
        with pytest.raises(ValueError):
            lambda_neg_asymptote(BoundaryCondition.dirichlet(), 0, -1.0)


class TestInflectionReport:
    def test_reports_estimate_without_asserting(self, grid, bc_n, caches):
        br = branch_sample(bc_n, 0, np.linspace(-2.0, 3.0, 51), grid, cache=caches(bc_n))
        est = neumann_inflection(br)
        assert -2.0 <= est <= 3.0
