import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magspec.core import BoundaryCondition, HeavisideConvention, ModelParams, PotentialField
from magspec.counting import (
    EdgeQuad,
    Rectangle,
    bound_correction_branch,
    bound_correction_eigfn,
    hermite_function,
    hermite_tail_mass,
    kappa0_limit,
    n_mw_density,
    smooth_cutoff,
    spectral_gap_check,
    superstrong_bound_correction,
    two_term_count,
)
from magspec.oscillator import branch_crossing, neumann_minimum

L = HeavisideConvention.LEFT_CONTINUOUS
R = HeavisideConvention.RIGHT_CONTINUOUS
TWO_PI = 2 * math.pi


class TestBulkDensity:
    def test_single_level(self):
        assert n_mw_density(1.0, -1.0, 0.0, 0.5) == pytest.approx(0.5 / TWO_PI, rel=1e-12)
        assert n_mw_density(1.0, -1.0, 0.0, 0.5) == pytest.approx(0.0795775, abs=1e-7)

    def test_empty(self):
        assert n_mw_density(1.0, 0.0, 0.0, 0.5) == 0.0

    def test_threshold_counts_per_convention(self):
        # (2j+1) mu_h F + V hits tau exactly at j = 0: the level is included
        # only under the right-continuous convention
        assert n_mw_density(1.0, -1.0, 0.0, 1.0, 1.0, L) == 0.0
        assert n_mw_density(1.0, -1.0, 0.0, 1.0, 1.0, R) == pytest.approx(1.0 / TWO_PI)

    @given(st.floats(-2.0, 3.0), st.floats(-2.0, 3.0))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_tau(self, t1, t2):
        lo, hi = sorted((t1, t2))
        assert n_mw_density(1.0, -1.0, lo, 0.4) <= n_mw_density(1.0, -1.0, hi, 0.4)

    def test_validation(self):
        with pytest.raises(ValueError):
            n_mw_density(0.0, 0.0, 1.0, 0.5)


class TestKappa0:
    def test_dirichlet(self):
        assert kappa0_limit(BoundaryCondition.dirichlet(), 1.0) == pytest.approx(
            -1.0 / (4 * math.pi), rel=1e-12
        )

    def test_neumann(self):
        assert kappa0_limit(BoundaryCondition.neumann(), 1.0) == pytest.approx(
            1.0 / (4 * math.pi), rel=1e-12
        )

    def test_sqrt_scaling(self):
        assert kappa0_limit(BoundaryCondition.dirichlet(), 4.0) == pytest.approx(
            -2.0 / (4 * math.pi), rel=1e-12
        )


class TestBranchForm:
    def test_below_spectrum_is_zero(self, grid, bc_d, caches):
        corr = bound_correction_branch(bc_d, 0.5 * 0.25, 0.25, grid, cache=caches(bc_d))
        assert corr.value == 0.0

    def test_level_three_hbar_cancels(self, grid, bc_d, caches):
        # tau / hbar = 3 puts the only crossing exactly at the origin
        corr = bound_correction_branch(bc_d, 3 * 0.25, 0.25, grid, cache=caches(bc_d))
        assert abs(corr.value) < 1e-9

    def test_single_term_window_negative(self, grid, bc_d, caches):
        # tau/hbar = 2: only the ground branch is occupied and its crossing
        # sits right of the origin, so the correction is negative
        hbar = 0.25
        corr = bound_correction_branch(bc_d, 2 * hbar, hbar, grid, cache=caches(bc_d))
        roots = branch_crossing(bc_d, 0, 2.0, grid, (-3.0, 8.0), cache=caches(bc_d))
        assert corr.value < 0
        assert corr.value == pytest.approx(
            -math.sqrt(hbar) / TWO_PI * roots[0], rel=1e-9
        )

    def test_neumann_below_minimum_zero(self, grid, bc_n, caches):
        _, lam0 = neumann_minimum(0, grid, caches(bc_n))
        hbar = 0.25
        corr = bound_correction_branch(bc_n, (lam0 - 1e-3) * hbar, hbar, grid, cache=caches(bc_n))
        assert corr.value == 0.0

    def test_neumann_positive_in_dip(self, grid, bc_n, caches):
        _, lam0 = neumann_minimum(0, grid, caches(bc_n))
        hbar = 0.25
        level = 0.5 * (lam0 + 1.0)
        corr = bound_correction_branch(bc_n, level * hbar, hbar, grid, cache=caches(bc_n))
        assert corr.value > 0

    def test_error_estimate_sane(self, grid, bc_d, caches):
        corr = bound_correction_branch(bc_d, 1.2 * 0.25, 0.25, grid, cache=caches(bc_d))
        assert corr.value != 0.0
        assert corr.quad_error < abs(corr.value) / 10

    def test_validation(self, grid, bc_d):
        with pytest.raises(ValueError):
            bound_correction_branch(bc_d, -1.0, 0.1, grid)
        with pytest.raises(ValueError):
            bound_correction_branch(bc_d, 1.0, 0.0, grid)


class TestEigenfunctionForm:
    def test_below_spectrum_is_zero(self, grid, bc_d, caches):
        corr = bound_correction_eigfn(bc_d, 0.5 * 0.25, 0.25, grid, cache=caches(bc_d))
        assert corr.value == 0.0

    def test_matches_branch_form(self, grid, bc_d, caches):
        br = bound_correction_branch(bc_d, 1.0, 0.1, grid, cache=caches(bc_d))
        ef = bound_correction_eigfn(bc_d, 1.0, 0.1, grid, EdgeQuad(), cache=caches(bc_d))
        assert abs(br.value - ef.value) <= br.quad_error + ef.quad_error
        assert abs(br.value - ef.value) <= 0.15 * abs(br.value)

    def test_records_provenance(self, grid, bc_d, caches):
        ef = bound_correction_eigfn(bc_d, 1.0, 0.2, grid, cache=caches(bc_d))
        assert ef.method == "EigenfunctionIntegral"
        assert ef.truncation["j_terms"] >= 1


class TestHermiteHelpers:
    def test_normalization(self):
        w = np.linspace(-12, 12, 20001)
        for n in (0, 1, 4):
            psi = hermite_function(n, w)
            assert np.trapezoid(psi**2, w) == pytest.approx(1.0, abs=1e-10)

    def test_tail_mass_limits(self):
        assert hermite_tail_mass(0, -20.0) == pytest.approx(1.0, abs=1e-12)
        assert hermite_tail_mass(0, 20.0) == pytest.approx(0.0, abs=1e-12)
        assert hermite_tail_mass(0, 0.0) == pytest.approx(0.5, abs=1e-8)


class TestTwoTermCount:
    def test_vanishes_when_nothing_occupied(self, grid, bc_d):
        params = ModelParams(mu=4.0, h=0.5)  # mu h = 2: lowest level above tau - V
        w = PotentialField(v=lambda x1, x2: -np.ones_like(np.asarray(x1, dtype=float)))
        val = two_term_count(Rectangle(1.0, 1.0), w, params, 0.0, bc_d, grid=grid)
        assert val == 0.0

    def test_boundary_weight_zero_reduces_to_bulk(self, grid, bc_d):
        params = ModelParams(mu=3.0, h=0.2)
        w = PotentialField(v=lambda x1, x2: -np.ones_like(np.asarray(x1, dtype=float)))

        def psi(x1, x2):
            # vanishes on both walls, integrates cleanly over the bulk
            return np.sin(math.pi * np.asarray(x1, dtype=float)) ** 2

        val = two_term_count(Rectangle(1.0, 1.0), w, params, 0.0, bc_d, psi=psi, grid=grid)
        dens = n_mw_density(1.0, -1.0, 0.0, params.hbar_large) / params.h**2
        assert val == pytest.approx(dens * 0.5, rel=1e-9)

    def test_strip_matches_manual_sum(self, grid, bc_d, caches):
        params = ModelParams(mu=3.0, h=0.2)
        w = PotentialField(v=lambda x1, x2: -np.ones_like(np.asarray(x1, dtype=float)))
        val = two_term_count(Rectangle(2.0, 1.0), w, params, 0.0, bc_d, grid=grid)
        bulk = n_mw_density(1.0, -1.0, 0.0, params.hbar_large) / params.h**2 * 2.0
        corr = bound_correction_branch(bc_d, 1.0, params.hbar_large, grid, cache=caches(bc_d))
        assert val == pytest.approx(bulk + 2 * corr.value / params.h, rel=1e-7)

    def test_f_floor_enforced(self, grid, bc_d):
        params = ModelParams(mu=3.0, h=0.2)
        w = PotentialField(
            v=lambda x1, x2: np.zeros_like(np.asarray(x1, dtype=float)),
            f=lambda x1, x2: np.zeros_like(np.asarray(x1, dtype=float)),
        )
        with pytest.raises(ValueError):
            two_term_count(Rectangle(1.0, 1.0), w, params, 0.0, bc_d, grid=grid)


class TestSuperstrong:
    def test_elliptic_case_vanishes(self, grid, bc_d):
        # V - tau > 0 keeps every indicator pair equal, term by term
        params = ModelParams(mu=40.0, h=0.05)
        w_eff = PotentialField(v=lambda x1, x2: 0.5 * np.ones_like(np.asarray(x1, dtype=float)))
        val = superstrong_bound_correction(
            bc_d, 1.0, params, w_eff, x2_range=(0.0, 1.0), grid=grid
        )
        assert val == 0.0

    def test_constant_effective_potential_all_terms_cancel(self, grid, bc_d):
        # both indicators agree for every index when the branch value and the
        # bulk threshold sit on the same side of W_eff everywhere
        params = ModelParams(mu=40.0, h=0.05)
        w_eff = PotentialField(v=lambda x1, x2: 100.0 * np.ones_like(np.asarray(x1, dtype=float)))
        val = superstrong_bound_correction(
            bc_d, 1.0, params, w_eff, x2_range=(0.0, 1.0), grid=grid
        )
        assert val == 0.0

    def test_single_level_against_crossing_oracle(self, grid, bc_d, caches):
        # constant W_eff crossing only the ground branch: the signed area
        # between the branch-crossing curve and the bulk-threshold curve
        # reduces to a 1D integral of the cutoff inside the crossing depth
        params = ModelParams(mu=40.0, h=0.05)
        mu_h = params.hbar_large
        w_val = 0.3  # W_eff = tau - V with tau = 0, V = -0.3
        w_eff = PotentialField(v=lambda x1, x2: -w_val * np.ones_like(np.asarray(x1, dtype=float)))
        eps_cut = 5.0 * params.hbar_half
        val = superstrong_bound_correction(
            bc_d, 1.0, params, w_eff, epsilon_cut=eps_cut, x2_range=(0.0, 1.0), grid=grid
        )
        # bulk occupied everywhere (threshold mu_h(1-z) = 0 < w_val); the
        # branch is occupied only beyond its crossing of 1 + w_val/mu_h
        level = 1.0 + w_val / mu_h
        roots = branch_crossing(bc_d, 0, level, grid, (-2.0, 12.0), cache=caches(bc_d))
        assert len(roots) == 1
        eta_cross = roots[0]
        x1 = np.linspace(0.0, eps_cut, 4001)
        zeta = smooth_cutoff(x1 / eps_cut)
        deficit = (x1 / params.hbar_half) < eta_cross
        expected = -params.mu / TWO_PI * np.trapezoid(zeta * deficit, x1) * 1.0
        assert val < 0
        assert val == pytest.approx(expected, rel=2e-3)

    def test_regime_guard(self, grid, bc_d):
        params = ModelParams(mu=2.0, h=0.1)
        w_eff = PotentialField(v=lambda x1, x2: np.zeros_like(np.asarray(x1, dtype=float)))
        with pytest.raises(ValueError):
            superstrong_bound_correction(bc_d, 1.0, params, w_eff, grid=grid)


class TestSpectralGap:
    def test_gap(self):
        res = spectral_gap_check(range(0, 4), 1.0, 2.0, (1.0, 1.0), (-0.5, -0.5), 0.0, 0.2)
        assert res.gap and res.witness_m is None

    def test_no_gap_witness(self):
        res = spectral_gap_check(range(0, 4), 1.0, 2.0, (1.0, 1.0), (0.0, 0.0), 0.0, 0.2)
        assert not res.gap
        assert res.witness_m == 0

    def test_box_sign_change_detected(self):
        res = spectral_gap_check(range(0, 2), 1.0, 2.0, (1.0, 1.0), (-0.1, 0.1), 0.0, 0.01)
        assert not res.gap

    def test_neumann_threshold_is_stricter(self, grid, bc_n, caches):
        # the Neumann edge branch dips below its Landau level, so the
        # effective ellipticity threshold lambda*_{N,0} sits below the
        # Dirichlet one (= 1); the bracket (2n-1, 2n+1) contains it
        _, lam_star = neumann_minimum(0, grid, caches(bc_n))
        assert -1.0 < lam_star < 1.0
        mu_h, eps, z = 2.0, 0.1, 1.0
        # requirement on V at tau=0: (threshold - z - eps) mu_h + V >= 0
        v_needed_d = -(1.0 - z - eps) * mu_h
        v_needed_n = -(lam_star - z - eps) * mu_h
        assert v_needed_n > v_needed_d


class TestCutoff:
    def test_plateau_and_support(self):
        assert smooth_cutoff(0.0) == 1.0
        assert smooth_cutoff(0.49) == 1.0
        assert smooth_cutoff(1.01) == 0.0
        mid = smooth_cutoff(0.75)
        assert 0.0 < mid < 1.0

    def test_c2_matching(self):
        # value and first two derivatives vanish smoothly at both ends
        t = np.array([0.5 - 1e-7, 0.5 + 1e-7, 1.0 - 1e-7])
        v = smooth_cutoff(t)
        assert v[0] == 1.0
        assert v[1] == pytest.approx(1.0, abs=1e-12)
        assert v[2] == pytest.approx(0.0, abs=1e-12)
