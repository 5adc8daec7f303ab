import math

import numpy as np
import pytest

from magspec.core import BoundaryCondition, BracketingError, GridResolutionError
from magspec.oscillator import (
    OscillatorGrid,
    branch_crossing,
    branch_sample,
    dh_derivative,
    neumann_minimum,
    robin_family,
    solve_spectrum,
)
from magspec.shooting import shooting_eigenvalues


class TestSolveSpectrum:
    def test_dirichlet_eta0(self, grid, bc_d, caches):
        lams = caches(bc_d).lams(0.0, 2)
        assert lams == pytest.approx([3.0, 7.0, 11.0], abs=1e-6)

    def test_neumann_eta0(self, grid, bc_n, caches):
        lams = caches(bc_n).lams(0.0, 2)
        assert lams == pytest.approx([1.0, 5.0, 9.0], abs=1e-6)

    def test_far_right_gap_closes(self, bc_d, caches):
        # branches approach their Landau levels from above; at eta = 6 the
        # gaps are below 1e-6 but the order-of-level identity still holds
        lams = caches(bc_d).lams(6.0, 1)
        assert 1.0 < lams[0] < 1.0 + 1e-6
        assert 3.0 < lams[1] < 3.0 + 1e-6

    def test_agrees_with_shooting_oracle(self, grid, bc_d, bc_n, caches):
        for bc in (bc_d, bc_n):
            for eta in (-3.0, 0.0, 6.0):
                oracle = shooting_eigenvalues(eta, bc, 3)
                tri = caches(bc).lams(eta, 3)
                assert np.max(np.abs(np.array(oracle) - tri)) < 1e-7

    def test_eigenfunction_normalized(self, grid, bc_d):
        pairs = solve_spectrum(0.5, bc_d, 2, grid)
        for p in pairs:
            w = np.ones(len(p.samples))
            w[0] = w[-1] = 0.5
            norm = float(np.sum(w * p.samples**2)) * p.step
            assert norm == pytest.approx(1.0, abs=1e-8)

    def test_boundary_lobe_positive(self, grid, bc_d, bc_n):
        for bc in (bc_d, bc_n):
            for p in solve_spectrum(-1.0, bc, 2, grid):
                u = p.samples
                amax = np.max(np.abs(u))
                idx = int(np.argmax(np.abs(u) > 0.05 * amax))
                assert u[idx] > 0

    def test_boundary_conditions_hold(self, grid):
        d = solve_spectrum(0.7, BoundaryCondition.dirichlet(), 0, grid)[0]
        assert d.boundary_value == 0.0
        n = solve_spectrum(0.7, BoundaryCondition.neumann(), 0, grid)[0]
        assert abs(n.boundary_derivative) < 1e-6
        r = solve_spectrum(0.7, BoundaryCondition.robin(2.0), 0, grid)[0]
        assert abs(r.boundary_derivative + 2.0 * r.boundary_value) < 1e-6

    def test_invalid_args(self, grid, bc_d):
        with pytest.raises(ValueError):
            solve_spectrum(float("inf"), bc_d, 0, grid)
        with pytest.raises(ValueError):
            solve_spectrum(0.0, bc_d, -1, grid)

    def test_richardson_order_at_reference(self, bc_d):
        errs = []
        for step in (2e-2, 1e-2):
            g = OscillatorGrid(step=step, left_cut=12.0, richardson_levels=2)
            lam = solve_spectrum(0.0, bc_d, 0, g, want_vectors=False)[0].lam
            errs.append(abs(lam - 3.0))
        order = math.log(errs[0] / errs[1]) / math.log(2.0)
        assert order >= 3.5

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            OscillatorGrid(step=0.0)
        with pytest.raises(ValueError):
            OscillatorGrid(left_cut=4.0)
        with pytest.raises(ValueError):
            OscillatorGrid(richardson_levels=0)


class TestBranchSample:
    def test_dirichlet_decreasing_through_three(self, grid, bc_d, caches):
        br = branch_sample(bc_d, 0, [-1.0, 0.0, 1.0], grid, cache=caches(bc_d))
        lam = br.lambda_samples
        assert lam[0] > lam[1] > lam[2]
        assert lam[1] == pytest.approx(3.0, abs=1e-6)

    def test_neumann_single_point(self, grid, bc_n, caches):
        br = branch_sample(bc_n, 0, [0.0], grid, cache=caches(bc_n))
        assert br.lambda_samples[0] == pytest.approx(1.0, abs=1e-6)

    def test_dirichlet_n1_window(self, grid, bc_d, caches):
        br = branch_sample(bc_d, 1, [0.0, 0.5, 1.0], grid, cache=caches(bc_d))
        lam = br.lambda_samples
        assert np.all(np.diff(lam) < 0)
        # the window tops out at lambda(0) = 7, met up to eigenvalue noise
        assert np.all((lam > 3.0) & (lam <= 7.0 + 2e-9))

    def test_requires_increasing_grid(self, grid, bc_d):
        with pytest.raises(ValueError):
            branch_sample(bc_d, 0, [0.0, 0.0, 1.0], grid)


class TestDhDerivative:
    def test_dirichlet_always_negative(self, grid, bc_d, caches):
        for eta in (-2.0, 0.0, 1.5):
            p = caches(bc_d).pairs(eta, 1)
            assert dh_derivative(p[0], eta, bc_d) < 0
            assert dh_derivative(p[1], eta, bc_d) < 0

    def test_neumann_zero_at_minimum(self, grid, bc_n, caches):
        eta0, _ = neumann_minimum(0, grid, caches(bc_n))
        p = caches(bc_n).pairs(eta0, 0)[0]
        assert abs(dh_derivative(p, eta0, bc_n)) < 1e-8

    def test_matches_finite_difference(self, grid, bc_d, caches):
        cache = caches(bc_d)
        eta, de = 0.0, 0.01
        p = cache.pairs(eta, 0)[0]
        analytic = dh_derivative(p, eta, bc_d)
        fd = (
            cache.lam(eta - 2 * de, 0)
            - 8 * cache.lam(eta - de, 0)
            + 8 * cache.lam(eta + de, 0)
            - cache.lam(eta + 2 * de, 0)
        ) / (12 * de)
        assert abs(analytic - fd) / abs(fd) < 1e-3

    def test_requires_boundary_data(self, grid, bc_d):
        p = solve_spectrum(0.0, bc_d, 0, grid, want_vectors=False)[0]
        with pytest.raises(ValueError):
            dh_derivative(p, 0.0, bc_d)


class TestNeumannMinimum:
    def test_stationarity_identity(self, grid, bc_n, caches):
        for n in range(3):
            eta_n, lam_min = neumann_minimum(n, grid, caches(bc_n))
            assert lam_min == pytest.approx(eta_n**2, abs=1e-6)

    def test_ordering(self, grid, bc_n, caches):
        etas = [neumann_minimum(n, grid, caches(bc_n))[0] for n in range(3)]
        assert etas[0] < etas[1] < etas[2]

    def test_ground_minimum_below_one(self, grid, bc_n, caches):
        eta0, lam0 = neumann_minimum(0, grid, caches(bc_n))
        assert 0.0 < eta0 < 1.0
        assert 0.0 < lam0 < 1.0


class TestBranchCrossing:
    def test_dirichlet_level_three_at_origin(self, grid, bc_d, caches):
        roots = branch_crossing(bc_d, 0, 3.0, grid, (-2.0, 4.0), cache=caches(bc_d))
        assert len(roots) == 1
        assert roots[0] == pytest.approx(0.0, abs=1e-6)

    def test_neumann_level_one_at_origin(self, grid, bc_n, caches):
        roots = branch_crossing(bc_n, 0, 1.0, grid, (-2.0, 0.5), cache=caches(bc_n))
        assert any(abs(r) < 1e-6 for r in roots)

    def test_no_crossing_below_branch_floor(self, grid, bc_d, caches):
        # lambda_{D,1} > 3 everywhere, so level 2 is never attained
        roots = branch_crossing(bc_d, 1, 2.0, grid, (-3.0, 8.0), cache=caches(bc_d))
        assert roots == []

    def test_ground_branch_descends_through_two(self, grid, bc_d, caches):
        # the ground branch decays to 1, so it crosses level 2 once, right of 0
        roots = branch_crossing(bc_d, 0, 2.0, grid, (-3.0, 8.0), cache=caches(bc_d))
        assert len(roots) == 1 and roots[0] > 0
        assert caches(bc_d).lam(roots[0], 0) == pytest.approx(2.0, abs=1e-8)

    def test_neumann_two_crossings_in_dip(self, grid, bc_n, caches):
        # between the branch minimum and the Landau level there are two roots
        eta0, lam0 = neumann_minimum(0, grid, caches(bc_n))
        level = 0.5 * (lam0 + 1.0)
        roots = branch_crossing(bc_n, 0, level, grid, (-3.0, 8.0), cache=caches(bc_n))
        assert len(roots) == 2
        assert roots[0] < eta0 < roots[1]

    def test_boundary_root_rejected(self, grid, bc_d, caches):
        with pytest.raises(BracketingError):
            branch_crossing(bc_d, 0, 3.0, grid, (0.0 - 1e-9, 4.0), cache=caches(bc_d))


class TestRobinFamily:
    def test_alpha_zero_is_neumann(self, grid, bc_n, caches):
        vals = robin_family(0.0, [0.0], 0, grid)
        assert vals[0] == pytest.approx(caches(bc_n).lams(0.0, 0)[0], abs=1e-9)

    def test_alpha_one_bracketed(self, grid):
        vals = robin_family(0.0, [1.0], 0, grid)
        assert 1.0 < vals[0] < 3.0

    def test_monotone_toward_dirichlet(self, grid, bc_d, caches):
        vals = robin_family(0.0, [0.0, 0.5, 1.0, 2.0, 8.0, 32.0], 0, grid)
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert all(v < caches(bc_d).lams(0.0, 0)[0] for v in vals)

    def test_rejects_bad_alphas(self, grid):
        with pytest.raises(ValueError):
            robin_family(0.0, [0.5, 0.5], 0, grid)
        with pytest.raises(ValueError):
            robin_family(0.0, [-1.0, 0.5], 0, grid)


class TestCacheDeterminism:
    def test_repeat_solves_identical(self, grid, bc_d):
        a = solve_spectrum(1.3, bc_d, 2, grid)
        b = solve_spectrum(1.3, bc_d, 2, grid)
        for pa, pb in zip(a, b):
            assert pa.lam == pb.lam
            assert pa.boundary_derivative == pb.boundary_derivative
            assert np.array_equal(pa.samples, pb.samples)
