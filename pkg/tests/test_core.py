import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from magspec.core import (
    BoundaryCondition,
    HeavisideConvention,
    ModelParams,
    PotentialField,
    derive_constants,
    heaviside,
)

L = HeavisideConvention.LEFT_CONTINUOUS
R = HeavisideConvention.RIGHT_CONTINUOUS


class TestHeaviside:
    def test_zero_left(self):
        assert heaviside(0.0, L) == 0

    def test_zero_right(self):
        assert heaviside(0.0, R) == 1

    def test_negative(self):
        assert heaviside(-2.5, R) == 0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            heaviside(float("nan"), L)
        with pytest.raises(ValueError):
            heaviside(float("inf"), R)

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_conventions_differ_only_at_zero(self, x):
        same = heaviside(x, L) == heaviside(x, R)
        assert same == (x != 0.0)


class TestModelParams:
    @pytest.mark.parametrize(
        "mu,h,expect",
        [
            (10.0, 0.01, (0.1, 0.001, math.sqrt(0.001))),
            (1.0, 1.0, (1.0, 1.0, 1.0)),
            (100.0, 0.01, (1.0, 1e-4, 0.01)),
        ],
    )
    def test_derived_constants(self, mu, h, expect):
        got = derive_constants(ModelParams(mu, h))
        assert got == pytest.approx(expect, rel=1e-14)

    def test_pure(self):
        p = ModelParams(7.0, 0.03)
        assert derive_constants(p) == derive_constants(p)

    def test_scaling_identities(self):
        p = ModelParams(13.0, 0.21)
        assert p.hbar_large * p.hbar_small == pytest.approx(p.h**2, rel=1e-14)
        assert p.hbar_half**2 == pytest.approx(p.hbar_small, rel=1e-14)

    @pytest.mark.parametrize("mu,h", [(0.5, 0.1), (2.0, 0.0), (2.0, 1.5), (float("nan"), 0.1)])
    def test_validation(self, mu, h):
        with pytest.raises(ValueError):
            ModelParams(mu, h)


class TestBoundaryCondition:
    def test_parse(self):
        assert BoundaryCondition.parse("dirichlet").label == "dirichlet"
        assert BoundaryCondition.parse("Neumann").label == "neumann"
        rb = BoundaryCondition.parse("robin:0.5")
        assert rb.alpha == 0.5

    def test_robin_needs_nonneg_alpha(self):
        with pytest.raises(ValueError):
            BoundaryCondition.robin(-1.0)

    def test_alpha_only_for_robin(self):
        with pytest.raises(ValueError):
            BoundaryCondition(BoundaryCondition.dirichlet().kind, alpha=1.0)


class TestPotentialField:
    def test_analytic_matches_fd(self):
        w = PotentialField(
            v=lambda x1, x2: np.sin(x1) * np.cos(2 * x2),
            grad_v=lambda x1, x2: (
                np.cos(x1) * np.cos(2 * x2),
                -2 * np.sin(x1) * np.sin(2 * x2),
            ),
        )
        w_fd = PotentialField(v=w.v)
        for x1, x2 in [(0.3, -0.7), (1.1, 0.4), (0.0, 0.2)]:
            ga = w.w_grad(x1, x2, tau=1.0)
            gf = w_fd.w_grad(x1, x2, tau=1.0)
            for a, b in zip(ga, gf):
                assert abs(float(a) - float(b)) <= 1e-6 * (1 + abs(float(a)))

    def test_w_definition(self):
        w = PotentialField(v=lambda x1, x2: -np.ones_like(np.asarray(x1, dtype=float)))
        assert float(w.w(0.3, 0.1, tau=0.0)) == pytest.approx(1.0)

    def test_from_w_round_trip(self):
        w = PotentialField.from_w(lambda x1, x2: 1.0 + 0.2 * np.asarray(x2), tau=1.0)
        assert float(w.w(0.0, 2.0, tau=1.0)) == pytest.approx(1.4)
