"""Shared domain types and scaling conventions.

Everything downstream (eigenvalue branches, counting, kernels, billiards)
consumes the types defined here.  All reals are double precision and all
tolerances are explicit operation parameters; there are no hidden globals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

__all__ = [
    "MagspecError",
    "GridResolutionError",
    "TruncationError",
    "BracketingError",
    "RegimeError",
    "BCKind",
    "BoundaryCondition",
    "HeavisideConvention",
    "ModelParams",
    "PotentialField",
    "heaviside",
    "derive_constants",
]


class MagspecError(Exception):
    """Base class for diagnostic errors raised by the numerical modules."""


class GridResolutionError(MagspecError):
    """The discretization is too coarse to separate the requested levels."""


class TruncationError(MagspecError):
    """A truncated window or tail failed its convergence check."""


class BracketingError(MagspecError):
    """A root or minimum search could not bracket its target."""


class RegimeError(MagspecError):
    """A trajectory left the dynamical regime required by the operation."""


class BCKind(Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    ROBIN = "robin"


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary condition at the cut point of the half-line problem.

    Robin means (u' + alpha*u) = 0 at the boundary with alpha >= 0; alpha = 0
    reproduces Neumann within solver tolerance.
    """

    kind: BCKind
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind is BCKind.ROBIN:
            if not math.isfinite(self.alpha) or self.alpha < 0:
                raise ValueError(f"Robin coefficient must be finite and >= 0, got {self.alpha}")
        elif self.alpha != 0.0:
            raise ValueError(f"alpha is only meaningful for Robin conditions, got {self.alpha}")

    @property
    def label(self) -> str:
        if self.kind is BCKind.ROBIN:
            return f"robin:{self.alpha:.17g}"
        return self.kind.value

    @staticmethod
    def dirichlet() -> "BoundaryCondition":
        return BoundaryCondition(BCKind.DIRICHLET)

    @staticmethod
    def neumann() -> "BoundaryCondition":
        return BoundaryCondition(BCKind.NEUMANN)

    @staticmethod
    def robin(alpha: float) -> "BoundaryCondition":
        return BoundaryCondition(BCKind.ROBIN, alpha)

    @staticmethod
    def parse(text: str) -> "BoundaryCondition":
        """Parse 'dirichlet', 'neumann' or 'robin:ALPHA' (case-insensitive)."""
        t = text.strip().lower()
        if t in ("d", "dirichlet"):
            return BoundaryCondition.dirichlet()
        if t in ("n", "neumann"):
            return BoundaryCondition.neumann()
        if t.startswith("robin"):
            _, _, a = t.partition(":")
            if not a:
                raise ValueError("Robin condition requires a coefficient, e.g. robin:0.5")
            return BoundaryCondition.robin(float(a))
        raise ValueError(f"unknown boundary condition {text!r}")


class HeavisideConvention(Enum):
    """Value of the step function exactly at zero: theta(0)=0 or theta(0)=1."""

    LEFT_CONTINUOUS = "left"
    RIGHT_CONTINUOUS = "right"


def heaviside(x: float, conv: HeavisideConvention) -> int:
    """Step function with an explicit convention at the jump.

    Returns 1 iff x > 0, or x >= 0 under the right-continuous convention.
    The two conventions differ only on the exact zero input.
    """
    if not math.isfinite(x):
        raise ValueError(f"heaviside argument must be finite, got {x}")
    if x > 0:
        return 1
    if x == 0 and conv is HeavisideConvention.RIGHT_CONTINUOUS:
        return 1
    return 0


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the magnetic model.

    mu is the magnetic field intensity (>= 1) and h the semiclassical
    parameter (0 < h <= 1).  Three derived effective constants are used with
    different roles: hbar_large = mu*h sets the spectral (Landau) scale,
    hbar_small = h/mu the kernel prefactor scale, and hbar_half =
    sqrt(h/mu) the boundary-layer length scale.
    """

    mu: float
    h: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu >= 1.0):
            raise ValueError(f"mu must be finite and >= 1, got {self.mu}")
        if not (math.isfinite(self.h) and 0.0 < self.h <= 1.0):
            raise ValueError(f"h must lie in (0, 1], got {self.h}")

    @property
    def hbar_large(self) -> float:
        return self.mu * self.h

    @property
    def hbar_small(self) -> float:
        return self.h / self.mu

    @property
    def hbar_half(self) -> float:
        return math.sqrt(self.h / self.mu)


def derive_constants(p: ModelParams) -> Tuple[float, float, float]:
    """Return (hbar_large, hbar_small, hbar_half) for the given parameters.

    Pure function of (mu, h); repeated calls are byte-identical.
    """
    return (p.hbar_large, p.hbar_small, p.hbar_half)


def _fd_partial(func, x1, x2, axis, order, step):
    """4th-order central finite difference of func along one axis."""
    c = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * step)
    offs = np.array([-2.0, -1.0, 1.0, 2.0]) * step
    acc = 0.0
    for w, o in zip(c, offs):
        if axis == 0:
            acc = acc + w * func(x1 + o, x2)
        else:
            acc = acc + w * func(x1, x2 + o)
    if order == 2:
        # second derivative via 4th-order 5-point stencil
        c2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * step**2)
        offs2 = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * step
        acc = 0.0
        for w, o in zip(c2, offs2):
            if axis == 0:
                acc = acc + w * func(x1 + o, x2)
            else:
                acc = acc + w * func(x1, x2 + o)
    return acc


@dataclass
class PotentialField:
    """Electric potential V and field intensity F over the half-plane.

    The combination W(x; tau) = (tau - V(x)) / F(x) drives both the classical
    drift and the per-point data fed to the counting formulas.  Analytic
    gradients may be supplied; otherwise 4th-order central differences with
    step ``fd_step`` are used (they must match any supplied analytic forms to
    relative 1e-6 on test points).
    """

    v: Callable[[np.ndarray, np.ndarray], np.ndarray]
    f: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(
        default=lambda x1, x2: np.ones_like(np.asarray(x1, dtype=float))
    )
    grad_v: Optional[Callable[[np.ndarray, np.ndarray], tuple]] = None
    grad_f: Optional[Callable[[np.ndarray, np.ndarray], tuple]] = None
    sqrt_g: float = 1.0
    fd_step: float = 1e-4

    @property
    def has_analytic_gradient(self) -> bool:
        return self.grad_v is not None and (self.grad_f is not None or self._f_is_trivial())

    def _f_is_trivial(self) -> bool:
        probe = float(np.asarray(self.f(0.1234, -0.4321)))
        return probe == 1.0 and float(np.asarray(self.f(1.7, 2.9))) == 1.0

    def w(self, x1, x2, tau: float):
        return (tau - self.v(x1, x2)) / self.f(x1, x2)

    def w_grad(self, x1, x2, tau: float):
        """(d/dx1, d/dx2) of W at fixed tau."""
        if self.grad_v is not None:
            dv1, dv2 = self.grad_v(x1, x2)
            fval = self.f(x1, x2)
            if self.grad_f is not None:
                df1, df2 = self.grad_f(x1, x2)
            else:
                df1 = df2 = np.zeros_like(np.asarray(fval, dtype=float))
            wval = (tau - self.v(x1, x2)) / fval
            return (
                (-dv1 - wval * df1) / fval,
                (-dv2 - wval * df2) / fval,
            )
        wf = lambda a, b: self.w(a, b, tau)
        return (
            _fd_partial(wf, x1, x2, axis=0, order=1, step=self.fd_step),
            _fd_partial(wf, x1, x2, axis=1, order=1, step=self.fd_step),
        )

    def w_hess_x2(self, x1, x2, tau: float):
        """Second partial of W along x2 (finite difference)."""
        wf = lambda a, b: self.w(a, b, tau)
        return _fd_partial(wf, x1, x2, axis=1, order=2, step=self.fd_step)

    @staticmethod
    def from_w(w_func, tau: float = 1.0, grad_w=None) -> "PotentialField":
        """Build a field with F = 1 whose W at level ``tau`` equals ``w_func``.

        Convenient for billiard experiments specified directly through W.
        """

        def v(x1, x2):
            return tau - w_func(x1, x2)

        gv = None
        if grad_w is not None:
            def gv(x1, x2):
                g1, g2 = grad_w(x1, x2)
                return (-g1, -g2)

        return PotentialField(v=v, grad_v=gv)
