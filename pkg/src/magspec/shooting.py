"""Independent shooting-method eigensolver for the half-line oscillator.

Cross-validates the tridiagonal matrix route in :mod:`magspec.oscillator`.
The ODE -u'' + z^2 u = lambda u is marched with the Numerov scheme from deep
inside the classically forbidden region up to the cut z = eta; eigenvalues
are the lambda where the boundary residual (u for Dirichlet, u' + alpha*u
for Neumann/Robin) vanishes.  Nothing here touches the matrix solver.
"""

from __future__ import annotations

import math
from typing import List

import numpy as np
from scipy.optimize import brentq

from .core import BCKind, BoundaryCondition, BracketingError

__all__ = ["shooting_eigenvalues"]


def _march(eta: float, lam: float, dz: float, z_min: float):
    """Numerov march from z_min to eta; returns (u_end, du_end, n_nodes).

    The solution is renormalized whenever it grows past 1e50 so the residual
    sign stays meaningful; only positive factors are applied.
    """
    n = int(round((eta - z_min) / dz))
    z = z_min + dz * np.arange(n + 1)
    g = z * z - lam  # u'' = g u
    c = dz * dz / 12.0
    f = 1.0 - c * g
    u_prev = 0.0
    u_cur = 1e-120
    nodes = 0
    tail = [0.0, 0.0, 0.0, 0.0, u_cur]  # last five samples for the endpoint stencil
    for i in range(1, n):
        u_next = ((12.0 - 10.0 * f[i]) * u_cur - f[i - 1] * u_prev) / f[i + 1]
        if u_next * u_cur < 0:
            nodes += 1
        au = abs(u_next)
        if au > 1e50:
            u_next /= au
            u_cur /= au
            tail = [t / au for t in tail]
        u_prev, u_cur = u_cur, u_next
        tail.pop(0)
        tail.append(u_cur)
    # one-sided 4th-order endpoint derivative
    u4, u3, u2, u1, u0 = tail
    du = (25.0 * u0 - 48.0 * u1 + 36.0 * u2 - 16.0 * u3 + 3.0 * u4) / (12.0 * dz)
    return u_cur, du, nodes


def _residual(eta, lam, dz, z_min, bc: BoundaryCondition):
    u, du, _ = _march(eta, lam, dz, z_min)
    if bc.kind is BCKind.DIRICHLET:
        return u
    return du + bc.alpha * u


def shooting_eigenvalues(
    eta: float,
    bc: BoundaryCondition,
    n_max: int,
    dz: float = 1e-3,
    lam_hi: float = None,
    scan_step: float = 0.2,
) -> List[float]:
    """Lowest n_max+1 eigenvalues by residual sign scanning plus brentq.

    Slow but entirely independent of the matrix eigensolver; intended as a
    validation oracle on a handful of points.
    """
    if lam_hi is None:
        lam_hi = 4.0 * n_max + 8.0
        if eta < 0:
            lam_hi = max(lam_hi, eta * eta + 4.0 * (n_max + 2) * max(abs(eta), 1.0) ** (2 / 3) + 8)
    # snap the window so the march lands exactly on the cut point
    depth = eta - (min(eta, -math.sqrt(lam_hi)) - 10.0)
    z_min = eta - dz * math.ceil(depth / dz)

    roots = []
    lam_a = 1e-4
    r_a = _residual(eta, lam_a, dz, z_min, bc)
    lam = lam_a
    while lam < lam_hi and len(roots) <= n_max:
        lam_b = lam + scan_step
        r_b = _residual(eta, lam_b, dz, z_min, bc)
        if r_a == 0.0:
            roots.append(lam)
        elif r_a * r_b < 0:
            roots.append(
                brentq(
                    lambda l: _residual(eta, l, dz, z_min, bc),
                    lam,
                    lam_b,
                    xtol=1e-11,
                    rtol=8.9e-16,
                )
            )
        lam, r_a = lam_b, r_b
    if len(roots) <= n_max:
        raise BracketingError(
            f"shooting scan found only {len(roots)} levels below {lam_hi} at eta={eta:.4g}"
        )
    return [float(r) for r in roots[: n_max + 1]]
