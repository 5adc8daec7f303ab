"""Closed-form predictors for the edge branches at large |eta|.

These are test oracles: they never consult the eigensolver, so comparing
them against computed branches is a non-circular check.  At eta -> +infinity
the branch-to-Landau gap closes like c0 * eta^{2n+1} e^{-eta^2} with an
explicit c0; at eta -> -infinity the branch climbs like eta^2 plus an
Airy-zero correction of order |eta|^{2/3}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .airy import airy_zero
from .core import BCKind, BoundaryCondition
from .oscillator import EigenBranch

__all__ = [
    "AsymptoticCoefficient",
    "gap_coefficient",
    "epsilon_leading",
    "fit_leading_coefficient",
    "airy_zero",
    "lambda_neg_asymptote",
    "neumann_inflection",
]


@dataclass(frozen=True)
class AsymptoticCoefficient:
    """Leading coefficient of the branch-gap decay on one side."""

    bc: str
    n: int
    side: str  # 'plus' or 'minus'
    value: float
    theory_value: float


def gap_coefficient(n: int) -> float:
    """c0 = 2^{n+1} / (n! sqrt(pi)), the leading gap coefficient.

    The same constant serves Dirichlet (gap above 2n+1) and Neumann (gap
    below); only the sign convention of the gap differs.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    return 2.0 ** (n + 1) / (math.factorial(n) * math.sqrt(math.pi))


def epsilon_leading(bc: BoundaryCondition, n: int, eta: float) -> float:
    """Leading prediction of the gap |lambda_{*,n}(eta) - (2n+1)| for eta > 0.

    Returns c0 * eta^{2n+1} * exp(-eta^2); the Dirichlet branch sits above
    the Landau level by this amount, the Neumann branch below.
    """
    if eta <= 0:
        raise ValueError("the exponential gap regime needs eta > 0")
    if bc.kind is BCKind.ROBIN:
        raise ValueError("leading gap coefficient is tabulated for Dirichlet/Neumann only")
    return gap_coefficient(n) * eta ** (2 * n + 1) * math.exp(-eta * eta)


def fit_leading_coefficient(
    branch: EigenBranch, window: Tuple[float, float]
) -> Tuple[float, float]:
    """Extract (c0, c1) from a computed branch over an eta window.

    Least squares of r(eta) = |lambda - (2n+1)| eta^{-(2n+1)} e^{eta^2}
    against c0 + c1 * eta^{-2}: the inverse-square correction dominates the
    residual of the one-term law at moderate eta, so the two-term model
    recovers c0 where the eigensolver is still accurate.
    """
    lo, hi = window
    if lo < 2.0:
        raise ValueError("fit window must start at eta >= 2")
    mask = (branch.eta_samples >= lo) & (branch.eta_samples <= hi)
    if int(mask.sum()) < 4:
        raise ValueError(f"need at least 4 samples in the window, got {int(mask.sum())}")
    eta = branch.eta_samples[mask]
    lam = branch.lambda_samples[mask]
    n = branch.n
    r = np.abs(lam - (2 * n + 1)) * eta ** (-(2 * n + 1)) * np.exp(eta * eta)
    A = np.column_stack([np.ones_like(eta), eta**-2.0])
    coef, *_ = np.linalg.lstsq(A, r, rcond=None)
    resid = r - A @ coef
    if float(np.max(np.abs(resid))) > 0.2 * abs(coef[0]):
        raise ValueError(
            f"fit residual {np.max(np.abs(resid)):.3g} exceeds 20% of c0={coef[0]:.3g}; "
            "solver accuracy insufficient in this window"
        )
    return float(coef[0]), float(coef[1])


def lambda_neg_asymptote(bc: BoundaryCondition, n: int, eta: float) -> float:
    """Deep-wall prediction eta^2 + (2|eta|)^{2/3} * (Airy zero magnitude).

    Valid for eta <= -2; rescaling the linearized well to the Airy operator
    on the half-line puts the Dirichlet levels at zeros of Ai and the Neumann
    levels at zeros of Ai'.
    """
    if eta > -2:
        raise ValueError("asymptotic regime requires eta <= -2")
    if bc.kind is BCKind.DIRICHLET:
        a = airy_zero("Ai", n + 1)
    elif bc.kind is BCKind.NEUMANN:
        a = airy_zero("AiPrime", n + 1)
    else:
        raise ValueError("deep-wall asymptote is tabulated for Dirichlet/Neumann only")
    return eta * eta + (2.0 * abs(eta)) ** (2.0 / 3.0) * a


def neumann_inflection(branch: EigenBranch) -> float:
    """Estimate the inflection point of a Neumann branch (exploratory).

    Locates the sign change of the second difference of the samples; the
    curve is conjectured to have exactly one inflection, but this routine
    only reports an estimate and never asserts.
    """
    eta = branch.eta_samples
    lam = branch.lambda_samples
    if len(eta) < 5:
        raise ValueError("need at least 5 samples")
    d2 = np.diff(lam, 2)
    sign = np.sign(d2)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if len(flips) == 0:
        return float("nan")
    k = int(flips[0]) + 1
    return float(eta[k])
