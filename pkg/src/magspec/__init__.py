"""Boundary spectral asymptotics for the 2D magnetic Schrodinger operator.

Edge eigenvalue branches of the half-line oscillator, boundary-corrected
magnetic Weyl counting, the half-plane spectral kernel, and the classical
hop/drift billiard, each validated against independent brute-force oracles.
"""

__version__ = "0.1.0"

from .core import (
    BCKind,
    BoundaryCondition,
    HeavisideConvention,
    ModelParams,
    PotentialField,
    derive_constants,
    heaviside,
)
from .oscillator import (
    EigenBranch,
    EigenPair,
    OscillatorGrid,
    SpectrumCache,
    branch_crossing,
    branch_sample,
    dh_derivative,
    neumann_minimum,
    robin_family,
    solve_spectrum,
)

__all__ = [
    "__version__",
    "BCKind",
    "BoundaryCondition",
    "HeavisideConvention",
    "ModelParams",
    "PotentialField",
    "derive_constants",
    "heaviside",
    "EigenBranch",
    "EigenPair",
    "OscillatorGrid",
    "SpectrumCache",
    "branch_crossing",
    "branch_sample",
    "dh_derivative",
    "neumann_minimum",
    "robin_family",
    "solve_spectrum",
]
