"""Magnetic Weyl counting: bulk density, boundary corrections, gap predicates.

The boundary correction per unit boundary length is computed two independent
ways and cross-checked:

* the branch form reduces each Landau index j to signed lengths between
  crossings of the edge branch lambda_{*,j} with the level tau/hbar, found by
  bisection on fresh eigensolves;
* the eigenfunction form integrates the occupied edge-state density minus the
  bulk plateau over the distance from the boundary, by nested quadrature over
  (x1, eta) with Richardson-refined trapezoid rules and an analytic
  whole-line-oscillator completion of the far eta tail.

Both carry explicit quadrature-error estimates and must agree within them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    BCKind,
    BoundaryCondition,
    HeavisideConvention,
    ModelParams,
    PotentialField,
    TruncationError,
    heaviside,
)
from .oscillator import (
    OscillatorGrid,
    SpectrumCache,
    branch_crossing,
    dh_derivative,
    neumann_minimum,
    robin_minimum,
)

__all__ = [
    "n_mw_density",
    "BoundaryCorrection",
    "bound_correction_branch",
    "bound_correction_eigfn",
    "kappa0_limit",
    "EdgeQuad",
    "edge_profile",
    "Rectangle",
    "two_term_count",
    "superstrong_bound_correction",
    "spectral_gap_check",
    "GapCheckResult",
    "hermite_function",
    "hermite_tail_mass",
]

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# bulk density
# ---------------------------------------------------------------------------

def n_mw_density(
    F: float,
    V: float,
    tau: float,
    mu_h: float,
    sqrt_g: float = 1.0,
    conv: HeavisideConvention = HeavisideConvention.LEFT_CONTINUOUS,
) -> float:
    """Bulk magnetic Weyl density: occupied Landau levels per unit area.

    Counts j >= 0 with (2j+1)*mu_h*F + V below tau (strictly below under the
    left-continuous convention, weakly under the right-continuous one) and
    weights the count by (2*pi)^{-1} * sqrt_g * mu_h * F.
    """
    if F <= 0 or mu_h <= 0:
        raise ValueError("F and mu_h must be positive")
    # largest j with (2j+1) mu_h F + V <= tau
    top = (tau - V) / (mu_h * F)
    if top < 1.0 - 1e-15:
        count = 0
    else:
        count = int(math.floor((top - 1.0) / 2.0)) + 1
        # fix up the threshold case per the convention
        edge = (2 * (count - 1) + 1) * mu_h * F + V
        while count > 0 and heaviside(tau - edge, conv) == 0:
            count -= 1
            edge = (2 * (count - 1) + 1) * mu_h * F + V
        probe = (2 * count + 1) * mu_h * F + V
        while heaviside(tau - probe, conv) == 1:
            count += 1
            probe = (2 * count + 1) * mu_h * F + V
    return count * (1.0 / TWO_PI) * sqrt_g * mu_h * F


# ---------------------------------------------------------------------------
# whole-line oscillator helpers (analytic far-tail completion)
# ---------------------------------------------------------------------------

def hermite_function(n: int, x: np.ndarray) -> np.ndarray:
    """L2-normalized whole-line oscillator eigenfunctions via stable recurrence."""
    x = np.asarray(x, dtype=float)
    h0 = math.pi ** (-0.25) * np.exp(-0.5 * x * x)
    if n == 0:
        return h0
    h1 = math.sqrt(2.0) * x * h0
    if n == 1:
        return h1
    for k in range(1, n):
        h2 = math.sqrt(2.0 / (k + 1)) * x * h1 - math.sqrt(k / (k + 1)) * h0
        h0, h1 = h1, h2
    return h1


class _TailMass:
    """Q_n(t) = integral of psi_n^2 over (t, infinity), tabulated once."""

    def __init__(self, n: int, w_max: float = None, dw: float = 2e-3):
        if w_max is None:
            w_max = math.sqrt(2 * n + 1) + 12.0
        w = np.arange(-w_max, w_max + dw, dw)
        psi2 = hermite_function(n, w) ** 2
        # cumulative trapezoid from the right
        seg = 0.5 * dw * (psi2[1:] + psi2[:-1])
        tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        self.w = w
        self.tail = tail

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.w, self.tail, left=1.0, right=0.0)
        return out


_TAIL_CACHE: Dict[int, _TailMass] = {}


def hermite_tail_mass(n: int, t):
    """Mass of the n-th whole-line eigenfunction beyond coordinate t."""
    tm = _TAIL_CACHE.get(n)
    if tm is None:
        tm = _TailMass(n)
        _TAIL_CACHE[n] = tm
    return tm(t)


# ---------------------------------------------------------------------------
# active Landau terms at a rescaled level s = tau / hbar
# ---------------------------------------------------------------------------

@dataclass
class _Term:
    j: int
    kind: str          # 'half'  -> sublevel (eta_lo, inf), bulk occupied
    #                    'interval' -> sublevel (eta_lo, eta_hi), bulk empty
    eta_lo: float
    eta_hi: Optional[float]
    slope_lo: float    # branch slope at eta_lo (for error propagation)
    slope_hi: float = 0.0
    lam_err: float = 1e-10


def _bulk_convention(bc: BoundaryCondition) -> HeavisideConvention:
    if bc.kind is BCKind.DIRICHLET:
        return HeavisideConvention.LEFT_CONTINUOUS
    return HeavisideConvention.RIGHT_CONTINUOUS


def _branch_minimum(cache: SpectrumCache, j: int):
    if cache.bc.kind is BCKind.NEUMANN:
        return neumann_minimum(j, cache.grid, cache)
    return robin_minimum(j, cache.bc.alpha, cache.grid, cache)


def _slope_at(cache: SpectrumCache, j: int, eta: float) -> float:
    pair = cache.pairs(eta, j)[j]
    return dh_derivative(pair, eta, cache.bc)


def _active_terms(cache: SpectrumCache, s: float, search_hi: float = 16.0) -> List[_Term]:
    """Decompose the occupied edge spectrum at level s into per-j terms."""
    bc = cache.bc
    terms: List[_Term] = []
    grid = cache.grid
    lo_bound = -math.sqrt(max(s, 1.0)) - 2.0
    j = 0
    while True:
        thr = 2 * j + 1
        if bc.kind is BCKind.DIRICHLET:
            if s <= thr:
                break
            roots = branch_crossing(bc, j, s, grid, (lo_bound, search_hi), cache=cache)
            if len(roots) != 1:
                raise TruncationError(
                    f"expected one Dirichlet crossing for j={j} at level {s}, got {roots}"
                )
            e = roots[0]
            terms.append(_Term(j, "half", e, None, _slope_at(cache, j, e),
                               lam_err=cache.pairs(e, j)[j].lam_err))
        else:
            if thr - 1 >= s:  # branch minimum exceeds s for sure
                break
            eta_j, lam_min = _branch_minimum(cache, j)
            if s <= lam_min:
                j += 1
                continue
            bulk = heaviside(s - thr, _bulk_convention(bc))
            if bulk:
                roots = branch_crossing(bc, j, s, grid, (lo_bound, eta_j), cache=cache)
                if len(roots) != 1:
                    raise TruncationError(
                        f"expected one descending crossing for j={j} at level {s}, got {roots}"
                    )
                e = roots[0]
                terms.append(_Term(j, "half", e, None, _slope_at(cache, j, e),
                                   lam_err=cache.pairs(e, j)[j].lam_err))
            else:
                hi = eta_j + 0.5
                while cache.lam(hi, j) < s:
                    hi += 0.5
                    if hi > search_hi:
                        raise TruncationError(
                            f"ascending crossing for j={j} at level {s} beyond eta={search_hi}"
                        )
                lo_roots = branch_crossing(bc, j, s, grid, (lo_bound, eta_j), cache=cache)
                hi_roots = branch_crossing(bc, j, s, grid, (eta_j, hi), cache=cache)
                if len(lo_roots) != 1 or len(hi_roots) != 1:
                    raise TruncationError(
                        f"expected a crossing pair for j={j} at level {s}, "
                        f"got {lo_roots} / {hi_roots}"
                    )
                terms.append(
                    _Term(j, "interval", lo_roots[0], hi_roots[0],
                          _slope_at(cache, j, lo_roots[0]),
                          _slope_at(cache, j, hi_roots[0]),
                          lam_err=cache.pairs(lo_roots[0], j)[j].lam_err)
                )
        j += 1
    return terms


# ---------------------------------------------------------------------------
# boundary correction, branch (crossing-length) form
# ---------------------------------------------------------------------------

@dataclass
class BoundaryCorrection:
    """Boundary term of the two-term magnetic Weyl formula, per unit length."""

    bc: str
    tau: float
    hbar: float
    value: float
    method: str
    quad_error: float
    truncation: Dict[str, float] = field(default_factory=dict)


def bound_correction_branch(
    bc: BoundaryCondition,
    tau: float,
    hbar: float,
    grid: OscillatorGrid = OscillatorGrid(),
    cache: SpectrumCache = None,
) -> BoundaryCorrection:
    """Boundary correction via signed crossing lengths of the edge branches.

    Each occupied Landau index contributes -eta* (single crossing, bulk
    occupied) or the sublevel width eta+ - eta- (dip below an unoccupied
    threshold); the prefactor is (2 pi)^{-1} hbar^{1/2}.
    """
    if hbar <= 0 or tau <= 0:
        raise ValueError("tau and hbar must be positive")
    if cache is None:
        cache = SpectrumCache(bc, grid)
    s = tau / hbar
    terms = _active_terms(cache, s)
    total = 0.0
    err = 0.0
    for t in terms:
        if t.kind == "half":
            total -= t.eta_lo
            err += 1e-12 + t.lam_err / max(abs(t.slope_lo), 1e-8)
        else:
            total += t.eta_hi - t.eta_lo
            err += 2e-12 + t.lam_err / max(abs(t.slope_lo), 1e-8)
            err += t.lam_err / max(abs(t.slope_hi), 1e-8)
    pref = math.sqrt(hbar) / TWO_PI
    return BoundaryCorrection(
        bc=bc.label,
        tau=tau,
        hbar=hbar,
        value=pref * total,
        method="BranchIntegral",
        quad_error=pref * err,
        truncation={"j_terms": float(len(terms))},
    )


def kappa0_limit(bc: BoundaryCondition, tau: float) -> float:
    """Semiclassical limit of the boundary correction: -(+) sqrt(tau)/(4 pi)
    for Dirichlet (Neumann)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    sign = -1.0 if bc.kind is BCKind.DIRICHLET else 1.0
    return sign * math.sqrt(tau) / (4.0 * math.pi)


# ---------------------------------------------------------------------------
# boundary correction, eigenfunction (edge-density) form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeQuad:
    """Quadrature controls for the eigenfunction-integral route.

    d_eta is the coarse trapezoid spacing in eta (one halving is always added
    for Richardson extrapolation); dx1 the distance-from-boundary spacing in
    oscillator units, kept an exact multiple of the fine solver step so
    eigenfunction samples are used without interpolation.
    """

    d_eta: float = 0.05
    dx1: float = 0.02
    tail_pad: float = 4.0
    hermite_pad: float = 8.0


def _node_lattice(lo: float, hi: float, d: float) -> np.ndarray:
    """Lattice multiples of d strictly inside (lo, hi), endpoints added exactly."""
    k0 = math.floor(lo / d) + 1
    k1 = math.ceil(hi / d) - 1
    inner = np.arange(k0, k1 + 1) * d
    inner = inner[(inner > lo + 1e-12) & (inner < hi - 1e-12)]
    return np.concatenate([[lo], inner, [hi]])


def _trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    w = np.zeros(len(nodes))
    d = np.diff(nodes)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def edge_profile(
    cache: SpectrumCache,
    s: float,
    quad: EdgeQuad = EdgeQuad(),
    x1_values: np.ndarray = None,
) -> Tuple[np.ndarray, np.ndarray, float, Dict[str, float]]:
    """Occupied edge-state density minus the bulk plateau, per unit level s.

    Returns (x1, f, quad_error_estimate, truncation_info) where
    f(x1) = sum_j [ integral of v_j^2(x1, eta) over the sublevel set ] - n_bulk
    in rescaled units (hbar = 1 oscillator coordinates).  The eta integral is
    a Richardson-refined trapezoid with exact sublevel edges; beyond
    eta_cut = sqrt(s) + hermite_pad the branch data is replaced by the
    whole-line oscillator, turning the far tail into a tabulated mass.
    """
    terms = _active_terms(cache, s)
    n_bulk = sum(1 for t in terms if t.kind == "half")
    if not terms:
        x1 = x1_values if x1_values is not None else np.array([0.0])
        return x1, np.zeros_like(np.asarray(x1, dtype=float)), 0.0, {
            "j_terms": 0.0,
            "n_bulk": 0.0,
        }

    sqrt_s = math.sqrt(s)
    eta_cut = sqrt_s + quad.hermite_pad
    edge_max = max(t.eta_lo if t.kind == "half" else t.eta_hi for t in terms)
    if x1_values is None:
        x1_max = max(edge_max, 0.0) + 1.2 * sqrt_s + quad.tail_pad
        x1 = np.arange(0.0, x1_max + quad.dx1, quad.dx1)
    else:
        x1 = np.asarray(x1_values, dtype=float)

    n_top = max(t.j for t in terms)

    def accumulate(d_eta: float) -> np.ndarray:
        per_j = {t.j: np.zeros(len(x1)) for t in terms}
        node_weights: Dict[float, List[Tuple[int, float]]] = {}
        for t in terms:
            hi = eta_cut if t.kind == "half" else min(t.eta_hi, eta_cut)
            if hi <= t.eta_lo:
                continue
            nodes = _node_lattice(t.eta_lo, hi, d_eta)
            w = _trapezoid_weights(nodes)
            for nd, wt in zip(nodes, w):
                node_weights.setdefault(float(nd), []).append((t.j, wt))
        for eta, jw in sorted(node_weights.items()):
            pairs = cache.pairs(eta, n_top)
            for j, wt in jw:
                samples = pairs[j].samples
                step = pairs[j].step
                pos = x1 / step
                idx = np.floor(pos).astype(int)
                frac = pos - idx
                vals = np.zeros(len(x1))
                ok = idx < len(samples) - 1
                vals[ok] = (
                    (1.0 - frac[ok]) * samples[idx[ok]] + frac[ok] * samples[idx[ok] + 1]
                ) ** 2
                edge = idx == len(samples) - 1
                vals[edge] = samples[-1] ** 2
                per_j[j] += wt * vals
        acc = np.zeros(len(x1))
        for t in terms:
            sj = per_j[t.j]
            if t.kind == "half":
                sj = sj + hermite_tail_mass(t.j, eta_cut - x1)
            elif t.eta_hi > eta_cut:
                sj = sj + hermite_tail_mass(t.j, eta_cut - x1) - hermite_tail_mass(
                    t.j, t.eta_hi - x1
                )
            acc += sj
        return acc

    f_coarse = accumulate(quad.d_eta) - n_bulk
    f_fine = accumulate(quad.d_eta / 2.0) - n_bulk
    f = (4.0 * f_fine - f_coarse) / 3.0
    err_profile = float(np.max(np.abs(f_fine - f_coarse))) / 3.0
    info = {
        "j_terms": float(len(terms)),
        "n_bulk": float(n_bulk),
        "eta_cut": eta_cut,
        "x1_max": float(x1[-1]),
        "d_eta": quad.d_eta,
    }
    return x1, f, err_profile, info


def bound_correction_eigfn(
    bc: BoundaryCondition,
    tau: float,
    hbar: float,
    grid: OscillatorGrid = OscillatorGrid(),
    quad: EdgeQuad = EdgeQuad(),
    cache: SpectrumCache = None,
) -> BoundaryCorrection:
    """Boundary correction via the occupied edge-state density profile.

    Integrates the per-distance defect f(x1) of the eigenfunction form over
    x1 in (0, inf), with trapezoid + Richardson refinement in both variables,
    a doubling check on the x1 tail, and the analytic completion of the
    far-eta mass.  Independent of the crossing-length route except for the
    shared eigensolver.
    """
    if hbar <= 0 or tau <= 0:
        raise ValueError("tau and hbar must be positive")
    if cache is None:
        cache = SpectrumCache(bc, grid)
    s = tau / hbar
    x1, f, err_eta_prof, info = edge_profile(cache, s, quad)
    if info["j_terms"] == 0:
        return BoundaryCorrection(bc.label, tau, hbar, 0.0, "EigenfunctionIntegral", 0.0, info)

    dx1 = x1[1] - x1[0]
    integral_fine = float(np.trapezoid(f, dx=dx1))
    integral_coarse = float(np.trapezoid(f[::2], dx=2 * dx1))
    integral = (4.0 * integral_fine - integral_coarse) / 3.0
    err_x1 = abs(integral_fine - integral_coarse) / 3.0

    # tail convergence: the last tenth of the window must be flat and tiny
    tail = np.abs(f[int(0.9 * len(f)):])
    peak = float(np.max(np.abs(f)))
    if peak > 0 and float(tail.max()) > 1e-5 * peak:
        raise TruncationError(
            f"edge profile tail {tail.max():.2e} not negligible vs peak {peak:.2e}; "
            "increase tail_pad"
        )

    err_eta = err_eta_prof * (x1[-1])  # profile error propagated through the x1 integral
    pref = math.sqrt(hbar) / TWO_PI
    return BoundaryCorrection(
        bc=bc.label,
        tau=tau,
        hbar=hbar,
        value=pref * integral,
        method="EigenfunctionIntegral",
        quad_error=pref * (3.0 * (err_eta + err_x1) + 1e-10),
        truncation=info,
    )


# ---------------------------------------------------------------------------
# two-term count over a periodic strip
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rectangle:
    """Rectangle [0, l1] x [0, l2], periodic in x2.

    The boundary consists of the two walls x1 = 0 (condition under test) and
    x1 = l1 (always Dirichlet in the matching oracle problems).
    """

    l1: float
    l2: float

    def __post_init__(self):
        if self.l1 <= 0 or self.l2 <= 0:
            raise ValueError("rectangle extents must be positive")


class _CorrectionLattice:
    """Cache of boundary corrections keyed by (hbar, level) rounded to a
    relative lattice, so a varying-coefficient boundary integral reuses
    nearby evaluations."""

    def __init__(self, bc, grid, spacing=1e-3, method="branch"):
        self.bc = bc
        self.grid = grid
        self.spacing = spacing
        self.method = method
        self.cache = SpectrumCache(bc, grid)
        self._store: Dict[Tuple[int, int], float] = {}

    def _key(self, hbar, level):
        q = lambda v: int(round(math.log(v) / self.spacing)) if v > 0 else -(10**9)
        return (q(hbar), q(level))

    def value(self, level: float, hbar: float) -> float:
        if level <= 0:
            return 0.0
        key = self._key(hbar, level)
        hit = self._store.get(key)
        if hit is None:
            corr = bound_correction_branch(self.bc, level, hbar, self.grid, cache=self.cache)
            hit = corr.value
            self._store[key] = hit
        return hit


def two_term_count(
    domain: Rectangle,
    w: PotentialField,
    params: ModelParams,
    tau: float,
    bc: BoundaryCondition,
    psi: Optional[Callable] = None,
    grid: OscillatorGrid = OscillatorGrid(),
    n_panels: Tuple[int, int] = (8, 8),
    gauss_pts: int = 5,
    conv: HeavisideConvention = HeavisideConvention.LEFT_CONTINUOUS,
    corrections: Optional[Dict[str, _CorrectionLattice]] = None,
) -> float:
    """Two-term asymptotic eigenvalue count on the periodic strip.

    h^{-2} * integral of the bulk density over the rectangle plus h^{-1}
    times the boundary corrections along the two walls, everything evaluated
    with the per-point effective constant mu*h*F(x) and level tau - V(x).
    Composite Gauss-Legendre quadrature; boundary corrections served from a
    parameter lattice keyed by (hbar, level).
    """
    mu_h = params.hbar_large
    h = params.h
    if psi is None:
        psi = lambda x1, x2: np.ones_like(np.asarray(x1, dtype=float))

    nodes, wts = np.polynomial.legendre.leggauss(gauss_pts)

    fmin = np.inf
    bulk = 0.0
    for i in range(n_panels[0]):
        a1 = domain.l1 * i / n_panels[0]
        b1 = domain.l1 * (i + 1) / n_panels[0]
        x1 = 0.5 * (a1 + b1) + 0.5 * (b1 - a1) * nodes
        w1 = 0.5 * (b1 - a1) * wts
        for k in range(n_panels[1]):
            a2 = domain.l2 * k / n_panels[1]
            b2 = domain.l2 * (k + 1) / n_panels[1]
            x2 = 0.5 * (a2 + b2) + 0.5 * (b2 - a2) * nodes
            w2 = 0.5 * (b2 - a2) * wts
            X1, X2 = np.meshgrid(x1, x2, indexing="ij")
            W12 = np.outer(w1, w2)
            Fv = np.broadcast_to(np.asarray(w.f(X1, X2), dtype=float), X1.shape)
            Vv = np.broadcast_to(np.asarray(w.v(X1, X2), dtype=float), X1.shape)
            fmin = min(fmin, float(Fv.min()))
            dens = np.array(
                [
                    n_mw_density(float(fv), float(vv), tau, mu_h, w.sqrt_g, conv)
                    for fv, vv in zip(Fv.ravel(), Vv.ravel())
                ]
            ).reshape(X1.shape)
            bulk += float(np.sum(W12 * dens * psi(X1, X2)))
    if not (fmin > 1e-12):
        raise ValueError(f"field intensity F must stay positive, min {fmin:.3g}")

    if corrections is None:
        corrections = {}
    for label, cond in (("edge", bc), ("far", BoundaryCondition.dirichlet())):
        if label not in corrections:
            corrections[label] = _CorrectionLattice(cond, grid)

    boundary = 0.0
    for label, x1_wall in (("edge", 0.0), ("far", domain.l1)):
        latt = corrections[label]
        for k in range(n_panels[1]):
            a2 = domain.l2 * k / n_panels[1]
            b2 = domain.l2 * (k + 1) / n_panels[1]
            x2 = 0.5 * (a2 + b2) + 0.5 * (b2 - a2) * nodes
            w2 = 0.5 * (b2 - a2) * wts
            for xx, ww in zip(x2, w2):
                fv = float(np.asarray(w.f(x1_wall, xx)))
                vv = float(np.asarray(w.v(x1_wall, xx)))
                level = tau - vv
                pv = float(np.asarray(psi(x1_wall, xx)))
                if pv != 0.0 and level > 0:
                    boundary += ww * pv * latt.value(level, mu_h * fv)

    return bulk / (h * h) + boundary / h


# ---------------------------------------------------------------------------
# superstrong-field boundary term and spectral-gap predicate
# ---------------------------------------------------------------------------

def smooth_cutoff(t) -> np.ndarray:
    """C^2 polynomial bump: 1 on [-1/2, 1/2], 0 outside [-1, 1]."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    out[t <= 0.5] = 1.0
    mid = (t > 0.5) & (t < 1.0)
    u = (t[mid] - 0.5) * 2.0
    out[mid] = 1.0 - u**3 * (10.0 - 15.0 * u + 6.0 * u * u)
    return out


def superstrong_bound_correction(
    bc: BoundaryCondition,
    z_frak: float,
    params: ModelParams,
    w_eff: PotentialField,
    psi: Optional[Callable] = None,
    epsilon_cut: float = None,
    x2_range: Tuple[float, float] = (0.0, 1.0),
    tau: float = 0.0,
    n_x1: int = 400,
    n_x2: int = 64,
    grid: OscillatorGrid = OscillatorGrid(),
    cache: SpectrumCache = None,
) -> float:
    """Boundary term of the superstrong-field counting formula.

    Integrates (2 pi)^{-1} mu * [occupied(edge branch) - occupied(bulk
    threshold)] over the boundary layer, where "occupied" means the effective
    potential exceeds mu*h*(edge branch - z) at the point; the edge branch is
    evaluated at eta = x1 / hbar_half and a fixed C^2 cutoff confines the
    integrand to x1 <= epsilon_cut.  The index sum stops as soon as both
    indicators vanish identically on the layer (branch lower bounds make
    higher terms elliptic).
    """
    mu_h = params.hbar_large
    if mu_h < 1.0:
        raise ValueError("superstrong regime requires mu*h >= 1")
    hbar_half = params.hbar_half
    if epsilon_cut is None:
        epsilon_cut = 5.0 * hbar_half
    if psi is None:
        psi = lambda x1, x2: np.ones_like(np.asarray(x1, dtype=float))
    if cache is None:
        cache = SpectrumCache(bc, grid)

    x1 = np.linspace(0.0, epsilon_cut, n_x1 + 1)
    x2 = np.linspace(x2_range[0], x2_range[1], n_x2 + 1)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    Wv = np.asarray(w_eff.w(X1, X2, tau), dtype=float)
    w_max = float(Wv.max())
    zeta = smooth_cutoff(x1 / epsilon_cut)[:, None]
    psi_v = np.broadcast_to(np.asarray(psi(X1, X2), dtype=float), X1.shape)

    etas = x1 / hbar_half
    lower_gap = 1 if bc.kind is BCKind.DIRICHLET else -1
    total = np.zeros_like(Wv)
    n = 0
    while True:
        thr_branch = mu_h * (2 * n + lower_gap - z_frak)
        thr_bulk = mu_h * (2 * n + 1 - z_frak)
        if min(thr_branch, thr_bulk) > w_max:
            break
        lam = np.array([cache.lam(float(e), n) for e in etas])
        occ_branch = (Wv - mu_h * (lam[:, None] - z_frak)) > 0
        occ_bulk = (Wv - thr_bulk) > 0
        total += (occ_branch.astype(float) - occ_bulk.astype(float))
        n += 1
        if n > 200:
            raise TruncationError("index sum in the superstrong boundary term did not close")

    integrand = total * zeta * psi_v
    inner = np.trapezoid(integrand, x1, axis=0)
    outer = float(np.trapezoid(inner, x2))
    return params.mu / TWO_PI * outer


@dataclass(frozen=True)
class GapCheckResult:
    gap: bool
    witness_m: Optional[int] = None
    margin: float = 0.0


def spectral_gap_check(
    m_range: Sequence[int],
    z_frak: float,
    mu_h: float,
    F_range: Tuple[float, float],
    V_range: Tuple[float, float],
    tau: float,
    eps0: float,
) -> GapCheckResult:
    """Check |(2m+1-z) mu_h F + V - tau| >= eps0 * mu_h over coefficient boxes.

    The expression is affine in (F, V), so its range over the box is spanned
    by corner values; a sign change inside the box means the distance is 0.
    Returns the first violating m as a witness.
    """
    worst = math.inf
    for m in m_range:
        c = (2 * m + 1 - z_frak) * mu_h
        corners = [c * F + V - tau for F in F_range for V in V_range]
        lo, hi = min(corners), max(corners)
        dist = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
        worst = min(worst, dist)
        if dist < eps0 * mu_h:
            return GapCheckResult(gap=False, witness_m=int(m), margin=dist)
    return GapCheckResult(gap=True, witness_m=None, margin=worst)
