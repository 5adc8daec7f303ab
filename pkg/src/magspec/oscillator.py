"""Half-line shifted harmonic oscillator eigensolver.

Solves L(eta) = -d^2/dz^2 + z^2 on the interval (-inf, eta] with a
Dirichlet, Neumann or Robin condition at the cut point z = eta.  Eigenvalue
curves eta -> lambda_{*,n}(eta) are the edge branches that deform the Landau
levels 2n+1 near a boundary: Dirichlet branches decrease strictly from
+infinity (eta -> -inf) to 2n+1 (eta -> +inf) with lambda_{D,n}(0) = 4n+3;
Neumann branches dip below 2n+1 with a single non-degenerate minimum.

Discretization: second-order central differences on a uniform grid truncated
deep in the classically forbidden region by an artificial Dirichlet wall,
with Richardson extrapolation over step halvings.  Eigenvalues come from
LAPACK's Sturm-sequence bisection (stebz) and eigenvectors from inverse
iteration (stein), selected by index, which keeps the solve deterministic
and cheap for the lowest few levels.
"""

from __future__ import annotations

import hashlib
import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

from .core import (
    BCKind,
    BoundaryCondition,
    BracketingError,
    GridResolutionError,
    TruncationError,
)

__all__ = [
    "OscillatorGrid",
    "EigenPair",
    "EigenBranch",
    "SpectrumCache",
    "solve_spectrum",
    "branch_sample",
    "dh_derivative",
    "neumann_minimum",
    "robin_minimum",
    "branch_crossing",
    "robin_family",
]

# Collision threshold below which two discrete eigenvalues are treated as a
# grid failure rather than resolved (the true spectrum is simple).
_COLLISION_GAP = 1e-9


@dataclass(frozen=True)
class OscillatorGrid:
    """Discretization parameters for the half-line eigensolver.

    step is the coarsest grid spacing; left_cut the window depth beyond the
    classical turning region (in oscillator length units); richardson_levels
    the number of step halvings combined by extrapolation.
    """

    step: float = 5e-3
    left_cut: float = 12.0
    richardson_levels: int = 2

    def __post_init__(self):
        if not (self.step > 0):
            raise ValueError(f"step must be positive, got {self.step}")
        if self.left_cut < 8:
            raise ValueError(f"left_cut must be >= 8, got {self.left_cut}")
        if self.richardson_levels < 1:
            raise ValueError("richardson_levels must be >= 1")

    @property
    def fingerprint(self) -> str:
        key = f"v1|step={self.step:.17g}|cut={self.left_cut:.17g}|rich={self.richardson_levels}"
        return hashlib.sha256(key.encode()).hexdigest()[:16]


@dataclass
class EigenPair:
    """One eigenvalue with boundary data and normalized samples.

    samples[k] is the eigenfunction at z = eta - k*step (boundary first,
    marching into the domain), L2-normalized by the trapezoid rule and signed
    so the lobe nearest the boundary is positive.  boundary_derivative is
    du/dz at z = eta.
    """

    n: int
    eta: float
    bc: BoundaryCondition
    lam: float
    lam_levels: Tuple[float, ...]
    boundary_value: float
    boundary_derivative: float
    samples: Optional[np.ndarray]
    step: float

    @property
    def lam_err(self) -> float:
        """Crude a-posteriori eigenvalue error estimate from the last halving."""
        if len(self.lam_levels) < 2:
            return 1e-8
        return max(1e-13, abs(self.lam_levels[-1] - self.lam_levels[-2]) / 8.0)


@dataclass
class EigenBranch:
    """Sampled eigenvalue curve eta -> lambda for one condition and index."""

    bc: BoundaryCondition
    n: int
    eta_samples: np.ndarray
    lambda_samples: np.ndarray
    boundary_values: np.ndarray
    boundary_derivatives: np.ndarray
    grid: OscillatorGrid


def _lambda_upper_estimate(eta: float, n_max: int) -> float:
    """Upper estimate for lambda_{n_max}(eta), verified post hoc after a solve."""
    base = 4.0 * n_max + 6.0
    if eta >= 0:
        return base
    scale = max(abs(eta), 1.0) ** (2.0 / 3.0)
    return max(base, eta * eta + 3.2 * ((n_max + 1) * math.pi) ** (2.0 / 3.0) * scale + 10.0)


def _build_tridiag(eta: float, bc: BoundaryCondition, d: float, z_min: float):
    """Assemble the symmetric tridiagonal matrix for one grid level.

    Returns (diag, offdiag, n_points) for unknowns ordered boundary-first.
    For Neumann/Robin the boundary row is symmetrized by the half-weight
    transform; the eigenvector component there must be multiplied back by
    sqrt(2).
    """
    npts = int(round((eta - z_min) / d))
    z = eta - d * np.arange(npts + 1)  # z[0] = eta, z[npts] = z_min (wall)
    inv_d2 = 1.0 / (d * d)
    if bc.kind is BCKind.DIRICHLET:
        zi = z[1:npts]
        diag = 2.0 * inv_d2 + zi * zi
        off = np.full(npts - 2, -inv_d2)
        return diag, off, npts
    # Neumann/Robin: ghost point u_{-1} = u_1 - 2*d*alpha*u_0 at the cut,
    # boundary row scaled by 1/2 and symmetrized via u_0 -> sqrt(2) v_0.
    alpha = bc.alpha
    zi = z[1:npts]
    diag = np.empty(npts)
    diag[0] = 2.0 * inv_d2 + 2.0 * alpha / d + eta * eta
    diag[1:] = 2.0 * inv_d2 + zi * zi
    off = np.full(npts - 1, -inv_d2)
    off[0] = -math.sqrt(2.0) * inv_d2
    return diag, off, npts


def _solve_level(eta, bc, n_max, d, lam_up, left_cut, want_vectors):
    """Solve one grid level; returns (lams, vectors_or_None, npts).

    Vectors are returned in physical ordering including the boundary node
    (Dirichlet: explicit zero prepended), un-normalized.
    """
    z_min = min(eta, -math.sqrt(lam_up)) - left_cut
    diag, off, npts = _build_tridiag(eta, bc, d, z_min)
    if n_max + 1 > len(diag):
        raise GridResolutionError(
            f"window of {len(diag)} unknowns cannot hold {n_max + 1} levels"
        )
    if want_vectors:
        lams, vecs = eigh_tridiagonal(
            diag, off, select="i", select_range=(0, n_max), lapack_driver="stebz"
        )
    else:
        lams = eigvalsh_tridiagonal(
            diag, off, select="i", select_range=(0, n_max), lapack_driver="stebz"
        )
        vecs = None
    gaps = np.diff(lams)
    if len(gaps) and gaps.min() < _COLLISION_GAP:
        k = int(np.argmin(gaps))
        raise GridResolutionError(
            f"levels {k} and {k + 1} collide at eta={eta:.6g} "
            f"(gap {gaps.min():.3e} < {_COLLISION_GAP:.0e}); refine the grid"
        )
    if vecs is not None:
        if bc.kind is BCKind.DIRICHLET:
            full = np.zeros((npts, n_max + 1))
            full[1:, :] = vecs
        else:
            full = vecs.copy()
            full[0, :] *= math.sqrt(2.0)
        vecs = full
    return np.asarray(lams, dtype=float), vecs, npts


def _normalize_and_sign(vec: np.ndarray, d: float) -> np.ndarray:
    w = np.ones(len(vec))
    w[0] = w[-1] = 0.5
    nrm = math.sqrt(float(np.sum(w * vec * vec)) * d)
    u = vec / nrm
    amax = np.max(np.abs(u))
    idx = int(np.argmax(np.abs(u) > 0.05 * amax))
    if u[idx] < 0:
        u = -u
    return u


def _boundary_derivative(u: np.ndarray, d: float) -> float:
    # One-sided 4th-order stencil; samples run boundary-first with z
    # decreasing, hence the sign of the index derivative flips.
    return (25.0 * u[0] - 48.0 * u[1] + 36.0 * u[2] - 16.0 * u[3] + 3.0 * u[4]) / (12.0 * d)


def _richardson(values: Sequence[float]) -> Tuple[float, Tuple[float, ...]]:
    """Neville elimination of even-order error terms over step halvings."""
    tab = [list(values)]
    m = 1
    while len(tab[-1]) > 1:
        prev = tab[-1]
        fac = 4.0**m
        tab.append([(fac * prev[i + 1] - prev[i]) / (fac - 1.0) for i in range(len(prev) - 1)])
        m += 1
    return tab[-1][0], tuple(values)


def solve_spectrum(
    eta: float,
    bc: BoundaryCondition,
    n_max: int,
    grid: OscillatorGrid = OscillatorGrid(),
    want_vectors: bool = True,
) -> List[EigenPair]:
    """Lowest n_max+1 eigenpairs of the half-line oscillator cut at eta.

    Eigenvalues are Richardson-extrapolated over ``grid.richardson_levels``
    step halvings; boundary scalars are extrapolated the same way; samples
    come from the finest level.  Raises GridResolutionError if two levels
    cannot be separated and TruncationError if eigenfunction mass leaks to
    the artificial far wall.
    """
    if not math.isfinite(eta):
        raise ValueError(f"eta must be finite, got {eta}")
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")

    lam_up = _lambda_upper_estimate(eta, n_max)
    for _attempt in range(4):
        steps = [grid.step / 2**k for k in range(grid.richardson_levels)]
        levels = []
        for d in steps:
            lams, vecs, _ = _solve_level(eta, bc, n_max, d, lam_up, grid.left_cut, want_vectors)
            levels.append((d, lams, vecs))
        if levels[-1][1][-1] <= lam_up - 2.0:
            break
        lam_up *= 1.6
    else:
        raise GridResolutionError(
            f"could not bound lambda_{n_max}(eta={eta:.6g}) from above; "
            f"last estimate {lam_up:.3g}"
        )

    pairs = []
    d_fine = levels[-1][0]
    for n in range(n_max + 1):
        lam, lam_lvls = _richardson([lv[1][n] for lv in levels])
        if want_vectors:
            bvals, bders = [], []
            for d, _lams, vecs in levels:
                u = _normalize_and_sign(vecs[:, n], d)
                bvals.append(float(u[0]))
                bders.append(_boundary_derivative(u, d))
            bval, _ = _richardson(bvals)
            bder, _ = _richardson(bders)
            u_fine = _normalize_and_sign(levels[-1][2][:, n], d_fine)
            tail = u_fine[-int(round(1.0 / d_fine)):]
            tail_mass = float(np.sum(tail * tail)) * d_fine
            if tail_mass > 1e-10:
                raise TruncationError(
                    f"eigenfunction mass {tail_mass:.2e} at the far cut for "
                    f"n={n}, eta={eta:.6g}; widen left_cut"
                )
            if bc.kind is BCKind.DIRICHLET:
                bval = 0.0
        else:
            bval = bder = math.nan
            u_fine = None
        pairs.append(
            EigenPair(
                n=n,
                eta=eta,
                bc=bc,
                lam=lam,
                lam_levels=lam_lvls,
                boundary_value=bval,
                boundary_derivative=bder,
                samples=u_fine,
                step=d_fine,
            )
        )
    return pairs


class SpectrumCache:
    """Memoizing front-end to solve_spectrum for one (bc, grid) pair.

    Scalar data (eigenvalues, boundary values/derivatives) is kept for every
    eta ever solved; full sample vectors are held in a bounded LRU since the
    quadrature drivers stream through many nodes.  All methods are pure
    given (eta, n_max), so results merge deterministically regardless of
    call order.
    """

    def __init__(self, bc: BoundaryCondition, grid: OscillatorGrid = OscillatorGrid(),
                 max_vector_entries: int = 512):
        self.bc = bc
        self.grid = grid
        self._scalars = {}
        self._vectors = OrderedDict()
        self._max_vec = max_vector_entries
        self.disk_cache = None  # optional BranchCache attached by the CLI

    # -- scalar interface ------------------------------------------------
    def lams(self, eta: float, n_max: int) -> np.ndarray:
        rec = self._scalars.get(eta)
        if rec is None or rec[0] < n_max:
            hit = self._from_disk(eta, n_max)
            if hit is None:
                pairs = solve_spectrum(eta, self.bc, n_max, self.grid, want_vectors=False)
                rec = (
                    n_max,
                    np.array([p.lam for p in pairs]),
                    np.full(n_max + 1, np.nan),
                    np.full(n_max + 1, np.nan),
                )
            else:
                rec = hit
            self._scalars[eta] = rec
        return rec[1][: n_max + 1]

    def lam(self, eta: float, n: int) -> float:
        return float(self.lams(eta, n)[n])

    def boundary(self, eta: float, n: int) -> Tuple[float, float]:
        """(u(eta), du/dz(eta)) for branch n, solving with vectors if needed."""
        rec = self._scalars.get(eta)
        if rec is None or rec[0] < n or math.isnan(rec[2][n]):
            pairs = self.pairs(eta, n)
            rec = self._scalars[eta]
        return float(rec[2][n]), float(rec[3][n])

    # -- vector interface ------------------------------------------------
    def pairs(self, eta: float, n_max: int) -> List[EigenPair]:
        key = (eta, n_max)
        cached = self._vectors.get(key)
        if cached is not None:
            self._vectors.move_to_end(key)
            return cached
        for (e, nm), val in self._vectors.items():
            if e == eta and nm >= n_max:
                return val[: n_max + 1]
        pairs = solve_spectrum(eta, self.bc, n_max, self.grid, want_vectors=True)
        self._vectors[key] = pairs
        if len(self._vectors) > self._max_vec:
            self._vectors.popitem(last=False)
        self._store_scalars(eta, pairs)
        return pairs

    def _store_scalars(self, eta, pairs):
        n_max = len(pairs) - 1
        rec = self._scalars.get(eta)
        if rec is not None and rec[0] >= n_max and not math.isnan(rec[2][min(n_max, rec[0])]):
            return
        self._scalars[eta] = (
            n_max,
            np.array([p.lam for p in pairs]),
            np.array([p.boundary_value for p in pairs]),
            np.array([p.boundary_derivative for p in pairs]),
        )
        if self.disk_cache is not None:
            self.disk_cache.put(self.bc, self.grid, eta, pairs)

    def _from_disk(self, eta, n_max):
        if self.disk_cache is None:
            return None
        return self.disk_cache.get(self.bc, self.grid, eta, n_max)


def dh_derivative(pair: EigenPair, eta: float, bc: BoundaryCondition) -> float:
    """Closed-form branch slope from eigenfunction boundary data.

    Dirichlet: -|du(eta)|^2; Neumann: (eta^2 - lambda)|u(eta)|^2; Robin:
    (eta^2 - alpha^2 - lambda)|u(eta)|^2.  Requires the pair to carry
    boundary data solved at the same (eta, bc).
    """
    if pair.samples is None or math.isnan(pair.boundary_derivative):
        raise ValueError("eigenpair carries no boundary data; solve with vectors")
    if pair.eta != eta or pair.bc != bc:
        raise ValueError("eigenpair was solved at different (eta, bc)")
    if bc.kind is BCKind.DIRICHLET:
        return -pair.boundary_derivative**2
    if bc.kind is BCKind.NEUMANN:
        return (eta * eta - pair.lam) * pair.boundary_value**2
    return (eta * eta - bc.alpha**2 - pair.lam) * pair.boundary_value**2


def _slope_sign(cache: SpectrumCache, eta: float, n: int) -> float:
    """Sign of d(lambda)/d(eta) for Neumann/Robin without boundary data."""
    lam = cache.lam(eta, n)
    return eta * eta - cache.bc.alpha**2 - lam


def _minimum(cache: SpectrumCache, n: int, scan_hi: float = None):
    """Locate the single stationary point of a Neumann/Robin branch."""
    from scipy.optimize import brentq

    bc = cache.bc
    if bc.kind is BCKind.DIRICHLET:
        raise ValueError("Dirichlet branches are strictly monotone")
    # Slope sign is eta^2 - alpha^2 - lambda: negative on the descending part
    # left of the minimum (at eta=0 it is -(4n+1) - alpha^2), positive beyond.
    lo = 0.0
    if _slope_sign(cache, lo, n) >= 0:
        raise BracketingError(f"branch n={n} is not descending at eta=0; unexpected")
    hi0 = math.sqrt(2 * n + 1 + bc.alpha**2) + 0.5
    hi = hi0
    limit = scan_hi if scan_hi is not None else hi0 + 6.0
    while _slope_sign(cache, hi, n) < 0:
        hi += 0.5
        if hi > limit:
            raise BracketingError(
                f"branch minimum not bracketed on [{lo:.3g}, {hi:.3g}] for n={n}"
            )
    eta_n = brentq(lambda e: _slope_sign(cache, e, n), lo, hi, xtol=1e-12, rtol=8.9e-16)
    return float(eta_n), cache.lam(float(eta_n), n)


def neumann_minimum(
    n: int, grid: OscillatorGrid = OscillatorGrid(), cache: SpectrumCache = None
) -> Tuple[float, float]:
    """(eta_n, min lambda) of the n-th Neumann branch.

    The stationary point solves lambda = eta^2, so the root of that sign
    function is bisected; at the result the minimum value equals eta_n^2
    within solver tolerance.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if cache is None:
        cache = SpectrumCache(BoundaryCondition.neumann(), grid)
    if cache.bc.kind is not BCKind.NEUMANN:
        raise ValueError("neumann_minimum needs a Neumann cache")
    return _minimum(cache, n)


def robin_minimum(n: int, alpha: float, grid: OscillatorGrid = OscillatorGrid(),
                  cache: SpectrumCache = None) -> Tuple[float, float]:
    """Stationary point of a Robin branch (lambda = eta^2 - alpha^2 there)."""
    if cache is None:
        cache = SpectrumCache(BoundaryCondition.robin(alpha), grid)
    return _minimum(cache, n)


def branch_crossing(
    bc: BoundaryCondition,
    n: int,
    level: float,
    grid: OscillatorGrid = OscillatorGrid(),
    search: Tuple[float, float] = (-8.0, 10.0),
    cache: SpectrumCache = None,
    xtol: float = 1e-12,
) -> List[float]:
    """All eta in ``search`` with lambda_{*,n}(eta) = level, ascending.

    Dirichlet branches are strictly decreasing so at most one root exists;
    Neumann/Robin branches are split at their single minimum, giving at most
    two.  A root closer than 1e-6 to a search endpoint raises
    BracketingError asking for a wider interval.
    """
    from scipy.optimize import brentq

    if not (math.isfinite(level) and all(math.isfinite(s) for s in search)):
        raise ValueError("level and search bounds must be finite")
    a, b = search
    if not a < b:
        raise ValueError(f"empty search interval {search}")
    if cache is None:
        cache = SpectrumCache(bc, grid)

    def g(e):
        return cache.lam(e, n) - level

    def refine(lo, hi):
        root = brentq(g, lo, hi, xtol=xtol, rtol=8.9e-16)
        if min(root - a, b - root) < 1e-6:
            raise BracketingError(
                f"root {root:.6g} sits at the boundary of search {search}; widen it"
            )
        return float(root)

    roots = []
    if bc.kind is BCKind.DIRICHLET:
        ga, gb = g(a), g(b)
        if ga == 0.0 or gb == 0.0:
            raise BracketingError(f"level {level} met exactly at a search endpoint; widen {search}")
        if ga * gb < 0:
            roots.append(refine(a, b))
        return roots

    try:
        eta_min, lam_min = _minimum(cache, n)
    except BracketingError:
        eta_min, lam_min = None, None
    segments = []
    if eta_min is not None and a < eta_min < b:
        segments = [(a, eta_min), (eta_min, b)]
    else:
        segments = [(a, b)]
    for lo, hi in segments:
        glo, ghi = g(lo), g(hi)
        if glo == 0.0 or ghi == 0.0:
            raise BracketingError(f"level met exactly at segment endpoint [{lo}, {hi}]")
        if glo * ghi < 0:
            roots.append(refine(lo, hi))
    return sorted(roots)


def branch_sample(
    bc: BoundaryCondition,
    n: int,
    eta_grid: Sequence[float],
    grid: OscillatorGrid = OscillatorGrid(),
    cache: SpectrumCache = None,
) -> EigenBranch:
    """Sample one branch over an increasing eta grid with invariant checks.

    Checks Dirichlet strict decrease and the 2n+1 lower bound, the Neumann
    (2n-1)_+ bound, and branch continuity against a local Lipschitz estimate
    from the closed-form slopes; a violation raises rather than silently
    re-labelling branches.
    """
    etas = np.asarray(list(eta_grid), dtype=float)
    if len(etas) == 0 or np.any(np.diff(etas) <= 0):
        raise ValueError("eta_grid must be non-empty and strictly increasing")
    if cache is None:
        cache = SpectrumCache(bc, grid)

    lams, bvals, bders, slopes = [], [], [], []
    for e in etas:
        pairs = cache.pairs(float(e), n)
        p = pairs[n]
        lams.append(p.lam)
        bvals.append(p.boundary_value)
        bders.append(p.boundary_derivative)
        slopes.append(dh_derivative(p, float(e), bc))
    lams = np.array(lams)

    # strict branch inequalities are asserted up to the solver noise floor:
    # the Dirichlet-to-Landau gap falls below it already before eta = 6
    atol = 2e-9
    lower = 2 * n + 1 if bc.kind is BCKind.DIRICHLET else max(2 * n - 1, 0)
    if np.any(lams <= lower - atol):
        k = int(np.argmax(lams <= lower - atol))
        raise GridResolutionError(
            f"branch ({bc.label}, n={n}) dips to {lams[k]:.9g} <= {lower} at "
            f"eta={etas[k]:.6g}; likely index tracking failure"
        )
    if bc.kind is BCKind.DIRICHLET and np.any(np.diff(lams) >= atol):
        k = int(np.argmax(np.diff(lams) >= atol))
        raise GridResolutionError(
            f"Dirichlet branch n={n} fails strict decrease between "
            f"eta={etas[k]:.6g} and {etas[k + 1]:.6g}"
        )
    for k in range(len(etas) - 1):
        de = etas[k + 1] - etas[k]
        lip = max(abs(slopes[k]), abs(slopes[k + 1])) * 1.6 + 0.05
        if abs(lams[k + 1] - lams[k]) > lip * de:
            raise GridResolutionError(
                f"branch ({bc.label}, n={n}) jumps by {abs(lams[k+1]-lams[k]):.3g} over "
                f"d(eta)={de:.3g} at eta={etas[k]:.6g}, exceeding the slope bound {lip:.3g}"
            )

    return EigenBranch(
        bc=bc,
        n=n,
        eta_samples=etas,
        lambda_samples=lams,
        boundary_values=np.array(bvals),
        boundary_derivatives=np.array(bders),
        grid=grid,
    )


def robin_family(
    eta: float,
    alphas: Sequence[float],
    n: int,
    grid: OscillatorGrid = OscillatorGrid(),
) -> List[float]:
    """lambda_n(eta; alpha) over an increasing family of Robin coefficients.

    Values are nondecreasing in alpha, start at the Neumann value for
    alpha = 0, and stay below the Dirichlet value.
    """
    alphas = list(alphas)
    if any(a < 0 for a in alphas):
        raise ValueError("Robin coefficients must be nonnegative")
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly increasing")
    out = []
    for a in alphas:
        bc = BoundaryCondition.neumann() if a == 0 else BoundaryCondition.robin(a)
        pairs = solve_spectrum(eta, bc, n, grid, want_vectors=False)
        out.append(pairs[n].lam)
    return out
