"""Classical magnetic billiard in the half-plane x1 >= 0.

Cyclotron circles reflect specularly off the boundary ("hops" that advance
along it), drift slowly across level curves of W = (tau - V)/F, and detach
or attach depending on the sign of the potential gradient along the wall.
The field intensity is normalized to 1 here; a general intensity enters only
through W.

Closed forms for a single hop at energy a^2 and tangential tilt
eta = xi2 / a:
    chord  = 2 a (1 - eta^2)^{1/2} / mu
    arc    = 2 a (pi - arccos eta) / mu
    time   =     (pi - arccos eta) / mu
and the mean advance speed along the wall is -2 a v(eta) with
v = (1-eta^2)^{1/2} / (pi - arccos eta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .core import PotentialField, RegimeError

__all__ = [
    "PhaseState",
    "Reflection",
    "HopSummary",
    "Trajectory",
    "RegimeKind",
    "Regime",
    "hop_metrics",
    "hop_speed",
    "drift_velocity",
    "classify",
    "integrate_flow",
    "integrate_drift",
    "adiabatic_invariant",
    "portrait",
    "PortraitBundle",
]


@dataclass(frozen=True)
class PhaseState:
    x1: float
    x2: float
    xi1: float
    xi2: float
    t: float = 0.0

    def __post_init__(self):
        if self.x1 < 0:
            raise ValueError(f"x1 must be >= 0, got {self.x1}")


@dataclass(frozen=True)
class Reflection:
    t: float
    x2: float
    xi1_incident: float


@dataclass(frozen=True)
class HopSummary:
    t_start: float
    t_end: float
    dx2: float
    apex_x1: float
    apex_t: float
    apex_state: Tuple[float, float, float, float]  # (x1, x2, xi1, xi2) at apex


@dataclass
class Trajectory:
    samples: np.ndarray          # columns t, x1, x2, xi1, xi2
    reflections: List[Reflection]
    hops: List[HopSummary]
    energy: np.ndarray           # Hamiltonian value at each sample
    energy_tol: float

    @property
    def initial_energy(self) -> float:
        return float(self.energy[0])

    def max_energy_drift(self) -> float:
        e0 = self.initial_energy
        return float(np.max(np.abs(self.energy - e0))) / (1.0 + abs(e0))


class RegimeKind(Enum):
    CIRCULAR = "circular"
    HOP = "hop"
    GLIDING = "gliding"
    TRANSITIONAL = "transitional"


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    eta: float


def hop_metrics(a: float, eta: float, mu: float) -> Tuple[float, float, float]:
    """(chord, arc, time) of one reflected cyclotron arc."""
    if not a > 0:
        raise ValueError("energy parameter a must be positive")
    if not abs(eta) < 1:
        raise ValueError(f"hop regime requires |eta| < 1, got {eta}")
    if mu < 1:
        raise ValueError("mu must be >= 1")
    ang = math.pi - math.acos(eta)
    chord = 2.0 * a / mu * math.sqrt(1.0 - eta * eta)
    arc = 2.0 * a / mu * ang
    return chord, arc, ang / mu


def hop_speed(eta: float) -> float:
    """v(eta) in (0, 1): mean boundary speed of a hop is -2 a v(eta)."""
    if not abs(eta) < 1:
        raise ValueError(f"hop regime requires |eta| < 1, got {eta}")
    return math.sqrt(1.0 - eta * eta) / (math.pi - math.acos(eta))


def drift_velocity(x: Tuple[float, float], w: PotentialField, mu: float,
                   tau: float = 1.0) -> Tuple[float, float]:
    """Guiding-center drift (dW/dx2, -dW/dx1) / mu: along level curves of W."""
    g1, g2 = w.w_grad(x[0], x[1], tau)
    return (float(g2) / mu, -float(g1) / mu)


def classify(state: PhaseState, w0: float, margin: float = None, mu: float = None) -> Regime:
    """Regime from the tilt eta = xi2 / sqrt(W at the wall).

    Circular orbits miss the wall (eta >= 1 + margin), hops reflect off it
    (|eta| < 1 - margin), gliding hugs it (eta <= -1 + margin); the bands in
    between are transitional.  Default margin is 2/mu.
    """
    if w0 <= 0:
        raise ValueError("w0 must be positive")
    if margin is None:
        margin = 2.0 / mu if mu else 0.02
    eta = state.xi2 / math.sqrt(w0)
    if eta >= 1.0 + margin:
        kind = RegimeKind.CIRCULAR
    elif eta <= -1.0 + margin:
        kind = RegimeKind.GLIDING
    elif abs(eta) < 1.0 - margin:
        kind = RegimeKind.HOP
    else:
        kind = RegimeKind.TRANSITIONAL
    return Regime(kind, eta)


def _rhs(mu: float, w: Optional[PotentialField], tau: float):
    if w is None:
        def f(t, y):
            p2 = y[3] - mu * y[0]
            return (2.0 * y[2], 2.0 * p2, 2.0 * mu * p2, 0.0)
        return f

    def f(t, y):
        p2 = y[3] - mu * y[0]
        g1, g2 = w.w_grad(y[0], y[1], tau)
        # V = tau - W F with F = 1, so -dV/dx = +dW/dx
        return (2.0 * y[2], 2.0 * p2, 2.0 * mu * p2 + float(g1), float(g2))
    return f


def _hamiltonian(mu: float, w: Optional[PotentialField], tau: float, y) -> float:
    p2 = y[3] - mu * y[0]
    val = y[2] ** 2 + p2 * p2
    if w is not None:
        val += tau - float(np.asarray(w.w(y[0], y[1], tau)))
    return float(val)


def integrate_flow(
    initial: PhaseState,
    w: Optional[PotentialField],
    mu: float,
    T: float,
    tol: float = 1e-10,
    tau: float = 1.0,
    energy_tol: float = 1e-6,
    max_hops: int = 100_000,
) -> Trajectory:
    """Hamiltonian flow with specular reflection at x1 = 0.

    Adaptive embedded Runge-Kutta 4(5) between wall events; each boundary
    crossing is located by the integrator's root finder on the dense output
    and the normal momentum flips there.  Negative T integrates backwards
    (events then fire on outgoing crossings), so a forward/backward round
    trip is a reversibility check.  Raises on gliding-limit starts and on
    energy drift beyond energy_tol.
    """
    if T == 0:
        raise ValueError("T must be nonzero")
    w0 = 1.0 if w is None else float(np.asarray(w.w(0.0, initial.x2, tau)))
    if w0 > 0:
        eta0 = initial.xi2 / math.sqrt(w0)
        if abs(eta0 + 1.0) < 1e-3 and initial.x1 < 1e-9:
            raise RegimeError(
                f"gliding-limit start (eta={eta0:.6f}): reflections accumulate without bound"
            )

    f = _rhs(mu, w, tau)
    direction = 1.0 if T > 0 else -1.0

    def wall(t, y):
        return y[0]

    wall.terminal = True
    # the wall is always approached from x1 > 0 along the solver's step
    # sequence, for either sign of T
    wall.direction = -1.0

    y = np.array([initial.x1, initial.x2, initial.xi1, initial.xi2], dtype=float)
    # a start exactly on the wall moving inward must not trigger immediately
    t_cur = initial.t
    t_end = initial.t + T
    e0 = _hamiltonian(mu, w, tau, y)

    ts = [t_cur]
    ys = [y.copy()]
    reflections: List[Reflection] = []
    hop_starts: List[Tuple[float, float]] = []
    hops: List[HopSummary] = []
    apex_cache: List[Tuple[float, float, np.ndarray]] = []
    max_step = math.pi / (2.0 * mu) / 16.0

    def record(sol, t_stop):
        nonlocal apex_cache
        tt = sol.t[1:] if len(ts) else sol.t
        for tv in tt:
            ts.append(tv)
            ys.append(sol.sol(tv))
        # apex: zero of xi1 with x1 > 0 inside this leg
        sign = np.sign([sol.sol(t)[2] for t in sol.t])
        for k in range(len(sol.t) - 1):
            if sign[k] > 0 and sign[k + 1] <= 0:
                try:
                    ta = brentq(lambda t: sol.sol(t)[2], sol.t[k], sol.t[k + 1])
                except ValueError:
                    continue
                ya = sol.sol(ta)
                if ya[0] > 0:
                    apex_cache.append((ta, ya[0], ya))

    hop_open = abs(initial.x1) < 1e-12
    if hop_open:
        hop_starts.append((t_cur, y[1]))

    guard = 0
    while (t_end - t_cur) * direction > 1e-14:
        guard += 1
        if guard > max_hops:
            raise RegimeError(f"exceeded {max_hops} reflections; near-gliding trajectory")
        sol = solve_ivp(
            f,
            (t_cur, t_end),
            y,
            method="RK45",
            rtol=tol,
            atol=tol,
            dense_output=True,
            events=wall,
            max_step=max_step,
        )
        if not sol.success:
            raise RegimeError(f"integrator failure: {sol.message}")
        hit_wall = sol.status == 1
        t_next = sol.t[-1] if not hit_wall else float(sol.t_events[0][0])
        record(sol, t_next)
        y = sol.sol(t_next).copy()
        t_cur = t_next
        if hit_wall:
            y[0] = 0.0
            reflections.append(Reflection(t=t_cur, x2=float(y[1]), xi1_incident=float(y[2])))
            if hop_open and hop_starts:
                t0h, x20 = hop_starts[-1]
                apex = max(
                    (a for a in apex_cache if (a[0] - t0h) * direction > 0),
                    key=lambda a: a[1],
                    default=None,
                )
                if apex is not None:
                    hops.append(
                        HopSummary(
                            t_start=t0h,
                            t_end=t_cur,
                            dx2=float(y[1]) - x20,
                            apex_x1=float(apex[1]),
                            apex_t=float(apex[0]),
                            apex_state=tuple(float(v) for v in apex[2]),
                        )
                    )
                apex_cache = []
            y[2] = -y[2]
            hop_open = True
            hop_starts.append((t_cur, float(y[1])))
            e_now = _hamiltonian(mu, w, tau, y)
            if abs(e_now - e0) > energy_tol * (1.0 + abs(e0)):
                raise RegimeError(
                    f"energy drift {abs(e_now - e0):.3e} beyond tolerance at t={t_cur:.6g}"
                )

    samples = np.column_stack([np.array(ts), np.array(ys)])
    energy = np.array([_hamiltonian(mu, w, tau, yy) for yy in ys])
    drift = np.max(np.abs(energy - e0)) / (1.0 + abs(e0))
    if drift > energy_tol:
        raise RegimeError(f"energy drift {drift:.3e} beyond tolerance {energy_tol:.1e}")
    return Trajectory(
        samples=samples,
        reflections=reflections,
        hops=hops,
        energy=energy,
        energy_tol=energy_tol,
    )


def integrate_drift(
    start: Tuple[float, float],
    w: PotentialField,
    mu: float,
    T: float,
    tau: float = 1.0,
    tol: float = 1e-10,
    stop_at_wall: bool = True,
) -> np.ndarray:
    """Guiding-center drift path (slow motion along level curves of W)."""

    def f(t, y):
        v1, v2 = drift_velocity((y[0], y[1]), w, mu, tau)
        return (v1, v2)

    events = None
    if stop_at_wall:
        def wall(t, y):
            return y[0]
        wall.terminal = True
        wall.direction = -1.0
        events = wall
    sol = solve_ivp(f, (0.0, T), list(start), method="RK45", rtol=tol, atol=tol,
                    dense_output=True, events=events, max_step=abs(T) / 50.0)
    tt = np.linspace(0.0, sol.t[-1], 200)
    path = sol.sol(tt)
    return np.column_stack([tt, path[0], path[1]])


def adiabatic_invariant(
    traj: Trajectory, w0: Callable[[float], float]
) -> np.ndarray:
    """Per-hop values of (1 + eta) * exp(-(4/3) sqrt(W0)) at the hop apex.

    W0 is the wall restriction of W as a function of x2; eta is evaluated
    mid-hop from the apex momentum.  Raises if a hop leaves the |eta| < 1
    band, naming the offending hop.
    """
    if not traj.hops:
        raise ValueError("trajectory carries no completed hops")
    vals = []
    for k, hop in enumerate(traj.hops):
        _, x2a, _, xi2a = hop.apex_state
        w0v = float(w0(x2a))
        if w0v <= 0:
            raise RegimeError(f"W0 <= 0 at hop {k}")
        eta = xi2a / math.sqrt(w0v)
        if not (-1.0 < eta < 1.0):
            raise RegimeError(f"hop {k} left the hop regime (eta={eta:.4f})")
        rho_p = 1.0 + eta
        vals.append(rho_p * math.exp(-(4.0 / 3.0) * math.sqrt(w0v)))
    return np.array(vals)


# ---------------------------------------------------------------------------
# drift portraits
# ---------------------------------------------------------------------------

_CASE_SIGNS = {"a": (1, 1), "b": (1, -1), "c": (-1, 1), "d": (-1, -1)}


@dataclass
class PortraitBundle:
    case_id: str
    shape: str
    hop_track: Trajectory
    drift_tracks: List[np.ndarray]
    expected: str          # 'tear_off' or 'collide'
    observed: str
    eta_trend: float       # total change of eta over the hop sequence
    w_drift_spread: float  # max |W - W_start| along drift tracks

    @property
    def consistent(self) -> bool:
        return self.expected == self.observed


def portrait(example_id: str, mu: float = 30.0, slope: float = 0.12,
             n_hops: int = 60, tol: float = 1e-9) -> PortraitBundle:
    """Hop + drift trajectory bundle for one sign case of the wall potential.

    example_id is one of 'a'..'d' plus '-linear' or '-quadratic', matching
    the four sign combinations of (dW/dx1, dW/dx2) (linear) or of
    (dW/dx1, d2W/dx2^2) with a critical point on the wall (quadratic).
    Hops advance toward negative x2; they detach from the wall where W
    decreases in that direction (dW/dx2 > 0) and press onto it otherwise,
    while drift trajectories follow level curves of W.  The bundle records
    the automated tear-off/collision sign check; plotting is left to the
    caller.
    """
    try:
        case, shape = example_id.split("-")
        s1, s2 = _CASE_SIGNS[case]
    except (ValueError, KeyError):
        raise ValueError(
            f"example_id must be like 'a-linear' or 'c-quadratic', got {example_id!r}"
        )
    if shape not in ("linear", "quadratic"):
        raise ValueError(f"unknown shape {shape!r}")

    if shape == "linear":
        wf = lambda x1, x2: 1.0 + slope * (s1 * x1 + s2 * x2)
        gw = lambda x1, x2: (
            slope * s1 * np.ones_like(np.asarray(x1, dtype=float)),
            slope * s2 * np.ones_like(np.asarray(x1, dtype=float)),
        )
    else:
        wf = lambda x1, x2: 1.0 + slope * s1 * x1 + 0.5 * slope * s2 * np.asarray(x2) ** 2
        gw = lambda x1, x2: (
            slope * s1 * np.ones_like(np.asarray(x1, dtype=float)),
            slope * s2 * np.asarray(x2, dtype=float),
        )
    w = PotentialField.from_w(wf, tau=1.0, grad_w=gw)

    # hop track: start on the wall at x2 chosen so the local dW/dx2 sign
    # matches the case; quadratic tracks are kept short so they stay on the
    # starting side of the critical line, where the sign prediction applies
    x2_start = 0.0 if shape == "linear" else 2.0
    sgn_w2 = s2
    if shape == "quadratic":
        n_hops = min(n_hops, 14)
    eta0 = 0.0
    w0v = float(np.asarray(wf(0.0, x2_start)))
    a0 = math.sqrt(w0v)
    xi2 = eta0 * a0
    xi1 = math.sqrt(max(w0v - xi2 * xi2, 0.0))
    init = PhaseState(x1=0.0, x2=x2_start, xi1=xi1, xi2=xi2)
    t_hop = (math.pi - math.acos(eta0)) / mu
    traj = integrate_flow(init, w, mu, T=n_hops * t_hop * 1.05, tol=tol,
                          tau=1.0, energy_tol=1e-5)

    etas = []
    for hop in traj.hops:
        _, x2a, _, xi2a = hop.apex_state
        if shape == "quadratic" and x2a < 0.4 * x2_start:
            break
        etas.append(xi2a / math.sqrt(float(np.asarray(wf(0.0, x2a)))))
    eta_trend = (etas[-1] - etas[0]) if len(etas) >= 2 else 0.0
    observed = "tear_off" if eta_trend > 0 else "collide"
    expected = "tear_off" if sgn_w2 > 0 else "collide"

    drift_tracks = []
    spread = 0.0
    for x1s in (0.6, 1.0, 1.4):
        path = integrate_drift((x1s, x2_start + 0.5), w, mu, T=0.4 * mu, tau=1.0)
        drift_tracks.append(path)
        wvals = np.asarray(wf(path[:, 1], path[:, 2]), dtype=float)
        spread = max(spread, float(np.max(np.abs(wvals - wvals[0]))))

    return PortraitBundle(
        case_id=example_id,
        shape=shape,
        hop_track=traj,
        drift_tracks=drift_tracks,
        expected=expected,
        observed=observed,
        eta_trend=float(eta_trend),
        w_drift_spread=spread,
    )
