"""Equilibrium necessary conditions in decision-potential coordinates.

The state is ``(I, phi)`` with ``phi = I (V + 1)`` and ``V`` the shadow value
of staying susceptible. The equilibrium control depends on ``phi`` alone:
no spending below ``phi = 1/m``, full spending ``1/m`` above. Both flows are
integrated exactly, so an equilibrium trajectory is at most two closed-form
segments, and the game duration is a strictly decreasing function of the
initial potential ``phi0``. Inverting that map gives the unique equilibrium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import bisect

from .model import GameParams, prevalence_at

_TF_TOL = 1e-11


@dataclass(frozen=True)
class PotentialState:
    t: float
    i: float
    phi: float


@dataclass(frozen=True)
class ControlSet:
    """Admissible equilibrium spending rates at a given potential."""

    low: float
    high: float

    @property
    def sliding(self) -> bool:
        return self.low != self.high


class PhaseRegime(str, Enum):
    SINGLE_PHASE_FREE = "free"
    SINGLE_PHASE_LOCKED = "locked"
    TWO_PHASE = "two-phase"


@dataclass(frozen=True)
class Segment:
    start: PotentialState
    control: float
    duration: float


@dataclass(frozen=True)
class EquilibriumTrajectory:
    segments: list[Segment]
    tau: float | None
    tf: float
    phi0: float
    v0: float
    disutility: float
    m: float = field(repr=False)

    @property
    def delay(self) -> float:
        """Length of the final distancing phase."""
        return sum(s.duration for s in self.segments if s.control > 0)

    @property
    def terminal_state(self) -> PotentialState:
        return self.state_at(self.tf)

    def control_at(self, t: float) -> float:
        for seg in self.segments:
            if t < seg.start.t + seg.duration:
                return seg.control
        return self.segments[-1].control

    def state_at(self, t: float) -> PotentialState:
        if not 0.0 <= t <= self.tf:
            raise ValueError(f"t={t} outside [0, {self.tf}]")
        seg = self.segments[0]
        for candidate in self.segments:
            if candidate.start.t <= t:
                seg = candidate
        dt = t - seg.start.t
        if seg.control > 0:
            return flow_locked(seg.start, dt, self.m)
        return flow_free(seg.start, dt)

    def sample(self, n: int = 257) -> list[PotentialState]:
        return [self.state_at(t) for t in np.linspace(0.0, self.tf, n)]


def control_rule(phi: float, m: float) -> ControlSet:
    if phi < 0:
        raise ValueError("phi must be nonnegative")
    threshold = 1.0 / m
    if phi < threshold:
        return ControlSet(0.0, 0.0)
    if phi > threshold:
        return ControlSet(threshold, threshold)
    return ControlSet(0.0, threshold)


def flow_free(state: PotentialState, dt: float, m: float | None = None) -> PotentialState:
    """Advance with no spending: logistic prevalence and ``phi`` growing like ``e^t``.

    With ``m`` given, refuses to step across the switching surface.
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    phi = state.phi * math.exp(dt)
    if m is not None and state.phi < 1.0 / m and phi > (1.0 / m) * (1.0 + 1e-12):
        raise ValueError("free flow crosses phi = 1/m; split the step at the switch time")
    return PotentialState(state.t + dt, prevalence_at(dt, state.i), phi)


def flow_locked(state: PotentialState, dt: float, m: float) -> PotentialState:
    """Advance at full spending: prevalence frozen, ``phi`` rising at rate ``i/m``."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    return PotentialState(state.t + dt, state.i, state.phi + state.i / m * dt)


def switch_time(phi0: float, m: float) -> float:
    """Time for the free flow to lift ``phi0`` onto the switching surface."""
    if phi0 <= 0:
        raise ValueError("phi0 must be positive")
    if phi0 > 1.0 / m:
        raise ValueError("phi0 above 1/m is already on the locked side")
    return -math.log(m * phi0)


def free_terminal_time(phi0: float, i0: float) -> float:
    """Time for the free flow from ``(i0, phi0)`` to reach the terminal surface ``phi = I``."""
    return math.log(1.0 / phi0 - (1.0 - i0) / i0)


def locked_duration(phi0: float, m: float, i0: float) -> float:
    return m * (i0 - phi0) / i0


def two_phase_duration(phi0: float, m: float, i0: float) -> float:
    return m - math.log(m * phi0) - (m * (1.0 - i0) * phi0 + i0) / i0


def _check_phi0(phi0, i0):
    if not 0 < phi0 <= i0:
        raise ValueError(f"phi0 must lie in (0, i0={i0}], got {phi0}")


def _tf_of_phi0(phi0: float, m: float, i0: float) -> tuple[float, PhaseRegime]:
    _check_phi0(phi0, i0)
    if phi0 >= 1.0 / m:
        return locked_duration(phi0, m, i0), PhaseRegime.SINGLE_PHASE_LOCKED
    t_star = free_terminal_time(phi0, i0)
    tau = -math.log(m * phi0)
    if t_star <= tau:
        return t_star, PhaseRegime.SINGLE_PHASE_FREE
    return two_phase_duration(phi0, m, i0), PhaseRegime.TWO_PHASE


def tf_of_phi0(phi0: float, params: GameParams) -> tuple[float, PhaseRegime]:
    """Game duration whose equilibrium starts at potential ``phi0`` (``params.tf`` is ignored)."""
    return _tf_of_phi0(phi0, params.m, params.i0)


def _phase_boundary(m: float, i0: float) -> float | None:
    """Initial potential separating single-phase from two-phase trajectories."""
    if i0 >= 1.0 / m:
        return 1.0 / m
    if m <= 1.0:
        return None
    # free trajectory reaches phi = I = 1/m simultaneously
    return i0 * (m - 1.0) / (m * (1.0 - i0))


def phi0_of_tf(params: GameParams, tf: float | None = None) -> float:
    """Unique initial potential whose trajectory meets the terminal surface at ``tf``.

    Single-phase branches are inverted in closed form. The two-phase branch
    is bracketed below by ``e^-(tf+1) min(i0, 1/m)`` and solved by bisection
    in ``log(phi0)``.
    """
    m, i0 = params.m, params.i0
    tf = params.tf if tf is None else float(tf)
    if tf < 0:
        raise ValueError("tf must be nonnegative")
    if tf == 0.0:
        return i0
    boundary = _phase_boundary(m, i0)
    tf_boundary = math.inf if boundary is None else _tf_of_phi0(boundary, m, i0)[0]
    if tf <= tf_boundary:
        if i0 >= 1.0 / m:
            return i0 * (1.0 - tf / m)
        return i0 / ((1.0 - i0) + i0 * math.exp(tf))

    lo = math.log(math.exp(-(tf + 1.0)) * min(i0, 1.0 / m))
    hi = math.log(boundary)

    def gap(log_phi):
        return two_phase_duration(math.exp(log_phi), m, i0) - tf

    log_phi = bisect(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400)
    return min(math.exp(log_phi), boundary)


def shadow_value(state: PotentialState) -> float:
    if state.i <= 0:
        raise ValueError("prevalence must be positive")
    return state.phi / state.i - 1.0


def equilibrium_trajectory(params: GameParams) -> EquilibriumTrajectory:
    m, i0, tf = params.m, params.i0, params.tf
    phi0 = phi0_of_tf(params)
    _, regime = _tf_of_phi0(phi0, m, i0)
    start = PotentialState(0.0, i0, phi0)
    if regime is PhaseRegime.SINGLE_PHASE_LOCKED:
        segments = [Segment(start, 1.0 / m, tf)]
        tau = 0.0
    elif regime is PhaseRegime.SINGLE_PHASE_FREE:
        segments = [Segment(start, 0.0, tf)]
        tau = None
    else:
        tau = min(switch_time(phi0, m), tf)
        at_switch = flow_free(start, tau)
        # land exactly on the switching surface
        at_switch = PotentialState(at_switch.t, at_switch.i, 1.0 / m)
        segments = [Segment(start, 0.0, tau), Segment(at_switch, 1.0 / m, tf - tau)]
        segments = [s for s in segments if s.duration > 0] or segments[-1:]
    v0 = phi0 / i0 - 1.0
    return EquilibriumTrajectory(
        segments=segments, tau=tau, tf=tf, phi0=phi0, v0=v0, disutility=-v0, m=m
    )


@dataclass(frozen=True)
class MonotonicityReport:
    free_phase_violations: int  # min(t*, tau) failing to decrease in phi0
    locked_violations: int  # locked duration failing to decrease in phi0
    bijection_violations: int  # tf(phi0) failing to decrease strictly
    tau_derivative_error: float  # max |finite difference - dtf/dtau formula|
    boundary_gaps: dict[str, float]

    @property
    def ok(self) -> bool:
        return (
            self.free_phase_violations == 0
            and self.locked_violations == 0
            and self.bijection_violations == 0
            and self.tau_derivative_error <= 1e-6
            and all(g <= 1e-10 for g in self.boundary_gaps.values())
        )


def lemma_monotonicity_suite(params: GameParams, n: int = 1000) -> MonotonicityReport:
    """Grid scans of the monotone relations that make ``tf(phi0)`` a bijection."""
    m, i0 = params.m, params.i0
    cap = min(i0, 1.0 / m)
    phi_lo = math.exp(-(params.tf + 1.0)) * cap

    free_grid = np.geomspace(phi_lo, cap, n, endpoint=False)
    first_hit = [
        min(free_terminal_time(p, i0), -math.log(m * p)) for p in free_grid
    ]
    free_bad = int(np.sum(np.diff(first_hit) >= 0))

    locked_bad = 0
    if i0 > 1.0 / m:
        locked_grid = np.linspace(1.0 / m, i0, n)
        locked_bad = int(np.sum(np.diff([locked_duration(p, m, i0) for p in locked_grid]) >= 0))

    full_grid = np.geomspace(phi_lo, i0, n)
    durations = [_tf_of_phi0(p, m, i0)[0] for p in full_grid]
    bijection_bad = int(np.sum(np.diff(durations) >= 0))

    def tf_of_tau(tau):
        return two_phase_duration(math.exp(-tau) / m, m, i0)

    h = 1e-5
    taus = np.linspace(h, params.tf + 1.0, 200)
    fd = np.array([(tf_of_tau(t + h) - tf_of_tau(t - h)) / (2 * h) for t in taus])
    exact = 1.0 + (1.0 - i0) / i0 * np.exp(-taus)
    tau_err = float(np.max(np.abs(fd - exact) / np.maximum(1.0, exact)))

    gaps = {}
    boundary = _phase_boundary(m, i0)
    if boundary is not None:
        two = two_phase_duration(boundary, m, i0)
        if i0 >= 1.0 / m:
            gaps["locked/two-phase"] = abs(locked_duration(boundary, m, i0) - two)
        else:
            gaps["free/two-phase"] = abs(free_terminal_time(boundary, i0) - two)
    return MonotonicityReport(free_bad, locked_bad, bijection_bad, tau_err, gaps)
