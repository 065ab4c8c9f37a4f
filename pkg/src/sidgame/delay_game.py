"""The delay-strategy game.

Every player distances maximally (spends ``1/m``) for the final ``x`` time
units of the game and not at all before. The restricted disutility
``D(x, xbar)`` of playing ``x`` against a population playing ``xbar`` then
has a closed form, and so does the unique equilibrium duration ``x*``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect

from .lambert import lambert_w0
from .model import (
    GameParams,
    Regime,
    escape_fraction,
    prevalence_at,
    survival_probability,
    susceptible_at,
)

DEFAULT_GRID = 10001
_SAME_POINT = 1e-11


class DelayPair(NamedTuple):
    x: float
    xbar: float

    def validate(self, params: GameParams) -> "DelayPair":
        if not (0 <= self.x <= params.tf and 0 <= self.xbar <= params.tf):
            raise ValueError(f"{self} outside [0, {params.tf}]^2")
        return self


@dataclass(frozen=True)
class EquilibriumResult:
    x_star: float
    regime: Regime
    # e^x - e^tf (i0/(1-i0)) (m-1-x) at x_star; None outside the interior regime
    residual: float | None = None


@dataclass(frozen=True)
class BurdenReport:
    burden: float
    burden_indifferent: float
    improvement: float


class Asymptote(str, Enum):
    LONG_GAME = "long"
    SHORT_GAME = "short"


def _check_durations(x, xbar, params):
    x = np.asarray(x, dtype=float)
    xbar = np.asarray(xbar, dtype=float)
    if np.any((x < 0) | (x > params.tf) | (xbar < 0) | (xbar > params.tf)):
        raise ValueError("durations must lie in [0, tf]")
    return x, xbar


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


def retained_value(x, xbar, params: GameParams):
    """``1 - D(x, xbar)``: survival probability times the unspent budget fraction.

    Differences of disutilities are best taken on this quantity, which keeps
    full relative precision when ``D`` is close to 1.
    """
    x, xbar = _check_durations(x, xbar, params)
    if params.constant_risk:
        out = np.exp(x - params.tf) * (1.0 - x / params.m)
    else:
        out = survival_probability(x, xbar, params) * (1.0 - x / params.m)
    return _scalar(out)


def restricted_disutility(x, xbar, params: GameParams):
    """Expected cost of distancing for the last ``x`` against a population playing ``xbar``."""
    return _scalar(1.0 - np.asarray(retained_value(x, xbar, params)))


def emblematic_disutility(xbar, params: GameParams):
    """Cost to a typical individual when everyone, including them, plays ``xbar``."""
    if params.constant_risk:
        return restricted_disutility(xbar, xbar, params)
    _, xbar = _check_durations(0.0, xbar, params)
    s = params.tf - xbar
    out = 1.0 - (1.0 - xbar / params.m) * escape_fraction(s, params.i0)
    return _scalar(out)


def emblematic_at_equilibrium(params: GameParams) -> float:
    """Closed form of ``E(x*)`` for each regime."""
    eq = nash_equilibrium(params)
    if params.constant_risk:
        return emblematic_disutility(eq.x_star, params)
    m, i0, tf = params.m, params.i0, params.tf
    if eq.x_star == 0.0:
        return 1.0 - escape_fraction(tf, i0)
    if eq.x_star == tf:
        return tf / m
    return (1.0 + eq.x_star - m * i0) / (m * (1.0 - i0))


def relative_disutility(x, xbar, params: GameParams):
    """``D(x, xbar) / E(xbar)``; above 1 means ``x`` does worse than conforming."""
    return _scalar(
        np.asarray(restricted_disutility(x, xbar, params))
        / np.asarray(emblematic_disutility(xbar, params))
    )


def classify_regime(params: GameParams) -> Regime:
    m, i0, tf = params.m, params.i0, params.tf
    if params.constant_risk:
        x = min(tf, max(m - 1.0, 0.0))
        if x == 0.0:
            return Regime.NEVER
        return Regime.ALWAYS if x == tf else Regime.INTERIOR
    if m <= 1.0:
        return Regime.NEVER
    # i0 (1 + (m-1) e^tf) < 1, rearranged so e^tf cannot overflow
    if math.log(m - 1.0) + tf < math.log((1.0 - i0) / i0):
        return Regime.NEVER
    if i0 * (m - tf) > 1.0:
        return Regime.ALWAYS
    return Regime.INTERIOR


def _transcendental_residual(x: float, params: GameParams) -> float:
    m, i0, tf = params.m, params.i0, params.tf
    return math.exp(x) - math.exp(tf) * (i0 / (1.0 - i0)) * (m - 1.0 - x)


def nash_equilibrium(params: GameParams) -> EquilibriumResult:
    """Unique equilibrium distancing duration and the regime it falls in."""
    m, i0, tf = params.m, params.i0, params.tf
    regime = classify_regime(params)
    if params.constant_risk:
        return EquilibriumResult(min(tf, max(m - 1.0, 0.0)), regime)
    if regime is Regime.NEVER:
        return EquilibriumResult(0.0, regime)
    if regime is Regime.ALWAYS:
        return EquilibriumResult(tf, regime)
    w = lambert_w0((1.0 / i0 - 1.0) * math.exp(m - 1.0 - tf))
    # clip rounding at the regime boundaries
    x = min(tf, max(0.0, m - 1.0 - w))
    return EquilibriumResult(x, regime, _transcendental_residual(x, params))


def nash_equilibrium_bisection(params: GameParams, xtol: float = 1e-12) -> EquilibriumResult:
    """Interior equilibrium by bracketing the transcendental condition directly."""
    if params.constant_risk or classify_regime(params) is not Regime.INTERIOR:
        raise ValueError("bisection path only applies to the interior regime with i0 < 1")
    m, i0, tf = params.m, params.i0, params.tf
    k = i0 / (1.0 - i0)

    def f(x):
        # the transcendental condition divided by e^tf
        return math.exp(x - tf) - k * (m - 1.0 - x)

    hi = min(tf, m - 1.0)
    x = bisect(f, 0.0, hi, xtol=xtol, maxiter=200)
    return EquilibriumResult(x, Regime.INTERIOR, _transcendental_residual(x, params))


def asymptotic_equilibrium(params: GameParams, which: Asymptote) -> float:
    """Long-game or short-game approximation of ``x*``."""
    m, i0, tf = params.m, params.i0, params.tf
    if m <= 1.0:
        raise ValueError("asymptotic expansions need m > 1")
    if params.constant_risk:
        raise ValueError("asymptotic expansions need i0 < 1")
    which = Asymptote(which)
    if which is Asymptote.LONG_GAME:
        return m - 1.0 - (1.0 / i0 - 1.0) * math.exp(m - 1.0 - tf)
    bracket = tf - math.log(1.0 / i0 - 1.0) + math.log(m - 1.0)
    return (1.0 - 1.0 / m) * max(bracket, 0.0)


def burden(xbar, params: GameParams):
    """Per-capita cost of infection plus prevention when the population plays ``xbar``."""
    _, xbar = _check_durations(0.0, xbar, params)
    frozen = prevalence_at(params.tf - xbar, params.i0)
    return _scalar(frozen + xbar / params.m * (1.0 - frozen))


def burden_from_emblematic(xbar, params: GameParams):
    """Same quantity as :func:`burden`, assembled from the emblematic disutility."""
    e = np.asarray(emblematic_disutility(xbar, params))
    return _scalar(params.i0 + (1.0 - params.i0) * e)


def improvement_over_indifference(params: GameParams) -> BurdenReport:
    x_star = nash_equilibrium(params).x_star
    at_eq = burden(x_star, params)
    idle = burden(0.0, params)
    return BurdenReport(burden=at_eq, burden_indifferent=idle, improvement=idle - at_eq)


def peak_duration(m: float, i0: float) -> float:
    """Game duration near which equilibrium distancing reduces the burden the most."""
    if m <= 1.0:
        raise ValueError("peak duration needs m > 1")
    if not 0 < i0 < 1:
        raise ValueError("peak duration needs 0 < i0 < 1")
    return math.log((m - 1.0) * (1.0 / i0 - 1.0))


def max_improvement_bound(m: float) -> float:
    """Approximate small-``i0`` ceiling on the equilibrium burden reduction."""
    if m <= 1.0:
        raise ValueError("bound needs m > 1")
    return 1.0 - 2.0 / m - 2.0 * (m - 1.0) * math.log(m - 1.0) / m**2


def survival_partials(x: float, xbar: float, params: GameParams) -> tuple[float, float]:
    """Analytic ``(dp/dx, dp/dxbar)`` of :func:`~sidgame.model.survival_probability`.

    At ``x == xbar`` the common one-sided limit is returned.
    """
    if params.constant_risk:
        raise ValueError("partials are for i0 < 1")
    DelayPair(x, xbar).validate(params)
    i0, tf = params.i0, params.tf
    if x < xbar:
        frozen = prevalence_at(tf - xbar, i0)
        lag = xbar - x
        base = frozen * (1.0 - frozen) / (1.0 - i0) * math.exp(-frozen * lag)
        return base, base * (1.0 - frozen) * lag
    frozen = prevalence_at(tf - x, i0)
    return frozen * (1.0 - frozen) / (1.0 - i0), 0.0


def disutility_partials(x: float, xbar: float, params: GameParams) -> tuple[float, float]:
    """``(dD/dx, dD/dxbar)`` for ``i0 < 1``."""
    dpx, dpxbar = survival_partials(x, xbar, params)
    p = survival_probability(x, xbar, params)
    keep = 1.0 - x / params.m
    return p / params.m - dpx * keep, -dpxbar * keep


@dataclass(frozen=True)
class EssReport:
    x_star: float
    regime: Regime
    covered: bool  # whether the interior-equilibrium theorem applies
    nash_slack: float  # min over y != x* of D(y, x*) - D(x*, x*)
    invasion_slack: float | None  # min over y != x* of D(y, y) - D(x*, y)
    argmin_emblematic: float
    grid_spacing: float

    @property
    def holds(self) -> bool:
        ok = self.nash_slack > 0
        if self.covered:
            ok = ok and self.invasion_slack > 0
        return ok


def ess_check(params: GameParams, grid_size: int = DEFAULT_GRID) -> EssReport:
    """Check the Nash and invasion inequalities for ``x*`` on a uniform grid of ``[0, tf]``.

    Slacks are reported as computed, never thresholded. Boundary equilibria
    fall outside the theorem and only get the (non-strict) Nash check, so
    their ``nash_slack`` may be 0 where ``D`` is flat.
    """
    eq = nash_equilibrium(params)
    x_star = eq.x_star
    grid = np.linspace(0.0, params.tf, grid_size)
    # grid points within the accuracy of x* itself count as x*
    ys = grid[np.abs(grid - x_star) > _SAME_POINT * max(1.0, params.tf)]
    covered = eq.regime is Regime.INTERIOR and 0.0 < x_star < params.tf

    at_star = retained_value(x_star, x_star, params)
    nash = at_star - np.asarray(retained_value(ys, x_star, params))
    invasion = None
    if covered:
        invasion = np.asarray(retained_value(x_star, ys, params)) - np.asarray(
            retained_value(ys, ys, params)
        )
        invasion = float(invasion.min())
    # argmin of E is the argmax of its complement
    emblem = np.asarray(retained_value(grid, grid, params))
    return EssReport(
        x_star=x_star,
        regime=eq.regime,
        covered=covered,
        nash_slack=float(nash.min()),
        invasion_slack=invasion,
        argmin_emblematic=float(grid[int(np.argmax(emblem))]),
        grid_spacing=float(grid[1] - grid[0]),
    )


@dataclass(frozen=True)
class MinimizerReport:
    exponential_ok: bool
    saturation_ok: bool
    exponential_curvature: float
    saturation_curvature: float
    critical_residual: float  # I(tf - x*) - 1/(m - x*)


def appendix_minimizer_check(
    params: GameParams, grid_size: int = DEFAULT_GRID, fd_step: float = 1e-4
) -> MinimizerReport:
    """Confirm on a dense grid that ``x*`` minimizes the two auxiliary objectives.

    ``exp(C y)(y/m - 1)`` with ``C = I(tf - x*)``, and
    ``(1 - I(tf - y))(y/m - 1)``. Curvatures are central second differences at ``x*``.
    """
    eq = nash_equilibrium(params)
    if eq.regime is not Regime.INTERIOR or params.constant_risk:
        raise ValueError("minimizer lemmas need an interior equilibrium with i0 < 1")
    m, i0, tf = params.m, params.i0, params.tf
    x_star = eq.x_star
    rate = prevalence_at(tf - x_star, i0)

    def exponential(y):
        return np.exp(rate * y) * (y / m - 1.0)

    def saturation(y):
        return susceptible_at(tf - y, i0) * (y / m - 1.0)

    grid = np.linspace(0.0, tf, grid_size)
    spacing = grid[1] - grid[0]

    def minimized(fn):
        values = fn(grid)
        floor = fn(x_star)
        near = abs(grid[int(np.argmin(values))] - x_star) <= spacing
        return bool(near and values.min() >= floor - 64 * np.finfo(float).eps * abs(floor))

    def curvature(fn):
        h = fd_step
        return float((fn(x_star + h) - 2.0 * fn(x_star) + fn(x_star - h)) / h**2)

    return MinimizerReport(
        exponential_ok=minimized(exponential),
        saturation_ok=minimized(saturation),
        exponential_curvature=curvature(exponential),
        saturation_curvature=curvature(saturation),
        critical_residual=rate - 1.0 / (m - x_star),
    )
