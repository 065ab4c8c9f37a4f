"""Brute-force checks that do not rely on any of the closed forms.

The general game is simulated with fixed-step RK4 on ``(I, p, J)`` where
``J`` accumulates the running cost, so the cost integral gets the same
fourth-order (Simpson-consistent) treatment as the state. Best responses are
found by searching over piecewise-constant strategies on a uniform lattice.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .delay_game import DelayPair, nash_equilibrium, survival_partials
from .model import GameParams, survival_probability

DEFAULT_STEPS = 2048
EXHAUSTIVE_LIMIT = 4096


@dataclass(frozen=True)
class PiecewiseStrategy:
    """Spending rate ``values[k]`` between consecutive entries of ``[0, *breakpoints, tf]``."""

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if len(vals) != len(bp) + 1:
            raise ValueError("need exactly one value per interval")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if bp and bp[0] < 0:
            raise ValueError("breakpoints must be nonnegative")
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise ValueError("spending rates must be finite and nonnegative")

    @classmethod
    def constant(cls, c: float) -> "PiecewiseStrategy":
        return cls((), (c,))

    @classmethod
    def delay(cls, x: float, params: GameParams) -> "PiecewiseStrategy":
        """Off, then full spending ``1/m`` for the final ``x`` time units."""
        if not 0 <= x <= params.tf:
            raise ValueError("delay must lie in [0, tf]")
        if x == 0:
            return cls.constant(0.0)
        if x == params.tf:
            return cls.constant(1.0 / params.m)
        return cls((params.tf - x,), (0.0, 1.0 / params.m))

    @classmethod
    def lattice(cls, values, params: GameParams) -> "PiecewiseStrategy":
        """Equal-width cells covering ``[0, tf]``, one value per cell."""
        values = tuple(values)
        n = len(values)
        edges = tuple(params.tf * k / n for k in range(1, n))
        return cls(edges, values).simplified()

    def simplified(self) -> "PiecewiseStrategy":
        """Merge neighbouring intervals that share a value."""
        bps, vals = [], [self.values[0]]
        for b, v in zip(self.breakpoints, self.values[1:]):
            if v != vals[-1]:
                bps.append(b)
                vals.append(v)
        return PiecewiseStrategy(tuple(bps), tuple(vals))

    def check(self, params: GameParams) -> "PiecewiseStrategy":
        if self.breakpoints and self.breakpoints[-1] > params.tf:
            raise ValueError("breakpoints must not exceed tf")
        return self

    def value_at(self, t: float) -> float:
        k = int(np.searchsorted(self.breakpoints, t, side="right"))
        return self.values[k]

    def switches(self) -> int:
        return len(self.simplified().breakpoints)


@dataclass(frozen=True)
class SimulationResult:
    disutility: float
    t: np.ndarray
    p_path: np.ndarray
    i_path: np.ndarray
    step: float


def _time_grid(params: GameParams, step: float, strategies) -> np.ndarray:
    """Uniform-ish grid with every strategy breakpoint included exactly."""
    marks = {0.0, params.tf}
    for s in strategies:
        marks.update(b for b in s.breakpoints if 0 < b < params.tf)
    marks = sorted(marks)
    pieces = []
    for a, b in zip(marks, marks[1:]):
        n = max(1, math.ceil((b - a) / step - 1e-9))
        pieces.append(np.linspace(a, b, n + 1)[:-1])
    pieces.append(np.array([params.tf]))
    return np.concatenate(pieces)


def _integrate(params: GameParams, t: np.ndarray, c: np.ndarray, cbar: np.ndarray):
    """RK4 over the grid ``t``.

    ``c`` has shape (batch, len(t) - 1) and ``cbar`` shape (len(t) - 1,);
    both are constant on each step. Returns cost (batch,), p paths
    (batch, len(t)) and the shared I path.
    """
    m = params.m
    batch = c.shape[0]
    s_ind = np.maximum(0.0, 1.0 - m * c)
    s_pop = np.maximum(0.0, 1.0 - m * cbar)

    i_path = np.empty(len(t))
    p_path = np.empty((batch, len(t)))
    i = params.i0
    p = np.ones(batch)
    cost = np.zeros(batch)
    i_path[0] = i
    p_path[:, 0] = p

    for k in range(len(t) - 1):
        h = t[k + 1] - t[k]
        sp, si, ck = s_pop[k], s_ind[:, k], c[:, k]

        def di(iv):
            return sp * iv * (1.0 - iv)

        i1 = i
        ki1 = di(i1)
        i2 = i + 0.5 * h * ki1
        ki2 = di(i2)
        i3 = i + 0.5 * h * ki2
        ki3 = di(i3)
        i4 = i + h * ki3
        ki4 = di(i4)

        kp1 = -si * i1 * p
        q2 = p + 0.5 * h * kp1
        kp2 = -si * i2 * q2
        q3 = p + 0.5 * h * kp2
        kp3 = -si * i3 * q3
        q4 = p + h * kp3
        kp4 = -si * i4 * q4

        kj1 = (ck + si * i1) * p
        kj2 = (ck + si * i2) * q2
        kj3 = (ck + si * i3) * q3
        kj4 = (ck + si * i4) * q4

        i = i + h / 6.0 * (ki1 + 2 * ki2 + 2 * ki3 + ki4)
        p = p + h / 6.0 * (kp1 + 2 * kp2 + 2 * kp3 + kp4)
        cost = cost + h / 6.0 * (kj1 + 2 * kj2 + 2 * kj3 + kj4)
        i_path[k + 1] = i
        p_path[:, k + 1] = p
    return cost, p_path, i_path


def _values_on_grid(strategy: PiecewiseStrategy, t: np.ndarray) -> np.ndarray:
    mids = 0.5 * (t[:-1] + t[1:])
    idx = np.searchsorted(strategy.breakpoints, mids, side="right")
    return np.asarray(strategy.values)[idx]


def default_step(params: GameParams) -> float:
    return params.tf / DEFAULT_STEPS


def simulate(
    c: PiecewiseStrategy,
    cbar: PiecewiseStrategy,
    params: GameParams,
    step: float | None = None,
) -> SimulationResult:
    """Integrate the individual's survival and cost against a population strategy."""
    step = default_step(params) if step is None else step
    if step <= 0:
        raise ValueError("step must be positive")
    c.check(params)
    cbar.check(params)
    t = _time_grid(params, step, (c, cbar))
    cost, p_path, i_path = _integrate(
        params, t, _values_on_grid(c, t)[None, :], _values_on_grid(cbar, t)
    )
    return SimulationResult(float(cost[0]), t, p_path[0], i_path, step)


def _batch_disutility(candidates, cbar, params, step):
    t = _time_grid(params, step, (cbar, *candidates))
    c = np.stack([_values_on_grid(s, t) for s in candidates])
    cost, _, _ = _integrate(params, t, c, _values_on_grid(cbar, t))
    return cost


def _lattice_disutility(cells: np.ndarray, cbar, params, step):
    """Disutility of each row of ``cells`` (batch, n) played as a lattice strategy."""
    n = cells.shape[1]
    edges = PiecewiseStrategy(tuple(params.tf * k / n for k in range(1, n)), (0.0,) * n)
    t = _time_grid(params, step, (cbar, edges))
    mids = 0.5 * (t[:-1] + t[1:])
    cell = np.minimum((mids / params.tf * n).astype(int), n - 1)
    cost, _, _ = _integrate(params, t, cells[:, cell], _values_on_grid(cbar, t))
    return cost


def best_response_search(
    cbar: PiecewiseStrategy,
    params: GameParams,
    n_intervals: int = 12,
    levels: int = 2,
    restarts: int = 5,
    seed: int = 0,
    step: float | None = None,
    max_enumeration: int = EXHAUSTIVE_LIMIT,
) -> PiecewiseStrategy:
    """Cheapest lattice strategy against ``cbar``.

    Cell values come from ``levels`` evenly spaced rates in ``[0, 1/m]``;
    spending beyond ``1/m`` buys no protection. Lattices of at most
    ``max_enumeration`` strategies are enumerated. Larger ones use steepest single-cell descent
    from the all-off strategy plus ``restarts`` random starts.
    """
    if n_intervals < 2 or levels < 2:
        raise ValueError("need n_intervals >= 2 and levels >= 2")
    step = default_step(params) if step is None else step
    ladder = np.linspace(0.0, 1.0 / params.m, levels)

    if levels**n_intervals <= max_enumeration:
        idx = np.array(list(itertools.product(range(levels), repeat=n_intervals)))
        cost = _lattice_disutility(ladder[idx], cbar, params, step)
        best = idx[int(np.argmin(cost))]
        return PiecewiseStrategy.lattice(ladder[best], params)

    rng = np.random.default_rng(seed)
    starts = [np.zeros(n_intervals, dtype=int)]
    starts += [rng.integers(0, levels, n_intervals) for _ in range(restarts)]
    best_idx, best_cost = None, math.inf
    for current in starts:
        cost = _lattice_disutility(ladder[current][None, :], cbar, params, step)[0]
        while True:
            moves = []
            for cell in range(n_intervals):
                for level in range(levels):
                    if level != current[cell]:
                        trial = current.copy()
                        trial[cell] = level
                        moves.append(trial)
            moves = np.array(moves)
            costs = _lattice_disutility(ladder[moves], cbar, params, step)
            k = int(np.argmin(costs))
            if costs[k] >= cost:
                break
            current, cost = moves[k], costs[k]
        if cost < best_cost:
            best_idx, best_cost = current, cost
    return PiecewiseStrategy.lattice(ladder[best_idx], params)


def nash_residual(params: GameParams, n_intervals: int = 12, **search) -> float:
    """Gain a lattice deviant can achieve against the closed-form equilibrium.

    ``D(best lattice response, c*) - D(c*, c*)``. Nonnegative up to
    integration error whenever ``c*`` is a true best response.
    """
    cstar = PiecewiseStrategy.delay(nash_equilibrium(params).x_star, params)
    response = best_response_search(cstar, params, n_intervals, **search)
    step = search.get("step")
    return (
        simulate(response, cstar, params, step).disutility
        - simulate(cstar, cstar, params, step).disutility
    )


def derivative_check(pair: DelayPair, params: GameParams, h: float = 1e-5) -> float:
    """Largest gap between analytic survival partials and finite differences.

    Off the diagonal both partials use central differences. On the diagonal
    ``x == xbar`` each one-sided difference is compared with the shared limit.
    """
    x, xbar = DelayPair(*pair).validate(params)
    dx, dxbar = survival_partials(x, xbar, params)

    def p(a, b):
        return survival_probability(a, b, params)

    if x != xbar:
        if abs(x - xbar) <= h:
            raise ValueError("x and xbar closer than the finite-difference step")
        fx = (p(x + h, xbar) - p(x - h, xbar)) / (2 * h)
        fxbar = (p(x, xbar + h) - p(x, xbar - h)) / (2 * h)
        return max(abs(fx - dx), abs(fxbar - dxbar))

    # second-order one-sided differences towards each side of the diagonal
    errors = []
    for sign in (1.0, -1.0):
        fx = sign * (-3 * p(x, xbar) + 4 * p(x + sign * h, xbar) - p(x + 2 * sign * h, xbar)) / (2 * h)
        fxbar = sign * (-3 * p(x, xbar) + 4 * p(x, xbar + sign * h) - p(x, xbar + 2 * sign * h)) / (2 * h)
        errors += [abs(fx - dx), abs(fxbar - dxbar)]
    return max(errors)
