import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sidgame import delay_game as dg
from sidgame.model import GameParams, prevalence_at
from sidgame.oracle import (
    PiecewiseStrategy,
    best_response_search,
    derivative_check,
    nash_residual,
    simulate,
)

from .conftest import game_params


class TestPiecewiseStrategy:
    def test_validation(self):
        with pytest.raises(ValueError):
            PiecewiseStrategy((1.0, 1.0), (0, 0, 0))
        with pytest.raises(ValueError):
            PiecewiseStrategy((1.0,), (0,))
        with pytest.raises(ValueError):
            PiecewiseStrategy((), (-0.1,))
        with pytest.raises(ValueError):
            PiecewiseStrategy((-1.0,), (0, 0))
        with pytest.raises(ValueError):
            PiecewiseStrategy((), (math.inf,))

    def test_delay(self, fig1):
        s = PiecewiseStrategy.delay(2.0, fig1)
        assert s.value_at(3.9) == 0.0
        assert s.value_at(4.1) == 1 / 6
        assert PiecewiseStrategy.delay(0.0, fig1) == PiecewiseStrategy.constant(0.0)
        assert PiecewiseStrategy.delay(6.0, fig1) == PiecewiseStrategy.constant(1 / 6)

    def test_lattice_merges_cells(self, fig1):
        s = PiecewiseStrategy.lattice([0, 0, 1, 1, 1, 0], fig1)
        assert s.breakpoints == (2.0, 5.0)
        assert s.values == (0.0, 1.0, 0.0)
        assert s.switches() == 2

    def test_breakpoint_beyond_horizon(self, fig1):
        with pytest.raises(ValueError):
            simulate(PiecewiseStrategy((7.0,), (0, 0.1)), PiecewiseStrategy.constant(0), fig1)


class TestSimulate:
    @given(game_params(allow_constant=True), st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=40, deadline=None)
    def test_delay_pairs_match_closed_form(self, params, a, b):
        x, xbar = a * params.tf, b * params.tf
        sim = simulate(PiecewiseStrategy.delay(x, params), PiecewiseStrategy.delay(xbar, params), params)
        assert abs(sim.disutility - dg.restricted_disutility(x, xbar, params)) <= 1e-6

    @pytest.mark.parametrize("tf", [0.5, 3.0, 10.0])
    def test_certain_exposure(self, tf):
        params = GameParams(6, 1.0, tf)
        off = PiecewiseStrategy.constant(0.0)
        assert simulate(off, off, params).disutility == pytest.approx(1 - math.exp(-tf), abs=1e-9)

    def test_full_spending(self, fig1):
        on = PiecewiseStrategy.constant(1 / 6)
        sim = simulate(on, PiecewiseStrategy.constant(0.0), fig1)
        assert sim.disutility == pytest.approx(1.0, abs=1e-12)
        assert np.all(sim.p_path == 1.0)

    def test_step_halving(self, fig1):
        c = PiecewiseStrategy.delay(1.3, fig1)
        cbar = PiecewiseStrategy.delay(2.9, fig1)
        coarse = simulate(c, cbar, fig1).disutility
        fine = simulate(c, cbar, fig1, step=fig1.tf / 4096).disutility
        assert abs(coarse - fine) <= 1e-7

    def test_breakpoints_are_grid_points(self, fig1):
        c = PiecewiseStrategy((1.2345,), (0, 0.1))
        cbar = PiecewiseStrategy((math.pi,), (0.05, 0))
        sim = simulate(c, cbar, fig1)
        assert 1.2345 in sim.t and math.pi in sim.t

    def test_no_distancing_survival_closed_form(self, fig1):
        off = PiecewiseStrategy.constant(0.0)
        sim = simulate(off, off, fig1)
        expected = (1 - prevalence_at(sim.t, fig1.i0)) / (1 - fig1.i0)
        assert np.max(np.abs(sim.p_path - expected)) <= 1e-8

    @given(
        game_params(),
        st.lists(st.floats(0, 0.3), min_size=1, max_size=5),
        st.lists(st.floats(0, 0.3), min_size=1, max_size=5),
    )
    @settings(max_examples=30, deadline=None)
    def test_bounds_and_monotone_paths(self, params, cv, cbv):
        c = PiecewiseStrategy.lattice(cv, params)
        cbar = PiecewiseStrategy.lattice(cbv, params)
        sim = simulate(c, cbar, params)
        floor = min(1 / params.m, params.i0) * (1 - math.exp(-params.tf))
        assert sim.disutility >= floor - 1e-9
        assert np.all(np.diff(sim.i_path) >= -1e-15)
        assert np.all(np.diff(sim.p_path) <= 1e-15)
        assert sim.p_path[-1] >= math.exp(-params.tf) * (1 - 1e-9)
        off = PiecewiseStrategy.constant(0.0)
        assert simulate(off, cbar, params).disutility <= 1 - math.exp(-params.tf) + 1e-9


class TestBestResponse:
    def test_equilibrium_response_is_off_then_on(self, fig1):
        x = dg.nash_equilibrium(fig1).x_star
        cstar = PiecewiseStrategy.delay(x, fig1)
        br = best_response_search(cstar, fig1, n_intervals=12)
        assert br.values == (0.0, 1 / 6)
        assert abs(br.breakpoints[0] - (fig1.tf - x)) <= fig1.tf / 12

    def test_inefficient_distancing(self):
        params = GameParams(0.5, 1.0, 4)
        br = best_response_search(PiecewiseStrategy.constant(0.0), params, n_intervals=10)
        assert br == PiecewiseStrategy.constant(0.0)

    def test_finer_ladder_uses_extremes(self, fig1):
        x = dg.nash_equilibrium(fig1).x_star
        cstar = PiecewiseStrategy.delay(x, fig1)
        br = best_response_search(cstar, fig1, n_intervals=5, levels=5)
        assert set(br.values) <= {0.0, 1 / 6}

    def test_descent_on_finer_ladder(self, fig1):
        x = dg.nash_equilibrium(fig1).x_star
        cstar = PiecewiseStrategy.delay(x, fig1)
        br = best_response_search(cstar, fig1, n_intervals=12, levels=5, restarts=2)
        assert set(br.values) <= {0.0, 1 / 6}
        assert br.values[0] == 0.0 and br.values[-1] == 1 / 6

    def test_descent_agrees_with_enumeration(self, fig1):
        cbar = PiecewiseStrategy.delay(2.0, fig1)
        exhaustive = best_response_search(cbar, fig1, n_intervals=10)
        descent = best_response_search(cbar, fig1, n_intervals=10, restarts=1, max_enumeration=0)
        assert exhaustive == descent

    def test_rejects_tiny_lattice(self, fig1):
        with pytest.raises(ValueError):
            best_response_search(PiecewiseStrategy.constant(0), fig1, n_intervals=1)


class TestNashResidual:
    def test_running_example(self, fig1):
        r12 = nash_residual(fig1, 12)
        assert r12 >= -2e-3
        assert r12 >= -1e-9  # the closed-form equilibrium is a true best response
        assert r12 <= 6 / 12

    def test_never_regime_is_exact(self):
        assert nash_residual(GameParams(6, 1e-4, 1), 8) == 0.0

    def test_always_regime(self):
        assert nash_residual(GameParams(6, 0.5, 2), 8) == 0.0


class TestDerivativeCheck:
    @pytest.mark.parametrize("pair", [(1.0, 2.5), (4.0, 1.0), (2.0, 2.0), (5.5, 5.5)])
    def test_points(self, fig1, pair):
        assert derivative_check(pair, fig1) <= 1e-6

    def test_too_close(self, fig1):
        with pytest.raises(ValueError):
            derivative_check((2.0, 2.0 + 1e-6), fig1)

    @given(game_params(), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
    @settings(max_examples=100)
    def test_random(self, params, a, b):
        x, xbar = a * params.tf, b * params.tf
        if 0 < abs(x - xbar) <= 1e-4:
            xbar = x
        assert derivative_check((x, xbar), params) <= 1e-6
