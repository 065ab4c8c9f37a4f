import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sidgame.model import (
    GameParams,
    Regime,
    prevalence_at,
    sigma,
    survival_probability,
    susceptible_at,
)
from sidgame.oracle import PiecewiseStrategy, simulate

from .conftest import game_params


class TestGameParams:
    @pytest.mark.parametrize(
        "m,i0,tf",
        [(0, 0.1, 1), (-1, 0.1, 1), (6, 0, 1), (6, 1.1, 1), (6, 0.1, 0), (6, 0.1, -2),
         (math.nan, 0.1, 1), (6, 0.1, math.inf)],
    )
    def test_rejects_invalid(self, m, i0, tf):
        with pytest.raises(ValueError):
            GameParams(m, i0, tf)

    def test_constant_risk_flag(self):
        assert GameParams(6, 1.0, 3).constant_risk
        assert not GameParams(6, 0.5, 3).constant_risk

    def test_regime_property(self, fig1):
        assert fig1.regime is Regime.INTERIOR

    def test_is_hashable_value(self, fig1):
        assert {fig1: 1}[GameParams(6.0, 0.02, 6.0)] == 1
        assert fig1.replace(tf=3.0) == GameParams(6.0, 0.02, 3.0)


class TestSigma:
    def test_examples(self):
        assert sigma(0, 6) == 1
        assert sigma(1 / 6, 6) == 0
        assert sigma(1 / 12, 6) == pytest.approx(0.5, abs=1e-15)

    def test_saturates_beyond_threshold(self):
        assert np.all(sigma(np.linspace(1 / 6, 5, 50), 6) == 0)

    def test_decreasing_below_threshold(self):
        values = sigma(np.linspace(0, 1 / 6, 100), 6)
        assert np.all(np.diff(values) < 0)

    def test_rejects_negative_rate(self):
        with pytest.raises(ValueError):
            sigma(-0.1, 6)


class TestPrevalence:
    def test_initial_value(self):
        assert prevalence_at(0.0, 0.3) == pytest.approx(0.3, rel=1e-15)

    def test_constant_risk(self):
        assert prevalence_at(17.0, 1.0) == 1.0
        assert prevalence_at(0.0, 1.0) == 1.0

    def test_half_infected_time(self):
        i0 = 0.001
        assert prevalence_at(math.log(1 / i0 - 1), i0) == pytest.approx(0.5, abs=1e-14)

    def test_extreme_arguments_stay_finite(self):
        assert prevalence_at(800.0, 1e-5) == 1.0
        assert 0 < prevalence_at(-800.0, 0.5) < 1e-300 or prevalence_at(-800.0, 0.5) == 0.0

    def test_complement_is_accurate_when_saturated(self):
        # 1 - I(40) for i0 = 0.5 is e^-40 to leading order
        assert susceptible_at(40.0, 0.5) == pytest.approx(math.exp(-40), rel=1e-12)

    @given(st.floats(1e-5, 0.999), st.floats(-20, 20))
    def test_logistic_ode_residual(self, i0, u):
        h = 1e-5
        i = prevalence_at(u, i0)
        deriv = (prevalence_at(u + h, i0) - prevalence_at(u - h, i0)) / (2 * h)
        assert abs(deriv - i * (1 - i)) <= 1e-10

    @given(st.floats(1e-5, 0.999))
    def test_strictly_increasing(self, i0):
        u = np.linspace(-5, 5, 200)
        assert np.all(np.diff(prevalence_at(u, i0)) > 0)

    @given(st.floats(1e-5, 1.0), st.floats(-30, 30))
    def test_complement_sums_to_one(self, i0, u):
        assert prevalence_at(u, i0) + susceptible_at(u, i0) == pytest.approx(1.0, abs=1e-15)


class TestSurvival:
    def test_full_distancing_is_safe(self, fig1):
        assert survival_probability(6.0, 6.0, fig1) == 1.0

    def test_no_distancing(self, fig1):
        expected = (1 - prevalence_at(6.0, 0.02)) / (1 - 0.02)
        assert survival_probability(0.0, 0.0, fig1) == pytest.approx(expected, rel=1e-14)

    def test_frozen_mpmath_value(self, fig1):
        # quadrature of the hazard at 40 digits
        assert survival_probability(1.0, 2.0, fig1) == pytest.approx(
            0.2849290581427021149267148162066372992301, abs=1e-15
        )

    def test_matches_rk4(self, fig1):
        sim = simulate(
            PiecewiseStrategy.delay(1.0, fig1), PiecewiseStrategy.delay(2.0, fig1), fig1
        )
        assert abs(sim.p_path[-1] - survival_probability(1.0, 2.0, fig1)) <= 1e-8

    def test_constant_risk_is_deferred_to_caller(self):
        with pytest.raises(ValueError):
            survival_probability(1.0, 1.0, GameParams(6, 1.0, 3))

    def test_rejects_out_of_range(self, fig1):
        with pytest.raises(ValueError):
            survival_probability(7.0, 1.0, fig1)

    @given(game_params(), st.floats(0, 1), st.floats(0, 1))
    def test_probability_range(self, params, a, b):
        p = survival_probability(a * params.tf, b * params.tf, params)
        assert 0 < p <= 1

    @given(game_params(), st.floats(0, 1))
    @settings(max_examples=50)
    def test_nondecreasing_in_own_duration(self, params, b):
        xs = np.linspace(0, params.tf, 101)
        p = survival_probability(xs, b * params.tf, params)
        assert np.all(np.diff(p) >= -1e-15 * p[1:])

    @given(game_params(), st.floats(0.01, 0.99))
    def test_continuous_across_diagonal(self, params, a):
        x = a * params.tf
        eps = 1e-14
        left = survival_probability(x - eps, x, params)
        right = survival_probability(x + eps, x, params)
        assert abs(left - right) <= 1e-12
