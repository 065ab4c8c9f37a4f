"""Equilibria of the finite-horizon SI social-distancing game."""

from .delay_game import (
    BurdenReport,
    DelayPair,
    EquilibriumResult,
    burden,
    emblematic_disutility,
    ess_check,
    improvement_over_indifference,
    nash_equilibrium,
    restricted_disutility,
)
from .filippov import equilibrium_trajectory, phi0_of_tf, tf_of_phi0
from .lambert import lambert_w0
from .model import GameParams, Regime, prevalence_at, sigma, survival_probability
from .oracle import PiecewiseStrategy, best_response_search, simulate

__all__ = [
    "BurdenReport",
    "DelayPair",
    "EquilibriumResult",
    "GameParams",
    "PiecewiseStrategy",
    "Regime",
    "best_response_search",
    "burden",
    "emblematic_disutility",
    "equilibrium_trajectory",
    "ess_check",
    "improvement_over_indifference",
    "lambert_w0",
    "nash_equilibrium",
    "phi0_of_tf",
    "prevalence_at",
    "restricted_disutility",
    "sigma",
    "simulate",
    "survival_probability",
    "tf_of_phi0",
]
