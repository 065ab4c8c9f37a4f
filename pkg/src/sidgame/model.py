"""Nondimensional SI epidemic closed forms shared by the rest of the package.

Units are chosen so that the cost of infection, the transmission rate and the
population size are all 1. Costs are therefore fractions of the infection
cost and time is measured in units of 1/(beta N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class Regime(str, Enum):
    """Which branch of the equilibrium formula applies."""

    NEVER = "never"
    INTERIOR = "interior"
    ALWAYS = "always"


@dataclass(frozen=True)
class GameParams:
    """Distancing efficiency ``m``, initial infected fraction ``i0`` and game duration ``tf``."""

    m: float
    i0: float
    tf: float

    def __post_init__(self):
        for name in ("m", "i0", "tf"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.m <= 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if self.tf <= 0:
            raise ValueError(f"tf must be positive, got {self.tf}")
        if not 0 < self.i0 <= 1:
            raise ValueError(f"i0 must lie in (0, 1], got {self.i0}")

    @property
    def constant_risk(self) -> bool:
        return self.i0 == 1.0

    @property
    def regime(self) -> Regime:
        from .delay_game import classify_regime

        return classify_regime(self)

    def replace(self, **changes) -> "GameParams":
        fields = {"m": self.m, "i0": self.i0, "tf": self.tf}
        fields.update(changes)
        return GameParams(**fields)


def sigma(c, m: float):
    """Relative susceptibility ``max(0, 1 - m c)`` of someone spending at rate ``c``."""
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("spending rate must be nonnegative")
    if m <= 0:
        raise ValueError("m must be positive")
    out = np.maximum(0.0, 1.0 - m * c)
    return float(out) if out.ndim == 0 else out


def prevalence_at(u, i0: float):
    """Infected fraction after elapsed time ``u`` of unmitigated logistic growth."""
    if not 0 < i0 <= 1:
        raise ValueError(f"i0 must lie in (0, 1], got {i0}")
    u = np.asarray(u, dtype=float)
    if i0 == 1.0:
        out = np.ones_like(u)
    else:
        # exp(-u) overflows for very negative u; use the mirrored form there
        with np.errstate(over="ignore"):
            pos = i0 / (i0 + (1.0 - i0) * np.exp(-np.maximum(u, 0.0)))
            eu = np.exp(np.minimum(u, 0.0))
            neg = i0 * eu / (i0 * eu + (1.0 - i0))
        out = np.where(u >= 0, pos, neg)
    return float(out) if out.ndim == 0 else out


def susceptible_at(u, i0: float):
    """``1 - prevalence_at(u, i0)`` without cancellation when prevalence is near 1."""
    if not 0 < i0 <= 1:
        raise ValueError(f"i0 must lie in (0, 1], got {i0}")
    u = np.asarray(u, dtype=float)
    e = np.exp(-np.maximum(u, 0.0))
    pos = (1.0 - i0) * e / (i0 + (1.0 - i0) * e)
    eu = np.exp(np.minimum(u, 0.0))
    neg = (1.0 - i0) / (i0 * eu + (1.0 - i0))
    out = np.where(u >= 0, pos, neg)
    return float(out) if out.ndim == 0 else out


def escape_fraction(u, i0: float):
    """Probability of escaping infection over ``u`` time units of unmitigated exposure.

    Equals ``(1 - I(u)) / (1 - i0)``, written so that it stays accurate when
    ``i0`` is close to 1 and when ``I(u)`` has saturated.
    """
    u = np.asarray(u, dtype=float)
    e = np.exp(-u)
    out = e / (i0 + (1.0 - i0) * e)
    return float(out) if out.ndim == 0 else out


def survival_probability(x, xbar, params: GameParams):
    """Probability of still being susceptible at the end of the game.

    The individual distances for the last ``x`` time units, the population
    for the last ``xbar``. Accepts scalars or broadcastable arrays.
    """
    if params.constant_risk:
        raise ValueError("i0 = 1 has constant risk; use the constant-risk branch")
    x = np.asarray(x, dtype=float)
    xbar = np.asarray(xbar, dtype=float)
    if np.any((x < 0) | (x > params.tf) | (xbar < 0) | (xbar > params.tf)):
        raise ValueError("durations must lie in [0, tf]")
    s = params.tf - np.maximum(x, xbar)
    frozen = prevalence_at(s, params.i0)
    out = escape_fraction(s, params.i0) * np.exp(-frozen * np.maximum(xbar - x, 0.0))
    return float(out) if out.ndim == 0 else out
