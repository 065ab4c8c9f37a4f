"""Principal real branch of the Lambert W function."""

from __future__ import annotations

import math

_BRANCH_POINT = -1.0 / math.e
_MAX_ITER = 50


def _initial_guess(z: float) -> float:
    if z > math.e:
        l1 = math.log(z)
        l2 = math.log(l1)
        return l1 - l2 + l2 / l1
    if abs(z) < 0.25:
        return z - z * z + 1.5 * z**3
    if z < 0:
        # expansion around the branch point
        p = math.sqrt(max(0.0, 2.0 * (math.e * z + 1.0)))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    return math.log1p(z) * 0.8


def lambert_w0(z: float) -> float:
    """Return ``w >= -1`` with ``w * exp(w) == z``.

    Halley iteration from an asymptotic or series starting point. Arguments
    below ``-1/e`` have no real solution and raise ``ValueError``.
    """
    z = float(z)
    if math.isnan(z):
        raise ValueError("lambert_w0 of nan")
    if z < _BRANCH_POINT:
        # allow the branch point itself to be reached through rounding
        if z < _BRANCH_POINT * (1.0 + 4 * 2.0**-52):
            raise ValueError(f"lambert_w0 is undefined below -1/e, got {z}")
        return -1.0
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return math.inf

    w = _initial_guess(z)
    for _ in range(_MAX_ITER):
        if w > 700:
            # e**w would overflow; Newton on w + log(w) - log(z) instead
            step = (w + math.log(w) - math.log(z)) / (1.0 + 1.0 / w)
        else:
            ew = math.exp(w)
            f = w * ew - z
            wp1 = w + 1.0
            if wp1 == 0.0:
                break
            step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 1e-15 * (1.0 + abs(w)):
            break
    return max(w, -1.0)
