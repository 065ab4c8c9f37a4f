import math

import numpy as np
import pytest
from hypothesis import strategies as st

from sidgame.model import GameParams, Regime


@pytest.fixture
def fig1():
    """Parameters of the running example: m = 6, i0 = 0.02, tf = 6."""
    return GameParams(m=6.0, i0=0.02, tf=6.0)


def random_interior(rng, count, m=(1.1, 50.0), i0=(1e-5, 0.99), tf=(0.1, 40.0)):
    """Rejection-sample parameter triples in the interior regime.

    i0 is drawn log-uniformly so small initial fractions are represented.
    """
    out = []
    while len(out) < count:
        p = GameParams(
            m=rng.uniform(*m),
            i0=math.exp(rng.uniform(math.log(i0[0]), math.log(i0[1]))),
            tf=rng.uniform(*tf),
        )
        if p.regime is Regime.INTERIOR:
            out.append(p)
    return out


@st.composite
def game_params(draw, m=(0.2, 30.0), tf=(0.05, 30.0), allow_constant=False):
    log_i0 = draw(st.floats(math.log(1e-5), math.log(0.99)))
    i0 = 1.0 if allow_constant and draw(st.booleans()) else math.exp(log_i0)
    return GameParams(
        m=draw(st.floats(*m)),
        i0=i0,
        tf=draw(st.floats(*tf)),
    )


@st.composite
def interior_params(draw):
    p = draw(game_params(m=(1.1, 30.0)))
    from hypothesis import assume

    assume(p.regime is Regime.INTERIOR)
    return p


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
