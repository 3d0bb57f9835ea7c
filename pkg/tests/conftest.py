import numpy as np
import pytest

from ratosc.core import PhaseState, SystemParams


def random_state(rng, dof, x_range=(0.5, 2.0), p_range=(-1.0, 1.0), signed=True):
    x = rng.uniform(*x_range, size=dof)
    if signed:
        x = x * rng.choice([-1.0, 1.0], size=dof)
    p = rng.uniform(*p_range, size=dof)
    return PhaseState(tuple(x), tuple(p))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def reference_params():
    return SystemParams(1.0, (2, 1), (0.5, 1.3))


@pytest.fixture
def reference_state():
    return PhaseState((1.0, 1.0), (0.0, 0.5))
