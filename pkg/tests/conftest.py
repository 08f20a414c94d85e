import numpy as np
import pytest
from hypothesis import settings

from bcnlax.elliptic import EllipticContext

settings.register_profile("bcnlax", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("bcnlax")

TAUS = [1j, 0.3 + 0.8j]
NU_A = (0.7 - 0.3j, 0.2 + 0.5j, -0.4 + 0.1j, 1.1 - 0.2j)
NU_B = (-0.5 + 0.8j, 0.9 - 0.1j, 0.3 + 0.3j, -0.2 - 0.6j)


@pytest.fixture(params=TAUS, ids=["tau=i", "tau=0.3+0.8i"])
def ctx(request):
    return EllipticContext(request.param)


@pytest.fixture
def ctx_i():
    return EllipticContext(1j)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def cell_point(ctx, rng, size=None):
    """Uniform point of the cell interior ``[0.1, 0.9] x [0.1, 0.9] (1, tau)``."""
    return rng.uniform(0.1, 0.9, size) + rng.uniform(0.1, 0.9, size) * ctx.tau
