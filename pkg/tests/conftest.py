import numpy as np
import pytest

from leafscope.curve import CurveSpec
from leafscope.poisson import build_cache

# A square lattice and a skew one with a nonzero line-bundle class, so the
# tests see both l_sum = 0 and a translated Omega coset.
SQUARE_TAU = 1j
SKEW_TAU = 0.3 + 1.1j


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def curve3():
    return CurveSpec.new(SQUARE_TAU, 3)


@pytest.fixture(scope="session")
def curve4():
    return CurveSpec.new(SQUARE_TAU, 4)


@pytest.fixture(scope="session")
def curve5():
    return CurveSpec.new(SQUARE_TAU, 5)


@pytest.fixture(scope="session")
def curve6():
    return CurveSpec.new(SQUARE_TAU, 6)


@pytest.fixture(scope="session")
def skew4():
    return CurveSpec.new(SKEW_TAU, 4, l_sum=0.2 + 0.1j)


@pytest.fixture(scope="session", params=[3, 4, 5, 6], ids=lambda n: f"n{n}")
def any_curve(request):
    return CurveSpec.new(SQUARE_TAU, request.param)


@pytest.fixture(scope="session")
def cache3(curve3):
    return build_cache(curve3)


@pytest.fixture(scope="session")
def cache4(curve4):
    return build_cache(curve4)


@pytest.fixture(scope="session")
def cache5(curve5):
    return build_cache(curve5)


@pytest.fixture(scope="session")
def cache6(curve6):
    return build_cache(curve6)


@pytest.fixture
def random_vector(rng):
    def draw(n):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return v / np.linalg.norm(v)

    return draw
