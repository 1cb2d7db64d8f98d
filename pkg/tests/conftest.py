import pytest

from fedpop.rng import Drbg


@pytest.fixture
def rng():
    return Drbg.from_seed(0xFEDC0FFEE)
