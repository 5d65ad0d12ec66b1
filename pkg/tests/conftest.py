import numpy as np
import pytest

from davmm.quant import QuantizedMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_int8(rng, rows, cols):
    return QuantizedMatrix(rng.integers(-128, 128, size=(rows, cols)))
