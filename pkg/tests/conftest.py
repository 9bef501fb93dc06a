import numpy as np
import pytest

from vidconceal.core import Frame


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


def grid_frame(width=4, height=4):
    """Frame with f(x, y) = x + width*y, handy for index checks."""
    ys, xs = np.mgrid[0:height, 0:width]
    return Frame((xs + width * ys).astype(np.uint8))


@pytest.fixture
def f4x4():
    return grid_frame(4, 4)
