import numpy as np
import pytest

from affectbench.frames import Frame


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def random_frame(rng):
    def make(width=32, height=32, seed=None):
        local = np.random.default_rng(seed) if seed is not None else rng
        return Frame(local.integers(0, 256, size=(height, width, 3), dtype=np.uint8))

    return make
