import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_density(rng, grid, low=0.0, high=1.0):
    from blobflow.grid import Density

    return Density(grid, rng.uniform(low, high, grid.n_cells))
