import numpy as np
import pytest

from cimcloud.pointcloud import Tile


def random_tile(rng: np.random.Generator, n: int, high: int = 1 << 16) -> Tile:
    """A tile of n random quantized points; a small `high` forces duplicate coordinates and distance ties."""
    points = rng.integers(0, high, size=(n, 3)).astype(np.uint16)
    return Tile(points, np.arange(n, dtype=np.int64), np.zeros(3), np.ones(3), 2048)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
