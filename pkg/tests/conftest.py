import numpy as np
import pytest

from photocorr.geometry import EmitterArray


def random_unit(rng, size=None):
    v = rng.normal(size=(size, 3) if size else 3)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_array(rng, n, box=1.5, min_dist=0.05) -> EmitterArray:
    """Random validated geometry: positions in a box, random unit dipoles."""
    while True:
        pos = rng.uniform(-box / 2, box / 2, size=(n, 3))
        if n == 1:
            break
        d = np.linalg.norm(pos[:, None] - pos[None, :], axis=2)
        if d[~np.eye(n, dtype=bool)].min() >= min_dist:
            break
    return EmitterArray(pos, random_unit(rng, n))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
