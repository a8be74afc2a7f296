import numpy as np
import pytest
from hypothesis import settings

from anisoeig import BoxDomain, GridFunction, build_grid

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_instance(rng, n=None, max_counts=None, p_range=(1.2, 4.0)):
    """Random box, grid, sorted exponents, fractional orders and two fields."""
    n = int(rng.integers(1, 4)) if n is None else n
    hi = max_counts or {1: 24, 2: 10, 3: 6}[n]
    counts = tuple(int(k) for k in rng.integers(2, hi + 1, size=n))
    upper = tuple(float(x) for x in rng.uniform(0.5, 2.0, size=n))
    grid = build_grid(BoxDomain((0.0,) * n, upper), counts)
    p = tuple(float(x) for x in np.sort(rng.uniform(*p_range, size=n)))
    s = tuple(float(x) for x in rng.uniform(0.2, 0.9, size=n))
    u = GridFunction(grid, rng.standard_normal(grid.shape))
    v = GridFunction(grid, rng.standard_normal(grid.shape))
    return grid, p, s, u, v


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), np.finfo(float).tiny)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
