import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from carpetdim.carpet import CarpetSpec, random_carpet

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def ex81_spec():
    return CarpetSpec(
        (0.0765, 0.2298, 0.499),
        (0.2904, 0.2904, 0.2904),
        ((0, 0), (0, 1), (1, 0), (1, 2), (2, 1), (2, 2)),
        allow_gaps=True,
    )


def ex82_spec():
    return CarpetSpec(
        (1 / 6, 1 / 3, 1 / 3, 1 / 6),
        (1 / 6, 1 / 6, 1 / 3, 1 / 3),
        ((0, 0), (1, 0), (0, 1), (2, 1), (3, 2), (1, 2), (3, 3), (2, 3)),
    )


def bedford_mcmullen_spec():
    return CarpetSpec((0.5, 0.5), (1 / 3, 1 / 3, 1 / 3), ((0, 0), (0, 1), (1, 2)))


def product_spec():
    return CarpetSpec(
        (0.25, 0.45), (0.3, 0.4), ((0, 0), (0, 1), (1, 0), (1, 1)), allow_gaps=True
    )


def full_product_spec(widths=(0.3, 0.7), heights=(0.4, 0.6)):
    cells = tuple((i, j) for i in range(len(widths)) for j in range(len(heights)))
    return CarpetSpec(widths, heights, cells)


@pytest.fixture
def ex81():
    return ex81_spec()


@pytest.fixture
def ex82():
    return ex82_spec()


@pytest.fixture
def bm():
    return bedford_mcmullen_spec()


@pytest.fixture
def product():
    return product_spec()


def alpha_82():
    """Independent bisection for (1/6)^x + (1/3)^x = 1."""
    lo, hi = 0.0, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (1 / 6) ** mid + (1 / 3) ** mid > 1:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


carpet_seeds = st.integers(min_value=0, max_value=10_000)


def seeded_carpet(seed, r_max=4, s_max=4, **kw):
    return random_carpet(r_max, s_max, seed, **kw)


def interior_points(rng, d, n):
    return rng.dirichlet(np.ones(d), size=n)


LOG2 = math.log(2)
