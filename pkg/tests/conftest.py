import numpy as np
import pytest

import logchaos as lc


@pytest.fixture(scope="session")
def tri_seed():
    return lc.make_seed_covariance(1, "triangle")


@pytest.fixture(scope="session")
def lens_seed():
    return lc.make_seed_covariance(2, "lens")


@pytest.fixture(scope="session")
def grid128():
    return lc.GridSpec(d=1, n=128)


@pytest.fixture(scope="session")
def small_ensemble(tri_seed, grid128):
    """Shared d=1 ensemble: ladder 2^-2..2^-5, R=1500, fixed seed."""
    ladder = lc.ScaleLadder.dyadic(0.25, 4)
    return lc.sample_cutoff_ensemble(grid128, tri_seed, ladder, 1500, 20240818)


def cov_se(x, y):
    """Jackknife-free rough SE for a single covariance entry, for tests
    that do not go through empirical_cov."""
    n = len(x)
    vx = x.var(ddof=1)
    vy = y.var(ddof=1)
    c = np.cov(x, y)[0, 1]
    return np.sqrt((vx * vy + c * c) / n)
