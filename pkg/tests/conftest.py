import math

import numpy as np
import pytest

import wignerlab as wl


@pytest.fixture(scope="session")
def grid64():
    return wl.make_grid(64, 64, -10, 10, -10, 10, hbar=1.0, mass=1.0)


@pytest.fixture(scope="session")
def grid128():
    return wl.make_grid(128, 128, -12, 12, -12, 12, hbar=1.0, mass=1.0)


@pytest.fixture(scope="session")
def coherent64(grid64):
    s = math.sqrt(0.5)
    return wl.make_state(grid64, wl.GaussianSpec(sigma_x=s, sigma_p=s))


def random_gaussian_specs(n, seed=0):
    """Deterministic sample of physical Gaussian specs for property tests."""
    rng = np.random.default_rng(seed)
    specs = []
    while len(specs) < n:
        sx = rng.uniform(0.6, 1.15)
        sp = rng.uniform(0.6, 1.15)
        rho = rng.uniform(-0.5, 0.5)
        if sx * sp * math.sqrt(1 - rho**2) < 0.5:
            continue
        specs.append(
            wl.GaussianSpec(
                x0=rng.uniform(-0.8, 0.8),
                p0=rng.uniform(-0.8, 0.8),
                sigma_x=sx,
                sigma_p=sp,
                correlation=rho,
            )
        )
    return specs
