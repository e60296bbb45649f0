"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from cylwave import Field, GridSpec, build_grid


@pytest.fixture
def radial_grid():
    """Small purely radial grid, N = k = 3."""
    return build_grid(GridSpec(N=3, k=3, r_max=8.0, n_r=128))


@pytest.fixture
def cyl_grid():
    """Small cylindrical grid, N = 3, k = 2."""
    return build_grid(GridSpec(N=3, k=2, r_max=6.0, n_z=96, z_max=4.0, n_r=96))


@pytest.fixture
def gaussian_radial(radial_grid):
    """exp(-r^2) sampled on the radial grid."""
    vals = np.exp(-radial_grid.r[:, None] ** 2)
    return Field(radial_grid, vals)


@pytest.fixture
def gaussian_cyl(cyl_grid):
    """r * exp(-r^2 - z^2) on the cylindrical grid, vanishing on the axis."""
    rr = cyl_grid.r[:, None]
    zz = cyl_grid.z[None, :]
    return Field(cyl_grid, rr * np.exp(-(rr**2) - zz**2))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
