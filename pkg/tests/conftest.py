import math

import numpy as np
import pytest

from kgstab.boundstates import continue_branch, default_path
from kgstab.resonance import table_from_spectrum
from kgstab.spectral import Discretization, PotentialSpec, assemble_operator, check_h3, point_spectrum

WELL_DEPTH = -16.87642739710215
WELL_WIDTH = 0.5


@pytest.fixture(scope="session")
def well():
    """One trapped mode, omega ~ 0.452; the radial scenario shared by most tests."""
    disc = Discretization("radial3d", 512, 60.0, "sponge", 20.0, 1.0)
    H = assemble_operator(disc, PotentialSpec.gaussian_well(WELL_DEPTH, WELL_WIDTH))
    spec = point_spectrum(H, 1.0)
    return disc, H, spec


@pytest.fixture(scope="session")
def well_family(well):
    _, H, spec = well
    return continue_branch(spec, H, 1, default_path(1.2, 1e-3, 20))


@pytest.fixture(scope="session")
def well_table(well):
    _, _, spec = well
    return table_from_spectrum(spec, N=check_h3(spec).N)


@pytest.fixture(scope="session")
def two_wells():
    """Two trapped modes in a wider well (n = 2)."""
    disc = Discretization("radial3d", 600, 40.0)
    H = assemble_operator(disc, PotentialSpec.gaussian_well(-1.2, 5.0))
    spec = point_spectrum(H, 1.0)
    assert spec.n == 2
    fams = [continue_branch(spec, H, j, default_path(0.3, 1e-3, 12)) for j in (1, 2)]
    return disc, H, spec, fams


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


__all__ = ["rel", "WELL_DEPTH", "WELL_WIDTH", "math"]
