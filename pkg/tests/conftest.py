import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wpimap import (
    Location,
    LmcModel,
    MultivariateDataset,
    SpatialSample,
    Structure,
    VariogramModel,
)

STRUCTURES = (Structure.SPHERICAL, Structure.EXPONENTIAL, Structure.GAUSSIAN)


def random_points(rng, n, box=100.0):
    """n distinct random locations in [0, box]^2."""
    xy = rng.uniform(0.0, box, (n, 2))
    return [tuple(map(float, p)) for p in xy]


def make_samples(points, values):
    return [SpatialSample(Location(x, y), float(v))
            for (x, y), v in zip(points, values)]


def random_model(rng, box=100.0, nugget_zero=False):
    structure = STRUCTURES[int(rng.integers(len(STRUCTURES)))]
    nugget = 0.0 if nugget_zero else float(rng.uniform(0.0, 0.3))
    partial_sill = float(rng.uniform(0.4, 1.5))
    range_m = float(rng.uniform(box * 0.2, box * 0.8))
    return VariogramModel(structure, nugget, partial_sill, range_m)


def random_lmc(rng, box=100.0, nugget_zero=False):
    structure = STRUCTURES[int(rng.integers(len(STRUCTURES)))]
    range_m = float(rng.uniform(box * 0.2, box * 0.8))
    rho_n = float(rng.uniform(-0.8, 0.8))
    rho_s = float(rng.uniform(-0.8, 0.8))
    n11 = 0.0 if nugget_zero else float(rng.uniform(0.01, 0.3))
    n22 = 0.0 if nugget_zero else float(rng.uniform(0.01, 0.3))
    s11 = float(rng.uniform(0.4, 1.5))
    s22 = float(rng.uniform(0.4, 1.5))
    nugget = np.array([[n11, rho_n * np.sqrt(n11 * n22)],
                       [rho_n * np.sqrt(n11 * n22), n22]])
    sill = np.array([[s11, rho_s * np.sqrt(s11 * s22)],
                     [rho_s * np.sqrt(s11 * s22), s22]])
    return LmcModel(structure, range_m, nugget, sill)


def make_dataset(points, primary_values, secondary_values,
                 name="secondary"):
    primary = tuple(make_samples(points, primary_values))
    secondary = tuple(make_samples(points, secondary_values))
    return MultivariateDataset(primary, secondary, secondary_name=name,
                               colocated=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
