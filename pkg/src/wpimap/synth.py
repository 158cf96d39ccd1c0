"""Correlated Gaussian random fields for verification and demos.

Joint simulation is by dense factorization of the full cross-covariance
matrix built from a coregionalization model: C_ab(h) = N_ab for h = 0 plus
S_ab * (1 - s(h/range)) for the structured part. Locations are drawn
uniformly in the bounding box; draw order (x coordinates, y coordinates,
then one standard normal vector) is fixed so a seed fully determines the
output within this implementation. Cholesky is attempted first; positive
semi-definite but singular models (e.g. perfectly correlated variables)
fall back to an eigenvalue factorization.

``make_bundled_dataset`` writes the canonical 190-well demo table used by
the documentation and the acceptance suite: three jointly simulated
log-scale variables (performance index, fluid volume, proppant volume) with
total cross-correlations 0.7 and 0.45 against the primary, and completion
columns back-solved so that log10(rate * 90 * gradient * depth) equals the
simulated primary field.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Location, MultivariateDataset, SpatialSample, WellRecord, write_wells_csv
from .errors import DataError, IoFailure, NonPositiveDefiniteCovariance
from .variogram import LmcModel, Structure, structure_shape

BUNDLE_N_WELLS = 190
BUNDLE_SEED = 20240
BUNDLE_BOX = (0.0, 0.0, 20000.0, 20000.0)
BUNDLE_RANGE_M = 7000.0
BUNDLE_NUGGET = 0.012
BUNDLE_SILL = 0.05
BUNDLE_CORR_FLUID = 0.7
BUNDLE_CORR_PROPPANT = 0.45
BUNDLE_CORR_FLUID_PROPPANT = 0.55
BUNDLE_MEANS = (8.8, 6.4, 6.7)


@dataclass(frozen=True)
class SynthSpec:
    """Ground truth for a two-variable synthetic dataset."""

    n_points: int
    box: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax
    lmc: LmcModel
    means: tuple[float, float]
    seed: int

    def __post_init__(self):
        if self.n_points < 2:
            raise DataError(f"n_points must be >= 2, got {self.n_points}")
        xmin, ymin, xmax, ymax = self.box
        if not (xmax > xmin and ymax > ymin):
            raise DataError("bounding box must have positive extent")


def _joint_covariance(xy: np.ndarray, nugget: np.ndarray, sill: np.ndarray,
                      structure: Structure, range_m: float) -> np.ndarray:
    """(kn, kn) covariance of k variables observed at the same n locations."""
    k = nugget.shape[0]
    n = len(xy)
    d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    correl = 1.0 - structure_shape(structure, d / range_m)
    at_zero = (d == 0).astype(float)
    cov = np.empty((k * n, k * n))
    for a in range(k):
        for b in range(k):
            cov[a * n:(a + 1) * n, b * n:(b + 1) * n] = (
                sill[a, b] * correl + nugget[a, b] * at_zero
            )
    return cov


def _factor(cov: np.ndarray) -> np.ndarray:
    """Lower factor L with cov = L L^T, tolerant of PSD-singular inputs."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        values, vectors = np.linalg.eigh(cov)
        floor = -1e-8 * max(values.max(), 1.0)
        if values.min() < floor:
            raise NonPositiveDefiniteCovariance(float(values.min())) from None
        return vectors * np.sqrt(np.clip(values, 0.0, None))


def generate_field(spec: SynthSpec) -> MultivariateDataset:
    """Draw a co-located two-variable Gaussian field from the model."""
    rng = np.random.default_rng(spec.seed)
    xmin, ymin, xmax, ymax = spec.box
    xs = rng.uniform(xmin, xmax, spec.n_points)
    ys = rng.uniform(ymin, ymax, spec.n_points)
    xy = np.column_stack([xs, ys])
    cov = _joint_covariance(xy, spec.lmc.nugget_matrix, spec.lmc.sill_matrix,
                            spec.lmc.structure, spec.lmc.range_m)
    z = _factor(cov) @ rng.standard_normal(2 * spec.n_points)
    n = spec.n_points
    primary = tuple(
        SpatialSample(Location(float(xs[i]), float(ys[i])),
                      float(z[i] + spec.means[0])) for i in range(n)
    )
    secondary = tuple(
        SpatialSample(primary[i].location, float(z[n + i] + spec.means[1]))
        for i in range(n)
    )
    return MultivariateDataset(primary, secondary, colocated=True)


def correlated_lmc(structure: Structure, range_m: float, nugget: float,
                   sill: float, correlation: float) -> LmcModel:
    """Two-variable model whose total cross-correlation equals ``correlation``.

    Both coefficient matrices are proportional to [[1, rho], [rho, 1]], so
    corr = (N12 + S12) / sqrt((N11 + S11)(N22 + S22)) = rho exactly.
    """
    if not -1.0 <= correlation <= 1.0:
        raise DataError(f"correlation must be in [-1, 1], got {correlation}")
    rho = np.array([[1.0, correlation], [correlation, 1.0]])
    return LmcModel(structure, range_m, nugget * rho, sill * rho)


# --- bundled demo dataset -----------------------------------------------------


def _bundle_fields(n_points: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Locations plus the three jointly simulated log-scale fields."""
    corr = np.array([
        [1.0, BUNDLE_CORR_FLUID, BUNDLE_CORR_PROPPANT],
        [BUNDLE_CORR_FLUID, 1.0, BUNDLE_CORR_FLUID_PROPPANT],
        [BUNDLE_CORR_PROPPANT, BUNDLE_CORR_FLUID_PROPPANT, 1.0],
    ])
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = BUNDLE_BOX
    xs = rng.uniform(xmin, xmax, n_points)
    ys = rng.uniform(ymin, ymax, n_points)
    xy = np.column_stack([xs, ys])
    cov = _joint_covariance(xy, BUNDLE_NUGGET * corr, BUNDLE_SILL * corr,
                            Structure.SPHERICAL, BUNDLE_RANGE_M)
    z = _factor(cov) @ rng.standard_normal(3 * n_points)
    n = n_points
    fields = np.column_stack([
        z[:n] + BUNDLE_MEANS[0],
        z[n:2 * n] + BUNDLE_MEANS[1],
        z[2 * n:] + BUNDLE_MEANS[2],
    ])
    # completion attributes drawn after the fields so both are seed-determined
    gradients = rng.uniform(0.6, 0.95, n_points)
    depths = rng.uniform(9000.0, 13500.0, n_points)
    extras = np.column_stack([gradients, depths])
    return xy, np.column_stack([fields, extras])


def bundled_well_records(seed: int = BUNDLE_SEED,
                         n_wells: int = BUNDLE_N_WELLS) -> list[WellRecord]:
    """The demo wells as in-memory records (same construction as the CSV)."""
    xy, table = _bundle_fields(n_wells, seed)
    records = []
    for i in range(n_wells):
        log_wpi, log_fluid, log_prop, gradient, depth = table[i]
        rate = 10.0 ** log_wpi / (90.0 * gradient * depth)
        records.append(WellRecord(
            well_id=f"W{i + 1:03d}",
            location=Location(float(xy[i, 0]), float(xy[i, 1])),
            avg_rate_90d=float(rate),
            frac_gradient=float(gradient),
            tvd=float(depth),
            fluid_volume=float(10.0 ** log_fluid),
            proppant_volume=float(10.0 ** log_prop),
        ))
    return records


def make_bundled_dataset(out_dir, seed: int = BUNDLE_SEED,
                         n_wells: int = BUNDLE_N_WELLS) -> Path:
    """Write the canonical demo well table to ``out_dir/wells.csv``.

    The file is byte-identical across runs for a fixed seed (shortest
    round-trip float formatting, fixed draw order).
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "wells.csv"
        write_wells_csv(bundled_well_records(seed, n_wells), path)
    except OSError as exc:
        raise IoFailure(f"cannot write bundled dataset: {exc}") from exc
    return path


def bundle_generating_lmc() -> LmcModel:
    """The (primary, fluid) restriction of the bundle's generating model."""
    return correlated_lmc(Structure.SPHERICAL, BUNDLE_RANGE_M, BUNDLE_NUGGET,
                          BUNDLE_SILL, BUNDLE_CORR_FLUID)
