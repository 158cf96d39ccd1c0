"""Ordinary kriging and ordinary co-kriging.

Systems are assembled in the semivariogram form (data block of model
semivariances, zero diagonal by the gamma(0) = 0 convention, unbiasedness
constraint rows appended): ordinary kriging carries one constraint (primary
weights sum to 1), ordinary co-kriging two (primary weights sum to 1,
secondary weights sum to 0). The estimation variance of a solved system is
the dot product of the solution with the right-hand side.

All samples enter every system (global neighborhood); the constrained system
is factored once per sample configuration with a symmetric-indefinite LDL^T
factorization and solved for all targets at once, so grid prediction is
deterministic and independent of evaluation order. Systems whose reciprocal
condition estimate falls below 1e-12 are retried as a minimum-norm
least-squares solve, accepted (and flagged "degenerate") only when the
residual confirms the system is consistent; otherwise :class:`SingularSystem`
is raised with the condition estimate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack as _lapack

from .data import Location, MultivariateDataset, SpatialSample, locations_array, values_array
from .errors import (
    DataError,
    NegativeVariance,
    NotColocated,
    SingularSystem,
)
from .variogram import LmcModel, VariogramModel

log = logging.getLogger(__name__)

RCOND_MIN = 1e-12
VARIANCE_TOL = 1e-9
CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class Weights:
    """Solved kriging weights plus the Lagrange multipliers."""

    primary: np.ndarray
    secondary: np.ndarray | None
    multipliers: np.ndarray

    def triples(self):
        """Yield (variable, sample index, weight) for every data weight."""
        for i, w in enumerate(self.primary):
            yield ("primary", i, float(w))
        if self.secondary is not None:
            for j, w in enumerate(self.secondary):
                yield ("secondary", j, float(w))


@dataclass(frozen=True)
class KrigingResult:
    location: Location
    prediction: float
    variance: float
    weights: Weights | None = None
    flag: str | None = None


@dataclass(frozen=True)
class KrigingSystem:
    """Assembled constrained system; rhs may hold one column per target."""

    matrix: np.ndarray
    rhs: np.ndarray
    sample_index: tuple[tuple[str, int], ...]

    @property
    def n_constraints(self) -> int:
        return sum(1 for kind, _ in self.sample_index if kind == "constraint")


def _pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])


def _assert_unique_locations(xy: np.ndarray, label: str) -> None:
    if len(xy) < 2:
        return
    order = np.lexsort((xy[:, 1], xy[:, 0]))
    sorted_xy = xy[order]
    equal = (sorted_xy[1:] == sorted_xy[:-1]).all(axis=1)
    if equal.any():
        where = sorted_xy[int(np.argmax(equal))]
        raise SingularSystem(
            0.0, f"duplicate {label} sample locations at ({where[0]}, {where[1]})"
        )


def _targets_array(targets) -> np.ndarray:
    if isinstance(targets, Location):
        return np.array([[targets.x, targets.y]])
    targets = list(targets) if not isinstance(targets, np.ndarray) else targets
    if len(targets) and isinstance(targets[0], Location):
        return np.array([[t.x, t.y] for t in targets])
    return np.asarray(targets, dtype=float).reshape(-1, 2)


def build_ok_system(samples, model: VariogramModel, targets) -> KrigingSystem:
    """(n+1) ordinary kriging system for one or more target locations."""
    samples = list(samples)
    if not samples:
        raise DataError("ordinary kriging needs at least one sample")
    xy = locations_array(samples)
    _assert_unique_locations(xy, "primary")
    t_xy = _targets_array(targets)
    n = len(samples)
    a = np.zeros((n + 1, n + 1))
    a[:n, :n] = model.gamma(_pairwise_distances(xy, xy))
    a[:n, n] = 1.0
    a[n, :n] = 1.0
    b = np.zeros((n + 1, len(t_xy)))
    b[:n, :] = model.gamma(_pairwise_distances(xy, t_xy))
    b[n, :] = 1.0
    index = tuple(("primary", i) for i in range(n)) + (("constraint", 0),)
    return KrigingSystem(a, b, index)


def build_ck_system(primary, secondary, lmc: LmcModel, targets) -> KrigingSystem:
    """(n+m+2) ordinary co-kriging system predicting the primary variable.

    ``secondary`` need not be co-located with ``primary`` at solve time; the
    coregionalization model supplies all cross structure.
    """
    primary = list(primary)
    secondary = list(secondary)
    if not primary:
        raise DataError("co-kriging needs at least one primary sample")
    p_xy = locations_array(primary)
    s_xy = locations_array(secondary)
    _assert_unique_locations(p_xy, "primary")
    _assert_unique_locations(s_xy, "secondary")
    t_xy = _targets_array(targets)
    n, m = len(primary), len(secondary)
    size = n + m + 2
    a = np.zeros((size, size))
    a[:n, :n] = lmc.gamma(_pairwise_distances(p_xy, p_xy), 0, 0)
    if m:
        cross = lmc.gamma(_pairwise_distances(p_xy, s_xy), 0, 1)
        a[:n, n:n + m] = cross
        a[n:n + m, :n] = cross.T
        a[n:n + m, n:n + m] = lmc.gamma(_pairwise_distances(s_xy, s_xy), 1, 1)
    a[:n, n + m] = 1.0
    a[n + m, :n] = 1.0
    a[n:n + m, n + m + 1] = 1.0
    a[n + m + 1, n:n + m] = 1.0
    b = np.zeros((size, len(t_xy)))
    b[:n, :] = lmc.gamma(_pairwise_distances(p_xy, t_xy), 0, 0)
    if m:
        b[n:n + m, :] = lmc.gamma(_pairwise_distances(s_xy, t_xy), 0, 1)
    b[n + m, :] = 1.0
    index = (tuple(("primary", i) for i in range(n))
             + tuple(("secondary", j) for j in range(m))
             + (("constraint", 0), ("constraint", 1)))
    return KrigingSystem(a, b, index)


def _solve_symmetric(a: np.ndarray, b: np.ndarray):
    """Solve the symmetric-indefinite system for all right-hand sides.

    Returns (solution, rcond, flag) where flag is "degenerate" when the
    minimum-norm fallback was used on a consistent singular system.
    """
    a = np.asarray(a, dtype=float)
    b2 = np.asarray(b, dtype=float)
    single = b2.ndim == 1
    if single:
        b2 = b2[:, None]
    anorm = float(np.abs(a).sum(axis=0).max())
    lwork, info = _lapack.dsytrf_lwork(a.shape[0])
    ldlt, ipiv, info = _lapack.dsytrf(a, lower=1, lwork=lwork)
    if info < 0:
        raise SingularSystem(0.0, f"LDL^T factorization failed (info={info})")
    if info > 0:
        rcond = 0.0
    else:
        rcond, cinfo = _lapack.dsycon(ldlt, ipiv, anorm, lower=1)
        rcond = float(rcond)
    if rcond >= RCOND_MIN:
        x, sinfo = _lapack.dsytrs(ldlt, ipiv, b2, lower=1)
        if sinfo != 0:
            raise SingularSystem(rcond, f"back substitution failed (info={sinfo})")
        return (x[:, 0] if single else x), rcond, None
    # Singular or numerically singular: a consistent system (e.g. a perfectly
    # redundant secondary variable) still has a well-defined prediction, which
    # the minimum-norm solution realizes. Inconsistent systems are refused.
    x, *_ = np.linalg.lstsq(a, b2, rcond=None)
    residual = np.linalg.norm(a @ x - b2, axis=0)
    scale = (np.linalg.norm(b2, axis=0)
             + anorm * np.linalg.norm(x, axis=0) + 1.0)
    if not np.all(residual <= 1e-9 * scale):
        raise SingularSystem(rcond)
    log.warning("kriging system is numerically singular (rcond %.3e); "
                "using the minimum-norm solution", rcond)
    return (x[:, 0] if single else x), rcond, "degenerate"


def _join_flags(*flags) -> str | None:
    parts = [f for f in flags if f]
    return "+".join(parts) if parts else None


def _finalize_variance(variance: float):
    """Clamp a tiny negative variance to zero; refuse anything below -1e-9."""
    if variance < -VARIANCE_TOL:
        raise NegativeVariance(variance)
    if variance < 0.0:
        return 0.0, "variance_clamped"
    return variance, None


def _solve_system(system: KrigingSystem, data_values: np.ndarray, n_primary: int,
                  targets: np.ndarray, store_weights: bool,
                  grid_mode: bool) -> list[KrigingResult]:
    """Solve for every target and enforce the result invariants.

    In grid mode numerical failures become per-cell flags instead of raised
    errors so one bad cell cannot abort a whole map.
    """
    n_data = len(data_values)
    solution, rcond, degenerate = _solve_symmetric(system.matrix, system.rhs)
    if solution.ndim == 1:
        solution = solution[:, None]
    predictions = data_values @ solution[:n_data, :]
    variances = np.einsum("ij,ij->j", solution, system.rhs)
    primary_sums = solution[:n_primary, :].sum(axis=0)
    secondary_sums = solution[n_primary:n_data, :].sum(axis=0)
    has_secondary = n_data > n_primary

    results: list[KrigingResult] = []
    for col in range(len(targets)):
        loc = Location(float(targets[col, 0]), float(targets[col, 1]))
        flag = degenerate
        bad_constraint = abs(primary_sums[col] - 1.0) > CONSTRAINT_TOL or (
            has_secondary and abs(secondary_sums[col]) > CONSTRAINT_TOL
        )
        if bad_constraint:
            if not grid_mode:
                raise SingularSystem(
                    rcond, "unbiasedness constraints violated beyond 1e-9"
                )
            results.append(KrigingResult(loc, float("nan"), float("nan"), None,
                                         _join_flags(flag, "constraint_violation")))
            continue
        variance = float(variances[col])
        try:
            variance, clamp_flag = _finalize_variance(variance)
        except NegativeVariance:
            if not grid_mode:
                raise
            results.append(KrigingResult(loc, float("nan"), float("nan"), None,
                                         _join_flags(flag, "negative_variance")))
            continue
        weights = None
        if store_weights:
            weights = Weights(
                primary=solution[:n_primary, col].copy(),
                secondary=(solution[n_primary:n_data, col].copy()
                           if has_secondary else None),
                multipliers=solution[n_data:, col].copy(),
            )
        results.append(KrigingResult(loc, float(predictions[col]), variance,
                                     weights, _join_flags(flag, clamp_flag)))
    return results


# --- public solvers -----------------------------------------------------------


def solve_ok(samples, model: VariogramModel, target: Location,
             store_weights: bool = True) -> KrigingResult:
    """Ordinary kriging prediction (and variance) at one location."""
    samples = list(samples)
    system = build_ok_system(samples, model, target)
    values = values_array(samples)
    return _solve_system(system, values, len(samples),
                         _targets_array(target), store_weights, grid_mode=False)[0]


def solve_ck(dataset: MultivariateDataset, lmc: LmcModel, target: Location,
             store_weights: bool = True) -> KrigingResult:
    """Ordinary co-kriging prediction of the primary variable at one location."""
    if not dataset.colocated:
        raise NotColocated("co-kriging requires a co-located dataset")
    if dataset.n < 1:
        raise DataError("co-kriging needs at least one pair")
    system = build_ck_system(dataset.primary, dataset.secondary, lmc, target)
    values = np.concatenate([dataset.primary_values(), dataset.secondary_values()])
    return _solve_system(system, values, dataset.n,
                         _targets_array(target), store_weights, grid_mode=False)[0]


# --- estimators ----------------------------------------------------------------


@dataclass(frozen=True)
class OkEstimator:
    """Ordinary kriging configuration: samples plus a fitted variogram model."""

    samples: tuple[SpatialSample, ...]
    model: VariogramModel
    name: str = "OK"

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))

    @property
    def primary_samples(self) -> tuple[SpatialSample, ...]:
        return self.samples

    def predict(self, targets, store_weights: bool = False,
                grid_mode: bool = False) -> list[KrigingResult]:
        t_xy = _targets_array(targets)
        system = build_ok_system(self.samples, self.model, t_xy)
        values = values_array(self.samples)
        return _solve_system(system, values, len(self.samples), t_xy,
                             store_weights, grid_mode)

    def excluding(self, indices) -> "OkEstimator":
        drop = set(indices)
        kept = tuple(s for i, s in enumerate(self.samples) if i not in drop)
        return OkEstimator(kept, self.model, self.name)


@dataclass(frozen=True)
class CkEstimator:
    """Ordinary co-kriging configuration for predicting the primary variable.

    ``drop_secondary=True`` removes the secondary sample co-located with any
    excluded primary sample (the stricter cross-validation variant); by
    default all secondary data stays available.
    """

    primary: tuple[SpatialSample, ...]
    secondary: tuple[SpatialSample, ...]
    lmc: LmcModel
    name: str = "CK"
    drop_secondary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "primary", tuple(self.primary))
        object.__setattr__(self, "secondary", tuple(self.secondary))

    @classmethod
    def from_dataset(cls, dataset: MultivariateDataset, lmc: LmcModel,
                     name: str | None = None,
                     drop_secondary: bool = False) -> "CkEstimator":
        if not dataset.colocated:
            raise NotColocated("co-kriging requires a co-located dataset")
        if dataset.n < 1:
            raise DataError("co-kriging needs at least one pair")
        return cls(dataset.primary, dataset.secondary, lmc,
                   name or f"CK-{dataset.secondary_name}", drop_secondary)

    @property
    def primary_samples(self) -> tuple[SpatialSample, ...]:
        return self.primary

    def predict(self, targets, store_weights: bool = False,
                grid_mode: bool = False) -> list[KrigingResult]:
        t_xy = _targets_array(targets)
        system = build_ck_system(self.primary, self.secondary, self.lmc, t_xy)
        values = np.concatenate([values_array(self.primary),
                                 values_array(self.secondary)])
        return _solve_system(system, values, len(self.primary), t_xy,
                             store_weights, grid_mode)

    def excluding(self, indices) -> "CkEstimator":
        drop = set(indices)
        kept_primary = tuple(s for i, s in enumerate(self.primary)
                             if i not in drop)
        secondary = self.secondary
        if self.drop_secondary:
            gone = {(self.primary[i].location.x, self.primary[i].location.y)
                    for i in drop}
            secondary = tuple(s for s in secondary
                              if (s.location.x, s.location.y) not in gone)
        return CkEstimator(kept_primary, secondary, self.lmc, self.name,
                           self.drop_secondary)


# --- grids ----------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Regular grid; cell (ix, iy) is centered at origin + ((ix+0.5)dx, (iy+0.5)dy)."""

    origin_x: float
    origin_y: float
    nx: int
    ny: int
    dx: float
    dy: float

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise DataError("grid dimensions must be positive")
        if self.dx <= 0 or self.dy <= 0:
            raise DataError("grid cell sizes must be positive")

    @classmethod
    def from_bounding_box(cls, samples, nx: int = 100, ny: int = 100) -> "GridSpec":
        xy = locations_array(samples)
        lo = xy.min(axis=0)
        hi = xy.max(axis=0)
        span_x = max(float(hi[0] - lo[0]), 1.0)
        span_y = max(float(hi[1] - lo[1]), 1.0)
        return cls(float(lo[0]), float(lo[1]), nx, ny, span_x / nx, span_y / ny)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    def cell_centers(self) -> np.ndarray:
        """(nx*ny, 2) centers, x varying fastest (cell index = iy*nx + ix)."""
        xs = self.origin_x + (np.arange(self.nx) + 0.5) * self.dx
        ys = self.origin_y + (np.arange(self.ny) + 0.5) * self.dy
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True)
class PredictionGrid:
    spec: GridSpec
    cells: tuple[KrigingResult, ...]

    def __post_init__(self):
        if len(self.cells) != self.spec.n_cells:
            raise DataError("cell count does not match the grid spec")

    def cell(self, ix: int, iy: int) -> KrigingResult:
        return self.cells[iy * self.spec.nx + ix]

    def prediction_array(self) -> np.ndarray:
        return np.array([c.prediction for c in self.cells]).reshape(
            self.spec.ny, self.spec.nx)

    def variance_array(self) -> np.ndarray:
        return np.array([c.variance for c in self.cells]).reshape(
            self.spec.ny, self.spec.nx)


def predict_grid(estimator, grid: GridSpec,
                 store_weights: bool = False) -> PredictionGrid:
    """Kriging prediction at every cell center of the grid.

    A singular sample configuration flags every cell instead of aborting;
    per-cell numerical trouble (negative variance, constraint violation)
    flags only the affected cell.
    """
    centers = grid.cell_centers()
    try:
        cells = estimator.predict(centers, store_weights=store_weights,
                                  grid_mode=True)
    except SingularSystem as exc:
        log.warning("grid prediction failed for every cell: %s", exc)
        cells = [KrigingResult(Location(float(x), float(y)), float("nan"),
                               float("nan"), None, "singular")
                 for x, y in centers]
    return PredictionGrid(grid, tuple(cells))


@dataclass(frozen=True)
class VarianceMap:
    """Per-cell kriging variance extract; flagged cells are NaN."""

    values: np.ndarray
    flags: tuple[tuple[int, int, str], ...]


def variance_map(grid: PredictionGrid) -> VarianceMap:
    values = grid.variance_array().copy()
    flags = []
    for iy in range(grid.spec.ny):
        for ix in range(grid.spec.nx):
            cell = grid.cell(ix, iy)
            if cell.flag is not None:
                flags.append((ix, iy, cell.flag))
                if not np.isfinite(cell.prediction):
                    values[iy, ix] = float("nan")
    return VarianceMap(values, tuple(flags))
