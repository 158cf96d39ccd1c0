"""Semivariogram estimation and model fitting.

Empirical direct and cross variograms are computed by lag binning; parametric
models (nugget + one spherical/exponential/gaussian structure) are fitted by
weighted least squares with weights pair_count / lag^2, using a scan plus
golden-section search on the range and a closed-form non-negative linear
solve for (nugget, partial sill) at each candidate range. A two-variable
linear model of coregionalization shares the structure and range across the
two direct variograms and the cross variogram, with coefficient matrices
projected onto the positive semi-definite cone when necessary.

Range convention: the spherical model reaches its sill exactly at the range;
exponential and gaussian use the practical-range convention with factor 3
(``1 - exp(-3h/a)`` and ``1 - exp(-3(h/a)^2)``), so the range parameter is
where the structure reaches ~95% of the sill for all three shapes.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .data import MultivariateDataset, locations_array, values_array
from .errors import (
    DataError,
    InfeasibleFit,
    InvalidLmc,
    NoPairsWithinCutoff,
    NotColocated,
    TooFewBins,
)

log = logging.getLogger(__name__)

DEFAULT_N_BINS = 15
PSD_TOL = 1e-10


class Structure(str, enum.Enum):
    SPHERICAL = "spherical"
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"


def structure_shape(structure: Structure, t):
    """Normalized structure value s(t) in [0, 1] for t = h / range >= 0."""
    t = np.asarray(t, dtype=float)
    if structure is Structure.SPHERICAL:
        tc = np.minimum(t, 1.0)
        return 1.5 * tc - 0.5 * tc**3
    if structure is Structure.EXPONENTIAL:
        return 1.0 - np.exp(-3.0 * t)
    if structure is Structure.GAUSSIAN:
        return 1.0 - np.exp(-3.0 * t**2)
    raise DataError(f"unknown structure {structure!r}")


class VariogramKind(str, enum.Enum):
    DIRECT = "direct"
    CROSS = "cross"


@dataclass(frozen=True)
class VariogramBin:
    lag: float
    gamma: float
    pair_count: int


@dataclass(frozen=True)
class EmpiricalVariogram:
    bins: tuple[VariogramBin, ...]
    cutoff: float
    bin_width: float
    kind: VariogramKind

    def __post_init__(self):
        object.__setattr__(self, "bins", tuple(self.bins))
        lags = [b.lag for b in self.bins]
        if any(b2 <= b1 for b1, b2 in zip(lags, lags[1:])):
            raise DataError("lag centers must be strictly increasing")
        for b in self.bins:
            if b.pair_count < 1:
                raise DataError("every reported bin needs at least one pair")
            if self.kind is VariogramKind.DIRECT and b.gamma < 0:
                raise DataError("direct semivariance cannot be negative")

    @property
    def n_bins(self) -> int:
        return len(self.bins)

    def lags(self) -> np.ndarray:
        return np.array([b.lag for b in self.bins])

    def gammas(self) -> np.ndarray:
        return np.array([b.gamma for b in self.bins])

    def pair_counts(self) -> np.ndarray:
        return np.array([b.pair_count for b in self.bins])


@dataclass(frozen=True)
class VariogramModel:
    """nugget + partial_sill * s(h / range_m); value 0 at h = 0 by convention."""

    structure: Structure
    nugget: float
    partial_sill: float
    range_m: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.nugget, self.partial_sill, self.range_m))):
            raise DataError("variogram parameters must be finite")
        if self.nugget < 0 or self.partial_sill < 0:
            raise DataError("nugget and partial sill must be non-negative")
        if self.range_m <= 0:
            raise DataError("range must be positive")

    @property
    def sill(self) -> float:
        return self.nugget + self.partial_sill

    def gamma(self, h):
        h = np.asarray(h, dtype=float)
        g = self.nugget + self.partial_sill * structure_shape(
            self.structure, h / self.range_m
        )
        return np.where(h > 0, g, 0.0)


def model_value(model: VariogramModel, h) -> float | np.ndarray:
    """Model semivariance at separation h >= 0."""
    h_arr = np.asarray(h, dtype=float)
    if np.any(h_arr < 0):
        raise DataError("separation must be non-negative")
    out = model.gamma(h_arr)
    return float(out) if np.isscalar(h) or out.ndim == 0 else out


def default_cutoff(samples) -> float:
    """One third of the bounding-box diagonal of the sample locations."""
    xy = locations_array(samples)
    span = xy.max(axis=0) - xy.min(axis=0)
    diagonal = float(np.hypot(span[0], span[1]))
    if diagonal <= 0:
        raise DataError("all samples share one location; cutoff undefined")
    return diagonal / 3.0


def _binned(d: np.ndarray, products: np.ndarray, cutoff: float, n_bins: int,
            kind: VariogramKind) -> EmpiricalVariogram:
    if cutoff <= 0:
        raise DataError(f"cutoff must be positive, got {cutoff}")
    if n_bins < 1:
        raise DataError(f"n_bins must be >= 1, got {n_bins}")
    mask = (d > 0) & (d <= cutoff)
    if not mask.any():
        raise NoPairsWithinCutoff(cutoff)
    d = d[mask]
    products = products[mask]
    width = cutoff / n_bins
    idx = np.minimum((d / width).astype(int), n_bins - 1)
    sums = np.bincount(idx, weights=products, minlength=n_bins)
    counts = np.bincount(idx, minlength=n_bins)
    bins = []
    for k in range(n_bins):
        if counts[k] == 0:
            continue
        gamma = sums[k] / (2.0 * counts[k])
        if kind is VariogramKind.DIRECT:
            gamma = max(gamma, 0.0)  # guard -0.0 from rounding
        bins.append(VariogramBin((k + 0.5) * width, float(gamma), int(counts[k])))
    return EmpiricalVariogram(tuple(bins), cutoff, width, kind)


def empirical_variogram(samples, cutoff: float,
                        n_bins: int = DEFAULT_N_BINS) -> EmpiricalVariogram:
    """Direct semivariogram: gamma_b = sum of (z_i - z_j)^2 / (2 N_b) per lag bin.

    Pairs farther apart than ``cutoff`` are excluded; bins are equal-width
    with the reported lag at the bin center; empty bins are omitted.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise DataError(f"need at least 2 samples, got {len(samples)}")
    xy = locations_array(samples)
    z = values_array(samples)
    i, j = np.triu_indices(len(samples), k=1)
    d = np.hypot(xy[i, 0] - xy[j, 0], xy[i, 1] - xy[j, 1])
    return _binned(d, (z[i] - z[j]) ** 2, cutoff, n_bins, VariogramKind.DIRECT)


def empirical_cross_variogram(dataset: MultivariateDataset, cutoff: float,
                              n_bins: int = DEFAULT_N_BINS) -> EmpiricalVariogram:
    """Cross semivariogram of the co-located pair:
    gamma_b = sum of (u_i - u_j)(v_i - v_j) / (2 N_b).
    """
    if not dataset.colocated:
        raise NotColocated()
    if dataset.n < 2:
        raise DataError(f"need at least 2 pairs, got {dataset.n}")
    xy = dataset.primary_locations()
    u = dataset.primary_values()
    v = dataset.secondary_values()
    i, j = np.triu_indices(dataset.n, k=1)
    d = np.hypot(xy[i, 0] - xy[j, 0], xy[i, 1] - xy[j, 1])
    return _binned(d, (u[i] - u[j]) * (v[i] - v[j]), cutoff, n_bins,
                   VariogramKind.CROSS)


# --- weighted least squares fitting -----------------------------------------


@dataclass(frozen=True)
class VariogramFit:
    model: VariogramModel
    objective: float
    converged: bool
    iterations: int
    degenerate_range: bool


def _wls_coefficients(s: np.ndarray, gamma: np.ndarray, w: np.ndarray,
                      clamp: bool) -> tuple[float, float, float]:
    """Best (nugget, coeff) for gamma ~ nugget + coeff * s under weights w.

    With ``clamp`` both coefficients are constrained non-negative (direct
    variograms); without it they are free (cross variogram coefficients may
    legitimately be negative). Returns (nugget, coeff, objective).
    """
    a11 = float(w.sum())
    a12 = float((w * s).sum())
    a22 = float((w * s * s).sum())
    b1 = float((w * gamma).sum())
    b2 = float((w * s * gamma).sum())
    det = a11 * a22 - a12 * a12

    def objective(n, c):
        r = gamma - (n + c * s)
        return float((w * r * r).sum())

    candidates: list[tuple[float, float]] = []
    if det > 1e-14 * max(a11 * a22, 1e-300):
        n_hat = (a22 * b1 - a12 * b2) / det
        c_hat = (a11 * b2 - a12 * b1) / det
        if not clamp or (n_hat >= 0 and c_hat >= 0):
            return n_hat, c_hat, objective(n_hat, c_hat)
        candidates.append((max(n_hat, 0.0), max(c_hat, 0.0)))
    # boundary candidates (also the collinear fallback)
    candidates.append((max(b1 / a11, 0.0) if clamp else b1 / a11, 0.0))
    if a22 > 0:
        c_only = b2 / a22
        candidates.append((0.0, max(c_only, 0.0) if clamp else c_only))
    best = min(candidates, key=lambda nc: (objective(*nc), nc[1]))
    return best[0], best[1], objective(*best)


def fit_model(empirical: EmpiricalVariogram, structure: Structure,
              initial: VariogramModel | None = None,
              max_iterations: int = 500) -> VariogramFit:
    """Fit nugget/partial-sill/range by weighted least squares.

    Objective: sum over bins of (pair_count / lag^2) * (gamma_b - model(lag_b))^2.
    The range is located by a coarse scan followed by golden-section
    refinement; at each candidate range the two linear coefficients come from
    the closed-form non-negative solve. Convergence means the relative
    objective decrease fell below 1e-10; hitting ``max_iterations`` returns
    the best-so-far model with ``converged=False``.
    """
    if empirical.n_bins < 3:
        raise TooFewBins(empirical.n_bins)
    lags = empirical.lags()
    gammas = empirical.gammas()
    weights = empirical.pair_counts() / lags**2
    clamp = empirical.kind is VariogramKind.DIRECT
    scale = float((weights * gammas**2).sum()) + 1e-300

    def profile(range_m: float) -> tuple[float, float, float]:
        s = structure_shape(structure, lags / range_m)
        nugget, coeff, obj = _wls_coefficients(s, gammas, weights, clamp)
        return obj, nugget, coeff

    lo = max(empirical.bin_width * 0.05, empirical.cutoff * 1e-3)
    hi = empirical.cutoff * 2.0
    n_scan = 160
    scan = np.linspace(lo, hi, n_scan)
    if initial is not None and lo < initial.range_m < hi:
        scan = np.sort(np.append(scan, initial.range_m))
    evals = 0
    scan_obj = []
    for r in scan:
        scan_obj.append(profile(float(r))[0])
        evals += 1
    scan_obj = np.asarray(scan_obj)
    best_idx = int(np.argmin(scan_obj))
    flat_objective = (scan_obj.max() - scan_obj.min()) <= 1e-12 * scale

    # golden-section refinement between the scan neighbors of the minimum
    a = float(scan[max(best_idx - 1, 0)])
    b = float(scan[min(best_idx + 1, len(scan) - 1)])
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = profile(c)[0], profile(d)[0]
    evals += 2
    best_obj = float(scan_obj[best_idx])
    converged = False
    while evals < max_iterations:
        new_best = min(best_obj, fc, fd)
        decrease = (best_obj - new_best) / max(abs(best_obj), 1e-300)
        best_obj = new_best
        if evals > n_scan + 40 and decrease < 1e-10:
            converged = True
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = profile(c)[0]
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = profile(d)[0]
        evals += 1

    range_m = (a + b) / 2.0
    obj, nugget, coeff = profile(range_m)
    degenerate = flat_objective or range_m >= hi * 0.999 or range_m <= lo * 1.001
    if not converged:
        log.warning("variogram fit hit the iteration cap (%d evaluations); "
                    "returning best-so-far", evals)
    model = VariogramModel(structure, max(nugget, 0.0), max(coeff, 0.0), range_m)
    return VariogramFit(model, obj, converged, evals, degenerate)


# --- linear model of coregionalization ---------------------------------------


@dataclass(frozen=True)
class LmcModel:
    """Two-variable coregionalization: all three variograms share the
    structure and range; gamma_ij(h) = N_ij * 1{h>0} + S_ij * s(h/range).

    Both coefficient matrices must be symmetric positive semi-definite
    (eigenvalues >= -1e-10), which guarantees a valid co-kriging system.
    Index 0 is the primary variable, 1 the secondary.
    """

    structure: Structure
    range_m: float
    nugget_matrix: np.ndarray
    sill_matrix: np.ndarray

    def __post_init__(self):
        n = np.array(self.nugget_matrix, dtype=float)
        s = np.array(self.sill_matrix, dtype=float)
        for name, m in (("nugget_matrix", n), ("sill_matrix", s)):
            if m.shape != (2, 2):
                raise InvalidLmc(f"{name} must be 2x2, got {m.shape}")
            if abs(m[0, 1] - m[1, 0]) > 1e-12 * max(1.0, abs(m).max()):
                raise InvalidLmc(f"{name} must be symmetric")
            if np.linalg.eigvalsh(m).min() < -PSD_TOL:
                raise InvalidLmc(
                    f"{name} is not positive semi-definite "
                    f"(min eigenvalue {np.linalg.eigvalsh(m).min():.3e})"
                )
        if self.range_m <= 0:
            raise InvalidLmc("range must be positive")
        n.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "nugget_matrix", n)
        object.__setattr__(self, "sill_matrix", s)

    def gamma(self, h, i: int, j: int):
        """Model (cross-)semivariance between variables i and j; 0 at h = 0."""
        h = np.asarray(h, dtype=float)
        g = self.nugget_matrix[i, j] + self.sill_matrix[i, j] * structure_shape(
            self.structure, h / self.range_m
        )
        return np.where(h > 0, g, 0.0)

    def covariance(self, h, i: int, j: int):
        """Stationary covariance C_ij(h) = N_ij + S_ij - gamma_ij(h)."""
        h = np.asarray(h, dtype=float)
        struct = self.sill_matrix[i, j] * (
            1.0 - structure_shape(self.structure, h / self.range_m)
        )
        return struct + self.nugget_matrix[i, j] * (h == 0)

    def total_sill(self, i: int, j: int) -> float:
        return float(self.nugget_matrix[i, j] + self.sill_matrix[i, j])

    def direct_model(self, i: int) -> VariogramModel:
        return VariogramModel(self.structure,
                              max(float(self.nugget_matrix[i, i]), 0.0),
                              max(float(self.sill_matrix[i, i]), 0.0),
                              self.range_m)


@dataclass(frozen=True)
class LmcFit:
    lmc: LmcModel
    primary_fit: VariogramFit
    objectives: tuple[float, float, float]  # primary, secondary, cross
    projected: bool
    max_change: float


def _project_psd(m: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(m)
    if values.min() >= -PSD_TOL:
        return m
    clipped = np.clip(values, 0.0, None)
    return vectors @ np.diag(clipped) @ vectors.T


def fit_lmc(direct_primary: EmpiricalVariogram,
            direct_secondary: EmpiricalVariogram,
            cross: EmpiricalVariogram,
            structure: Structure) -> LmcFit:
    """Fit the two-variable coregionalization model.

    The shared range comes from the primary direct variogram (prediction
    targets the primary variable); the secondary and cross coefficients are
    then closed-form WLS fits at that fixed range. If either coefficient
    matrix leaves the PSD cone it is projected back (negative eigenvalues
    clipped); a projection that changes any coefficient by more than 50%
    signals a mis-specified model and raises :class:`InfeasibleFit`.
    """
    for emp in (direct_primary, direct_secondary, cross):
        if emp.n_bins < 3:
            raise TooFewBins(emp.n_bins)
    primary_fit = fit_model(direct_primary, structure)
    range_m = primary_fit.model.range_m

    def coefficients(emp: EmpiricalVariogram, clamp: bool):
        lags = emp.lags()
        s = structure_shape(structure, lags / range_m)
        w = emp.pair_counts() / lags**2
        return _wls_coefficients(s, emp.gammas(), w, clamp)

    n22, s22, obj2 = coefficients(direct_secondary, clamp=True)
    n12, s12, obj_x = coefficients(cross, clamp=False)
    nugget = np.array([[primary_fit.model.nugget, n12], [n12, n22]])
    sill = np.array([[primary_fit.model.partial_sill, s12], [s12, s22]])

    projected = False
    max_change = 0.0
    fixed = []
    for m in (nugget, sill):
        p = _project_psd(m)
        if p is not m:
            projected = True
            change = np.abs(p - m) / (np.abs(m) + 1e-12)
            max_change = max(max_change, float(change.max()))
            if np.any(np.abs(p - m) > 0.5 * np.abs(m) + 1e-12):
                raise InfeasibleFit(
                    "PSD projection changes a coregionalization coefficient by "
                    f"more than 50% (max relative change {change.max():.2f}); "
                    "the cross variogram is inconsistent with the direct sills"
                )
        fixed.append(p)
    if projected:
        log.info("coregionalization coefficients projected to the PSD cone "
                 "(max relative change %.3g)", max_change)
    lmc = LmcModel(structure, range_m, fixed[0], fixed[1])
    return LmcFit(lmc, primary_fit, (primary_fit.objective, obj2, obj_x),
                  projected, max_change)


@dataclass(frozen=True)
class RangeDiagnostic:
    range_full: float
    range_colocated: float
    fit_full: VariogramFit
    fit_colocated: VariogramFit


def range_diagnostic(full_secondary, colocated_secondary,
                     cutoff: float | None = None,
                     n_bins: int = DEFAULT_N_BINS,
                     structure: Structure = Structure.SPHERICAL) -> RangeDiagnostic:
    """Fitted range of the secondary variable with all samples vs only the
    co-located subset (motivates restricting the joint model to co-located
    data when the full set shows a much shorter range)."""
    full_secondary = list(full_secondary)
    colocated_secondary = list(colocated_secondary)
    if cutoff is None:
        cutoff = default_cutoff(full_secondary)
    fit_full = fit_model(empirical_variogram(full_secondary, cutoff, n_bins),
                         structure)
    fit_col = fit_model(empirical_variogram(colocated_secondary, cutoff, n_bins),
                        structure)
    return RangeDiagnostic(fit_full.model.range_m, fit_col.model.range_m,
                           fit_full, fit_col)
