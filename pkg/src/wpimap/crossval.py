"""k-fold and leave-one-out cross-validation of kriging estimators.

Fold plans are built from an explicitly specified integer-only generator so
the same (n, k, seed) gives the same partition on any platform or language:

* splitmix64: ``state += 0x9E3779B97F4A7C15``; then
  ``z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EB; output z ^ (z >> 31)``
  (all arithmetic modulo 2^64).
* The sample indices 0..n-1 are shuffled by a Fisher-Yates pass that draws
  ``j = next() % (i + 1)`` for i = n-1 .. 1.
* Fold sizes differ by at most one: the first ``n % k`` folds take
  ``n // k + 1`` shuffled indices in order, the rest ``n // k``.

The default refit policy fits the variogram (or coregionalization) model
once on all data and reuses it in every fold; per-fold refitting is
available for sensitivity analysis. For co-kriging only the held-out
primary observation leaves the training data; secondary data (including the
co-located value at the target) stays available unless the estimator was
built with ``drop_secondary=True``.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from .data import locations_array
from .errors import DataError, InvalidK, MismatchedSampleSets, NumericalError
from .kriging import CkEstimator, OkEstimator
from .variogram import (
    Structure,
    empirical_cross_variogram,
    empirical_variogram,
    fit_lmc,
    fit_model,
)

log = logging.getLogger(__name__)

LOO = "loo"

_MASK64 = (1 << 64) - 1


def _splitmix64(seed: int):
    """Infinite stream of 64-bit outputs from the splitmix64 mixer."""
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield (z ^ (z >> 31)) & _MASK64


def _shuffled_indices(n: int, seed: int) -> list[int]:
    order = list(range(n))
    stream = _splitmix64(seed)
    for i in range(n - 1, 0, -1):
        j = next(stream) % (i + 1)
        order[i], order[j] = order[j], order[i]
    return order


@dataclass(frozen=True)
class FoldPlan:
    """Partition of 0..n-1 into k folds, fully determined by (n, k, seed)."""

    k: int
    assignments: tuple[int, ...]
    seed: int

    @property
    def n(self) -> int:
        return len(self.assignments)

    def fold_indices(self, fold: int) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.assignments) if f == fold)


def make_folds(n: int, k, seed: int = 0) -> FoldPlan:
    """Deterministic pseudo-random fold plan; pass ``"loo"`` for leave-one-out."""
    if n < 2:
        raise DataError(f"need at least 2 samples to cross-validate, got {n}")
    if k == LOO:
        k = n
    if not isinstance(k, int) or isinstance(k, bool) or not (2 <= k <= n):
        raise InvalidK(k, n)
    order = _shuffled_indices(n, seed)
    assignments = [0] * n
    base, extra = divmod(n, k)
    pos = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        for idx in order[pos:pos + size]:
            assignments[idx] = fold
        pos += size
    return FoldPlan(k, tuple(assignments), seed)


# --- reports ---------------------------------------------------------------


@dataclass(frozen=True)
class CvResidual:
    sample_index: int
    true: float
    predicted: float
    residual: float


@dataclass(frozen=True)
class CvReport:
    """Cross-validation residuals plus the two summary measures.

    me = mean(true - predicted), rmse = sqrt(mean((true - predicted)^2)).
    """

    estimator_name: str
    residuals: tuple[CvResidual, ...]
    me: float
    rmse: float
    wall_clock: float
    n: int
    failed_folds: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n != len(self.residuals):
            raise DataError("n must equal the residual count")
        if self.n:
            r = np.array([x.residual for x in self.residuals])
            me = float(r.mean())
            rmse = float(math.sqrt(float((r * r).mean())))
            scale = max(abs(me), abs(rmse), 1.0)
            if abs(me - self.me) > 1e-12 * scale or abs(rmse - self.rmse) > 1e-12 * scale:
                raise DataError("me/rmse do not match the stored residuals")
            if self.rmse < abs(self.me) * (1.0 - 1e-12):
                raise DataError("rmse must be at least |me|")

    @property
    def partial(self) -> bool:
        return bool(self.failed_folds)

    @classmethod
    def from_residuals(cls, estimator_name: str, residuals, wall_clock: float,
                       failed_folds=()) -> "CvReport":
        residuals = tuple(sorted(residuals, key=lambda r: r.sample_index))
        r = np.array([x.residual for x in residuals]) if residuals else np.array([])
        me = float(r.mean()) if r.size else 0.0
        rmse = float(math.sqrt(float((r * r).mean()))) if r.size else 0.0
        return cls(estimator_name, residuals, me, rmse, wall_clock,
                   len(residuals), tuple(failed_folds))


class RefitPolicy(enum.Enum):
    FIXED_MODEL = "fixed"
    REFIT_PER_FOLD = "refit"


@dataclass(frozen=True)
class FitParams:
    """What a per-fold refit needs to rebuild the model from training data."""

    cutoff: float
    n_bins: int
    structure: Structure


def _refit(estimator, params: FitParams):
    if isinstance(estimator, OkEstimator):
        emp = empirical_variogram(estimator.samples, params.cutoff, params.n_bins)
        fit = fit_model(emp, params.structure)
        return OkEstimator(estimator.samples, fit.model, estimator.name)
    if isinstance(estimator, CkEstimator):
        # The coregionalization refit uses only the co-located training pairs.
        secondary_at = {(s.location.x, s.location.y): s
                        for s in estimator.secondary}
        pairs = [(p, secondary_at[(p.location.x, p.location.y)])
                 for p in estimator.primary
                 if (p.location.x, p.location.y) in secondary_at]
        if len(pairs) < 2:
            raise DataError("too few co-located training pairs to refit")
        from .data import MultivariateDataset  # local import to avoid cycle noise
        dataset = MultivariateDataset(tuple(p for p, _ in pairs),
                                      tuple(s for _, s in pairs),
                                      colocated=True)
        emp_p = empirical_variogram(dataset.primary, params.cutoff, params.n_bins)
        emp_s = empirical_variogram(dataset.secondary, params.cutoff, params.n_bins)
        emp_x = empirical_cross_variogram(dataset, params.cutoff, params.n_bins)
        lmc = fit_lmc(emp_p, emp_s, emp_x, params.structure).lmc
        return CkEstimator(estimator.primary, estimator.secondary, lmc,
                           estimator.name, estimator.drop_secondary)
    raise DataError(f"cannot refit estimator of type {type(estimator).__name__}")


def cross_validate(estimator, plan: FoldPlan,
                   refit_policy: RefitPolicy = RefitPolicy.FIXED_MODEL,
                   fit_params: FitParams | None = None) -> CvReport:
    """Predict every held-out primary sample from the remaining data.

    Folds that fail to solve are recorded on the report (``failed_folds``)
    and excluded; the report then covers only the predicted samples.
    """
    samples = estimator.primary_samples
    if plan.n != len(samples):
        raise DataError(
            f"fold plan covers {plan.n} samples but the estimator has {len(samples)}"
        )
    if refit_policy is RefitPolicy.REFIT_PER_FOLD and fit_params is None:
        raise DataError("refit-per-fold needs fit_params")

    residuals: list[CvResidual] = []
    failed: list[int] = []
    started = time.perf_counter()
    for fold in range(plan.k):
        held_out = plan.fold_indices(fold)
        if not held_out:
            continue
        training = estimator.excluding(held_out)
        try:
            if refit_policy is RefitPolicy.REFIT_PER_FOLD:
                training = _refit(training, fit_params)
            targets = locations_array([samples[i] for i in held_out])
            predictions = training.predict(targets)
        except NumericalError as exc:
            log.warning("fold %d failed to solve: %s", fold, exc)
            failed.append(fold)
            continue
        for i, result in zip(held_out, predictions):
            true = samples[i].value
            residuals.append(CvResidual(i, true, result.prediction,
                                        true - result.prediction))
    wall_clock = time.perf_counter() - started
    if failed:
        log.warning("%s cross-validation covered %d/%d samples (%d folds failed)",
                    estimator.name, len(residuals), plan.n, len(failed))
    return CvReport.from_residuals(estimator.name, residuals, wall_clock, failed)


# --- estimator comparison ----------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    estimator: str
    me: float
    rmse: float
    wall_clock: float
    n: int
    partial: bool


@dataclass(frozen=True)
class EstimatorComparison:
    """Comparison table over a common sample set, best RMSE first."""

    rows: tuple[ComparisonRow, ...]

    def to_text(self) -> str:
        header = f"{'':<20}{'Mean Error':>12}  {'RMSE':>8}  {'Running Time':>14}"
        lines = [header]
        for row in self.rows:
            note = " (partial)" if row.partial else ""
            lines.append(
                f"{row.estimator:<20}{row.me:>12.4f}  {row.rmse:>8.4f}  "
                f"{row.wall_clock:>11.2f} s{note}"
            )
        return "\n".join(lines)


def compare_estimators(reports) -> EstimatorComparison:
    """Sort cross-validation reports by RMSE ascending.

    All reports must cover the same sample set (same n and same sample
    indices); otherwise :class:`MismatchedSampleSets` is raised.
    """
    reports = list(reports)
    if not reports:
        raise DataError("need at least one report to compare")
    reference = reports[0]
    ref_ids = tuple(r.sample_index for r in reference.residuals)
    for other in reports[1:]:
        if other.n != reference.n:
            raise MismatchedSampleSets(
                f"{other.estimator_name} covers n={other.n} but "
                f"{reference.estimator_name} covers n={reference.n}"
            )
        if tuple(r.sample_index for r in other.residuals) != ref_ids:
            raise MismatchedSampleSets(
                f"{other.estimator_name} covers a different sample set than "
                f"{reference.estimator_name}"
            )
    rows = [ComparisonRow(r.estimator_name, r.me, r.rmse, r.wall_clock, r.n,
                          r.partial) for r in reports]
    rows.sort(key=lambda row: row.rmse)
    return EstimatorComparison(tuple(rows))
