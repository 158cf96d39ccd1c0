"""Well performance index (WPI).

The exact index sums daily rate x pressure over the first production days.
When only completion summaries are available the estimator form is used
instead: average 90-day rate x 90 x fracture gradient x true vertical depth,
i.e. the same sum under the assumption of constant pressure equal to the
fracture pressure. Units are a consistent composite (MCFE.psi); the index is
only used relatively, so no conversion constant is applied.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .data import Location, SpatialSample, WellRecord
from .errors import DataError, EmptySeries, MissingField, NoEligibleWells


class WpiMethod(enum.Enum):
    EXACT = "exact"
    ESTIMATED = "estimated"


@dataclass(frozen=True)
class WpiValue:
    well_id: str
    location: Location
    wpi: float
    method: WpiMethod


def compute_wpi_exact(daily_series) -> float:
    """Sum of daily rate x daily pressure over the given series (<= 90 days)."""
    series = list(daily_series)
    if not series:
        raise EmptySeries()
    if len(series) > 90:
        raise DataError(f"daily series has {len(series)} entries; at most 90 allowed")
    total = 0.0
    for rate, pressure in series:
        if rate < 0 or pressure < 0:
            raise DataError("daily series entries must be non-negative")
        total += rate * pressure
    return total


def compute_wpi_hat(record: WellRecord) -> WpiValue:
    """Estimator form: avg_rate_90d x 90 x frac_gradient x tvd.

    Raises :class:`MissingField` when any of the three factors is absent or
    non-positive (the estimator needs all of them strictly positive).
    """
    for name in ("avg_rate_90d", "frac_gradient", "tvd"):
        value = getattr(record, name)
        if value is None or value <= 0:
            raise MissingField(name, record.well_id)
    wpi = record.avg_rate_90d * 90.0 * record.frac_gradient * record.tvd
    return WpiValue(record.well_id, record.location, wpi, WpiMethod.ESTIMATED)


@dataclass(frozen=True)
class PrimaryBuild:
    """log10-index samples for eligible wells plus the ineligibility report."""

    samples: tuple[SpatialSample, ...]
    well_ids: tuple[str, ...]
    ineligible: tuple[tuple[str, str], ...]  # (well_id, reason)


def build_primary_samples(records) -> PrimaryBuild:
    """log10(estimated WPI) at each eligible well location.

    Ineligible wells are listed with the reason instead of being silently
    dropped; an empty eligible set raises :class:`NoEligibleWells`.
    """
    samples: list[SpatialSample] = []
    well_ids: list[str] = []
    ineligible: list[tuple[str, str]] = []
    for rec in records:
        reason = rec.ineligibility_reason()
        if reason is not None:
            ineligible.append((rec.well_id, reason))
            continue
        value = compute_wpi_hat(rec)
        samples.append(SpatialSample(rec.location, math.log10(value.wpi)))
        well_ids.append(rec.well_id)
    if not samples:
        raise NoEligibleWells()
    return PrimaryBuild(tuple(samples), tuple(well_ids), tuple(ineligible))
