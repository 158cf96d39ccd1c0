"""Core spatial types, CSV ingestion and deterministic preprocessing.

A well completion table is ingested into :class:`WellRecord` rows, turned
into log10-scale :class:`SpatialSample` sets, and co-registered into a
:class:`MultivariateDataset` (primary + secondary variable at shared
locations) ready for variogram modeling and kriging.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousMatch,
    DataError,
    DegenerateVariance,
    DuplicateLocation,
    DuplicateWellId,
    MissingColumn,
    MissingInput,
    NonPositiveValue,
    NotColocated,
    ParseFailure,
)

log = logging.getLogger(__name__)

# Default CSV column names, remappable via the ``schema`` argument
# (field name -> column name in the file).
CSV_FIELDS = (
    "well_id",
    "x",
    "y",
    "avg_rate_90d",
    "frac_gradient",
    "tvd",
    "fluid_volume",
    "proppant_volume",
)
DEFAULT_SCHEMA = {name: name for name in CSV_FIELDS}


@dataclass(frozen=True)
class Location:
    """Planar position, easting/northing in meters. Equality is exact."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DataError(f"non-finite coordinates ({self.x}, {self.y})")

    def distance_to(self, other: "Location") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class SpatialSample:
    """One value observed at one location (values are log10 scale downstream)."""

    location: Location
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DataError(
                f"non-finite sample value at ({self.location.x}, {self.location.y})"
            )


@dataclass(frozen=True)
class WellRecord:
    """One well: location, completion attributes and production summary.

    ``avg_rate_90d`` (MCFE/day), ``frac_gradient`` (psi/ft) and ``tvd`` (ft)
    may be absent; a well is eligible for the performance-index estimator only
    when all three are present and positive. ``daily_series`` holds optional
    (rate, pressure) pairs for the first production days (at most 90).
    """

    well_id: str
    location: Location
    avg_rate_90d: float | None = None
    frac_gradient: float | None = None
    tvd: float | None = None
    fluid_volume: float | None = None
    proppant_volume: float | None = None
    daily_series: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if not self.well_id:
            raise DataError("well_id must be a non-empty string")
        _check_range(self.avg_rate_90d, "avg_rate_90d", minimum=0.0, strict=False)
        _check_range(self.frac_gradient, "frac_gradient", minimum=0.0, strict=True)
        _check_range(self.tvd, "tvd", minimum=0.0, strict=True)
        _check_range(self.fluid_volume, "fluid_volume", minimum=0.0, strict=True)
        _check_range(self.proppant_volume, "proppant_volume", minimum=0.0, strict=True)
        if self.daily_series is not None:
            if len(self.daily_series) > 90:
                raise DataError(
                    f"daily_series on well {self.well_id!r} has "
                    f"{len(self.daily_series)} entries; at most 90 allowed"
                )
            for rate, pressure in self.daily_series:
                if rate < 0 or pressure < 0:
                    raise DataError(
                        f"negative daily entry on well {self.well_id!r}"
                    )

    def ineligibility_reason(self) -> str | None:
        """Why this well cannot enter the estimator path, or None if it can."""
        for name in ("avg_rate_90d", "frac_gradient", "tvd"):
            value = getattr(self, name)
            if value is None:
                return f"missing {name}"
            if value <= 0:
                return f"non-positive {name}"
        return None


def _check_range(value, name, *, minimum, strict):
    if value is None:
        return
    if not math.isfinite(value):
        raise DataError(f"{name} is not finite")
    if (value <= minimum) if strict else (value < minimum):
        op = ">" if strict else ">="
        raise DataError(f"{name}={value} must be {op} {minimum}")


@dataclass(frozen=True)
class MultivariateDataset:
    """Co-registered samples of a primary and a secondary variable.

    ``colocated=True`` asserts the two lists are the same length with
    pairwise identical locations, which the co-kriging fitting path requires.
    """

    primary: tuple[SpatialSample, ...]
    secondary: tuple[SpatialSample, ...]
    secondary_name: str = "secondary"
    colocated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "primary", tuple(self.primary))
        object.__setattr__(self, "secondary", tuple(self.secondary))
        seen: set[tuple[float, float]] = set()
        for s in self.primary:
            key = (s.location.x, s.location.y)
            if key in seen:
                raise DuplicateLocation(
                    f"two primary samples share the location {key}"
                )
            seen.add(key)
        if self.colocated:
            if len(self.primary) != len(self.secondary):
                raise DataError(
                    "colocated dataset must have equal primary/secondary counts "
                    f"({len(self.primary)} vs {len(self.secondary)})"
                )
            for p, s in zip(self.primary, self.secondary):
                if p.location != s.location:
                    raise DataError(
                        "colocated dataset has a location mismatch at "
                        f"({p.location.x}, {p.location.y})"
                    )

    @property
    def n(self) -> int:
        return len(self.primary)

    def primary_values(self) -> np.ndarray:
        return np.array([s.value for s in self.primary])

    def secondary_values(self) -> np.ndarray:
        return np.array([s.value for s in self.secondary])

    def primary_locations(self) -> np.ndarray:
        return locations_array(self.primary)

    def secondary_locations(self) -> np.ndarray:
        return locations_array(self.secondary)


def locations_array(samples) -> np.ndarray:
    """(n, 2) array of sample coordinates."""
    return np.array([(s.location.x, s.location.y) for s in samples]).reshape(-1, 2)


def values_array(samples) -> np.ndarray:
    return np.array([s.value for s in samples])


# --- ingestion ---------------------------------------------------------------


@dataclass(frozen=True)
class IngestIssue:
    """A reported problem for one row; fatal issues mean the row was skipped."""

    row: int
    column: str | None
    message: str
    fatal: bool


@dataclass
class IngestResult:
    records: list[WellRecord]
    issues: list[IngestIssue] = field(default_factory=list)

    @property
    def warnings(self) -> list[IngestIssue]:
        return [i for i in self.issues if not i.fatal]

    @property
    def skipped(self) -> list[IngestIssue]:
        return [i for i in self.issues if i.fatal]


_REQUIRED = ("well_id", "x", "y")
_NUMERIC = ("x", "y", "avg_rate_90d", "frac_gradient", "tvd",
            "fluid_volume", "proppant_volume")


def ingest_csv(path, schema: dict[str, str] | None = None) -> IngestResult:
    """Read a well completion CSV into records.

    ``schema`` maps record fields to column names (defaults to the field
    names themselves). Rows missing ``well_id``/``x``/``y`` are skipped and
    reported; empty optional numeric cells yield ``None`` with a logged
    warning; non-empty unparseable or out-of-range cells raise
    :class:`ParseFailure`. Duplicate well ids and duplicate locations are
    hard errors (a duplicated location would make the kriging matrix
    singular).
    """
    schema = dict(DEFAULT_SCHEMA if schema is None else schema)
    for name in _REQUIRED:
        if name not in schema:
            raise MissingColumn(name)
    if not os.path.exists(path):
        raise MissingInput(path)

    records: list[WellRecord] = []
    issues: list[IngestIssue] = []
    seen_ids: dict[str, int] = {}
    seen_locations: dict[tuple[float, float], str] = {}

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in schema.values():
            if column not in header:
                raise MissingColumn(column)

        for row_number, row in enumerate(reader, start=2):
            parsed: dict[str, float | None] = {}
            skip_reason = None
            well_id = (row.get(schema["well_id"]) or "").strip()
            if not well_id:
                skip_reason = IngestIssue(row_number, schema["well_id"],
                                          "missing well_id", fatal=True)
            for name in _NUMERIC:
                if name not in schema:
                    parsed[name] = None
                    continue
                column = schema[name]
                raw = (row.get(column) or "").strip()
                if raw == "":
                    parsed[name] = None
                    if name in ("x", "y") and skip_reason is None:
                        skip_reason = IngestIssue(row_number, column,
                                                  f"missing {name}", fatal=True)
                    continue
                try:
                    parsed[name] = float(raw)
                except ValueError:
                    raise ParseFailure(row_number, column) from None

            if skip_reason is not None:
                issues.append(skip_reason)
                log.warning("row %d skipped: %s", row_number, skip_reason.message)
                continue

            if well_id in seen_ids:
                raise DuplicateWellId(well_id, row_number)
            seen_ids[well_id] = row_number
            key = (parsed["x"], parsed["y"])
            if key in seen_locations:
                raise DuplicateLocation(
                    f"row {row_number}: well {well_id!r} duplicates the location "
                    f"{key} of well {seen_locations[key]!r}"
                )
            seen_locations[key] = well_id

            for name in ("avg_rate_90d", "frac_gradient", "tvd",
                         "fluid_volume", "proppant_volume"):
                if name in schema and parsed.get(name) is None:
                    issues.append(IngestIssue(row_number, schema[name],
                                              f"empty {name}", fatal=False))
                    log.warning("row %d: empty %s", row_number, name)
            try:
                record = WellRecord(
                    well_id=well_id,
                    location=Location(parsed["x"], parsed["y"]),
                    avg_rate_90d=parsed["avg_rate_90d"],
                    frac_gradient=parsed["frac_gradient"],
                    tvd=parsed["tvd"],
                    fluid_volume=parsed["fluid_volume"],
                    proppant_volume=parsed["proppant_volume"],
                )
            except DataError as exc:
                raise ParseFailure(row_number, "<record>", str(exc)) from None
            records.append(record)

    return IngestResult(records, issues)


def write_wells_csv(records, path, schema: dict[str, str] | None = None) -> None:
    """Serialize records back to the ingestion schema (shortest round-trip floats)."""
    schema = dict(DEFAULT_SCHEMA if schema is None else schema)
    columns = [schema[name] for name in CSV_FIELDS if name in schema]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in records:
            values = {
                "well_id": rec.well_id,
                "x": rec.location.x,
                "y": rec.location.y,
                "avg_rate_90d": rec.avg_rate_90d,
                "frac_gradient": rec.frac_gradient,
                "tvd": rec.tvd,
                "fluid_volume": rec.fluid_volume,
                "proppant_volume": rec.proppant_volume,
            }
            writer.writerow(
                ["" if values[name] is None else str(values[name])
                 for name in CSV_FIELDS if name in schema]
            )


# --- preprocessing -----------------------------------------------------------


def log10_transform(samples) -> list[SpatialSample]:
    """Replace every value by its base-10 logarithm; locations unchanged."""
    out = []
    for s in samples:
        if s.value <= 0:
            raise NonPositiveValue(s.location, s.value)
        out.append(SpatialSample(s.location, math.log10(s.value)))
    return out


@dataclass(frozen=True)
class ColocateResult:
    dataset: MultivariateDataset
    dropped_primary: int
    dropped_secondary: int


def colocate(primary, secondary, tolerance: float = 0.0,
             secondary_name: str = "secondary") -> ColocateResult:
    """Pair each primary sample with the secondary sample at (or within
    ``tolerance`` meters of) its location.

    Primaries with no match are dropped, as are unmatched secondaries; both
    counts are reported on the result. More than one secondary within
    tolerance of one primary raises :class:`AmbiguousMatch`. Matched
    secondary samples are carried at the primary location so the co-located
    invariant (pairwise identical locations) is exact even for tolerance > 0.
    """
    if tolerance < 0:
        raise DataError(f"tolerance must be >= 0, got {tolerance}")
    primary = list(primary)
    secondary = list(secondary)
    kept_primary: list[SpatialSample] = []
    kept_secondary: list[SpatialSample] = []
    used: set[int] = set()
    if primary and secondary:
        p_xy = locations_array(primary)
        s_xy = locations_array(secondary)
        d = np.hypot(p_xy[:, None, 0] - s_xy[None, :, 0],
                     p_xy[:, None, 1] - s_xy[None, :, 1])
        for i, p in enumerate(primary):
            matches = np.flatnonzero(d[i] <= tolerance)
            if matches.size > 1:
                raise AmbiguousMatch(
                    f"{matches.size} secondary samples lie within {tolerance} m "
                    f"of primary location ({p.location.x}, {p.location.y})"
                )
            if matches.size == 1:
                j = int(matches[0])
                kept_primary.append(p)
                kept_secondary.append(SpatialSample(p.location, secondary[j].value))
                used.add(j)

    dropped_primary = len(primary) - len(kept_primary)
    dropped_secondary = len(secondary) - len(used)
    if dropped_primary or dropped_secondary:
        log.info("colocate dropped %d primary and %d secondary samples",
                 dropped_primary, dropped_secondary)
    dataset = MultivariateDataset(
        tuple(kept_primary), tuple(kept_secondary),
        secondary_name=secondary_name, colocated=True,
    )
    return ColocateResult(dataset, dropped_primary, dropped_secondary)


def pearson_correlation(dataset: MultivariateDataset) -> float:
    """Sample Pearson correlation of the paired primary/secondary values."""
    if not dataset.colocated:
        raise NotColocated()
    if dataset.n < 2:
        raise DataError(f"need at least 2 pairs, got {dataset.n}")
    u = dataset.primary_values()
    v = dataset.secondary_values()
    du = u - u.mean()
    dv = v - v.mean()
    su = float(np.dot(du, du))
    sv = float(np.dot(dv, dv))
    if su == 0.0:
        raise DegenerateVariance("primary")
    if sv == 0.0:
        raise DegenerateVariance("secondary")
    return float(np.dot(du, dv) / math.sqrt(su * sv))
