"""Exception hierarchy.

Every error the package raises derives from :class:`WpimapError` and carries
an ``exit_code`` so the CLI can map failures onto its documented exit codes:
1 usage, 2 data error, 3 numerical error, 4 I/O error.
"""

from __future__ import annotations


class WpimapError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class UsageError(WpimapError):
    """Bad command line or configuration input."""

    exit_code = 1


class DataError(WpimapError):
    """Input data violates a contract (bad rows, duplicates, degenerate sets)."""

    exit_code = 2


class NumericalError(WpimapError):
    """A numerical procedure failed (singular system, infeasible fit, ...)."""

    exit_code = 3


class ArtifactIoError(WpimapError):
    """File system problem while reading inputs or writing artifacts."""

    exit_code = 4


# --- data errors -----------------------------------------------------------


class MissingColumn(DataError):
    def __init__(self, column: str):
        super().__init__(f"required column {column!r} not found in header")
        self.column = column


class ParseFailure(DataError):
    def __init__(self, row: int, column: str, message: str = "unparseable value"):
        super().__init__(f"row {row}, column {column!r}: {message}")
        self.row = row
        self.column = column


class DuplicateWellId(DataError):
    def __init__(self, well_id: str, row: int):
        super().__init__(f"duplicate well_id {well_id!r} at row {row}")
        self.well_id = well_id
        self.row = row


class DuplicateLocation(DataError):
    def __init__(self, message: str):
        super().__init__(message)


class NonPositiveValue(DataError):
    def __init__(self, location, value: float):
        super().__init__(
            f"sample at ({location.x}, {location.y}) has non-positive value "
            f"{value}; it cannot be log10 transformed"
        )
        self.location = location
        self.value = value


class AmbiguousMatch(DataError):
    def __init__(self, message: str):
        super().__init__(message)


class DegenerateVariance(DataError):
    def __init__(self, which: str):
        super().__init__(f"{which} variable is constant; correlation undefined")
        self.which = which


class NotColocated(DataError):
    def __init__(self, message: str = "dataset is not co-located"):
        super().__init__(message)


class EmptySeries(DataError):
    def __init__(self):
        super().__init__("daily series is empty")


class MissingField(DataError):
    def __init__(self, name: str, well_id: str | None = None):
        where = f" on well {well_id!r}" if well_id else ""
        super().__init__(f"field {name!r} missing or non-positive{where}")
        self.name = name


class NoEligibleWells(DataError):
    def __init__(self):
        super().__init__("no well is eligible for the performance index estimator")


class NoPairsWithinCutoff(DataError):
    def __init__(self, cutoff: float):
        super().__init__(f"no sample pair lies within cutoff {cutoff}")
        self.cutoff = cutoff


class TooFewBins(DataError):
    def __init__(self, n_bins: int, needed: int = 3):
        super().__init__(f"{n_bins} non-empty lag bins; at least {needed} required")
        self.n_bins = n_bins


class InvalidK(DataError):
    def __init__(self, k, n: int):
        super().__init__(f"invalid fold count {k!r} for n={n} (need 2 <= k <= n)")
        self.k = k
        self.n = n


class MismatchedSampleSets(DataError):
    def __init__(self, message: str):
        super().__init__(message)


class MalformedArtifact(DataError):
    def __init__(self, path, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# --- numerical errors ------------------------------------------------------


class SingularSystem(NumericalError):
    def __init__(self, rcond: float, message: str = "kriging system is singular"):
        super().__init__(f"{message} (reciprocal condition estimate {rcond:.3e})")
        self.rcond = rcond


class InvalidLmc(NumericalError):
    def __init__(self, message: str):
        super().__init__(message)


class InfeasibleFit(NumericalError):
    def __init__(self, message: str):
        super().__init__(message)


class NegativeVariance(NumericalError):
    def __init__(self, variance: float):
        super().__init__(
            f"kriging variance {variance:.3e} is below -1e-9; "
            "the system is numerically unreliable"
        )
        self.variance = variance


class NonPositiveDefiniteCovariance(NumericalError):
    def __init__(self, min_eigenvalue: float):
        super().__init__(
            f"joint covariance is not positive semi-definite "
            f"(minimum eigenvalue {min_eigenvalue:.3e})"
        )
        self.min_eigenvalue = min_eigenvalue


# --- I/O errors -------------------------------------------------------------


class MissingInput(ArtifactIoError):
    def __init__(self, path):
        super().__init__(f"input path does not exist: {path}")
        self.path = path


class IoFailure(ArtifactIoError):
    def __init__(self, message: str):
        super().__init__(message)
