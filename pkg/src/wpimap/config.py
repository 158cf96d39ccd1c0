"""Run configuration: flat key=value config files plus CLI overrides.

Config files are plain text, one ``key = value`` per line, ``#`` comments.
Recognized keys (all optional unless noted):

    input               path to the wells CSV (required for run/compare)
    out_dir             output directory (default ./wpimap_out)
    secondary           fluid | proppant | none (default none)
    structure           spherical | exponential | gaussian (default spherical)
    cutoff              variogram cutoff in meters (default: bbox diagonal / 3)
    n_bins              lag bin count (default 15)
    grid_nx, grid_ny    grid cell counts (default 100 x 100)
    grid_origin_x/_y    grid origin (default: sample bounding box corner)
    grid_dx, grid_dy    cell sizes in meters (default: bbox span / count)
    cv                  loo or k=<int> (default loo)
    seed                fold-plan seed (default 0)
    back_transform      true/false: add 10^prediction column (default false)
    colocate_tolerance  co-location tolerance in meters (default 0)
    top_n               ranked cells to report (default 10)
    refit_policy        fixed | refit (default fixed)
    col.<field>         CSV column name override, e.g. col.tvd = depth_ft

CLI flags override file values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .data import DEFAULT_SCHEMA
from .errors import UsageError
from .variogram import DEFAULT_N_BINS, Structure

SECONDARY_CHOICES = ("fluid", "proppant", "none")
_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


@dataclass(frozen=True)
class RunConfig:
    input: Path | None = None
    out_dir: Path = Path("wpimap_out")
    secondary: str = "none"
    structure: Structure = Structure.SPHERICAL
    cutoff: float | None = None
    n_bins: int = DEFAULT_N_BINS
    grid_nx: int = 100
    grid_ny: int = 100
    grid_origin_x: float | None = None
    grid_origin_y: float | None = None
    grid_dx: float | None = None
    grid_dy: float | None = None
    cv: str = "loo"  # "loo" or "k=<int>"
    seed: int = 0
    back_transform: bool = False
    colocate_tolerance: float = 0.0
    top_n: int = 10
    refit_policy: str = "fixed"
    columns: dict = field(default_factory=lambda: dict(DEFAULT_SCHEMA))

    def cv_k(self, n: int):
        """Parsed CV mode: "loo" or the integer fold count."""
        if self.cv == "loo":
            return "loo"
        return int(self.cv.split("=", 1)[1])

    def validate(self) -> "RunConfig":
        if self.secondary not in SECONDARY_CHOICES:
            raise UsageError(f"secondary must be one of {SECONDARY_CHOICES}")
        if self.cutoff is not None and self.cutoff <= 0:
            raise UsageError("cutoff must be positive")
        if self.n_bins < 1:
            raise UsageError("n_bins must be >= 1")
        if self.grid_nx < 1 or self.grid_ny < 1:
            raise UsageError("grid dimensions must be positive")
        for name in ("grid_dx", "grid_dy"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise UsageError(f"{name} must be positive")
        if self.colocate_tolerance < 0:
            raise UsageError("colocate_tolerance must be >= 0")
        if self.top_n < 1:
            raise UsageError("top_n must be >= 1")
        if self.refit_policy not in ("fixed", "refit"):
            raise UsageError("refit_policy must be fixed or refit")
        _parse_cv(self.cv)
        return self


def _parse_cv(text: str) -> str:
    text = text.strip().lower()
    if text == "loo":
        return text
    if text.startswith("k="):
        try:
            k = int(text[2:])
        except ValueError:
            raise UsageError(f"bad cv spec {text!r}; use loo or k=<int>") from None
        if k < 2:
            raise UsageError("cv fold count must be >= 2")
        return f"k={k}"
    raise UsageError(f"bad cv spec {text!r}; use loo or k=<int>")


_PARSERS = {
    "input": lambda v: Path(v),
    "out_dir": lambda v: Path(v),
    "secondary": str,
    "structure": Structure,
    "cutoff": float,
    "n_bins": int,
    "grid_nx": int,
    "grid_ny": int,
    "grid_origin_x": float,
    "grid_origin_y": float,
    "grid_dx": float,
    "grid_dy": float,
    "cv": _parse_cv,
    "seed": int,
    "back_transform": lambda v: _BOOL[v.lower()],
    "colocate_tolerance": float,
    "top_n": int,
    "refit_policy": str,
}


def load_config(path) -> RunConfig:
    """Parse a flat key=value config file into a RunConfig."""
    config = RunConfig()
    columns = dict(DEFAULT_SCHEMA)
    updates: dict = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for line_number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{line_number}: expected key = value")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key.startswith("col."):
            field_name = key[4:]
            if field_name not in DEFAULT_SCHEMA:
                raise UsageError(f"{path}:{line_number}: unknown field {field_name!r}")
            columns[field_name] = value
            continue
        if key not in _PARSERS:
            raise UsageError(f"{path}:{line_number}: unknown key {key!r}")
        try:
            updates[key] = _PARSERS[key](value)
        except UsageError:
            raise
        except (ValueError, KeyError):
            raise UsageError(
                f"{path}:{line_number}: bad value {value!r} for {key!r}"
            ) from None
    return replace(config, columns=columns, **updates)


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Apply non-None CLI override values on top of a config."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    if "cv" in updates:
        updates["cv"] = _parse_cv(updates["cv"])
    if "structure" in updates and not isinstance(updates["structure"], Structure):
        updates["structure"] = Structure(updates["structure"])
    for key in ("input", "out_dir"):
        if key in updates:
            updates[key] = Path(updates[key])
    return replace(config, **updates)
