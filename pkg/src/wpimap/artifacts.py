"""CSV/text artifact writers and the matching readers.

Every file the CLI writes can be read back by the functions here (the
round-trip is part of the test suite). Numeric fields use Python's shortest
round-trip float formatting, so outputs are byte-identical across runs and
parse back to exactly the same doubles.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .crossval import CvReport, CvResidual, EstimatorComparison
from .errors import MalformedArtifact
from .kriging import PredictionGrid
from .variogram import (
    EmpiricalVariogram,
    Structure,
    VariogramBin,
    VariogramKind,
    VariogramModel,
)


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _read_rows(path, expected_header) -> list[list[str]]:
    if not os.path.exists(path):
        raise MalformedArtifact(path, "file does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    if not rows:
        raise MalformedArtifact(path, "empty file")
    header = rows[0]
    missing = [c for c in expected_header if c not in header]
    if missing:
        raise MalformedArtifact(path, f"missing columns {missing}")
    return rows


def _columns(path, rows, names) -> dict[str, list[str]]:
    header = rows[0]
    idx = {name: header.index(name) for name in names}
    out: dict[str, list[str]] = {name: [] for name in names}
    for row_number, row in enumerate(rows[1:], start=2):
        for name in names:
            try:
                out[name].append(row[idx[name]])
            except IndexError:
                raise MalformedArtifact(path, f"short row {row_number}") from None
    return out


def _floats(path, column, raw) -> list[float]:
    values = []
    for item in raw:
        try:
            values.append(float(item))
        except ValueError:
            raise MalformedArtifact(path, f"bad number {item!r} in {column}") from None
    return values


# --- samples ------------------------------------------------------------------


def write_samples_csv(path, well_ids, samples) -> None:
    _write_rows(path, ["well_id", "x", "y", "value"],
                [(wid, s.location.x, s.location.y, s.value)
                 for wid, s in zip(well_ids, samples)])


def read_samples_csv(path) -> list[tuple[str, float, float, float]]:
    rows = _read_rows(path, ["well_id", "x", "y", "value"])
    cols = _columns(path, rows, ["well_id", "x", "y", "value"])
    xs = _floats(path, "x", cols["x"])
    ys = _floats(path, "y", cols["y"])
    vs = _floats(path, "value", cols["value"])
    return list(zip(cols["well_id"], xs, ys, vs))


def write_ineligible_csv(path, ineligible) -> None:
    _write_rows(path, ["well_id", "reason"], list(ineligible))


# --- variogram bins -------------------------------------------------------------


def write_variogram_csv(path, emp: EmpiricalVariogram) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# kind={emp.kind.value} cutoff={emp.cutoff} "
                 f"bin_width={emp.bin_width}\n")
        writer = csv.writer(fh)
        writer.writerow(["lag", "gamma", "pair_count"])
        for b in emp.bins:
            writer.writerow([b.lag, b.gamma, b.pair_count])


def read_variogram_csv(path) -> EmpiricalVariogram:
    if not os.path.exists(path):
        raise MalformedArtifact(path, "file does not exist")
    meta = {"kind": "direct", "cutoff": None, "bin_width": None}
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if first.startswith("#"):
            for token in first[1:].split():
                if "=" in token:
                    key, value = token.split("=", 1)
                    if key in meta:
                        meta[key] = value
        else:
            fh.seek(0)
        rows = [row for row in csv.reader(fh) if row]
    if not rows or rows[0][:3] != ["lag", "gamma", "pair_count"]:
        raise MalformedArtifact(path, "expected columns lag,gamma,pair_count")
    if len(rows) < 2:
        raise MalformedArtifact(path, "no variogram bins")
    bins = []
    for row_number, row in enumerate(rows[1:], start=2):
        try:
            bins.append(VariogramBin(float(row[0]), float(row[1]), int(row[2])))
        except (ValueError, IndexError):
            raise MalformedArtifact(path, f"bad bin row {row_number}") from None
    kind = VariogramKind(meta["kind"])
    cutoff = float(meta["cutoff"]) if meta["cutoff"] else bins[-1].lag * 2.0
    if meta["bin_width"]:
        width = float(meta["bin_width"])
    elif len(bins) > 1:
        width = bins[1].lag - bins[0].lag
    else:
        width = cutoff
    return EmpiricalVariogram(tuple(bins), cutoff, width, kind)


# --- model parameters ------------------------------------------------------------


def write_model_txt(path, entries: dict) -> None:
    """Flat ``key = value`` text file (stable key order as given)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")


def read_model_txt(path) -> dict[str, str]:
    if not os.path.exists(path):
        raise MalformedArtifact(path, "file does not exist")
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise MalformedArtifact(path, f"line {line_number} is not key = value")
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
    return entries


def model_entries(fit, prefix: str = "") -> dict:
    """Serializable parameters of a VariogramFit."""
    m = fit.model
    return {
        f"{prefix}structure": m.structure.value,
        f"{prefix}nugget": repr(m.nugget),
        f"{prefix}partial_sill": repr(m.partial_sill),
        f"{prefix}range_m": repr(m.range_m),
        f"{prefix}objective": repr(fit.objective),
        f"{prefix}converged": str(fit.converged).lower(),
        f"{prefix}degenerate_range": str(fit.degenerate_range).lower(),
    }


def parse_model(entries: dict[str, str], prefix: str = "") -> VariogramModel:
    try:
        return VariogramModel(
            Structure(entries[f"{prefix}structure"]),
            float(entries[f"{prefix}nugget"]),
            float(entries[f"{prefix}partial_sill"]),
            float(entries[f"{prefix}range_m"]),
        )
    except KeyError as exc:
        raise MalformedArtifact("<model>", f"missing model key {exc}") from None


# --- grids ------------------------------------------------------------------------


def write_grid_csv(path, grid: PredictionGrid, back_transform: bool = False) -> None:
    header = ["x", "y", "prediction", "variance", "flag"]
    if back_transform:
        header.insert(3, "prediction_back")
    rows = []
    for cell in grid.cells:
        row = [cell.location.x, cell.location.y, cell.prediction]
        if back_transform:
            row.append(10.0 ** cell.prediction if np.isfinite(cell.prediction)
                       else float("nan"))
        row.extend([cell.variance, cell.flag or ""])
        rows.append(row)
    _write_rows(path, header, rows)


def write_variance_csv(path, grid: PredictionGrid) -> None:
    rows = [(cell.location.x, cell.location.y, cell.variance, cell.flag or "")
            for cell in grid.cells]
    _write_rows(path, ["x", "y", "variance", "flag"], rows)


def read_grid_csv(path, value_column: str = "prediction"):
    """(xs, ys, values, flags) from a grid artifact; NaN where unparseable."""
    rows = _read_rows(path, ["x", "y", value_column])
    has_flag = "flag" in rows[0]
    names = ["x", "y", value_column] + (["flag"] if has_flag else [])
    cols = _columns(path, rows, names)
    xs = _floats(path, "x", cols["x"])
    ys = _floats(path, "y", cols["y"])
    values = []
    for raw in cols[value_column]:
        try:
            values.append(float(raw))
        except ValueError:
            values.append(float("nan"))
    flags = cols["flag"] if has_flag else [""] * len(xs)
    return xs, ys, values, flags


def grid_values_to_array(xs, ys, values) -> tuple[np.ndarray, float, float, float, float]:
    """Rebuild the (ny, nx) array plus origin/cell size from grid cell rows."""
    ux = np.unique(np.asarray(xs))
    uy = np.unique(np.asarray(ys))
    nx, ny = len(ux), len(uy)
    if nx * ny != len(values):
        raise MalformedArtifact("<grid>", "rows do not form a full grid")
    arr = np.full((ny, nx), np.nan)
    x_index = {v: i for i, v in enumerate(ux)}
    y_index = {v: i for i, v in enumerate(uy)}
    for x, y, v in zip(xs, ys, values):
        arr[y_index[y], x_index[x]] = v
    dx = float(ux[1] - ux[0]) if nx > 1 else 1.0
    dy = float(uy[1] - uy[0]) if ny > 1 else 1.0
    return arr, float(ux[0] - dx / 2), float(uy[0] - dy / 2), dx, dy


def write_top_cells_csv(path, grid: PredictionGrid, top_n: int) -> None:
    """The ``top_n`` grid cells by predicted value, with their variances."""
    finite = [c for c in grid.cells if np.isfinite(c.prediction)]
    finite.sort(key=lambda c: (-c.prediction, c.location.x, c.location.y))
    rows = [(rank + 1, c.location.x, c.location.y, c.prediction, c.variance)
            for rank, c in enumerate(finite[:top_n])]
    _write_rows(path, ["rank", "x", "y", "prediction", "variance"], rows)


# --- cross-validation --------------------------------------------------------------


def write_cv_report_csv(path, reports, samples) -> None:
    """Residual rows for one or more reports over the same sample list."""
    rows = []
    for report in reports:
        for r in report.residuals:
            s = samples[r.sample_index]
            rows.append((report.estimator_name, r.sample_index,
                         s.location.x, s.location.y, r.true, r.predicted,
                         r.residual))
    _write_rows(path, ["estimator", "sample_index", "x", "y", "true",
                       "predicted", "residual"], rows)


def read_cv_report_csv(path) -> dict[str, list[CvResidual]]:
    rows = _read_rows(path, ["estimator", "sample_index", "true", "predicted",
                             "residual"])
    cols = _columns(path, rows, ["estimator", "sample_index", "true",
                                 "predicted", "residual"])
    out: dict[str, list[CvResidual]] = {}
    for name, idx, true, pred, res in zip(
            cols["estimator"], cols["sample_index"], cols["true"],
            cols["predicted"], cols["residual"]):
        try:
            residual = CvResidual(int(idx), float(true), float(pred), float(res))
        except ValueError:
            raise MalformedArtifact(path, "bad residual row") from None
        out.setdefault(name, []).append(residual)
    return out


def write_comparison_csv(path, comparison: EstimatorComparison) -> None:
    """Deterministic comparison table (timing stays in the text summary)."""
    rows = [(row.estimator, row.n, repr(row.me), repr(row.rmse))
            for row in comparison.rows]
    _write_rows(path, ["estimator", "n", "mean_error", "rmse"], rows)


def write_comparison_txt(path, comparison: EstimatorComparison) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(comparison.to_text() + "\n")


def read_comparison_csv(path) -> list[tuple[str, int, float, float]]:
    rows = _read_rows(path, ["estimator", "n", "mean_error", "rmse"])
    cols = _columns(path, rows, ["estimator", "n", "mean_error", "rmse"])
    return [(name, int(n), float(me), float(rmse))
            for name, n, me, rmse in zip(cols["estimator"], cols["n"],
                                         cols["mean_error"], cols["rmse"])]
