"""End-to-end pipeline: ingest -> index -> variograms -> kriging -> CV -> artifacts.

Everything is computed before any file is written, so a failing run leaves
no partial artifact set. With a secondary variable selected the modeling
set is the co-located subset (primary modeling, coregionalization fit,
kriging and cross-validation all use it); samples.csv always carries every
eligible primary sample. Predictions stay on the log10 scale; the optional
back-transform adds a 10^prediction column to the grid artifact (note that
naive back-transform of kriged log values is biased low for the mean).
"""

from __future__ import annotations

import logging
from pathlib import Path

from . import artifacts, svg
from .config import RunConfig
from .crossval import (
    FitParams,
    RefitPolicy,
    compare_estimators,
    cross_validate,
    make_folds,
)
from .data import colocate, ingest_csv, log10_transform, pearson_correlation
from .data import SpatialSample
from .errors import DataError, UsageError
from .kriging import CkEstimator, GridSpec, OkEstimator, predict_grid
from .synth import make_bundled_dataset
from .variogram import (
    VariogramModel,
    default_cutoff,
    empirical_cross_variogram,
    empirical_variogram,
    fit_lmc,
    fit_model,
    range_diagnostic,
)
from .wpi import build_primary_samples

log = logging.getLogger(__name__)

ESTIMATOR_SPECS = ("ok", "ck-fluid", "ck-proppant")


def _secondary_samples(records, column: str):
    """log10 samples of one completion volume for every well carrying it."""
    raw = [SpatialSample(rec.location, getattr(rec, column))
           for rec in records if getattr(rec, column) is not None]
    return log10_transform(raw)


def _grid_spec(config: RunConfig, samples) -> GridSpec:
    base = GridSpec.from_bounding_box(samples, config.grid_nx, config.grid_ny)
    return GridSpec(
        config.grid_origin_x if config.grid_origin_x is not None else base.origin_x,
        config.grid_origin_y if config.grid_origin_y is not None else base.origin_y,
        config.grid_nx,
        config.grid_ny,
        config.grid_dx if config.grid_dx is not None else base.dx,
        config.grid_dy if config.grid_dy is not None else base.dy,
    )


def _model_curve(model: VariogramModel, cutoff: float, n: int = 200):
    hs = [cutoff * (i + 1) / n for i in range(n)]
    return [(h, float(model.gamma(h))) for h in hs]


class _RunState:
    """Everything a run computes before writing artifacts."""

    def __init__(self):
        self.build = None
        self.estimator = None
        self.effective_primary = None
        self.cutoff = None
        self.emp_primary = None
        self.primary_fit = None
        self.dataset = None
        self.emp_secondary = None
        self.emp_cross = None
        self.lmc_fit = None
        self.correlation = None
        self.diagnostic = None
        self.grid = None
        self.report = None
        self.comparison = None
        self.fit_params = None


def _prepare(config: RunConfig) -> _RunState:
    state = _RunState()
    result = ingest_csv(config.input, config.columns)
    state.build = build_primary_samples(result.records)
    primary = list(state.build.samples)

    if config.secondary == "none":
        state.effective_primary = primary
        state.cutoff = config.cutoff or default_cutoff(primary)
        state.emp_primary = empirical_variogram(primary, state.cutoff,
                                                config.n_bins)
        state.primary_fit = fit_model(state.emp_primary, config.structure)
        state.estimator = OkEstimator(tuple(primary), state.primary_fit.model)
    else:
        column = ("fluid_volume" if config.secondary == "fluid"
                  else "proppant_volume")
        full_secondary = _secondary_samples(result.records, column)
        if len(full_secondary) < 2:
            raise DataError(
                f"fewer than 2 wells carry {column}; cannot co-krige"
            )
        located = colocate(primary, full_secondary, config.colocate_tolerance,
                           secondary_name=config.secondary)
        state.dataset = located.dataset
        if state.dataset.n < 3:
            raise DataError("fewer than 3 co-located pairs; cannot co-krige")
        state.effective_primary = list(state.dataset.primary)
        state.correlation = pearson_correlation(state.dataset)
        state.cutoff = config.cutoff or default_cutoff(state.effective_primary)
        state.emp_primary = empirical_variogram(state.dataset.primary,
                                                state.cutoff, config.n_bins)
        state.emp_secondary = empirical_variogram(state.dataset.secondary,
                                                  state.cutoff, config.n_bins)
        state.emp_cross = empirical_cross_variogram(state.dataset, state.cutoff,
                                                    config.n_bins)
        state.lmc_fit = fit_lmc(state.emp_primary, state.emp_secondary,
                                state.emp_cross, config.structure)
        state.primary_fit = state.lmc_fit.primary_fit
        state.diagnostic = range_diagnostic(full_secondary,
                                            state.dataset.secondary,
                                            state.cutoff, config.n_bins,
                                            config.structure)
        state.estimator = CkEstimator.from_dataset(
            state.dataset, state.lmc_fit.lmc, f"CK-{config.secondary}"
        )
    state.fit_params = FitParams(state.cutoff, config.n_bins, config.structure)
    return state


def run_command(config: RunConfig) -> Path:
    """Full pipeline for one estimator; writes the artifact set and returns
    the output directory."""
    config = config.validate()
    if config.input is None:
        raise UsageError("an input CSV is required (flag --input or config key)")
    state = _prepare(config)

    grid_spec = _grid_spec(config, state.effective_primary)
    state.grid = predict_grid(state.estimator, grid_spec)

    plan = make_folds(len(state.effective_primary),
                      config.cv_k(len(state.effective_primary)), config.seed)
    policy = (RefitPolicy.REFIT_PER_FOLD if config.refit_policy == "refit"
              else RefitPolicy.FIXED_MODEL)
    state.report = cross_validate(state.estimator, plan, policy,
                                  state.fit_params)
    state.comparison = compare_estimators([state.report])

    _write_run_artifacts(config, state)
    return config.out_dir


def _model_txt_entries(config: RunConfig, state: _RunState) -> dict:
    entries = artifacts.model_entries(state.primary_fit)
    entries["cutoff"] = repr(state.cutoff)
    entries["n_bins"] = str(config.n_bins)
    if state.lmc_fit is not None:
        lmc = state.lmc_fit.lmc
        entries.update({
            "lmc_range_m": repr(lmc.range_m),
            "lmc_structure": lmc.structure.value,
            "lmc_nugget_11": repr(float(lmc.nugget_matrix[0, 0])),
            "lmc_nugget_12": repr(float(lmc.nugget_matrix[0, 1])),
            "lmc_nugget_22": repr(float(lmc.nugget_matrix[1, 1])),
            "lmc_sill_11": repr(float(lmc.sill_matrix[0, 0])),
            "lmc_sill_12": repr(float(lmc.sill_matrix[0, 1])),
            "lmc_sill_22": repr(float(lmc.sill_matrix[1, 1])),
            "lmc_objective_secondary": repr(state.lmc_fit.objectives[1]),
            "lmc_objective_cross": repr(state.lmc_fit.objectives[2]),
            "lmc_projected": str(state.lmc_fit.projected).lower(),
            "pearson_correlation": repr(state.correlation),
            "secondary_range_full": repr(state.diagnostic.range_full),
            "secondary_range_colocated": repr(state.diagnostic.range_colocated),
        })
    return entries


def _write_run_artifacts(config: RunConfig, state: _RunState) -> None:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    artifacts.write_samples_csv(out / "samples.csv", state.build.well_ids,
                                state.build.samples)
    artifacts.write_ineligible_csv(out / "ineligible_wells.csv",
                                   state.build.ineligible)
    artifacts.write_variogram_csv(out / "variogram_primary.csv",
                                  state.emp_primary)
    artifacts.write_model_txt(out / "model.txt",
                              _model_txt_entries(config, state))
    artifacts.write_grid_csv(out / "grid_prediction.csv", state.grid,
                             back_transform=config.back_transform)
    artifacts.write_variance_csv(out / "grid_variance.csv", state.grid)
    artifacts.write_top_cells_csv(out / "top_cells.csv", state.grid,
                                  config.top_n)
    artifacts.write_cv_report_csv(out / "cv_report.csv", [state.report],
                                  state.effective_primary)
    artifacts.write_comparison_csv(out / "comparison.csv", state.comparison)
    artifacts.write_comparison_txt(out / "comparison.txt", state.comparison)

    direct_primary_model = (state.lmc_fit.lmc.direct_model(0)
                            if state.lmc_fit else state.primary_fit.model)
    svg.render_variogram_svg(
        [(b.lag, b.gamma, b.pair_count) for b in state.emp_primary.bins],
        _model_curve(direct_primary_model, state.cutoff),
        title="Primary variogram",
        path=out / "variogram_primary.svg",
    )
    svg.render_bubble_svg(
        [(s.location.x, s.location.y, s.value) for s in state.build.samples],
        title="log10 well performance index",
        path=out / "bubble_map.svg",
    )
    svg.render_heatmap_svg(state.grid.prediction_array(),
                           state.grid.spec.origin_x, state.grid.spec.origin_y,
                           state.grid.spec.dx, state.grid.spec.dy,
                           title=f"Prediction map ({state.estimator.name})",
                           path=out / "prediction_map.svg")
    svg.render_heatmap_svg(state.grid.variance_array(),
                           state.grid.spec.origin_x, state.grid.spec.origin_y,
                           state.grid.spec.dx, state.grid.spec.dy,
                           title="Kriging variance",
                           path=out / "variance_map.svg")

    if state.lmc_fit is not None:
        lmc = state.lmc_fit.lmc
        artifacts.write_variogram_csv(out / "variogram_secondary.csv",
                                      state.emp_secondary)
        artifacts.write_variogram_csv(out / "variogram_cross.csv",
                                      state.emp_cross)
        svg.render_variogram_svg(
            [(b.lag, b.gamma, b.pair_count) for b in state.emp_secondary.bins],
            _model_curve(lmc.direct_model(1), state.cutoff),
            title="Secondary variogram",
            path=out / "variogram_secondary.svg",
        )
        cross_model_curve = [
            (h, float(lmc.gamma(h, 0, 1))) for h, _ in _model_curve(
                lmc.direct_model(0), state.cutoff)
        ]
        svg.render_variogram_svg(
            [(b.lag, b.gamma, b.pair_count) for b in state.emp_cross.bins],
            cross_model_curve,
            title="Cross variogram",
            path=out / "variogram_cross.svg",
        )


# --- compare ------------------------------------------------------------------


def _needed_columns(specs) -> list[str]:
    columns = []
    for spec in specs:
        if spec == "ck-fluid":
            columns.append("fluid_volume")
        elif spec == "ck-proppant":
            columns.append("proppant_volume")
    return columns


def compare_command(config: RunConfig, specs) -> Path:
    """Cross-validate several estimators over a common sample set and write
    the ranked comparison."""
    config = config.validate()
    if config.input is None:
        raise UsageError("an input CSV is required (flag --input or config key)")
    specs = list(specs)
    if len(specs) < 2:
        raise UsageError("compare needs at least two estimators")
    for spec in specs:
        if spec not in ESTIMATOR_SPECS:
            raise UsageError(
                f"unknown estimator {spec!r}; choose from {ESTIMATOR_SPECS}"
            )

    result = ingest_csv(config.input, config.columns)
    needed = _needed_columns(specs)
    usable = [rec for rec in result.records
              if rec.ineligibility_reason() is None
              and all(getattr(rec, col) is not None for col in needed)]
    if len(usable) < len(result.records):
        log.info("compare restricted to %d/%d wells usable by every estimator",
                 len(usable), len(result.records))
    build = build_primary_samples(usable)
    primary = list(build.samples)
    if len(primary) < 3:
        raise DataError("fewer than 3 wells usable by every estimator")
    cutoff = config.cutoff or default_cutoff(primary)
    plan = make_folds(len(primary), config.cv_k(len(primary)), config.seed)
    policy = (RefitPolicy.REFIT_PER_FOLD if config.refit_policy == "refit"
              else RefitPolicy.FIXED_MODEL)
    fit_params = FitParams(cutoff, config.n_bins, config.structure)

    reports = []
    for spec in specs:
        if spec == "ok":
            emp = empirical_variogram(primary, cutoff, config.n_bins)
            fit = fit_model(emp, config.structure)
            estimator = OkEstimator(tuple(primary), fit.model)
        else:
            secondary_kind = "fluid" if spec == "ck-fluid" else "proppant"
            column = f"{secondary_kind}_volume"
            full_secondary = _secondary_samples(usable, column)
            located = colocate(primary, full_secondary,
                               config.colocate_tolerance,
                               secondary_name=secondary_kind)
            dataset = located.dataset
            emp_p = empirical_variogram(dataset.primary, cutoff, config.n_bins)
            emp_s = empirical_variogram(dataset.secondary, cutoff, config.n_bins)
            emp_x = empirical_cross_variogram(dataset, cutoff, config.n_bins)
            lmc_fit = fit_lmc(emp_p, emp_s, emp_x, config.structure)
            estimator = CkEstimator.from_dataset(dataset, lmc_fit.lmc,
                                                 f"CK-{secondary_kind}")
        reports.append(cross_validate(estimator, plan, policy, fit_params))

    comparison = compare_estimators(reports)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts.write_comparison_csv(out / "comparison.csv", comparison)
    artifacts.write_comparison_txt(out / "comparison.txt", comparison)
    artifacts.write_cv_report_csv(out / "cv_report.csv", reports, primary)
    return out


# --- synth / render -------------------------------------------------------------


def synth_command(out_dir, seed, n_wells) -> Path:
    return make_bundled_dataset(out_dir, seed, n_wells)


def render_command(kind: str, data_path, out_path, model_path=None,
                   value_column: str = "prediction") -> Path:
    """Re-render one SVG from previously written artifact files."""
    out_path = Path(out_path)
    if kind == "variogram":
        emp = artifacts.read_variogram_csv(data_path)
        curve = None
        if model_path is not None:
            entries = artifacts.read_model_txt(model_path)
            model = artifacts.parse_model(entries)
            curve = _model_curve(model, emp.cutoff)
        svg.render_variogram_svg(
            [(b.lag, b.gamma, b.pair_count) for b in emp.bins], curve,
            title=f"{emp.kind.value.capitalize()} variogram", path=out_path,
        )
    elif kind == "bubble":
        rows = artifacts.read_samples_csv(data_path)
        svg.render_bubble_svg([(x, y, v) for _, x, y, v in rows],
                              title="Sample map", path=out_path)
    elif kind == "heatmap":
        xs, ys, values, _ = artifacts.read_grid_csv(data_path, value_column)
        arr, ox, oy, dx, dy = artifacts.grid_values_to_array(xs, ys, values)
        svg.render_heatmap_svg(arr, ox, oy, dx, dy,
                               title=f"Grid map ({value_column})",
                               path=out_path)
    else:
        raise UsageError(f"unknown render kind {kind!r}")
    return out_path
