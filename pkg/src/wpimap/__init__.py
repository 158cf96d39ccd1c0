"""Well-performance-index mapping by ordinary kriging and co-kriging."""

from .data import (
    ColocateResult,
    IngestResult,
    Location,
    MultivariateDataset,
    SpatialSample,
    WellRecord,
    colocate,
    ingest_csv,
    log10_transform,
    pearson_correlation,
    write_wells_csv,
)
from .wpi import (
    PrimaryBuild,
    WpiMethod,
    WpiValue,
    build_primary_samples,
    compute_wpi_exact,
    compute_wpi_hat,
)
from .variogram import (
    EmpiricalVariogram,
    LmcFit,
    LmcModel,
    RangeDiagnostic,
    Structure,
    VariogramBin,
    VariogramFit,
    VariogramKind,
    VariogramModel,
    default_cutoff,
    empirical_cross_variogram,
    empirical_variogram,
    fit_lmc,
    fit_model,
    model_value,
    range_diagnostic,
)
from .kriging import (
    CkEstimator,
    GridSpec,
    KrigingResult,
    KrigingSystem,
    OkEstimator,
    PredictionGrid,
    VarianceMap,
    Weights,
    build_ck_system,
    build_ok_system,
    predict_grid,
    solve_ck,
    solve_ok,
    variance_map,
)
from .crossval import (
    LOO,
    ComparisonRow,
    CvReport,
    CvResidual,
    EstimatorComparison,
    FitParams,
    FoldPlan,
    RefitPolicy,
    compare_estimators,
    cross_validate,
    make_folds,
)
from .synth import (
    SynthSpec,
    bundled_well_records,
    correlated_lmc,
    generate_field,
    make_bundled_dataset,
)
from . import errors

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
