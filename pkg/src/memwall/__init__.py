"""Memory-wall-aware parallel speedup modeling and evaluation toolkit."""

from .baselines import (
    KrrHyperParams,
    RegressorInput,
    TreeHyperParams,
    default_krr_grid,
    grid_search_cv,
    krr_fit,
    krr_predict,
    tree_fit,
    tree_predict,
)
from .csa import (
    DEFAULT_SEED,
    Bounds,
    CsaConfig,
    FitResult,
    amdahl_bounds,
    amdahl_params_from_vector,
    csa_minimize,
    fit_model,
    model_params_from_vector,
    proposed_bounds,
)
from .dataio import (
    MeasurementRow,
    MeasurementTable,
    SyntheticSpec,
    generate_synthetic,
    load_measurements,
    load_report,
    write_measurements,
    write_report,
)
from .errors import (
    DataError,
    DomainError,
    EmptyInput,
    FitError,
    InsufficientSamples,
    LengthMismatch,
    MemwallError,
    MissingBaseline,
    NonFiniteObjective,
    NonPositiveTime,
    ParseError,
    SchemaError,
    SingularSystem,
    TooFewSamples,
    UsageError,
)
from .harness import (
    ModelComparison,
    StudyCell,
    StudyReport,
    StudySpec,
    SweepCurve,
    SweepSpec,
    accuracy_gain,
    compare_models,
    default_training_sizes,
    parametric_sweep,
    run_sampling_study,
)
from .model import (
    DEFAULT_K_MAX,
    AmdahlParams,
    Config,
    ModelParams,
    SpeedupSample,
    amdahl_speedup,
    mse,
    mu_p,
    proposed_speedup,
    proposed_speedup_detail,
    rho,
    speedups_from_measurements,
)

__version__ = "0.1.0"
