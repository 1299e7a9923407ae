"""Evaluation protocols: model comparison, sampling-size studies, sweeps.

The sampling-size study is the centerpiece: for each training size it
repeatedly draws a random subset of the speedup samples, fits every
requested model on the subset, scores it on the held-out remainder, and
aggregates the per-repetition test MSEs by median and standard deviation.
Repetitions are independent and carry seeds derived from (base seed, size
index, repetition index), so reports are identical no matter how many
worker processes crunch them.
"""

from __future__ import annotations

import dataclasses
import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

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
    CsaConfig,
    amdahl_params_from_vector,
    fit_arrays,
    fit_model,
    model_params_from_vector,
    proposed_bounds,
)
from .errors import DomainError, EmptyInput, InsufficientSamples, MemwallError
from .model import (
    DEFAULT_K_MAX,
    AmdahlParams,
    ModelParams,
    SpeedupSample,
    amdahl_speedup_array,
    mse,
    proposed_speedup_array,
    sample_arrays,
)

log = logging.getLogger("memwall.harness")

MODEL_NAMES = ("amdahl", "proposed", "krr", "tree")

_DEFAULT_SIZES = (4, 8, 16, 32, 64, 128, 256)


def default_training_sizes(sample_count: int) -> tuple[int, ...]:
    """The doubling ladder 4..256, truncated to sizes below sample_count."""
    return tuple(s for s in _DEFAULT_SIZES if s < sample_count)


def accuracy_gain(mse_amdahl: float, mse_proposed: float) -> float:
    """Relative MSE improvement of the variable-delay model, in percent."""
    if mse_amdahl == 0.0:
        raise ZeroDivisionError("accuracy gain is undefined when the Amdahl MSE is 0")
    if mse_amdahl < 0.0:
        raise DomainError(f"mse_amdahl must be positive, got {mse_amdahl}")
    return 100.0 * (mse_amdahl - mse_proposed) / mse_amdahl


def samples_to_regressor_input(samples: Sequence[SpeedupSample]) -> RegressorInput:
    p, phi, s = sample_arrays(samples)
    return RegressorInput(np.column_stack([p, phi]), s)


@dataclass(frozen=True)
class ModelComparison:
    """One row of a full-data model comparison table."""

    application: str | None
    n_samples: int
    amdahl: AmdahlParams
    amdahl_mse: float
    proposed: ModelParams
    proposed_mse: float
    accuracy_gain_pct: float | None
    seed: int


def compare_models(
    samples: Sequence[SpeedupSample],
    csa_config: CsaConfig | None = None,
    k_max: float = DEFAULT_K_MAX,
    application: str | None = None,
) -> ModelComparison:
    """Fit both analytical models on the full sample set and compare MSEs.

    The gain column is None only in the degenerate case of a bit-exact
    zero Amdahl MSE (where the percentage is undefined).
    """
    if len(samples) == 0:
        raise EmptyInput("cannot compare models on zero samples")
    config = csa_config or CsaConfig()
    amdahl_fit = fit_model("amdahl", samples, config=config)
    proposed_fit = fit_model("proposed", samples, proposed_bounds(k_max), config)
    gain = None
    if amdahl_fit.best_value > 0.0:
        gain = accuracy_gain(amdahl_fit.best_value, proposed_fit.best_value)
    return ModelComparison(
        application=application,
        n_samples=len(samples),
        amdahl=amdahl_params_from_vector(amdahl_fit.best_point),
        amdahl_mse=amdahl_fit.best_value,
        proposed=model_params_from_vector(proposed_fit.best_point, k_max),
        proposed_mse=proposed_fit.best_value,
        accuracy_gain_pct=gain,
        seed=config.seed,
    )


@dataclass(frozen=True)
class StudySpec:
    """What to run in a sampling-size study."""

    training_sizes: tuple[int, ...]
    repetitions: int = 100
    models: tuple[str, ...] = MODEL_NAMES
    seed: int = DEFAULT_SEED
    csa: CsaConfig = CsaConfig(record_trace=False)
    krr_grid: tuple[KrrHyperParams, ...] | None = None
    tree_hp: TreeHyperParams = TreeHyperParams()
    k_folds: int = 3
    k_max: float = DEFAULT_K_MAX

    def __post_init__(self):
        if not self.training_sizes:
            raise DomainError("training_sizes must not be empty")
        if any(s < 1 for s in self.training_sizes):
            raise DomainError("training sizes must be positive")
        if any(b <= a for a, b in zip(self.training_sizes, self.training_sizes[1:])):
            raise DomainError("training sizes must be strictly increasing")
        if self.repetitions < 1:
            raise DomainError("repetitions must be >= 1")
        unknown = set(self.models) - set(MODEL_NAMES)
        if unknown or not self.models:
            raise DomainError(f"models must be a non-empty subset of {MODEL_NAMES}, got {self.models}")


@dataclass
class StudyCell:
    """Per-(model, training size) study results.

    ``test_mses`` has exactly one entry per repetition, in repetition
    order; a None marks a repetition whose fit failed (failures stay in
    the list so the repetition count is never silently shrunk).
    ``fit_seconds`` is wall-clock per repetition, or None if timing was
    stripped for reproducible output.
    """

    model: str
    training_size: int
    test_mses: list[float | None]
    fit_seconds: list[float] | None = None

    @property
    def successes(self) -> list[float]:
        return [v for v in self.test_mses if v is not None]

    @property
    def failures(self) -> int:
        return sum(1 for v in self.test_mses if v is None)

    @property
    def median_test_mse(self) -> float | None:
        ok = self.successes
        return float(np.median(ok)) if ok else None

    @property
    def std_test_mse(self) -> float | None:
        ok = self.successes
        return float(np.std(ok)) if ok else None


@dataclass
class StudyReport:
    """Aggregated sampling-size study output."""

    seed: int
    sample_count: int
    training_sizes: tuple[int, ...]
    repetitions: int
    models: tuple[str, ...]
    cells: list[StudyCell]
    timing: dict[str, float] | None = None

    def cell(self, model: str, training_size: int) -> StudyCell:
        for c in self.cells:
            if c.model == model and c.training_size == training_size:
                return c
        raise KeyError(f"no cell for ({model}, {training_size})")

    def without_timing(self) -> "StudyReport":
        """Copy with wall-clock data removed, for byte-stable artifacts."""
        cells = [dataclasses.replace(c, fit_seconds=None) for c in self.cells]
        return dataclasses.replace(self, cells=cells, timing=None)


def _repetition_seeds(base_seed: int, size_index: int, repetition: int) -> dict[str, int]:
    state = np.random.SeedSequence([base_seed, size_index, repetition]).generate_state(
        4, dtype=np.uint64
    )
    return {
        "split": int(state[0]),
        "amdahl": int(state[1]),
        "proposed": int(state[2]),
        "cv": int(state[3]),
    }


def draw_split(n: int, size: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform training subset without replacement; remainder is the test set."""
    if size >= n:
        raise InsufficientSamples(f"training size {size} needs more than {n} samples")
    rng = np.random.default_rng(seed)
    train = np.sort(rng.choice(n, size=size, replace=False))
    mask = np.ones(n, dtype=bool)
    mask[train] = False
    return train, np.arange(n)[mask]


def _run_repetition(args) -> tuple[int, int, dict[str, tuple[float | None, float]]]:
    (p, phi, s, size, size_index, repetition, spec) = args
    seeds = _repetition_seeds(spec.seed, size_index, repetition)
    train, test = draw_split(len(s), size, seeds["split"])
    p_tr, phi_tr, s_tr = p[train], phi[train], s[train]
    p_te, phi_te, s_te = p[test], phi[test], s[test]
    krr_grid = list(spec.krr_grid) if spec.krr_grid is not None else default_krr_grid()

    results: dict[str, tuple[float | None, float]] = {}
    for name in spec.models:
        start = time.perf_counter()
        try:
            if name == "amdahl":
                config = dataclasses.replace(spec.csa, seed=seeds["amdahl"], record_trace=False)
                fit = fit_arrays("amdahl", p_tr, phi_tr, s_tr, config=config)
                predicted = amdahl_speedup_array(fit.best_point[0], p_te)
            elif name == "proposed":
                config = dataclasses.replace(spec.csa, seed=seeds["proposed"], record_trace=False)
                fit = fit_arrays("proposed", p_tr, phi_tr, s_tr, proposed_bounds(spec.k_max), config)
                f, k, m1, m2 = fit.best_point
                predicted = proposed_speedup_array(f, k, m1, m2, p_te, phi_te)
            elif name == "krr":
                data = RegressorInput(np.column_stack([p_tr, phi_tr]), s_tr)
                hp = grid_search_cv(
                    krr_fit, krr_predict, data, krr_grid, spec.k_folds, seed=seeds["cv"]
                )
                predicted = krr_predict(krr_fit(data, hp), np.column_stack([p_te, phi_te]))
            else:
                data = RegressorInput(np.column_stack([p_tr, phi_tr]), s_tr)
                predicted = tree_predict(tree_fit(data, spec.tree_hp), np.column_stack([p_te, phi_te]))
            error: float | None = mse(predicted, s_te)
        except MemwallError as exc:
            log.debug("repetition (%d, %d) model %s failed: %s", size, repetition, name, exc)
            error = None
        results[name] = (error, time.perf_counter() - start)
    return size_index, repetition, results


def run_sampling_study(
    samples: Sequence[SpeedupSample],
    spec: StudySpec,
    threads: int = 1,
) -> StudyReport:
    """Accuracy-versus-training-size protocol over random train/test splits.

    With ``threads > 1`` repetitions run in a process pool; the report is
    identical either way because every repetition derives its own seeds.
    """
    n = len(samples)
    if n == 0:
        raise EmptyInput("study needs samples")
    for size in spec.training_sizes:
        if size >= n:
            raise InsufficientSamples(f"training size {size} needs more than {n} samples")

    p, phi, s = sample_arrays(samples)
    tasks = [
        (p, phi, s, size, size_index, repetition, spec)
        for size_index, size in enumerate(spec.training_sizes)
        for repetition in range(spec.repetitions)
    ]
    log.info("study: %d sizes x %d repetitions, models=%s, threads=%d",
             len(spec.training_sizes), spec.repetitions, ",".join(spec.models), threads)

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_run_repetition, tasks, chunksize=4))
    else:
        outcomes = [_run_repetition(t) for t in tasks]

    by_key: dict[tuple[str, int], StudyCell] = {}
    for size_index, size in enumerate(spec.training_sizes):
        for name in spec.models:
            by_key[(name, size_index)] = StudyCell(
                model=name,
                training_size=size,
                test_mses=[None] * spec.repetitions,
                fit_seconds=[0.0] * spec.repetitions,
            )
    for size_index, repetition, results in outcomes:
        for name, (error, seconds) in results.items():
            cell = by_key[(name, size_index)]
            cell.test_mses[repetition] = error
            cell.fit_seconds[repetition] = seconds

    cells = [by_key[(name, i)] for i, _ in enumerate(spec.training_sizes) for name in spec.models]
    timing = {
        name: float(sum(sum(c.fit_seconds) for c in cells if c.model == name))
        for name in spec.models
    }
    return StudyReport(
        seed=spec.seed,
        sample_count=n,
        training_sizes=tuple(spec.training_sizes),
        repetitions=spec.repetitions,
        models=tuple(spec.models),
        cells=cells,
        timing=timing,
    )


_SWEEP_AXES = ("p", "phi")


@dataclass(frozen=True)
class SweepSpec:
    """Grids for the parametric behavior sweeps.

    One curve is produced per combination of the non-axis grids, in
    lexicographic grid order; each curve holds (axis value, speedup)
    points. Defaults show the memory-wall regimes around a highly
    parallel code (f = 0.99).
    """

    axis: str = "p"
    f_values: tuple[float, ...] = (0.99,)
    k_values: tuple[float, ...] = (0.1, 1.0, 10.0)
    m1_values: tuple[float, ...] = (0.0, 0.05, 0.2)
    m2_values: tuple[float, ...] = (0.0, 0.5, 1.0)
    p_values: tuple[int, ...] = (2, 4, 8, 12, 16, 32, 64)
    phi_values: tuple[float, ...] = (1.0, 1.4, 1.8, 2.2, 2.4, 3.0)

    def __post_init__(self):
        if self.axis not in _SWEEP_AXES:
            raise DomainError(f"axis must be one of {_SWEEP_AXES}, got {self.axis!r}")
        for name in ("f_values", "k_values", "m1_values", "m2_values", "p_values", "phi_values"):
            if not getattr(self, name):
                raise DomainError(f"{name} must not be empty")
        for name in ("f_values", "m1_values", "m2_values"):
            if any(not 0.0 <= v <= 1.0 for v in getattr(self, name)):
                raise DomainError(f"{name} must lie in [0, 1]")
        if any(v < 0.0 for v in self.k_values):
            raise DomainError("k_values must be >= 0")
        if any(p < 1 for p in self.p_values):
            raise DomainError("p_values must be >= 1")
        if any(not v > 0.0 for v in self.phi_values):
            raise DomainError("phi_values must be > 0")


@dataclass(frozen=True)
class SweepCurve:
    """One model curve: fixed parameters plus (axis value, speedup) points."""

    axis: str
    f: float
    k: float
    m1: float
    m2: float
    p: int | None
    phi: float | None
    points: tuple[tuple[float, float], ...]

    def label(self) -> str:
        fixed = f"p={self.p}" if self.p is not None else f"phi={self.phi}"
        return f"f={self.f} k={self.k} m1={self.m1} m2={self.m2} {fixed}"


def parametric_sweep(spec: SweepSpec) -> list[SweepCurve]:
    """Evaluate the variable-delay model over the grid, one curve per combo."""
    curves = []
    if spec.axis == "p":
        axis_values = np.array([float(v) for v in spec.p_values])
        fixed_grids = (spec.f_values, spec.k_values, spec.m1_values, spec.m2_values, spec.phi_values)
        for f, k, m1, m2, phi in itertools.product(*fixed_grids):
            speedups = proposed_speedup_array(f, k, m1, m2, axis_values, phi)
            curves.append(SweepCurve(
                axis="p", f=f, k=k, m1=m1, m2=m2, p=None, phi=phi,
                points=tuple(zip((float(v) for v in axis_values), (float(v) for v in speedups))),
            ))
    else:
        axis_values = np.array([float(v) for v in spec.phi_values])
        fixed_grids = (spec.f_values, spec.k_values, spec.m1_values, spec.m2_values, spec.p_values)
        for f, k, m1, m2, p in itertools.product(*fixed_grids):
            speedups = proposed_speedup_array(f, k, m1, m2, float(p), axis_values)
            curves.append(SweepCurve(
                axis="phi", f=f, k=k, m1=m1, m2=m2, p=p, phi=None,
                points=tuple(zip((float(v) for v in axis_values), (float(v) for v in speedups))),
            ))
    return curves
