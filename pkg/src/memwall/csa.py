"""Box-constrained global minimization with coupled simulated annealing.

Several annealers run in lockstep over the same objective. Each one
proposes a Cauchy-distributed step scaled by a generation temperature that
cools as T_gen(0)/t. Downhill moves are always taken; uphill moves are
taken with a probability that is *normalized across the ensemble*:

    A_i = exp((E_i - E_max) / T_acc) / sum_j exp((E_j - E_max) / T_acc)

where E_i is annealer i's current energy and E_max the worst current
energy (the subtraction only stabilizes the exponentials). Annealers
currently doing badly therefore accept escapes readily while good ones are
protected. The acceptance temperature is not cooled on a schedule;
instead it is nudged by +/-5% each iteration so that the variance of the
A_i tracks a target fraction of its theoretical maximum (m-1)/m^2. That
feedback rule is what the "modified" in CSA-M refers to.

Everything is driven by per-annealer RNG streams pre-split from one seed,
so results are bit-reproducible regardless of how objective evaluations
are scheduled.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import DomainError, EmptyInput, NonFiniteObjective
from .model import (
    DEFAULT_K_MAX,
    AmdahlParams,
    ModelParams,
    SpeedupSample,
    amdahl_speedup_array,
    proposed_speedup_array,
    sample_arrays,
)

#: Documented default seed used by the CLI and config defaults.
DEFAULT_SEED = 1729

#: Acceptance-temperature feedback step (multiplicative +/-5%).
_ACC_ADAPT = 0.05

# Guards against runaway multiplicative adaptation; purely numerical.
_ACC_TEMP_MIN = 1e-12
_ACC_TEMP_MAX = 1e12

#: Per-annealer random draws are generated in blocks of this many iterations.
_DRAW_BLOCK = 4096

ModelKind = Literal["amdahl", "proposed"]


@dataclass(frozen=True)
class Bounds:
    """Per-dimension (lower, upper) box constraints."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.intervals:
            raise DomainError("bounds need at least one dimension")
        for i, (lo, hi) in enumerate(self.intervals):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise DomainError(f"dimension {i}: need finite lower < upper, got ({lo}, {hi})")

    @property
    def dimension(self) -> int:
        return len(self.intervals)

    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.intervals], dtype=float)

    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.intervals], dtype=float)


@dataclass(frozen=True)
class CsaConfig:
    """Knobs of the coupled annealer.

    ``desired_acceptance_variance=None`` resolves to 99% of the theoretical
    maximum (m-1)/m^2 for m annealers. ``target_value`` enables early
    termination once the best objective value reaches the target; leave it
    None to always run ``max_iterations`` iterations.
    """

    num_annealers: int = 10
    max_iterations: int = 30000
    initial_generation_temperature: float = 1.0
    initial_acceptance_temperature: float = 0.9
    desired_acceptance_variance: float | None = None
    seed: int = DEFAULT_SEED
    target_value: float | None = None
    record_trace: bool = True

    def __post_init__(self):
        if self.num_annealers < 2:
            raise DomainError("coupling requires at least 2 annealers")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        for name in ("initial_generation_temperature", "initial_acceptance_temperature"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise DomainError(f"{name} must be finite and > 0, got {v}")
        if self.desired_acceptance_variance is not None:
            cap = self.max_acceptance_variance
            if not 0.0 < self.desired_acceptance_variance <= cap:
                raise DomainError(
                    f"desired_acceptance_variance must be in (0, {cap}], "
                    f"got {self.desired_acceptance_variance}"
                )
        if self.seed < 0:
            raise DomainError("seed must be a non-negative integer")

    @property
    def max_acceptance_variance(self) -> float:
        m = self.num_annealers
        return (m - 1) / m**2

    def resolved_acceptance_variance(self) -> float:
        if self.desired_acceptance_variance is not None:
            return self.desired_acceptance_variance
        return 0.99 * self.max_acceptance_variance


@dataclass(frozen=True)
class FitResult:
    """Outcome of one optimizer run.

    ``trace`` holds the best-so-far objective value after each iteration
    (non-increasing by construction); ``nonfinite_evaluations`` counts
    probed points where the objective returned NaN or inf (those probes
    are rejected, never accepted).
    """

    best_point: tuple[float, ...]
    best_value: float
    iterations_used: int
    trace: tuple[float, ...] | None = None
    nonfinite_evaluations: int = 0


def reflect_into_bounds(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Fold arbitrary points back into the box by reflection at the walls.

    Reflection (rather than clamping) avoids piling probes up on the
    boundary. Implemented as a triangle wave with period 2*(upper-lower),
    so even Cauchy outliers far outside the box fold back in O(1). The
    final clip only absorbs float roundoff at the walls.
    """
    width = upper - lower
    z = np.mod(x - lower, 2.0 * width)
    z = np.where(z > width, 2.0 * width - z, z)
    return np.clip(lower + z, lower, upper)


def acceptance_probabilities(energies: np.ndarray, acceptance_temperature: float) -> np.ndarray:
    """Ensemble-normalized uphill acceptance probability per annealer.

    Non-finite energies get probability 0 (such annealers escape through
    the unconditional downhill rule instead). The finite entries sum to 1.
    """
    energies = np.asarray(energies, dtype=float)
    probs = np.zeros_like(energies)
    finite = np.isfinite(energies)
    if not finite.any():
        return probs
    e = energies[finite]
    w = np.exp((e - e.max()) / acceptance_temperature)
    probs[finite] = w / w.sum()
    return probs


def csa_minimize(
    objective: Callable[[np.ndarray], float] | Callable[[np.ndarray], np.ndarray],
    bounds: Bounds,
    config: CsaConfig | None = None,
    *,
    vectorized: bool = False,
) -> FitResult:
    """Minimize ``objective`` over the box described by ``bounds``.

    ``objective`` maps a parameter vector (shape ``(d,)``) to a float. With
    ``vectorized=True`` it must instead map an ``(m, d)`` matrix to an
    ``(m,)`` vector of values, which is much faster for numpy-friendly
    objectives. Results are identical for equivalent objectives.
    """
    config = config or CsaConfig()
    m = config.num_annealers
    d = bounds.dimension
    lower = bounds.lower()
    upper = bounds.upper()
    widths = upper - lower

    if vectorized:
        evaluate = objective
    else:
        def evaluate(points: np.ndarray) -> np.ndarray:
            return np.array([float(objective(row)) for row in points], dtype=float)

    seeds = np.random.SeedSequence(config.seed).spawn(m + 1)
    master = np.random.Generator(np.random.PCG64(seeds[0]))
    streams = [np.random.Generator(np.random.PCG64(s)) for s in seeds[1:]]

    states = lower + master.random((m, d)) * widths
    energies = np.asarray(evaluate(states), dtype=float).copy()
    nonfinite = int(np.count_nonzero(~np.isfinite(energies)))
    if nonfinite == m:
        raise NonFiniteObjective("objective is non-finite at every initial annealer position")
    energies[~np.isfinite(energies)] = np.inf

    best_idx = int(np.argmin(energies))
    best_value = float(energies[best_idx])
    best_point = states[best_idx].copy()

    t_gen0 = config.initial_generation_temperature
    t_acc = config.initial_acceptance_temperature
    desired_var = config.resolved_acceptance_variance()

    trace: list[float] | None = [] if config.record_trace else None
    cauchy = np.empty((m, _DRAW_BLOCK, d))
    uniforms = np.empty((m, _DRAW_BLOCK))
    cursor = _DRAW_BLOCK
    iterations_used = 0

    for t in range(1, config.max_iterations + 1):
        if cursor >= _DRAW_BLOCK:
            # Refill per-annealer draw blocks in a fixed order; this is the
            # only RNG use after initialization, so scheduling cannot
            # perturb the streams.
            for i in range(m):
                cauchy[i] = streams[i].standard_cauchy((_DRAW_BLOCK, d))
                uniforms[i] = streams[i].random(_DRAW_BLOCK)
            cursor = 0

        step_scale = t_gen0 / t
        candidates = reflect_into_bounds(
            states + step_scale * widths * cauchy[:, cursor, :], lower, upper
        )
        cand_energies = np.asarray(evaluate(candidates), dtype=float)

        finite = np.isfinite(cand_energies)
        nonfinite += int(np.count_nonzero(~finite))

        probs = acceptance_probabilities(energies, t_acc)
        accept = finite & ((cand_energies <= energies) | (uniforms[:, cursor] < probs))
        states[accept] = candidates[accept]
        energies[accept] = cand_energies[accept]

        if finite.any():
            i = int(np.argmin(np.where(finite, cand_energies, np.inf)))
            if cand_energies[i] < best_value:
                best_value = float(cand_energies[i])
                best_point = candidates[i].copy()

        variance = float(np.mean(probs * probs) - (probs.mean()) ** 2)
        factor = (1.0 - _ACC_ADAPT) if variance < desired_var else (1.0 + _ACC_ADAPT)
        t_acc = min(max(t_acc * factor, _ACC_TEMP_MIN), _ACC_TEMP_MAX)

        if trace is not None:
            trace.append(best_value)
        iterations_used = t
        cursor += 1
        if config.target_value is not None and best_value <= config.target_value:
            break

    return FitResult(
        best_point=tuple(float(v) for v in best_point),
        best_value=best_value,
        iterations_used=iterations_used,
        trace=tuple(trace) if trace is not None else None,
        nonfinite_evaluations=nonfinite,
    )


def amdahl_bounds() -> Bounds:
    return Bounds(((0.0, 1.0),))


def proposed_bounds(k_max: float = DEFAULT_K_MAX) -> Bounds:
    """Fitting box for (f, k, m1, m2)."""
    return Bounds(((0.0, 1.0), (0.0, k_max), (0.0, 1.0), (0.0, 1.0)))


def amdahl_params_from_vector(vector: Sequence[float]) -> AmdahlParams:
    return AmdahlParams(f=float(vector[0]))


def model_params_from_vector(vector: Sequence[float], k_max: float = DEFAULT_K_MAX) -> ModelParams:
    f, k, m1, m2 = (float(v) for v in vector)
    return ModelParams(f=f, k=k, m1=m1, m2=m2, k_max=k_max)


def _batch_objective(kind: ModelKind, p: np.ndarray, phi: np.ndarray, observed: np.ndarray):
    """Training-MSE objective over a parameter matrix, one row per annealer."""
    p = p[None, :]
    phi = phi[None, :]
    observed = observed[None, :]

    if kind == "amdahl":
        def objective(matrix: np.ndarray) -> np.ndarray:
            predicted = amdahl_speedup_array(matrix[:, 0:1], p)
            residual = predicted - observed
            return np.mean(residual * residual, axis=1)
    else:
        def objective(matrix: np.ndarray) -> np.ndarray:
            predicted = proposed_speedup_array(
                matrix[:, 0:1], matrix[:, 1:2], matrix[:, 2:3], matrix[:, 3:4], p, phi
            )
            residual = predicted - observed
            return np.mean(residual * residual, axis=1)

    return objective


def fit_arrays(
    kind: ModelKind,
    p: np.ndarray,
    phi: np.ndarray,
    observed: np.ndarray,
    bounds: Bounds | None = None,
    config: CsaConfig | None = None,
) -> FitResult:
    """Array-level fitting entry point shared by fit_model and the harness."""
    if kind not in ("amdahl", "proposed"):
        raise DomainError(f"unknown model kind {kind!r}")
    if len(observed) == 0:
        raise EmptyInput("cannot fit a model to zero samples")
    if bounds is None:
        bounds = amdahl_bounds() if kind == "amdahl" else proposed_bounds()
    expected_dim = 1 if kind == "amdahl" else 4
    if bounds.dimension != expected_dim:
        raise DomainError(
            f"{kind} model needs {expected_dim}-dimensional bounds, got {bounds.dimension}"
        )
    objective = _batch_objective(kind, np.asarray(p, float), np.asarray(phi, float), np.asarray(observed, float))
    return csa_minimize(objective, bounds, config, vectorized=True)


def fit_model(
    kind: ModelKind,
    samples: Sequence[SpeedupSample],
    bounds: Bounds | None = None,
    config: CsaConfig | None = None,
) -> FitResult:
    """Fit Amdahl's or the variable-delay model to speedup samples.

    The objective is the mean squared error between model predictions at
    the sample operating points and the observed speedups; the best-point
    vector is ordered (f,) for Amdahl and (f, k, m1, m2) otherwise.
    """
    if len(samples) == 0:
        raise EmptyInput("cannot fit a model to zero samples")
    p, phi, s = sample_arrays(samples)
    return fit_arrays(kind, p, phi, s, bounds, config)


def replace_config(config: CsaConfig, **changes) -> CsaConfig:
    """Return a config with the given fields replaced."""
    return dataclasses.replace(config, **changes)
