"""Analytical speedup models for multi-core runs under frequency scaling.

Two models live here. Amdahl's fixed-size speedup, parameterized by the
parallel fraction ``f`` alone, and a variable-delay extension that also
captures the memory wall: when enough cores issue memory requests
simultaneously, or when the processor clock runs far ahead of the memory
clock, the average data-access delay grows and the achievable speedup
saturates. The extension adds three application parameters:

- ``k``   how strongly memory-instruction latency reacts to the ratio of
          processor to memory frequency (``phi``),
- ``m1``  the share of instructions that hit main memory regardless of the
          core count,
- ``m2``  the share that shrinks as cores (and their private caches) are
          added.

The speedup on ``p`` cores at frequency ratio ``phi`` is

    S(p, phi) = ((1 - mu_1) + rho * mu_1)
                / max(((1 - mu_p) + rho * mu_p) * ((1 - f) + f / p),
                      rho * mu_p)

with ``rho = 1 + k * phi`` and ``mu_p = min(m1 + m2 / p, 1)``. The first
denominator branch is plain Amdahl scaling of the instruction mix; the
second is the floor set by the saturated memory system. With
``k = m1 = m2 = 0`` the model reduces exactly to Amdahl's.

All arithmetic is 64-bit IEEE; algebraic identities hold to 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import (
    DomainError,
    EmptyInput,
    LengthMismatch,
    MissingBaseline,
    NonPositiveTime,
)

if TYPE_CHECKING:
    from .dataio import MeasurementTable

#: Default upper fitting bound for the memory-sensitivity parameter k.
DEFAULT_K_MAX = 10.0


@dataclass(frozen=True)
class AmdahlParams:
    """Parallel fraction of an application, in [0, 1]."""

    f: float

    def __post_init__(self):
        if not 0.0 <= self.f <= 1.0:
            raise DomainError(f"parallel fraction f must be in [0, 1], got {self.f}")


@dataclass(frozen=True)
class ModelParams:
    """The four fitted application parameters of the variable-delay model.

    ``f`` and the memory-mix terms ``m1``/``m2`` live in [0, 1]; ``k`` is
    non-negative and bounded by ``k_max`` (the fitting box, 10 by default).
    ``m1 + m2`` may exceed 1; the clamp to 1 happens at evaluation time so
    an optimizer can explore the full unclamped box.
    """

    f: float
    k: float
    m1: float
    m2: float
    k_max: float = DEFAULT_K_MAX

    def __post_init__(self):
        if not 0.0 <= self.f <= 1.0:
            raise DomainError(f"f must be in [0, 1], got {self.f}")
        if not 0.0 <= self.k <= self.k_max:
            raise DomainError(f"k must be in [0, {self.k_max}], got {self.k}")
        if not 0.0 <= self.m1 <= 1.0:
            raise DomainError(f"m1 must be in [0, 1], got {self.m1}")
        if not 0.0 <= self.m2 <= 1.0:
            raise DomainError(f"m2 must be in [0, 1], got {self.m2}")


@dataclass(frozen=True)
class Config:
    """A machine operating point: core count and CPU/memory frequency ratio."""

    p: int
    phi: float

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or self.p < 1:
            raise DomainError(f"core count p must be a positive integer, got {self.p!r}")
        if not self.phi > 0.0:
            raise DomainError(f"frequency ratio phi must be > 0, got {self.phi}")


@dataclass(frozen=True)
class SpeedupSample:
    """An observed speedup at one operating point."""

    config: Config
    speedup: float

    def __post_init__(self):
        if not (np.isfinite(self.speedup) and self.speedup > 0.0):
            raise DomainError(f"speedup must be finite and > 0, got {self.speedup}")


def rho(k: float, phi: float) -> float:
    """Ratio of average memory-instruction time to processor-instruction time.

    rho = 1 + k * phi, so rho >= 1 always: a memory instruction is never
    cheaper than a processor instruction.
    """
    if k < 0.0:
        raise DomainError(f"k must be >= 0, got {k}")
    if not phi > 0.0:
        raise DomainError(f"phi must be > 0, got {phi}")
    return 1.0 + k * phi


def mu_p(m1: float, m2: float, p: int) -> float:
    """Fraction of instructions reaching main memory on ``p`` cores.

    min(m1 + m2 / p, 1); non-increasing in p. The clamp models an
    application that is fully memory-bound.
    """
    if not 0.0 <= m1 <= 1.0:
        raise DomainError(f"m1 must be in [0, 1], got {m1}")
    if not 0.0 <= m2 <= 1.0:
        raise DomainError(f"m2 must be in [0, 1], got {m2}")
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return float(np.minimum(m1 + m2 / p, 1.0))


def amdahl_speedup_array(f, p):
    """Amdahl speedup, broadcasting over numpy arrays of f and p."""
    return 1.0 / ((1.0 - f) + f / p)


def amdahl_speedup(params: AmdahlParams, p: int) -> float:
    """Amdahl's fixed-size speedup 1 / ((1 - f) + f / p)."""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return float(amdahl_speedup_array(params.f, float(p)))


def _proposed_terms(f, k, m1, m2, p, phi):
    """Numerator and both denominator branches; broadcasts like numpy."""
    rho_ = 1.0 + k * phi
    mu1 = np.minimum(m1 + m2, 1.0)
    mup = np.minimum(m1 + m2 / p, 1.0)
    numerator = (1.0 - mu1) + rho_ * mu1
    compute_branch = ((1.0 - mup) + rho_ * mup) * ((1.0 - f) + f / p)
    memory_branch = rho_ * mup
    return numerator, compute_branch, memory_branch


def proposed_speedup_array(f, k, m1, m2, p, phi):
    """Variable-delay speedup, broadcasting over numpy arrays.

    Inputs must already satisfy the model bounds; this is the raw kernel
    shared by the scalar API, the fitter objective, and the generators.
    """
    num, compute, memory = _proposed_terms(f, k, m1, m2, p, phi)
    return num / np.maximum(compute, memory)


def memory_bound_array(f, k, m1, m2, p, phi):
    """True where the saturated-memory branch decides the speedup."""
    _, compute, memory = _proposed_terms(f, k, m1, m2, p, phi)
    return memory >= compute


def proposed_speedup_detail(params: ModelParams, config: Config) -> tuple[float, bool]:
    """Speedup plus a flag telling which denominator branch was active.

    Returns ``(speedup, memory_bound)``; ties count as memory-bound, which
    keeps the flag monotone along increasing phi.
    """
    num, compute, memory = _proposed_terms(
        params.f, params.k, params.m1, params.m2, float(config.p), config.phi
    )
    return float(num / np.maximum(compute, memory)), bool(memory >= compute)


def proposed_speedup(params: ModelParams, config: Config) -> float:
    """Variable-delay speedup at one operating point.

    Equals 1 at p=1, is >= 1 and non-decreasing in p, and reduces exactly
    to ``amdahl_speedup`` when k = m1 = m2 = 0.
    """
    return proposed_speedup_detail(params, config)[0]


def speedups_from_measurements(table: "MeasurementTable") -> list[SpeedupSample]:
    """Derive per-frequency speedup samples from an execution-time table.

    The baseline for every row is the single-core time at the *same*
    frequency (and application), so single-core rows map to speedup 1.0
    exactly. phi is cpu frequency over the table's memory frequency.

    Raises MissingBaseline naming the first frequency that has no
    single-core row, and NonPositiveTime for any non-positive time.
    """
    if not table.rows:
        raise EmptyInput("measurement table has no rows")
    f_mem = table.memory_frequency_mhz
    baselines: dict[tuple[str, int], float] = {}
    for row in table.rows:
        if not row.time_s > 0.0:
            raise NonPositiveTime(
                f"non-positive time {row.time_s} for {row.application!r} "
                f"at {row.cpu_freq_mhz} MHz, {row.cores} cores"
            )
        if row.cores == 1:
            baselines[(row.application, row.cpu_freq_mhz)] = row.time_s
    samples = []
    for row in table.rows:
        key = (row.application, row.cpu_freq_mhz)
        if key not in baselines:
            raise MissingBaseline(row.cpu_freq_mhz, row.application)
        samples.append(
            SpeedupSample(
                config=Config(p=row.cores, phi=row.cpu_freq_mhz / f_mem),
                speedup=baselines[key] / row.time_s,
            )
        )
    return samples


def sample_arrays(samples: Sequence[SpeedupSample]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unpack samples into (p, phi, speedup) float arrays."""
    p = np.array([s.config.p for s in samples], dtype=float)
    phi = np.array([s.config.phi for s in samples], dtype=float)
    s = np.array([s.speedup for s in samples], dtype=float)
    return p, phi, s


def mse(predicted: Iterable[float], observed: Iterable[float]) -> float:
    """Mean squared error between two equally long sequences."""
    pred = np.asarray(list(predicted) if not isinstance(predicted, np.ndarray) else predicted, dtype=float)
    obs = np.asarray(list(observed) if not isinstance(observed, np.ndarray) else observed, dtype=float)
    if pred.shape != obs.shape or pred.ndim != 1:
        raise LengthMismatch(f"predicted has shape {pred.shape}, observed {obs.shape}")
    if pred.size == 0:
        raise EmptyInput("mse of empty sequences is undefined")
    diff = pred - obs
    return float(np.mean(diff * diff))
