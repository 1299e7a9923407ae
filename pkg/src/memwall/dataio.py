"""Measurement ingestion, synthetic data generation, report persistence.

File formats
------------
CSV measurement tables carry exactly the header
``application,cpu_freq_mhz,cores,time_s``; the memory frequency is not a
column (it is fixed per platform) and must be supplied alongside. JSON
documents are self-describing and versioned::

    {"schema_version": 1, "memory_frequency_mhz": 1000,
     "runs_aggregated": 10, "rows": [
        {"application": "x264", "cpu_freq_mhz": 2500, "cores": 1, "time_s": 98.4},
        ...]}

Frequencies are MHz integers to keep join keys exact. Tables are assumed
pre-aggregated (one time per configuration, e.g. a median of repeated
runs); this module never aggregates.

The synthetic generator is the verification oracle for everything fitted
downstream: it inverts the speedup model into execution times, with
single-core time scaled inversely to the processor frequency, and applies
optional multiplicative log-normal noise so times stay positive. At zero
noise, deriving speedups from a generated table reproduces the model to
within 1e-12.

NaN never reaches the wire: it is encoded as JSON ``null`` / an empty CSV
field.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .csa import DEFAULT_SEED
from .errors import DomainError, ParseError, SchemaError
from .harness import ModelComparison, StudyCell, StudyReport
from .model import AmdahlParams, ModelParams, proposed_speedup_array

CSV_HEADER = ("application", "cpu_freq_mhz", "cores", "time_s")

SCHEMA_VERSION = 1


@dataclass
class MeasurementRow:
    application: str
    cpu_freq_mhz: int
    cores: int
    time_s: float


@dataclass
class MeasurementTable:
    """Execution times indexed by (application, cpu frequency, cores)."""

    rows: list[MeasurementRow]
    memory_frequency_mhz: int
    runs_aggregated: int = 1

    def __post_init__(self):
        if self.memory_frequency_mhz <= 0:
            raise SchemaError(f"memory frequency must be > 0 MHz, got {self.memory_frequency_mhz}")
        if self.runs_aggregated < 1:
            raise SchemaError(f"runs_aggregated must be >= 1, got {self.runs_aggregated}")
        seen = set()
        for i, row in enumerate(self.rows):
            if row.cpu_freq_mhz <= 0:
                raise SchemaError(f"cpu_freq_mhz must be > 0, got {row.cpu_freq_mhz}", row=i)
            if row.cores < 1:
                raise SchemaError(f"cores must be >= 1, got {row.cores}", row=i)
            if not row.time_s > 0.0:
                raise SchemaError(f"time_s must be > 0, got {row.time_s}", row=i)
            key = (row.application, row.cpu_freq_mhz, row.cores)
            if key in seen:
                raise SchemaError(f"duplicate configuration {key}", row=i)
            seen.add(key)

    def applications(self) -> list[str]:
        """Distinct application names in first-appearance order."""
        out: list[str] = []
        for row in self.rows:
            if row.application not in out:
                out.append(row.application)
        return out

    def for_application(self, name: str) -> "MeasurementTable":
        rows = [r for r in self.rows if r.application == name]
        if not rows:
            raise SchemaError(f"no rows for application {name!r}")
        return MeasurementTable(rows, self.memory_frequency_mhz, self.runs_aggregated)


def _read_bytes(source: bytes | IO[bytes]) -> bytes:
    if isinstance(source, bytes):
        return source
    return source.read()


def load_measurements(
    source: bytes | IO[bytes],
    format: str = "csv",
    memory_frequency_mhz: int | None = None,
) -> MeasurementTable:
    """Parse and validate a measurement table.

    CSV input requires ``memory_frequency_mhz``; for JSON it is optional
    and overrides the document value when given.
    """
    raw = _read_bytes(source)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from exc

    if format == "csv":
        if memory_frequency_mhz is None:
            raise SchemaError("CSV measurement input needs the memory frequency (MHz)")
        return _load_csv(text, memory_frequency_mhz)
    if format == "json":
        return _load_json(text, memory_frequency_mhz)
    raise DomainError(f"unknown measurement format {format!r}")


def _load_csv(text: str, memory_frequency_mhz: int) -> MeasurementTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV input", line=1) from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise SchemaError(f"CSV header must be {','.join(CSV_HEADER)}, got {','.join(header)}")
    rows = []
    for line_no, record in enumerate(reader, start=2):
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if len(record) != len(CSV_HEADER):
            raise ParseError(f"expected {len(CSV_HEADER)} fields, got {len(record)}", line=line_no)
        app = record[0].strip()
        try:
            freq = int(record[1])
        except ValueError:
            raise ParseError(f"not an integer: {record[1]!r}", line=line_no, field="cpu_freq_mhz") from None
        try:
            cores = int(record[2])
        except ValueError:
            raise ParseError(f"not an integer: {record[2]!r}", line=line_no, field="cores") from None
        try:
            time_s = float(record[3])
        except ValueError:
            raise ParseError(f"not a number: {record[3]!r}", line=line_no, field="time_s") from None
        rows.append(MeasurementRow(app, freq, cores, time_s))
    return MeasurementTable(rows, memory_frequency_mhz)


def _load_json(text: str, memory_frequency_mhz: int | None) -> MeasurementTable:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise SchemaError("JSON measurement document must be an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {doc.get('schema_version')!r}")
    mem = memory_frequency_mhz if memory_frequency_mhz is not None else doc.get("memory_frequency_mhz")
    if mem is None:
        raise SchemaError("memory_frequency_mhz missing from JSON document")
    rows = []
    for i, item in enumerate(doc.get("rows", [])):
        try:
            rows.append(MeasurementRow(
                application=str(item["application"]),
                cpu_freq_mhz=int(item["cpu_freq_mhz"]),
                cores=int(item["cores"]),
                time_s=float(item["time_s"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad row object: {exc}", row=i) from exc
    return MeasurementTable(rows, int(mem), int(doc.get("runs_aggregated", 1)))


def write_measurements(table: MeasurementTable, format: str = "csv") -> bytes:
    """Serialize a table; the JSON form round-trips losslessly."""
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in table.rows:
            writer.writerow([row.application, row.cpu_freq_mhz, row.cores, repr(row.time_s)])
        return out.getvalue().encode("utf-8")
    if format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "memory_frequency_mhz": table.memory_frequency_mhz,
            "runs_aggregated": table.runs_aggregated,
            "rows": [
                {
                    "application": r.application,
                    "cpu_freq_mhz": r.cpu_freq_mhz,
                    "cores": r.cores,
                    "time_s": r.time_s,
                }
                for r in table.rows
            ],
        }
        return _dump_json(doc)
    raise DomainError(f"unknown measurement format {format!r}")


@dataclass(frozen=True)
class SyntheticSpec:
    """Ground truth and grid for generated measurement tables.

    Single-core time at frequency F is ``base_serial_time_s *
    (reference_frequency_mhz / F)``; the reference defaults to the highest
    grid frequency. ``core_counts`` must include 1 so that derived
    speedups have their baselines. ``noise_sigma`` is the relative std of
    multiplicative log-normal noise; the draw for a row depends only on
    (seed, row index).
    """

    true_params: ModelParams
    f_mem_mhz: int
    cpu_frequencies_mhz: tuple[int, ...]
    core_counts: tuple[int, ...]
    base_serial_time_s: float
    noise_sigma: float = 0.0
    seed: int = DEFAULT_SEED
    application: str = "synthetic"
    reference_frequency_mhz: int | None = None

    def __post_init__(self):
        if self.f_mem_mhz <= 0:
            raise DomainError("f_mem_mhz must be > 0")
        if not self.cpu_frequencies_mhz or any(f <= 0 for f in self.cpu_frequencies_mhz):
            raise DomainError("cpu_frequencies_mhz must be a non-empty list of positive MHz")
        if not self.core_counts or any(c < 1 for c in self.core_counts):
            raise DomainError("core_counts must be a non-empty list of positive integers")
        if 1 not in self.core_counts:
            raise DomainError("core_counts must include 1 (single-core baselines)")
        if not self.base_serial_time_s > 0.0:
            raise DomainError("base_serial_time_s must be > 0")
        if self.noise_sigma < 0.0:
            raise DomainError("noise_sigma must be >= 0")
        if self.reference_frequency_mhz is not None and self.reference_frequency_mhz <= 0:
            raise DomainError("reference_frequency_mhz must be > 0")


def generate_synthetic(spec: SyntheticSpec) -> MeasurementTable:
    """Invert the speedup model into an execution-time table.

    Row order is frequencies-major over the given grids, which fixes the
    row index each noise draw is tied to.
    """
    params = spec.true_params
    reference = spec.reference_frequency_mhz or max(spec.cpu_frequencies_mhz)
    rows = []
    times = []
    for freq in spec.cpu_frequencies_mhz:
        serial_time = spec.base_serial_time_s * (reference / freq)
        phi = freq / spec.f_mem_mhz
        for cores in spec.core_counts:
            speedup = float(proposed_speedup_array(
                params.f, params.k, params.m1, params.m2, float(cores), phi
            ))
            rows.append(MeasurementRow(spec.application, freq, cores, 0.0))
            times.append(serial_time / speedup)
    times = np.array(times)
    if spec.noise_sigma > 0.0:
        noise = np.random.default_rng(spec.seed).normal(0.0, spec.noise_sigma, len(times))
        times = times * np.exp(noise)
    for row, t in zip(rows, times):
        row.time_s = float(t)
    return MeasurementTable(rows, spec.f_mem_mhz)


def _clean(value):
    """Replace non-finite floats with None, recursively."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _dump_json(doc) -> bytes:
    return (json.dumps(_clean(doc), indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _study_report_doc(report: StudyReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "study_report",
        "seed": report.seed,
        "sample_count": report.sample_count,
        "training_sizes": list(report.training_sizes),
        "repetitions": report.repetitions,
        "models": list(report.models),
        "cells": [
            {
                "model": c.model,
                "training_size": c.training_size,
                "test_mses": list(c.test_mses),
                "fit_seconds": list(c.fit_seconds) if c.fit_seconds is not None else None,
                "median_test_mse": c.median_test_mse,
                "std_test_mse": c.std_test_mse,
                "failures": c.failures,
            }
            for c in report.cells
        ],
        "timing_seconds": dict(report.timing) if report.timing is not None else None,
    }


def _comparison_doc(comparisons: Sequence[ModelComparison]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "model_comparison",
        "comparisons": [
            {
                "application": c.application,
                "n_samples": c.n_samples,
                "amdahl": {"f": c.amdahl.f, "mse": c.amdahl_mse},
                "proposed": {
                    "f": c.proposed.f,
                    "k": c.proposed.k,
                    "m1": c.proposed.m1,
                    "m2": c.proposed.m2,
                    "k_max": c.proposed.k_max,
                    "mse": c.proposed_mse,
                },
                "accuracy_gain_pct": c.accuracy_gain_pct,
                "seed": c.seed,
            }
            for c in comparisons
        ],
    }


def _study_report_csv(report: StudyReport) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["model", "training_size", "repetitions", "failures",
                     "median_test_mse", "std_test_mse"])
    for c in report.cells:
        writer.writerow([
            c.model, c.training_size, report.repetitions, c.failures,
            "" if c.median_test_mse is None else repr(c.median_test_mse),
            "" if c.std_test_mse is None else repr(c.std_test_mse),
        ])
    return out.getvalue().encode("utf-8")


def _comparison_csv(comparisons: Sequence[ModelComparison]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["application", "n_samples", "amdahl_f", "amdahl_mse",
                     "f", "k", "m1", "m2", "proposed_mse", "accuracy_gain_pct"])
    for c in comparisons:
        writer.writerow([
            c.application or "", c.n_samples, repr(c.amdahl.f), repr(c.amdahl_mse),
            repr(c.proposed.f), repr(c.proposed.k), repr(c.proposed.m1), repr(c.proposed.m2),
            repr(c.proposed_mse),
            "" if c.accuracy_gain_pct is None else repr(c.accuracy_gain_pct),
        ])
    return out.getvalue().encode("utf-8")


def write_report(
    report: StudyReport | ModelComparison | Sequence[ModelComparison],
    format: str = "json",
) -> bytes:
    """Serialize a study report or comparison table.

    JSON round-trips through ``load_report``; CSV is the flattened
    per-cell (or per-application) view.
    """
    if isinstance(report, ModelComparison):
        report = [report]
    if format == "json":
        if isinstance(report, StudyReport):
            return _dump_json(_study_report_doc(report))
        return _dump_json(_comparison_doc(report))
    if format == "csv":
        if isinstance(report, StudyReport):
            return _study_report_csv(report)
        return _comparison_csv(report)
    raise DomainError(f"unknown report format {format!r}")


def load_report(source: bytes | IO[bytes]) -> StudyReport | list[ModelComparison]:
    """Parse a JSON report written by write_report."""
    raw = _read_bytes(source)
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid report document: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError("unsupported or missing schema_version")
    kind = doc.get("kind")
    if kind == "study_report":
        cells = [
            StudyCell(
                model=c["model"],
                training_size=int(c["training_size"]),
                test_mses=[None if v is None else float(v) for v in c["test_mses"]],
                fit_seconds=(None if c.get("fit_seconds") is None
                             else [float(v) for v in c["fit_seconds"]]),
            )
            for c in doc["cells"]
        ]
        timing = doc.get("timing_seconds")
        return StudyReport(
            seed=int(doc["seed"]),
            sample_count=int(doc["sample_count"]),
            training_sizes=tuple(int(s) for s in doc["training_sizes"]),
            repetitions=int(doc["repetitions"]),
            models=tuple(doc["models"]),
            cells=cells,
            timing=None if timing is None else {k: float(v) for k, v in timing.items()},
        )
    if kind == "model_comparison":
        out = []
        for c in doc["comparisons"]:
            prop = c["proposed"]
            out.append(ModelComparison(
                application=c.get("application"),
                n_samples=int(c["n_samples"]),
                amdahl=AmdahlParams(f=float(c["amdahl"]["f"])),
                amdahl_mse=float(c["amdahl"]["mse"]),
                proposed=ModelParams(
                    f=float(prop["f"]), k=float(prop["k"]),
                    m1=float(prop["m1"]), m2=float(prop["m2"]),
                    k_max=float(prop.get("k_max", 10.0)),
                ),
                proposed_mse=float(prop["mse"]),
                accuracy_gain_pct=(None if c.get("accuracy_gain_pct") is None
                                   else float(c["accuracy_gain_pct"])),
                seed=int(c["seed"]),
            ))
        return out
    raise SchemaError(f"unknown report kind {kind!r}")
