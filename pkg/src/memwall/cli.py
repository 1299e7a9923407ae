"""Command-line front end.

Subcommands: ``gen`` (synthetic measurement tables), ``fit`` (full-data
model comparison), ``predict`` (speedup table from fitted parameters),
``sweep`` (parametric model curves), ``study`` (accuracy vs training-set
size), ``report`` (render a study report as text).

Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 fit failure.
Errors print one machine-parsable line on stderr:
``memwall: error[<Kind>]: <message>``. The MEMWALL_LOG environment
variable (debug/info/warning) controls diagnostic verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import dataio, plotsvg
from .csa import DEFAULT_SEED, CsaConfig
from .errors import (
    DataError,
    DomainError,
    FitError,
    MemwallError,
    SchemaError,
    UsageError,
)
from .harness import (
    MODEL_NAMES,
    StudyReport,
    StudySpec,
    SweepSpec,
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
    amdahl_speedup,
    proposed_speedup,
    speedups_from_measurements,
)

log = logging.getLogger("memwall.cli")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we want exit 1
        raise UsageError(message)


def _parse_int_list(text: str) -> tuple[int, ...]:
    """Comma list of integers; tokens may be ranges like 1..24 or 1200..2500..100."""
    values: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            parts = token.split("..")
            if len(parts) not in (2, 3):
                raise UsageError(f"bad range {token!r}; use A..B or A..B..STEP")
            try:
                start, stop = int(parts[0]), int(parts[1])
                step = int(parts[2]) if len(parts) == 3 else 1
            except ValueError:
                raise UsageError(f"bad range {token!r}") from None
            if step < 1 or stop < start:
                raise UsageError(f"bad range {token!r}")
            values.extend(range(start, stop + 1, step))
        else:
            try:
                values.append(int(token))
            except ValueError:
                raise UsageError(f"not an integer: {token!r}") from None
    if not values:
        raise UsageError(f"empty integer list: {text!r}")
    return tuple(values)


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"bad float list: {text!r}") from None
    if not values:
        raise UsageError(f"empty float list: {text!r}")
    return values


def _write_bytes(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.write(data.decode("utf-8"))
    else:
        Path(path).write_bytes(data)


def _load_table(args) -> "dataio.MeasurementTable":
    path = Path(args.input)
    fmt = args.format or ("json" if path.suffix == ".json" else "csv")
    with open(path, "rb") as handle:
        return dataio.load_measurements(handle, fmt, args.mem_freq_mhz)


def _add_common(parser: _Parser, with_format: bool = True) -> None:
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"RNG seed (default {DEFAULT_SEED})")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for parallel sections (results are identical)")
    if with_format:
        parser.add_argument("--format", choices=("csv", "json"), default=None,
                            help="table format (default: by file extension, else csv)")


def _add_fit_flags(parser: _Parser) -> None:
    parser.add_argument("--annealers", type=int, default=10, help="coupled annealers (default 10)")
    parser.add_argument("--iters", type=int, default=30000, help="annealing iterations (default 30000)")
    parser.add_argument("--k-max", type=float, default=DEFAULT_K_MAX,
                        help=f"upper fitting bound for k (default {DEFAULT_K_MAX})")


def _csa_config(args) -> CsaConfig:
    return CsaConfig(
        num_annealers=args.annealers,
        max_iterations=args.iters,
        seed=args.seed,
        record_trace=False,
    )


def _cmd_gen(args) -> int:
    params = ModelParams(f=args.f, k=args.k, m1=args.m1, m2=args.m2, k_max=args.k_max)
    spec = dataio.SyntheticSpec(
        true_params=params,
        f_mem_mhz=args.mem_freq_mhz,
        cpu_frequencies_mhz=_parse_int_list(args.cpu_freqs_mhz),
        core_counts=_parse_int_list(args.cores),
        base_serial_time_s=args.base_serial_time_s,
        noise_sigma=args.noise,
        seed=args.seed,
        application=args.app,
    )
    table = dataio.generate_synthetic(spec)
    fmt = args.format or ("json" if args.output and args.output.endswith(".json") else "csv")
    _write_bytes(args.output, dataio.write_measurements(table, fmt))
    log.info("generated %d rows for %r", len(table.rows), args.app)
    return 0


def _cmd_fit(args) -> int:
    table = _load_table(args)
    applications = [args.app] if args.app else table.applications()
    config = _csa_config(args)
    comparisons = []
    for app in applications:
        samples = speedups_from_measurements(table.for_application(app))
        comparisons.append(compare_models(samples, config, args.k_max, application=app))
        log.info("fitted %r: amdahl mse=%.6g proposed mse=%.6g", app,
                 comparisons[-1].amdahl_mse, comparisons[-1].proposed_mse)
    _write_bytes(args.output, dataio.write_report(comparisons, "json"))
    return 0


def _read_params_file(path: str, app: str | None) -> AmdahlParams | ModelParams:
    with open(path, "rb") as handle:
        raw = handle.read()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"params file is not valid JSON: {exc}") from exc
    if isinstance(doc, dict) and doc.get("kind") == "model_comparison":
        comparisons = dataio.load_report(raw)
        if app is not None:
            comparisons = [c for c in comparisons if c.application == app]
            if not comparisons:
                raise SchemaError(f"no comparison for application {app!r} in {path}")
        return comparisons[0].proposed
    if not isinstance(doc, dict) or "f" not in doc:
        raise SchemaError("params file must contain at least an 'f' entry")
    if any(key in doc for key in ("k", "m1", "m2")):
        return ModelParams(
            f=float(doc["f"]), k=float(doc.get("k", 0.0)),
            m1=float(doc.get("m1", 0.0)), m2=float(doc.get("m2", 0.0)),
            k_max=float(doc.get("k_max", DEFAULT_K_MAX)),
        )
    return AmdahlParams(f=float(doc["f"]))


def _cmd_predict(args) -> int:
    params = _read_params_file(args.params, args.app)
    cores = _parse_int_list(args.cores)
    if args.phis is not None:
        phis = _parse_float_list(args.phis)
    elif args.cpu_freqs_mhz is not None:
        if args.mem_freq_mhz is None:
            raise UsageError("--cpu-freqs-mhz needs --mem-freq-mhz")
        phis = tuple(f / args.mem_freq_mhz for f in _parse_int_list(args.cpu_freqs_mhz))
    else:
        raise UsageError("provide --phis or --cpu-freqs-mhz")

    records = []
    for phi in phis:
        for p in cores:
            config = Config(p=p, phi=phi)
            if isinstance(params, ModelParams):
                value = proposed_speedup(params, config)
            else:
                value = amdahl_speedup(params, config.p)
            records.append((p, phi, value))

    fmt = args.out_format or "csv"
    if fmt == "csv":
        lines = ["cores,phi,speedup"]
        lines += [f"{p},{phi!r},{s!r}" for p, phi, s in records]
        _write_bytes(args.output, ("\n".join(lines) + "\n").encode("utf-8"))
    else:
        doc = {"schema_version": 1, "kind": "predictions",
               "points": [{"cores": p, "phi": phi, "speedup": s} for p, phi, s in records]}
        _write_bytes(args.output, (json.dumps(doc, indent=2) + "\n").encode("utf-8"))
    return 0


def _sweep_csv(curves) -> bytes:
    lines = ["axis,f,k,m1,m2,p,phi,x,speedup"]
    for c in curves:
        for x, s in c.points:
            lines.append(
                f"{c.axis},{c.f!r},{c.k!r},{c.m1!r},{c.m2!r},"
                f"{'' if c.p is None else c.p},{'' if c.phi is None else repr(c.phi)},"
                f"{x!r},{s!r}"
            )
    return ("\n".join(lines) + "\n").encode("utf-8")


def _cmd_sweep(args) -> int:
    overrides = {}
    if args.f_values:
        overrides["f_values"] = _parse_float_list(args.f_values)
    if args.k_values:
        overrides["k_values"] = _parse_float_list(args.k_values)
    if args.m1_values:
        overrides["m1_values"] = _parse_float_list(args.m1_values)
    if args.m2_values:
        overrides["m2_values"] = _parse_float_list(args.m2_values)
    if args.p_values:
        overrides["p_values"] = _parse_int_list(args.p_values)
    if args.phi_values:
        overrides["phi_values"] = _parse_float_list(args.phi_values)
    spec = SweepSpec(axis=args.axis, **overrides)
    curves = parametric_sweep(spec)
    _write_bytes(args.output, _sweep_csv(curves))
    if args.svg:
        svg = plotsvg.line_chart(
            [(c.label(), c.points) for c in curves],
            title="Modeled speedup",
            x_label="cores" if spec.axis == "p" else "frequency ratio",
            y_label="speedup",
            log_y=args.log_y,
        )
        Path(args.svg).write_text(svg, encoding="utf-8")
    return 0


def _cmd_study(args) -> int:
    table = _load_table(args)
    applications = table.applications()
    if args.app:
        app = args.app
    elif len(applications) == 1:
        app = applications[0]
    else:
        raise UsageError(f"table holds {len(applications)} applications; pick one with --app")
    samples = speedups_from_measurements(table.for_application(app))

    sizes = _parse_int_list(args.sizes) if args.sizes else default_training_sizes(len(samples))
    if not sizes:
        raise DataError(f"{len(samples)} samples leave no usable training size")
    models = tuple(m.strip() for m in args.models.split(",") if m.strip())
    spec = StudySpec(
        training_sizes=tuple(sizes),
        repetitions=args.reps,
        models=models,
        seed=args.seed,
        csa=_csa_config(args),
        k_max=args.k_max,
    )
    report = run_sampling_study(samples, spec, threads=max(1, args.threads))
    if args.timing:
        for name, seconds in (report.timing or {}).items():
            log.info("model %s: %.2f s fitting total", name, seconds)
    else:
        report = report.without_timing()  # keeps output bytes run-independent

    output = args.output or "study.json"
    _write_bytes(output, dataio.write_report(report, "json"))
    csv_path = str(Path(output).with_suffix(".csv")) if output != "-" else None
    if csv_path:
        _write_bytes(csv_path, dataio.write_report(report, "csv"))
    if args.svg:
        curves = []
        for name in report.models:
            pts = [
                (cell.training_size, cell.median_test_mse)
                for cell in report.cells
                if cell.model == name and cell.median_test_mse is not None
            ]
            if pts:
                curves.append((name, pts))
        svg = plotsvg.line_chart(
            curves, title=f"Median test MSE ({app})",
            x_label="training samples", y_label="median test MSE",
            log_x=True, log_y=True,
        )
        Path(args.svg).write_text(svg, encoding="utf-8")
    return 0


def _render_study_text(report: StudyReport) -> str:
    lines = [
        f"sampling study: {report.sample_count} samples, "
        f"{report.repetitions} repetitions, seed {report.seed}",
        "",
        f"{'size':>6}  " + "".join(f"{m:>24}" for m in report.models),
    ]
    for size in report.training_sizes:
        row = [f"{size:>6}  "]
        for name in report.models:
            cell = report.cell(name, size)
            med, std = cell.median_test_mse, cell.std_test_mse
            if med is None:
                row.append(f"{'all failed':>24}")
            else:
                row.append(f"{med:>12.4g} ({std:.3g})".rjust(24))
        lines.append("".join(row))
    if report.timing:
        lines.append("")
        lines.append("fit time: " + ", ".join(
            f"{name} {seconds:.1f}s" for name, seconds in report.timing.items()))
    failures = sum(cell.failures for cell in report.cells)
    if failures:
        lines.append(f"failed repetitions: {failures}")
    return "\n".join(lines) + "\n"


def _render_comparison_text(comparisons) -> str:
    header = (f"{'application':<24}{'n':>5}{'amdahl f':>10}{'amdahl mse':>12}"
              f"{'f':>8}{'k':>9}{'m1':>8}{'m2':>8}{'mse':>12}{'gain %':>9}")
    lines = [header]
    for c in comparisons:
        gain = "" if c.accuracy_gain_pct is None else f"{c.accuracy_gain_pct:.2f}"
        lines.append(
            f"{(c.application or '-'):<24}{c.n_samples:>5}{c.amdahl.f:>10.4f}{c.amdahl_mse:>12.4g}"
            f"{c.proposed.f:>8.4f}{c.proposed.k:>9.4f}{c.proposed.m1:>8.4f}{c.proposed.m2:>8.4f}"
            f"{c.proposed_mse:>12.4g}{gain:>9}"
        )
    return "\n".join(lines) + "\n"


def _cmd_report(args) -> int:
    with open(args.input, "rb") as handle:
        loaded = dataio.load_report(handle)
    if isinstance(loaded, StudyReport):
        text = _render_study_text(loaded)
    else:
        text = _render_comparison_text(loaded)
    _write_bytes(args.output, text.encode("utf-8"))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="memwall",
                     description="Memory-wall-aware speedup modeling and evaluation")
    sub = parser.add_subparsers(dest="command", metavar="command")

    gen = sub.add_parser("gen", help="generate a synthetic measurement table")
    gen.add_argument("--f", type=float, default=0.99)
    gen.add_argument("--k", type=float, default=0.5)
    gen.add_argument("--m1", type=float, default=0.05)
    gen.add_argument("--m2", type=float, default=0.4)
    gen.add_argument("--k-max", type=float, default=DEFAULT_K_MAX)
    gen.add_argument("--mem-freq-mhz", type=int, default=1000)
    gen.add_argument("--cpu-freqs-mhz", default="1200..2500..100",
                     help="grid, e.g. 1200..2500..100 (default) or 1500,2000")
    gen.add_argument("--cores", default="1..24", help="grid, e.g. 1..24 (default) or 1,2,4,8")
    gen.add_argument("--base-serial-time-s", type=float, default=100.0)
    gen.add_argument("--noise", type=float, default=0.0,
                     help="relative std of multiplicative noise (default 0)")
    gen.add_argument("--app", default="synthetic")
    gen.add_argument("--output", "-o", required=True)
    _add_common(gen)
    gen.set_defaults(handler=_cmd_gen)

    fit = sub.add_parser("fit", help="fit both models on all measurements and compare")
    fit.add_argument("--input", "-i", required=True)
    fit.add_argument("--mem-freq-mhz", type=int, default=None,
                     help="memory frequency for CSV input")
    fit.add_argument("--app", default=None, help="fit only this application")
    fit.add_argument("--output", "-o", default=None, help="comparison JSON (default stdout)")
    _add_fit_flags(fit)
    _add_common(fit)
    fit.set_defaults(handler=_cmd_fit)

    predict = sub.add_parser("predict", help="tabulate speedups over a (cores, phi) grid")
    predict.add_argument("--params", required=True, help="params JSON or fit output")
    predict.add_argument("--app", default=None, help="application to pick from a fit output")
    predict.add_argument("--cores", required=True)
    predict.add_argument("--phis", default=None)
    predict.add_argument("--cpu-freqs-mhz", default=None)
    predict.add_argument("--mem-freq-mhz", type=int, default=None)
    predict.add_argument("--out-format", choices=("csv", "json"), default="csv")
    predict.add_argument("--output", "-o", default=None)
    _add_common(predict, with_format=False)
    predict.set_defaults(handler=_cmd_predict)

    sweep = sub.add_parser("sweep", help="evaluate model curves over parameter grids")
    sweep.add_argument("--axis", choices=("p", "phi"), default="p")
    sweep.add_argument("--f-values", default=None)
    sweep.add_argument("--k-values", default=None)
    sweep.add_argument("--m1-values", default=None)
    sweep.add_argument("--m2-values", default=None)
    sweep.add_argument("--p-values", default=None)
    sweep.add_argument("--phi-values", default=None)
    sweep.add_argument("--output", "-o", default=None, help="curve CSV (default stdout)")
    sweep.add_argument("--svg", default=None, help="also draw an SVG line chart here")
    sweep.add_argument("--log-y", action="store_true")
    _add_common(sweep, with_format=False)
    sweep.set_defaults(handler=_cmd_sweep)

    study = sub.add_parser("study", help="accuracy versus training-set size")
    study.add_argument("--input", "-i", required=True)
    study.add_argument("--mem-freq-mhz", type=int, default=None)
    study.add_argument("--app", default=None)
    study.add_argument("--sizes", default=None, help="training sizes (default 4..256 doubling)")
    study.add_argument("--reps", type=int, default=100)
    study.add_argument("--models", default=",".join(MODEL_NAMES))
    study.add_argument("--output", "-o", default="study.json")
    study.add_argument("--svg", default=None)
    study.add_argument("--timing", action="store_true",
                       help="embed wall-clock timings (makes output bytes run-dependent)")
    _add_fit_flags(study)
    _add_common(study)
    study.set_defaults(handler=_cmd_study)

    report = sub.add_parser("report", help="render a report JSON as text")
    report.add_argument("--input", "-i", required=True)
    report.add_argument("--output", "-o", default=None)
    _add_common(report, with_format=False)
    report.set_defaults(handler=_cmd_report)

    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("MEMWALL_LOG", "warning").lower()
    level = {"debug": logging.DEBUG, "info": logging.INFO,
             "warning": logging.WARNING, "error": logging.ERROR}.get(level_name, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(exc: Exception, code: int) -> int:
    message = str(exc).replace("\n", " ")
    print(f"memwall: error[{type(exc).__name__}]: {message}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("a subcommand is required (see --help)")
        return args.handler(args)
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except UsageError as exc:
        return _fail(exc, 1)
    except FileNotFoundError as exc:
        return _fail(exc, 2)
    except (DataError, DomainError) as exc:
        return _fail(exc, 2)
    except (FitError, ZeroDivisionError) as exc:
        return _fail(exc, 3)
    except MemwallError as exc:
        return _fail(exc, 2)


if __name__ == "__main__":
    sys.exit(main())
