"""Ingestion, synthetic generation, and report serialization tests."""

import numpy as np
import pytest

from memwall.dataio import (
    MeasurementRow,
    MeasurementTable,
    SyntheticSpec,
    generate_synthetic,
    load_measurements,
    load_report,
    write_measurements,
    write_report,
)
from memwall.errors import DomainError, ParseError, SchemaError
from memwall.harness import ModelComparison, StudyCell, StudyReport
from memwall.model import (
    AmdahlParams,
    Config,
    ModelParams,
    proposed_speedup,
    speedups_from_measurements,
)

CSV_OK = b"""application,cpu_freq_mhz,cores,time_s
app,2500,1,100.0
app,2500,4,30.0
"""


class TestLoadMeasurements:
    def test_csv_two_rows(self):
        table = load_measurements(CSV_OK, "csv", memory_frequency_mhz=1000)
        assert len(table.rows) == 2
        assert table.rows[1] == MeasurementRow("app", 2500, 4, 30.0)
        assert table.memory_frequency_mhz == 1000

    def test_csv_requires_memory_frequency(self):
        with pytest.raises(SchemaError):
            load_measurements(CSV_OK, "csv")

    def test_negative_time_names_row(self):
        bad = b"application,cpu_freq_mhz,cores,time_s\napp,2500,1,-1\n"
        with pytest.raises(SchemaError) as err:
            load_measurements(bad, "csv", memory_frequency_mhz=1000)
        assert err.value.row == 0

    def test_duplicate_triple_rejected(self):
        bad = CSV_OK + b"app,2500,4,31.0\n"
        with pytest.raises(SchemaError) as err:
            load_measurements(bad, "csv", memory_frequency_mhz=1000)
        assert "duplicate" in str(err.value)

    def test_bad_header_rejected(self):
        bad = b"app,freq,cores,time\na,1,1,1\n"
        with pytest.raises(SchemaError):
            load_measurements(bad, "csv", memory_frequency_mhz=1000)

    def test_unparsable_field_reports_line_and_field(self):
        bad = b"application,cpu_freq_mhz,cores,time_s\napp,x,1,1.0\n"
        with pytest.raises(ParseError) as err:
            load_measurements(bad, "csv", memory_frequency_mhz=1000)
        assert err.value.line == 2
        assert err.value.field == "cpu_freq_mhz"

    def test_json_bad_version(self):
        with pytest.raises(SchemaError):
            load_measurements(b'{"schema_version": 99, "rows": []}', "json")

    def test_json_not_json(self):
        with pytest.raises(ParseError):
            load_measurements(b"{nope", "json")

    def test_unknown_format(self):
        with pytest.raises(DomainError):
            load_measurements(CSV_OK, "xml")


def small_table():
    rows = [
        MeasurementRow("a", 2000, 1, 10.0),
        MeasurementRow("a", 2000, 2, 5.5),
        MeasurementRow("b", 1500, 1, 3.25),
    ]
    return MeasurementTable(rows, memory_frequency_mhz=1333, runs_aggregated=10)


class TestRoundTrips:
    def test_json_identity(self):
        table = small_table()
        again = load_measurements(write_measurements(table, "json"), "json")
        assert again == table

    def test_csv_preserves_rows(self):
        table = small_table()
        again = load_measurements(write_measurements(table, "csv"), "csv",
                                  memory_frequency_mhz=1333)
        assert again.rows == table.rows

    def test_csv_times_survive_exactly(self):
        rows = [MeasurementRow("x", 1000, 1, 0.1 + 0.2)]  # non-decimal float
        table = MeasurementTable(rows, memory_frequency_mhz=1000)
        again = load_measurements(write_measurements(table, "csv"), "csv",
                                  memory_frequency_mhz=1000)
        assert again.rows[0].time_s == rows[0].time_s


class TestTableValidation:
    def test_applications_in_first_seen_order(self):
        assert small_table().applications() == ["a", "b"]

    def test_for_application_filters(self):
        sub = small_table().for_application("a")
        assert len(sub.rows) == 2
        with pytest.raises(SchemaError):
            small_table().for_application("zzz")

    def test_duplicate_configuration_rejected(self):
        rows = [MeasurementRow("a", 1000, 1, 1.0), MeasurementRow("a", 1000, 1, 2.0)]
        with pytest.raises(SchemaError):
            MeasurementTable(rows, memory_frequency_mhz=1000)

    def test_zero_core_row_rejected(self):
        with pytest.raises(SchemaError):
            MeasurementTable([MeasurementRow("a", 1000, 0, 1.0)], memory_frequency_mhz=1000)


def synth_spec(**overrides):
    defaults = dict(
        true_params=ModelParams(f=0.99, k=1.0, m1=0.1, m2=0.0),
        f_mem_mhz=1000,
        cpu_frequencies_mhz=(1000, 2000, 3000),
        core_counts=(1, 2, 16),
        base_serial_time_s=100.0,
        seed=12,
    )
    defaults.update(overrides)
    return SyntheticSpec(**defaults)


class TestGenerateSynthetic:
    def test_recovers_hand_value_at_zero_noise(self):
        table = generate_synthetic(synth_spec())
        samples = speedups_from_measurements(table)
        by_key = {(s.config.p, s.config.phi): s.speedup for s in samples}
        assert by_key[(16, 3.0)] == pytest.approx(3.25, abs=1e-12)

    def test_single_core_rows_give_exactly_one(self):
        samples = speedups_from_measurements(generate_synthetic(synth_spec()))
        for sample in samples:
            if sample.config.p == 1:
                assert sample.speedup == 1.0

    def test_zero_noise_residual_below_1e12(self):
        spec = synth_spec(
            true_params=ModelParams(f=0.97, k=2.5, m1=0.08, m2=0.6),
            cpu_frequencies_mhz=tuple(range(1200, 2501, 100)),
            core_counts=tuple(range(1, 25)),
        )
        samples = speedups_from_measurements(generate_synthetic(spec))
        worst = max(
            abs(s.speedup - proposed_speedup(spec.true_params, s.config))
            for s in samples
        )
        assert worst <= 1e-12

    def test_same_spec_and_seed_identical(self):
        spec = synth_spec(noise_sigma=0.02)
        assert generate_synthetic(spec) == generate_synthetic(spec)

    def test_noise_depends_only_on_seed_and_row_index(self):
        clean = generate_synthetic(synth_spec())
        noisy = generate_synthetic(synth_spec(noise_sigma=0.05))
        implied = np.log([n.time_s / c.time_s for n, c in zip(noisy.rows, clean.rows)])
        expected = np.random.default_rng(12).normal(0.0, 0.05, len(clean.rows))
        assert implied == pytest.approx(expected, abs=1e-12)

    def test_serial_time_scales_inversely_with_frequency(self):
        table = generate_synthetic(synth_spec())
        t1 = {r.cpu_freq_mhz: r.time_s for r in table.rows if r.cores == 1}
        assert t1[1000] == pytest.approx(3.0 * t1[3000], rel=1e-12)

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            synth_spec(core_counts=(2, 4))  # baseline core missing
        with pytest.raises(DomainError):
            synth_spec(noise_sigma=-0.1)
        with pytest.raises(DomainError):
            synth_spec(cpu_frequencies_mhz=())
        with pytest.raises(DomainError):
            synth_spec(base_serial_time_s=0.0)


def study_report(values, seconds=None):
    cell = StudyCell(model="proposed", training_size=4, test_mses=values,
                     fit_seconds=seconds)
    return StudyReport(
        seed=5, sample_count=30, training_sizes=(4,), repetitions=len(values),
        models=("proposed",), cells=[cell],
        timing={"proposed": sum(seconds)} if seconds else None,
    )


class TestReports:
    def test_empty_report_round_trip(self):
        empty = StudyReport(seed=0, sample_count=0, training_sizes=(),
                            repetitions=0, models=(), cells=[], timing=None)
        assert load_report(write_report(empty, "json")) == empty

    def test_one_cell_round_trip(self):
        report = study_report([0.5, 0.25], seconds=[0.01, 0.02])
        assert load_report(write_report(report, "json")) == report

    def test_failure_marker_survives_round_trip(self):
        report = study_report([0.5, None, 0.75])
        again = load_report(write_report(report, "json"))
        assert again == report
        assert again.cells[0].failures == 1
        assert again.cells[0].median_test_mse == pytest.approx(0.625)

    def test_nan_becomes_null(self):
        report = study_report([0.5, float("nan")])
        blob = write_report(report, "json")
        assert b"NaN" not in blob
        assert load_report(blob).cells[0].test_mses == [0.5, None]

    def test_csv_flattened_view(self):
        report = study_report([0.5, None, 0.75])
        text = write_report(report, "csv").decode()
        lines = text.strip().split("\n")
        assert lines[0] == "model,training_size,repetitions,failures,median_test_mse,std_test_mse"
        assert lines[1].startswith("proposed,4,3,1,0.625,")

    def test_all_failed_cell_csv_has_empty_fields(self):
        report = study_report([None, None])
        line = write_report(report, "csv").decode().strip().split("\n")[1]
        assert line == "proposed,4,2,2,,"

    def test_comparison_round_trip(self):
        comparison = ModelComparison(
            application="x264", n_samples=322,
            amdahl=AmdahlParams(f=1.0), amdahl_mse=4.6452,
            proposed=ModelParams(f=0.9771, k=1.6662, m1=0.0087, m2=0.2638),
            proposed_mse=0.6169, accuracy_gain_pct=86.72, seed=9,
        )
        assert load_report(write_report([comparison], "json")) == [comparison]

    def test_comparison_csv_header(self):
        comparison = ModelComparison(
            application=None, n_samples=3,
            amdahl=AmdahlParams(f=0.5), amdahl_mse=1.0,
            proposed=ModelParams(f=0.5, k=0.0, m1=0.0, m2=0.0),
            proposed_mse=1.0, accuracy_gain_pct=0.0, seed=0,
        )
        text = write_report(comparison, "csv").decode()
        assert text.startswith(
            "application,n_samples,amdahl_f,amdahl_mse,f,k,m1,m2,proposed_mse,accuracy_gain_pct"
        )

    def test_unknown_kind_rejected(self):
        with pytest.raises(SchemaError):
            load_report(b'{"schema_version": 1, "kind": "mystery"}')

    def test_unknown_format_rejected(self):
        with pytest.raises(DomainError):
            write_report(study_report([1.0]), "yaml")
