"""Model equation tests.

Derived expected values are computed with exact Fraction arithmetic in
this file (independent of the float implementation) and then frozen.
"""

from fractions import Fraction

import numpy as np
import pytest

from memwall.dataio import MeasurementRow, MeasurementTable
from memwall.errors import (
    DomainError,
    EmptyInput,
    LengthMismatch,
    MissingBaseline,
    NonPositiveTime,
)
from memwall.model import (
    AmdahlParams,
    Config,
    ModelParams,
    amdahl_speedup,
    amdahl_speedup_array,
    memory_bound_array,
    mse,
    mu_p,
    proposed_speedup,
    proposed_speedup_array,
    proposed_speedup_detail,
    rho,
    speedups_from_measurements,
)


def exact_speedup(f, k, m1, m2, p, phi) -> Fraction:
    """Evaluate both denominator branches exactly and take the max."""
    f, k, m1, m2, phi = (Fraction(str(v)) for v in (f, k, m1, m2, phi))
    rho_ = 1 + k * phi
    mu1 = min(m1 + m2, Fraction(1))
    mup = min(m1 + Fraction(m2, p), Fraction(1))
    numerator = (1 - mu1) + rho_ * mu1
    compute = ((1 - mup) + rho_ * mup) * ((1 - f) + Fraction(f, p))
    memory = rho_ * mup
    return numerator / max(compute, memory)


class TestRho:
    def test_zero_sensitivity_gives_one(self):
        assert rho(0.0, 3.0) == 1.0

    def test_direct_arithmetic(self):
        assert rho(1.0, 3.0) == 4.0

    def test_large_fitted_sensitivity(self):
        assert rho(9.9264, 1.0) == pytest.approx(10.9264, abs=1e-12)

    def test_rejects_negative_k(self):
        with pytest.raises(DomainError):
            rho(-0.1, 1.0)

    def test_rejects_nonpositive_phi(self):
        with pytest.raises(DomainError):
            rho(1.0, 0.0)


class TestMuP:
    def test_clamps_at_one(self):
        assert mu_p(0.5, 1.0, 2) == 1.0

    def test_direct_arithmetic(self):
        assert mu_p(0.1, 0.8, 4) == pytest.approx(0.3, abs=1e-15)

    def test_zero_case(self):
        assert mu_p(0.0, 0.0, 17) == 0.0

    def test_non_increasing_in_p(self):
        values = [mu_p(0.2, 0.7, p) for p in range(1, 40)]
        assert all(b <= a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("m1,m2,p", [(-0.1, 0.0, 1), (0.0, 1.5, 1), (0.1, 0.1, 0)])
    def test_rejects_out_of_range(self, m1, m2, p):
        with pytest.raises(DomainError):
            mu_p(m1, m2, p)


class TestAmdahl:
    def test_fully_parallel(self):
        assert amdahl_speedup(AmdahlParams(f=1.0), 8) == 8.0

    def test_fully_serial(self):
        assert amdahl_speedup(AmdahlParams(f=0.0), 64) == 1.0

    def test_hand_value(self):
        # 1 / (1/100 + 99/3200) = 3200/131
        expected = float(Fraction(3200, 131))
        assert amdahl_speedup(AmdahlParams(f=0.99), 32) == pytest.approx(expected, abs=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            AmdahlParams(f=1.2)
        with pytest.raises(DomainError):
            amdahl_speedup(AmdahlParams(f=0.5), 0)


class TestProposedSpeedup:
    def test_memory_bound_hand_case(self):
        # rho=4, mu=0.1 at every p; numerator 0.9 + 0.4 = 1.3;
        # compute branch 1.3 * (0.01 + 0.99/16) = 0.0934375, memory branch 0.4.
        params = ModelParams(f=0.99, k=1.0, m1=0.1, m2=0.0)
        expected = exact_speedup(0.99, 1.0, 0.1, 0.0, 16, 3.0)
        assert expected == Fraction(13, 4)
        value, memory_bound = proposed_speedup_detail(params, Config(p=16, phi=3.0))
        assert value == pytest.approx(3.25, abs=1e-12)
        assert memory_bound

    def test_superlinear_hand_case(self):
        # rho=2, mu_1=0.5, mu_4=0.125; numerator 1.5;
        # compute branch (0.875 + 0.25) * 0.25 = 0.28125 beats memory 0.25,
        # giving 1.5/0.28125 = 16/3 > p=4.
        params = ModelParams(f=1.0, k=1.0, m1=0.0, m2=0.5)
        expected = exact_speedup(1.0, 1.0, 0.0, 0.5, 4, 1.0)
        assert expected == Fraction(16, 3)
        value, memory_bound = proposed_speedup_detail(params, Config(p=4, phi=1.0))
        assert value == pytest.approx(float(Fraction(16, 3)), abs=1e-12)
        assert not memory_bound
        assert value > 4.0

    def test_single_core_is_one(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            params = ModelParams(f=rng.random(), k=10 * rng.random(),
                                 m1=rng.random(), m2=rng.random())
            value = proposed_speedup(params, Config(p=1, phi=0.5 + 3 * rng.random()))
            assert abs(value - 1.0) <= 1e-12

    def test_reduces_to_amdahl_exactly(self):
        rng = np.random.default_rng(43)
        f = rng.random(200)
        p = np.arange(1, 65, dtype=float)
        reduced = proposed_speedup_array(f[:, None], 0.0, 0.0, 0.0, p[None, :], 2.7)
        amdahl = amdahl_speedup_array(f[:, None], p[None, :])
        assert (reduced == amdahl).all()

    def test_at_least_one_and_monotone_in_p(self):
        rng = np.random.default_rng(44)
        f, k = rng.random(500), 10 * rng.random(500)
        m1, m2 = rng.random(500), rng.random(500)
        p = np.array([1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64], dtype=float)
        s = proposed_speedup_array(f[:, None], k[:, None], m1[:, None], m2[:, None],
                                   p[None, :], 1.9)
        assert (s >= 1.0 - 1e-12).all()
        assert (np.diff(s, axis=1) >= -1e-12).all()

    def test_memory_branch_strictly_decreasing_in_phi(self):
        rng = np.random.default_rng(45)
        phis = np.linspace(0.5, 4.0, 25)
        checked = 0
        while checked < 200:
            f, k = rng.random(), 0.05 + 10 * rng.random() * 0.98
            m1, m2 = rng.random(), rng.random()
            if min(m1 + m2, 1.0) >= 1.0:
                continue
            s = proposed_speedup_array(f, k, m1, m2, 16.0, phis)
            bound = memory_bound_array(f, k, m1, m2, 16.0, phis)
            hit = np.nonzero(bound)[0]
            if hit.size == 0:
                continue
            first = hit[0]
            assert bound[first:].all()
            assert (np.diff(s[first:]) < 0.0).all()
            checked += 1

    def test_superlinear_when_compute_branch_and_mix_shrinks(self):
        rng = np.random.default_rng(46)
        found = 0
        while found < 100:
            f, k = rng.random(), 0.1 + 9 * rng.random()
            m1, m2 = 0.5 * rng.random(), 0.1 + 0.9 * rng.random()
            p, phi = 8, 1.5
            if mu_p(m1, m2, p) >= mu_p(m1, m2, 1):
                continue
            value, memory_bound = proposed_speedup_detail(
                ModelParams(f=f, k=k, m1=m1, m2=m2), Config(p=p, phi=phi))
            if memory_bound:
                continue
            assert value > amdahl_speedup(AmdahlParams(f=f), p)
            found += 1

    def test_saturation_ceiling(self):
        rng = np.random.default_rng(47)
        for _ in range(300):
            f, k = rng.random(), 10 * rng.random()
            m1, m2 = rng.random(), rng.random()
            p, phi = 12, 2.2
            mup = mu_p(m1, m2, p)
            if mup == 0.0:
                continue
            mu1 = mu_p(m1, m2, 1)
            r = rho(k, phi)
            ceiling = ((1 - mu1) + r * mu1) / (r * mup)
            value = proposed_speedup(ModelParams(f=f, k=k, m1=m1, m2=m2), Config(p=p, phi=phi))
            assert value <= ceiling + 1e-12

    def test_rejects_out_of_bounds_params(self):
        with pytest.raises(DomainError):
            ModelParams(f=0.5, k=11.0, m1=0.0, m2=0.0)
        with pytest.raises(DomainError):
            ModelParams(f=0.5, k=-0.1, m1=0.0, m2=0.0)
        with pytest.raises(DomainError):
            Config(p=2, phi=0.0)
        with pytest.raises(DomainError):
            Config(p=0, phi=1.0)

    def test_wider_k_box_is_allowed_explicitly(self):
        params = ModelParams(f=0.5, k=15.0, m1=0.0, m2=0.0, k_max=20.0)
        assert params.k == 15.0


def make_table(rows, mem_mhz=1000):
    return MeasurementTable([MeasurementRow(*r) for r in rows], memory_frequency_mhz=mem_mhz)


class TestSpeedupsFromMeasurements:
    def test_ratio_arithmetic(self):
        table = make_table([("a", 2500, 1, 100.0), ("a", 2500, 4, 30.0)])
        samples = speedups_from_measurements(table)
        assert [(s.config.p, s.config.phi) for s in samples] == [(1, 2.5), (4, 2.5)]
        assert samples[0].speedup == 1.0
        assert samples[1].speedup == pytest.approx(100.0 / 30.0, abs=1e-12)

    def test_baseline_only(self):
        table = make_table([("a", 1200, 1, 50.0)], mem_mhz=1200)
        samples = speedups_from_measurements(table)
        assert len(samples) == 1
        assert samples[0].config.phi == 1.0
        assert samples[0].speedup == 1.0

    def test_missing_baseline_names_frequency(self):
        table = make_table([("a", 2000, 8, 10.0)])
        with pytest.raises(MissingBaseline) as err:
            speedups_from_measurements(table)
        assert err.value.cpu_freq_mhz == 2000
        assert "2000" in str(err.value)

    def test_baselines_are_per_application(self):
        table = make_table([
            ("a", 2000, 1, 100.0), ("a", 2000, 2, 60.0),
            ("b", 2000, 1, 10.0), ("b", 2000, 2, 4.0),
        ])
        samples = speedups_from_measurements(table)
        assert samples[1].speedup == pytest.approx(100.0 / 60.0)
        assert samples[3].speedup == pytest.approx(2.5)

    def test_nonpositive_time_rejected(self):
        table = make_table([("a", 2000, 1, 100.0)])
        table.rows[0].time_s = -1.0  # bypasses construction-time validation
        with pytest.raises(NonPositiveTime):
            speedups_from_measurements(table)

    def test_empty_table_rejected(self):
        with pytest.raises(EmptyInput):
            speedups_from_measurements(make_table([]))


class TestMse:
    def test_identity_is_zero(self):
        assert mse([1, 2, 3], [1, 2, 3]) == 0.0

    def test_hand_value(self):
        assert mse([1, 2], [2, 4]) == 2.5

    def test_single_pair(self):
        assert mse([0], [3]) == 9.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            mse([1, 2], [1])

    def test_empty(self):
        with pytest.raises(EmptyInput):
            mse([], [])

    def test_permutation_covariant(self):
        rng = np.random.default_rng(48)
        a, b = rng.random(40), rng.random(40)
        perm = rng.permutation(40)
        assert mse(a[perm], b[perm]) == pytest.approx(mse(a, b), rel=1e-12)

    def test_residuals_scale_quadratically(self):
        rng = np.random.default_rng(49)
        a, b = rng.random(25), rng.random(25)
        base = mse(a, b)
        scaled = mse(b + 3.0 * (a - b), b)
        assert scaled == pytest.approx(9.0 * base, rel=1e-12)
