import numpy as np
import pytest

from isoteleop import (
    GLOVE_BASELINES,
    JointTrajectory,
    aligned_precision,
    build_summary,
    estimate_latency_xcorr,
    mae,
    maxae,
    precision,
    xcorr_lag,
)
from isoteleop.metrics import summary_to_csv, summary_to_json


def _traj(values, rate=30.0):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    t = np.arange(values.shape[0]) / rate
    return JointTrajectory(timestamps=t, values=values)


def _smooth(n=300, joints=2, seed=0, rate=30.0):
    rng = np.random.default_rng(seed)
    t = np.arange(n) / rate
    vals = np.zeros((n, joints))
    for j in range(joints):
        for _ in range(3):
            f = rng.uniform(0.2, 1.2)
            vals[:, j] += rng.uniform(0.2, 1.0) * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    return JointTrajectory(timestamps=t, values=vals)


class TestMaeMaxae:
    def test_identical_zero(self):
        a = _smooth()
        assert np.all(mae(a, a) == 0.0)
        assert np.all(maxae(a, a) == 0.0)

    def test_constant_offset(self):
        a = _smooth()
        b = a.with_values(a.values + np.radians(0.5))
        np.testing.assert_allclose(mae(a, b), 0.5, atol=1e-9)
        np.testing.assert_allclose(maxae(a, b), 0.5, atol=1e-9)

    def test_single_spike_maxae(self):
        vals = np.zeros((100, 1))
        a = _traj(vals)
        spiked = vals.copy()
        spiked[40, 0] = np.radians(1.96)
        b = _traj(spiked)
        np.testing.assert_allclose(maxae(a, b)[0], 1.96, atol=1e-9)

    def test_random_pair_against_bruteforce(self):
        rng = np.random.default_rng(77)
        a = _traj(rng.normal(size=(100, 3)))
        b = _traj(rng.normal(size=(100, 3)))
        got_mae, got_max = mae(a, b), maxae(a, b)
        for j in range(3):
            acc = 0.0
            worst = 0.0
            for t in range(100):
                d = abs(a.values[t, j] - b.values[t, j])
                acc += d
                worst = max(worst, d)
            assert abs(got_mae[j] - np.degrees(acc / 100)) < 1e-9
            assert abs(got_max[j] - np.degrees(worst)) < 1e-9
        assert np.all(got_max >= got_mae)

    def test_timestamp_mismatch_reports_index(self):
        a = _smooth()
        t2 = a.timestamps.copy()
        t2[5] += 1e-3
        b = JointTrajectory(timestamps=t2, values=a.values)
        with pytest.raises(ValueError, match="sample 5"):
            mae(a, b)

    def test_joint_count_mismatch(self):
        a = _smooth(joints=2)
        b = _smooth(joints=3)
        with pytest.raises(ValueError, match="joint counts"):
            mae(a, b)


class TestLatencyEstimation:
    def test_identical_zero(self):
        a = _smooth()
        assert estimate_latency_xcorr(a, a, 1.0) == 0.0

    def test_integer_shifts_exact(self):
        a = _smooth(seed=5)
        for k in range(1, 16):
            shifted = np.vstack([np.tile(a.values[0], (k, 1)), a.values[:-k]])
            b = a.with_values(shifted)
            k_int, _ = xcorr_lag(a.values, b.values, 30)
            assert k_int == k

    def test_shift_seconds(self):
        a = _smooth(seed=6)
        b = a.with_values(np.vstack([np.tile(a.values[0], (5, 1)), a.values[:-5]]))
        est = estimate_latency_xcorr(a, b, 1.0)
        assert abs(est - 5 / 30.0) <= 0.5 / 30.0

    def test_fractional_shift_within_half_sample(self):
        # brute-force fine-grid oracle: resample b on a shifted clock and
        # confirm the true minimizing lag is 1.5 samples
        a = _smooth(seed=9, joints=1)
        frac = 1.5 / 30.0
        shifted = a.values_at(a.timestamps - frac)
        b = a.with_values(shifted)

        fine = np.arange(0, 3.01, 0.1)  # lags in samples
        errs = []
        for s in fine:
            moved = b.values_at(a.timestamps + s / 30.0)
            errs.append(np.mean((moved[60:-60] - a.values[60:-60]) ** 2))
        oracle = fine[int(np.argmin(errs))]
        assert abs(oracle - 1.5) <= 0.1 + 1e-9

        est = estimate_latency_xcorr(a, b, 1.0)
        assert abs(est * 30.0 - 1.5) <= 0.5

    def test_symmetry(self):
        a = _smooth(seed=13)
        b = a.with_values(np.vstack([np.tile(a.values[0], (3, 1)), a.values[:-3]]))
        fwd = estimate_latency_xcorr(a, b, 1.0)
        rev = estimate_latency_xcorr(b, a, 1.0)
        assert abs(fwd + rev) <= 0.5 / 30.0

    def test_translation_invariance(self):
        a = _smooth(seed=3)
        b = a.with_values(np.vstack([np.tile(a.values[0], (2, 1)), a.values[:-2]]))
        base = estimate_latency_xcorr(a, b, 1.0)
        moved = estimate_latency_xcorr(
            a.with_values(a.values + 5.0), b.with_values(b.values + 5.0), 1.0
        )
        assert abs(base - moved) < 1e-12

    def test_constant_signal_error(self):
        a = _traj(np.ones(120))
        with pytest.raises(ValueError, match="constant signal"):
            estimate_latency_xcorr(a, a, 1.0)

    def test_max_lag_too_long(self):
        a = _smooth(n=60)
        with pytest.raises(ValueError, match="half the signal duration"):
            estimate_latency_xcorr(a, a, 2.0)


class TestAlignedPrecision:
    def test_identical_zeros(self):
        a = _smooth(n=200)
        report = aligned_precision(a, a, 0.5)
        assert report.estimated_latency_s == 0.0
        assert report.aggregate_mae_deg == 0.0
        assert report.aggregate_maxae_deg == 0.0

    def test_delayed_copy_beats_unaligned(self):
        # gentle degrees-scale signal: sub-sample alignment residual scales
        # with the slope, so the interpolation error bound stays below 0.01 deg
        t = np.arange(400) / 30.0
        vals = np.radians(2.0) * np.sin(2 * np.pi * 0.3 * t)[:, None]
        a = JointTrajectory(timestamps=t, values=vals)
        k = 4
        b = a.with_values(np.vstack([np.tile(vals[0], (k, 1)), vals[:-k]]))
        aligned = aligned_precision(a, b, 0.5)
        unaligned = precision(a, b)
        assert aligned.aggregate_mae_deg < 0.01
        assert unaligned.aggregate_mae_deg > 10 * aligned.aggregate_mae_deg
        assert aligned.sample_count < a.n_samples  # ends truncated

    def test_overlap_too_short(self):
        a = _smooth(n=45)
        with pytest.raises(ValueError, match="1 s"):
            aligned_precision(a, a, 0.6)

    def test_report_invariants(self):
        rng = np.random.default_rng(50)
        a = _smooth(n=300, joints=4, seed=1)
        b = a.with_values(a.values + 0.01 * rng.normal(size=a.values.shape))
        report = aligned_precision(a, b, 0.3)
        assert np.all(report.per_joint_maxae_deg >= report.per_joint_mae_deg)
        assert report.aggregate_maxae_deg == report.per_joint_maxae_deg.max()
        assert abs(report.aggregate_mae_deg - report.per_joint_mae_deg.mean()) < 1e-12


class TestSummary:
    def test_fixture_only_table(self):
        rows = build_summary({})
        assert rows == [
            ("multi_joint", "5dt_glove", 13.10, 32.52),
            ("multi_joint", "manus_glove", 5.96, 13.20),
        ]

    def test_full_layout(self):
        a = _smooth(n=120)
        rep = precision(a, a.with_values(a.values + 0.001))
        rows = build_summary(
            {
                "single_joint_no_mi": rep,
                "single_joint_with_mi": rep,
                "multi_joint": rep,
                "teleoperation": rep,
            }
        )
        assert [(r[0], r[1]) for r in rows] == [
            ("single_joint", "no_mi"),
            ("single_joint", "with_mi"),
            ("multi_joint", "mile"),
            ("multi_joint", "5dt_glove"),
            ("multi_joint", "manus_glove"),
            ("teleoperation", "mile"),
        ]

    def test_csv_and_json_deterministic(self):
        a = _smooth(n=120)
        rep = precision(a, a.with_values(a.values + 0.001))
        rows = build_summary({"multi_joint": rep})
        assert summary_to_csv(rows) == summary_to_csv(rows)
        assert summary_to_json(rows) == summary_to_json(rows)
        csv = summary_to_csv(rows)
        assert csv.splitlines()[0] == "setting,variant,mae_deg,maxae_deg"
        assert "5dt_glove,13.10,32.52" in csv
        assert "manus_glove,5.96,13.20" in csv

    def test_baseline_constants(self):
        assert GLOVE_BASELINES["5dt_glove"] == (13.10, 32.52)
        assert GLOVE_BASELINES["manus_glove"] == (5.96, 13.20)
