from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonprobe.campaign import (AmplitudeDecay, CampaignConfig, DriftModel, EstimationError,
                                  ExcitationScan, ReductionError, StarkMap, estimate_v0,
                                  reduce_campaign, run_campaign)
from photonprobe.fitting import lorentzian

STILL = DriftModel(0.0, 0.0)
SMALL = CampaignConfig(cycles=4, scans_per_cycle=10)


@pytest.fixture(scope="module")
def truth():
    from photonprobe.pipeline import reconstruct
    return reconstruct().calibrated


def _scan(v0, rate, background, rng, slope=30.0, n=64, half_v=8.0):
    v = 10.0 + np.linspace(-half_v, half_v, n)
    det = slope * (v - v0)
    expected = lorentzian(det, background, rate, 0.0, 38.0) * 0.05
    counts = expected if rng is None else rng.poisson(expected)
    return ExcitationScan(v, counts, 0.05)


@given(st.floats(6.0, 14.0))
def test_v0_from_noiseless_scan(v0):
    est = estimate_v0(_scan(v0, 2e4, 200.0, None), StarkMap(30.0, 10.0))
    assert est == pytest.approx(v0, abs=1e-6)


def test_v0_at_snr_ten():
    rng = np.random.default_rng(4)
    errs = []
    for _ in range(50):
        # peak counts per point about ten times the background noise
        errs.append(estimate_v0(_scan(10.3, 600.0, 200.0, rng), StarkMap(30.0, 10.0)) - 10.3)
    # 38 MHz line, 30 MHz/V: well under a tenth of a linewidth
    assert np.std(errs) * 30.0 < 3.8
    assert abs(np.mean(errs)) * 30.0 < 1.0


def test_v0_without_peak():
    rng = np.random.default_rng(0)
    with pytest.raises(EstimationError):
        estimate_v0(_scan(10.0, 0.0, 200.0, rng), StarkMap(30.0, 10.0))


def test_stark_map_round_trip():
    m = StarkMap(30.0, 10.0)
    assert m.voltage(m.detuning(12.5)) == pytest.approx(12.5)
    assert m.with_v0(11.0).detuning(11.0) == 0.0


def test_durations_and_dark_split():
    cfg = CampaignConfig()
    assert cfg.scan_duration_s == pytest.approx(32 * 0.05)
    assert cfg.total_duration_s == pytest.approx(36 * 60 + 36 * 80 * 32 * 0.05)
    off = replace(cfg, recalibrate=False)
    assert off.total_duration_s == pytest.approx(60 + 36 * 80 * 32 * 0.05)
    assert cfg.dark_counts_per_pixel() == pytest.approx(2e4)
    with pytest.raises(ValueError):
        CampaignConfig(steps_per_scan=1)


def test_amplitude_decay():
    d = AmplitudeDecay(0.5)
    assert d(0.0, 10.0) == 1.0
    assert d(10.0, 10.0) == pytest.approx(0.5)
    assert d(5.0, 0.0) == 1.0


@settings(max_examples=10)
@given(seed=st.integers(0, 2 ** 63))
def test_same_seed_same_trace(truth, seed):
    a = run_campaign(SMALL, truth, seed)
    b = run_campaign(SMALL, truth, seed)
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.detuning, b.detuning)


def test_different_seeds_differ(truth):
    assert not np.array_equal(run_campaign(SMALL, truth, 1).counts,
                              run_campaign(SMALL, truth, 2).counts)


def test_drift_setting_does_not_change_shot_noise(truth):
    # the count stream is independent of the drift stream
    a = run_campaign(replace(SMALL, drift=STILL), truth, 3)
    b = run_campaign(SMALL, truth, 3)
    assert np.array_equal(a.dark_counts, b.dark_counts)


def test_counts_are_poisson_around_expectation(truth):
    cfg = replace(SMALL, signal_rate_hz=2000.0)
    tr = run_campaign(cfg, truth)
    mu = tr.expected_rate * cfg.residence_time_s
    n = mu.size
    # sum of Poisson counts: mean within 5 sigma, dispersion index near 1
    assert abs(tr.counts.sum() - mu.sum()) < 5 * np.sqrt(mu.sum())
    disp = np.sum((tr.counts - mu) ** 2 / mu) / n
    assert disp == pytest.approx(1.0, abs=5 * np.sqrt(2.0 / n))


def test_dark_subtraction_unbiased(truth):
    cfg = replace(CampaignConfig(), drift=STILL)
    bases = []
    for seed in range(20):
        meas = reduce_campaign(run_campaign(cfg, truth, seed))
        bases.append(meas.meta["baseline_counts"])
    tt = np.linspace(0, cfg.total_duration_s, 20001)
    mean_decay = np.mean(cfg.amplitude_decay(tt, cfg.total_duration_s))
    visits = cfg.cycles * cfg.scans_per_cycle * cfg.residence_time_s
    # the signal decays only while scanning; the calibration pauses are short
    expected = cfg.signal_rate_hz * visits * mean_decay
    assert np.mean(bases) == pytest.approx(expected, rel=0.01)


def test_calibration_tracks_drift(truth):
    cfg = replace(CampaignConfig(), calib_peak_rate_hz=1e6)
    tr = run_campaign(cfg, truth)
    err = (tr.v0_estimates - tr.v0_true) * cfg.stark_slope_mhz_per_v
    assert np.all(tr.calibrated)
    # between calibrations the random walk adds at most a few MHz
    assert np.max(np.abs(err)) < 5.0
    off = run_campaign(replace(cfg, recalibrate=False), truth)
    assert off.calibrated.sum() == 1
    assert np.all(off.v0_estimates == off.v0_estimates[0])


def test_reduction_grid_and_dark(truth):
    cfg = CampaignConfig()
    tr = run_campaign(cfg, truth)
    meas = reduce_campaign(tr)
    assert meas.detuning_grid.size >= cfg.steps_per_scan
    assert np.all(np.diff(meas.detuning_grid) > 0)
    assert meas.meta["visits_per_pixel"].sum() == tr.counts.size
    np.testing.assert_allclose(meas.sigma, np.sqrt(meas.raw_counts) / meas.meta["baseline_counts"])


def test_empty_and_dark_only_traces(truth):
    tr = run_campaign(replace(SMALL, cycles=0), truth)
    assert tr.empty and "empty" in tr.flags
    with pytest.raises(ReductionError):
        reduce_campaign(tr)
    dark = replace(SMALL, signal_rate_hz=0.0)
    with pytest.raises(ReductionError):
        reduce_campaign(run_campaign(dark, truth))


def test_trace_table_shape(truth):
    tr = run_campaign(SMALL, truth)
    names, cols = tr.to_table()
    assert names[0] == "cycle" and names[-1] == "counts"
    assert all(len(c) == tr.counts.size for c in cols)
