import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonprobe.fitting import lorentzian
from photonprobe.pipeline import (CalibrationError, ExtinctionSpectrum, LaserReference,
                                  SourceModel, calibrate, calibrated_amplitude,
                                  compare_to_measurement, default_detunings,
                                  effective_source_spectrum, extinction_sweep,
                                  extinction_sweep_monte_carlo, reconstruct)
from photonprobe.scatter_analytic import EmitterParams, lorentzian_transmitted_fraction

TARGET = EmitterParams(0.0, 20.0)


def test_effective_linewidth_adds_jitter():
    assert SourceModel(20.0, 18.0).effective_linewidth == 38.0
    s = effective_source_spectrum(SourceModel(20.0, 18.0), 5.0)
    assert s.integral() == pytest.approx(1.0)
    assert s.half_max_width() == pytest.approx(38.0, rel=1e-3)


@settings(max_examples=20)
@given(st.floats(2.0, 80.0), st.floats(0.0, 40.0))
def test_sweep_width_is_sum_of_widths(gs, jitter):
    src = SourceModel(gs, jitter)
    det = default_detunings(src.effective_linewidth + 20.0, 6, 0.5)
    sweep = extinction_sweep(src, TARGET, det)
    fit = sweep.fit()
    assert fit["fwhm"] == pytest.approx(src.effective_linewidth + 20.0, rel=2e-3)
    assert fit.extras["depth"] == pytest.approx(20.0 / (src.effective_linewidth + 20.0), rel=5e-3)


def test_sweep_matches_closed_form():
    det = np.linspace(-100, 100, 41)
    sweep = extinction_sweep(SourceModel(38.0, 0.0), TARGET, det)
    np.testing.assert_allclose(sweep.normalized_intensity,
                               lorentzian_transmitted_fraction(38.0, 20.0, det), atol=5e-4)


def test_monte_carlo_jitter_agrees_with_convolution():
    det = np.linspace(-150, 150, 13)
    src = SourceModel(20.0, 18.0)
    conv = extinction_sweep(src, TARGET, det)
    mc = extinction_sweep_monte_carlo(src, TARGET, det, n_samples=200000, rng=1)
    np.testing.assert_allclose(mc.normalized_intensity, conv.normalized_intensity, atol=5e-3)


def test_center_shift_moves_axis():
    det = np.linspace(-50, 50, 11)
    a = extinction_sweep(SourceModel(), TARGET, det)
    b = extinction_sweep(SourceModel(), TARGET, det, center_shift=7.0)
    np.testing.assert_allclose(b.detuning_grid, a.detuning_grid + 7.0)
    np.testing.assert_array_equal(a.normalized_intensity, b.normalized_intensity)


@given(st.floats(0.01, 0.5), st.floats(5.0, 50.0), st.floats(10.0, 200.0), st.floats(0.5, 1.0))
def test_calibration_preserves_area(amp, w_ref, w, c):
    ref = LaserReference(amp, w_ref, c)
    assert calibrated_amplitude(ref, w) * w == pytest.approx(amp * w_ref * c)
    assert calibrated_amplitude(ref, w, drift_correction=False) * w == pytest.approx(amp * w_ref)


def test_calibrate_keeps_width_and_sets_depth():
    uncal = extinction_sweep(SourceModel(), TARGET)
    cal = calibrate(uncal, LaserReference())
    fu, fc = uncal.fit(), cal.fit()
    assert fc["fwhm"] == pytest.approx(fu["fwhm"], rel=1e-6)
    assert fc.extras["depth"] == pytest.approx(0.093 * 20 / fu["fwhm"] * 0.92, rel=1e-6)


def test_calibrate_rejects_peak():
    x = np.linspace(-100, 100, 101)
    bump = ExtinctionSpectrum(x, np.clip(lorentzian(x, 0.9, 0.1, 0, 30), 0, 1.05))
    with pytest.raises(CalibrationError):
        calibrate(bump, LaserReference())
    with pytest.raises(CalibrationError):
        calibrated_amplitude(LaserReference(), 0.0)


def test_no_drift_correction_amplitude():
    rec = reconstruct(drift_correction=False)
    assert 100 * rec.amplitude == pytest.approx(3.21, abs=0.01)


def test_spectrum_validation():
    x = np.linspace(-1, 1, 5)
    with pytest.raises(ValueError):
        ExtinctionSpectrum(x, np.full(5, 1.2))
    with pytest.raises(ValueError):
        ExtinctionSpectrum(x, np.ones(4))
    # noisy points may stray past the bounds by their uncertainty
    ExtinctionSpectrum(x, np.full(5, 1.08), sigma=np.full(5, 0.01))
    ExtinctionSpectrum(x, np.zeros(5))


def test_compare_identical_spectra(reconstruction):
    rep = compare_to_measurement(reconstruction.calibrated, reconstruction.calibrated)
    assert rep.residual_norm == 0.0
    assert rep.fwhm_gap == pytest.approx(0.0, abs=1e-9)
    assert rep.center_offset == pytest.approx(0.0, abs=1e-9)
    d = rep.as_dict()
    assert {"model", "measured", "residual_norm"} <= set(d)


def test_compare_requires_overlap(reconstruction):
    far = ExtinctionSpectrum(np.linspace(1e4, 1e4 + 100, 20), np.ones(20))
    with pytest.raises(ValueError):
        compare_to_measurement(reconstruction.calibrated, far)


def test_reference_validation():
    with pytest.raises(ValueError):
        LaserReference(1.5)
    with pytest.raises(ValueError):
        LaserReference(0.1, 20.0, 0.0)
    with pytest.raises(ValueError):
        SourceModel(-1.0)
