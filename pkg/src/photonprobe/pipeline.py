"""
Reconstruction of a single-photon extinction spectrum.

A source photon of natural linewidth ``gamma_n`` whose centre frequency
wanders with a Lorentzian jitter of FWHM ``gamma_j`` has an effective
Lorentzian spectrum of FWHM ``gamma_n + gamma_j``.  Sweeping it across a
target of FWHM ``gamma_t`` gives a Lorentzian dip of FWHM
``gamma_n + gamma_j + gamma_t``.  The dip depth is then calibrated by equating
its area with the area of the dip recorded with a narrow laser, optionally
scaled by a drift correction.
"""
from dataclasses import dataclass, field

import numpy as np

from .fitting import fit_lorentzian
from .scatter_analytic import (EmitterParams, lorentzian_transmitted_fraction, reflectance,
                               transmittance)
from .wavepacket import Spectrum, lorentzian_density


class CalibrationError(ValueError):
    pass


def _fwhm(v):
    return float(getattr(v, "fwhm", v))


@dataclass(frozen=True)
class SourceModel:
    """Source photon linewidth and centre-frequency jitter, MHz FWHM (0 = monochromatic)."""

    natural_linewidth: float = 20.0
    jitter_fwhm: float = 18.0

    def __post_init__(self):
        object.__setattr__(self, "natural_linewidth", _fwhm(self.natural_linewidth))
        object.__setattr__(self, "jitter_fwhm", _fwhm(self.jitter_fwhm))
        if self.natural_linewidth < 0 or self.jitter_fwhm < 0:
            raise ValueError("source linewidths must be non-negative")

    @property
    def effective_linewidth(self):
        return self.natural_linewidth + self.jitter_fwhm


@dataclass(frozen=True)
class LaserReference:
    """Extinction dip recorded with a narrow laser."""

    dip_amplitude: float = 0.093
    dip_fwhm: float = 20.0
    drift_correction: float = 0.92

    def __post_init__(self):
        object.__setattr__(self, "dip_fwhm", _fwhm(self.dip_fwhm))
        if not 0 < self.dip_amplitude < 1:
            raise ValueError(f"dip amplitude must lie in (0, 1), got {self.dip_amplitude!r}")
        if not 0 < self.drift_correction <= 1:
            raise ValueError(f"drift correction must lie in (0, 1], got {self.drift_correction!r}")
        if self.dip_fwhm <= 0:
            raise ValueError("dip FWHM must be positive")


@dataclass(frozen=True)
class ExtinctionSpectrum:
    """
    Normalized detected intensity versus detuning (MHz); 1 means no extinction.

    ``raw_counts`` and ``dark_counts`` are total counts per point before and
    the dark counts subtracted; ``sigma`` is the one-sigma uncertainty of
    ``normalized_intensity``.
    """

    detuning_grid: np.ndarray
    normalized_intensity: np.ndarray
    raw_counts: np.ndarray = None
    dark_counts: np.ndarray = None
    sigma: np.ndarray = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.detuning_grid, dtype=float)
        y = np.asarray(self.normalized_intensity, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("detuning grid and intensity must be 1-D arrays of equal length")
        object.__setattr__(self, "detuning_grid", x)
        object.__setattr__(self, "normalized_intensity", y)
        for name in ("raw_counts", "dark_counts", "sigma"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                if v.shape != x.shape:
                    raise ValueError(f"{name} must match the detuning grid")
                object.__setattr__(self, name, v)
        # zero is reachable: a monochromatic probe on an ideal emitter is fully extinguished.
        # Measured points may scatter past the bounds by their counting noise.
        slack = 0.0 if self.sigma is None else 5.0 * self.sigma
        if not np.all(np.isfinite(y)) or not np.all((y >= -slack) & (y <= 1.05 + slack)):
            raise ValueError("normalized intensity must lie in [0, 1.05]")

    @property
    def dip(self):
        return 1.0 - self.normalized_intensity

    def profile(self, detuning):
        """Normalized intensity interpolated at arbitrary detunings (1 outside the grid)."""
        return np.interp(detuning, self.detuning_grid, self.normalized_intensity,
                         left=1.0, right=1.0)

    def signal_counts(self):
        if self.raw_counts is None:
            return None
        dark = 0.0 if self.dark_counts is None else self.dark_counts
        return self.raw_counts - dark

    def fit(self, fixed=None):
        """Lorentzian fit, inverse-variance weighted when ``sigma`` is known."""
        w = None if self.sigma is None else 1.0 / np.maximum(self.sigma, 1e-300) ** 2
        return fit_lorentzian(self.detuning_grid, self.normalized_intensity, weights=w, fixed=fixed)

    def to_table(self):
        names = ["detuning_mhz", "normalized_intensity"]
        cols = [self.detuning_grid, self.normalized_intensity]
        for name in ("raw_counts", "dark_counts", "sigma"):
            v = getattr(self, name)
            if v is not None:
                names.append(name)
                cols.append(v)
        return tuple(names), tuple(cols)


def default_detunings(fwhm_mhz=58.0, half_span_widths=5.0, step=1.0):
    half = np.ceil(half_span_widths * fwhm_mhz / step) * step
    return np.arange(-half, half + 0.5 * step, step)


def effective_source_spectrum(src, center, half_span_widths=100.0, points_per_width=40,
                              normalize=True):
    """
    Lorentzian source spectrum of FWHM ``natural + jitter`` centred at ``center``
    (MHz), renormalized to unit area on its finite grid unless ``normalize`` is false.
    """
    w = src.effective_linewidth
    if w <= 0:
        raise ValueError("a monochromatic source has no spectral density")
    step = w / points_per_width
    n = int(np.ceil(half_span_widths * points_per_width))
    f = center + step * np.arange(-n, n + 1)
    spec = Spectrum(f, lorentzian_density(f, center, w))
    return spec.normalized() if normalize else spec


def extinction_sweep(src, target, detunings=None, center_shift=0.0, **grid):
    """
    Uncalibrated extinction spectrum: ``1 - transmitted fraction`` of the
    effective source spectrum through the target for each detuning
    (source centre minus target transition, MHz).

    :param center_shift: optional offset added to the detuning axis (MHz)
    """
    if detunings is None:
        detunings = default_detunings(src.effective_linewidth + target.natural_linewidth.fwhm)
    detunings = np.asarray(detunings, dtype=float)
    f_t = target.transition_frequency
    if src.effective_linewidth == 0:
        trans = transmittance(detunings, target.natural_linewidth, target.coupling_efficiency)
    else:
        # |t|^2 = 1 - (2 eta - eta^2) |r/eta|^2.  Integrating the reflected part
        # against the exact (unnormalized) source line makes the grid truncation
        # error fall off as 1/span^3 instead of 1/span.
        eta = target.coupling_efficiency
        trans = np.empty_like(detunings)
        for i, d in enumerate(detunings):
            spec = effective_source_spectrum(src, f_t + d, normalize=False, **grid)
            refl = np.trapezoid(reflectance(spec.f_grid - f_t, target.natural_linewidth)
                                * spec.density, spec.f_grid)
            trans[i] = 1.0 - (2 * eta - eta * eta) * refl
    return ExtinctionSpectrum(detunings + center_shift, trans,
                              meta={"stage": "uncalibrated",
                                    "source_fwhm_mhz": src.effective_linewidth,
                                    "target_fwhm_mhz": target.natural_linewidth.fwhm})


def extinction_sweep_monte_carlo(src, target, detunings, n_samples=20000, rng=None):
    """
    Cross-check of :func:`extinction_sweep` that samples the jitter instead of
    convolving it: each photon gets a Cauchy-distributed centre offset and the
    closed-form Lorentzian transmitted fraction is averaged.
    """
    rng = np.random.default_rng(rng)
    offsets = 0.5 * src.jitter_fwhm * rng.standard_cauchy(n_samples)
    eta2 = 2 * target.coupling_efficiency - target.coupling_efficiency ** 2
    out = np.empty(len(detunings))
    for i, d in enumerate(detunings):
        T = lorentzian_transmitted_fraction(src.natural_linewidth, target.natural_linewidth.fwhm,
                                            d + offsets)
        out[i] = 1.0 - eta2 * (1.0 - np.mean(T))
    return ExtinctionSpectrum(np.asarray(detunings, dtype=float), out)


def calibrated_amplitude(ref, uncal_fwhm, drift_correction=True):
    """Dip amplitude with the laser-dip area: ``A_ref * (w_ref / w) * c_drift``."""
    if uncal_fwhm <= 0:
        raise CalibrationError(f"degenerate dip width {uncal_fwhm!r} MHz")
    c = ref.drift_correction if drift_correction else 1.0
    return ref.dip_amplitude * ref.dip_fwhm / uncal_fwhm * c


def calibrate(uncal, ref, drift_correction=True):
    """
    Rescale the dip of ``uncal`` so its Lorentzian area equals the laser-dip
    area times the drift correction.

    :raises CalibrationError: if the Lorentzian fit of ``uncal`` is degenerate
    """
    fit = uncal.fit()
    if not fit["fwhm"] > 0 or fit["amplitude"] >= 0:
        raise CalibrationError("uncalibrated spectrum has no Lorentzian dip")
    target = calibrated_amplitude(ref, fit["fwhm"], drift_correction)
    k = target / fit.extras["depth"]
    dip = (fit["baseline"] - uncal.normalized_intensity) / fit["baseline"]
    meta = dict(uncal.meta, stage="calibrated", uncal_fwhm_mhz=fit["fwhm"],
                uncal_depth=fit.extras["depth"], calibrated_amplitude=target,
                drift_correction=ref.drift_correction if drift_correction else 1.0)
    return ExtinctionSpectrum(uncal.detuning_grid, 1.0 - k * dip, meta=meta)


@dataclass
class ComparisonReport:
    model_fit: object
    measured_fit: object
    center_offset: float
    amplitude_gap: float
    fwhm_gap: float
    residual_norm: float

    def as_dict(self):
        return {"model": self.model_fit.as_dict(), "measured": self.measured_fit.as_dict(),
                "center_offset_mhz": self.center_offset,
                "amplitude_gap": self.amplitude_gap,
                "fwhm_gap_mhz": self.fwhm_gap,
                "residual_norm": self.residual_norm}


def compare_to_measurement(calibrated, measured):
    """
    Fit both spectra and report the differences.  ``residual_norm`` is the RMS
    of measured minus model on the measured grid.
    """
    lo = max(calibrated.detuning_grid.min(), measured.detuning_grid.min())
    hi = min(calibrated.detuning_grid.max(), measured.detuning_grid.max())
    if lo >= hi:
        raise ValueError("spectra do not overlap in detuning")
    mf = calibrated.fit()
    sf = measured.fit()
    model_on_meas = np.interp(measured.detuning_grid, calibrated.detuning_grid,
                              calibrated.normalized_intensity)
    inside = (measured.detuning_grid >= lo) & (measured.detuning_grid <= hi)
    resid = measured.normalized_intensity[inside] - model_on_meas[inside]
    return ComparisonReport(mf, sf, sf["center"] - mf["center"],
                            sf.extras["depth"] - mf.extras["depth"],
                            sf["fwhm"] - mf["fwhm"], float(np.sqrt(np.mean(resid ** 2))))


@dataclass
class Reconstruction:
    uncalibrated: ExtinctionSpectrum
    calibrated: ExtinctionSpectrum
    fit: object

    @property
    def amplitude(self):
        return self.fit.extras["depth"]

    @property
    def fwhm(self):
        return self.fit["fwhm"]


def reconstruct(src=None, target=None, ref=None, detunings=None, drift_correction=True,
                center_shift=0.0):
    """
    Sweep, calibrate and fit.  Omitted arguments take the reference values:
    20 MHz source with 18 MHz jitter, 20 MHz target, 9.3 % / 20 MHz laser dip.
    """
    src = src or SourceModel()
    target = target or EmitterParams(0.0, 20.0)
    ref = ref or LaserReference()
    uncal = extinction_sweep(src, target, detunings, center_shift)
    cal = calibrate(uncal, ref, drift_correction)
    return Reconstruction(uncal, cal, cal.fit())
