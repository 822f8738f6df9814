"""
Synthetic extinction-measurement campaign.

The source frequency is Stark-tuned across the target line in scans of
``steps_per_scan`` voltage steps.  A cycle starts with a fluorescence
excitation scan that locates the resonance voltage ``V0``, followed by
``scans_per_cycle`` extinction scans centred on that estimate.  Between
calibrations the source-target detuning drifts (linear + random walk) and
the signal decays slowly.  Counts are Poisson with the signal and dark
contributions sampled separately, so the accumulated dark counts are known.

Detuning at voltage ``V`` and time ``t``::

    detuning = slope * (V - v0_initial) + drift(t)

Independent random streams for drift, calibration scans, signal counts and
dark counts are spawned from the seed, so runs that differ only in drift or
recalibration settings share their dark counts and draw signal counts from
the same stream.
"""
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .fitting import DegenerateDataError, FitError, fit_lorentzian
from .pipeline import ExtinctionSpectrum


class EstimationError(RuntimeError):
    """Excitation scan has no resolvable peak."""


class ReductionError(ValueError):
    """Trace carries no usable signal."""


@dataclass(frozen=True)
class DriftModel:
    linear_mhz_per_s: float = 0.005
    walk_mhz_per_scan: float = 0.3  # Gaussian step std, one step per scan


@dataclass(frozen=True)
class AmplitudeDecay:
    """Exponential decay of the signal to ``final_fraction`` at the end of the campaign."""

    final_fraction: float = 0.5

    def __call__(self, t, total):
        if total <= 0:
            return np.ones_like(np.asarray(t, dtype=float))
        return self.final_fraction ** (np.asarray(t, dtype=float) / total)


@dataclass(frozen=True)
class CampaignConfig:
    steps_per_scan: int = 32
    residence_time_s: float = 0.05
    scans_per_cycle: int = 80
    cycles: int = 36
    stark_slope_mhz_per_v: float = 30.0
    scan_half_span_mhz: float = 240.0
    signal_rate_hz: float = 3000.0
    # 2e4 dark counts per pixel over 36 cycles x 80 scans x 50 ms
    dark_rate_hz: float = 2.0e4 / (36 * 80 * 0.05)
    drift: DriftModel = field(default_factory=DriftModel)
    amplitude_decay: AmplitudeDecay = field(default_factory=AmplitudeDecay)
    recalibrate: bool = True
    v0_initial_v: float = 10.0
    calibration_time_s: float = 60.0
    calib_steps: int = 64
    calib_residence_s: float = 0.05
    calib_half_span_mhz: float = 240.0
    calib_peak_rate_hz: float = 2.0e4
    calib_background_rate_hz: float = 200.0
    calib_fwhm_mhz: float = 38.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.steps_per_scan < 2:
            raise ValueError("steps_per_scan must be at least 2")
        if self.calib_steps < 8:
            raise ValueError("calib_steps must be at least 8")
        for name in ("residence_time_s", "calib_residence_s", "scan_half_span_mhz",
                     "calib_half_span_mhz", "calib_fwhm_mhz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("scans_per_cycle", "cycles", "signal_rate_hz", "dark_rate_hz",
                     "calibration_time_s", "calib_peak_rate_hz", "calib_background_rate_hz"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.stark_slope_mhz_per_v == 0:
            raise ValueError("Stark slope must be non-zero")
        if not 0 < self.amplitude_decay.final_fraction <= 1:
            raise ValueError("amplitude decay final fraction must lie in (0, 1]")
        if self.drift.walk_mhz_per_scan < 0:
            raise ValueError("random-walk step must be non-negative")

    @property
    def scan_duration_s(self):
        return self.steps_per_scan * self.residence_time_s

    @property
    def total_duration_s(self):
        if self.cycles == 0:
            return 0.0
        # the first cycle is always calibrated
        n_cal = self.cycles if self.recalibrate else 1
        return n_cal * self.calibration_time_s + self.cycles * self.scans_per_cycle * self.scan_duration_s

    def step_offsets_mhz(self):
        return np.linspace(-self.scan_half_span_mhz, self.scan_half_span_mhz, self.steps_per_scan)

    def dark_counts_per_pixel(self):
        return self.dark_rate_hz * self.cycles * self.scans_per_cycle * self.residence_time_s

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class StarkMap:
    """Linear voltage-to-detuning map, ``detuning = slope * (V - v0)``."""

    slope: float
    v0: float = 0.0

    def __post_init__(self):
        if self.slope == 0:
            raise ValueError("Stark slope must be non-zero")

    def detuning(self, voltage):
        return self.slope * (np.asarray(voltage, dtype=float) - self.v0)

    def voltage(self, detuning):
        return self.v0 + np.asarray(detuning, dtype=float) / self.slope

    def with_v0(self, v0):
        return replace(self, v0=float(v0))


@dataclass(frozen=True)
class ExcitationScan:
    voltage: np.ndarray
    counts: np.ndarray
    residence_time_s: float


def estimate_v0(scan, stark_map, min_significance=3.0):
    """
    Resonance voltage from a fluorescence excitation scan: Lorentzian fit of
    the counts against ``slope * V`` and conversion of the fitted centre back to
    volts.  ``stark_map.v0`` is ignored.

    :raises EstimationError: no significant peak inside the scanned range
    """
    f = stark_map.slope * np.asarray(scan.voltage, dtype=float)
    y = np.asarray(scan.counts, dtype=float)
    try:
        fit = fit_lorentzian(f, y, weights=1.0 / np.maximum(y, 1.0))
    except (DegenerateDataError, FitError) as exc:
        raise EstimationError(f"excitation scan has no resolvable peak: {exc}") from None
    amp, err = fit["amplitude"], fit.error("amplitude")
    if not (amp > 0 and amp > min_significance * err):
        raise EstimationError(f"excitation peak not significant (amplitude {amp:.4g} +- {err:.2g})")
    if not f.min() <= fit["center"] <= f.max():
        raise EstimationError("fitted excitation peak lies outside the scanned range")
    return float(fit["center"] / stark_map.slope)


@dataclass
class CountTrace:
    """
    Campaign record; arrays are shaped (cycle, scan, step).  ``detuning`` is the
    true source-target detuning, ``dark_counts`` the dark part of ``counts``.
    """

    config: CampaignConfig
    voltage: np.ndarray
    detuning: np.ndarray
    time: np.ndarray
    expected_rate: np.ndarray
    counts: np.ndarray
    dark_counts: np.ndarray
    v0_estimates: np.ndarray
    v0_true: np.ndarray
    calibrated: np.ndarray
    flags: list = field(default_factory=list)

    @property
    def empty(self):
        return self.counts.size == 0

    def dark_counts_per_pixel(self):
        return self.dark_counts.sum(axis=(0, 1))

    def to_table(self):
        c, s, k = np.indices(self.counts.shape)
        return (("cycle", "scan", "step", "voltage", "detuning_mhz", "counts"),
                (c.ravel(), s.ravel(), k.ravel(), self.voltage.ravel(), self.detuning.ravel(),
                 self.counts.ravel()))


def _excitation_scan(cfg, stark, center_v, drift_mhz, decay, rng):
    half_v = cfg.calib_half_span_mhz / abs(cfg.stark_slope_mhz_per_v)
    v = center_v + np.linspace(-half_v, half_v, cfg.calib_steps)
    det = stark.detuning(v) + drift_mhz
    h = 0.5 * cfg.calib_fwhm_mhz
    rate = cfg.calib_peak_rate_hz * decay * h * h / (det * det + h * h) + cfg.calib_background_rate_hz
    return ExcitationScan(v, rng.poisson(rate * cfg.calib_residence_s), cfg.calib_residence_s)


def run_campaign(cfg, truth, seed=None):
    """
    Simulate the protocol against a calibrated dip ``truth``.

    :param truth: :class:`ExtinctionSpectrum`; its profile (1 outside the grid) multiplies the signal
    :param seed: overrides ``cfg.rng_seed``
    :return: :class:`CountTrace`; degenerate configurations give an empty trace flagged ``"empty"``
    """
    seed = cfg.rng_seed if seed is None else seed
    drift_rng, calib_rng, count_rng, dark_rng = (np.random.default_rng(s)
                                                 for s in np.random.SeedSequence(seed).spawn(4))
    C, S, K = cfg.cycles, cfg.scans_per_cycle, cfg.steps_per_scan
    stark = StarkMap(cfg.stark_slope_mhz_per_v, cfg.v0_initial_v)
    offsets_v = cfg.step_offsets_mhz() / cfg.stark_slope_mhz_per_v
    total = cfg.total_duration_s
    shape = (C, S, K)
    voltage = np.zeros(shape)
    time = np.zeros(shape)
    walk_at = np.zeros(shape)
    v0_est = np.zeros(C)
    v0_true = np.zeros(C)
    calibrated = np.zeros(C, dtype=bool)
    walk = 0.0
    t = 0.0
    current = cfg.v0_initial_v
    lin = cfg.drift.linear_mhz_per_s
    for c in range(C):
        if c == 0 or cfg.recalibrate:
            t_cal = t + 0.5 * cfg.calibration_time_s
            drift_now = lin * t_cal + walk
            scan = _excitation_scan(cfg, stark, current, drift_now,
                                    cfg.amplitude_decay(t_cal, total), calib_rng)
            current = estimate_v0(scan, stark)
            calibrated[c] = True
            t += cfg.calibration_time_s
        v0_est[c] = current
        v0_true[c] = cfg.v0_initial_v - (lin * t + walk) / cfg.stark_slope_mhz_per_v
        for s in range(S):
            walk += cfg.drift.walk_mhz_per_scan * drift_rng.standard_normal()
            walk_at[c, s] = walk
            voltage[c, s] = current + offsets_v
            time[c, s] = t + (np.arange(K) + 0.5) * cfg.residence_time_s
            t += cfg.scan_duration_s
    detuning = stark.detuning(voltage) + lin * time + walk_at
    signal = cfg.signal_rate_hz * cfg.amplitude_decay(time, total) * truth.profile(detuning)
    expected = signal + cfg.dark_rate_hz
    sig_counts = count_rng.poisson(signal * cfg.residence_time_s)
    dark = dark_rng.poisson(np.full(shape, cfg.dark_rate_hz * cfg.residence_time_s))
    flags = [] if C * S else ["empty"]
    return CountTrace(cfg, voltage, detuning, time, expected, sig_counts + dark, dark,
                      v0_est, v0_true, calibrated, flags)


def reduce_campaign(trace):
    """
    Bin every step by its nominal detuning ``slope * (V - V0_estimate)``,
    subtract the expected dark counts and normalize to the fitted off-resonant
    baseline (outer-point mean if the fit fails).

    :raises ReductionError: empty trace or no signal above the dark level
    """
    if trace.empty:
        raise ReductionError("trace is empty")
    cfg = trace.config
    nominal = cfg.stark_slope_mhz_per_v * (trace.voltage - trace.v0_estimates[:, None, None])
    key = np.round(nominal.ravel(), 6)
    det, inv = np.unique(key, return_inverse=True)
    raw = np.bincount(inv, weights=trace.counts.ravel().astype(float))
    visits = np.bincount(inv)
    dark = cfg.dark_rate_hz * cfg.residence_time_s * visits
    signal = raw - dark
    if not np.any(signal > 0) or signal.sum() <= 3.0 * np.sqrt(max(raw.sum(), 1.0)):
        raise ReductionError("no signal above the dark-count level")
    baseline = None
    if len(det) >= 8:
        try:
            fit = fit_lorentzian(det, signal, weights=1.0 / np.maximum(raw, 1.0))
            if fit["baseline"] > 0:
                baseline = fit["baseline"]
        except (DegenerateDataError, FitError):
            pass
    if baseline is None:
        n_edge = max(1, len(det) // 8)
        baseline = float(np.mean(np.concatenate((signal[:n_edge], signal[-n_edge:]))))
        if baseline <= 0:
            raise ReductionError("off-resonant baseline is not positive")
    y = signal / baseline
    sigma = np.sqrt(np.maximum(raw, 1.0)) / baseline
    meta = {"stage": "measured", "baseline_counts": baseline, "visits_per_pixel": visits,
            "dark_counts_per_pixel": dark}
    return ExtinctionSpectrum(det, y, raw, dark, sigma, meta=meta)
