"""
Single-photon temporal envelopes and their power spectra.

Envelopes are stored in a frame rotating at the central frequency, so an
optical carrier never has to be resolved on the time grid.  Positive
frequencies follow the physics convention ``E(t) ~ exp(-i 2 pi f t)``, and the
spectral amplitude is ``a(f) = int E(t) exp(+i 2 pi f t) dt``.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import czt

from .quantities import MHZ_NS, TWO_PI, Lifetime, Linewidth, lifetime_to_fwhm


class TruncationError(ValueError):
    """Time grid too short to hold the pulse to the required norm."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform time grid around a pulse peak; extents in units of the pulse lifetime."""

    before: float = 40.0
    after: float = 24.0
    n_points: int = 2 ** 14

    def build(self, tau_ns, peak_time=0.0):
        span = (self.before + self.after) * tau_ns
        dt = span / self.n_points
        n_before = int(round(self.before * tau_ns / dt))
        return peak_time + (np.arange(self.n_points) - n_before) * dt


def _check_uniform(t):
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("time grid must be one-dimensional with at least two points")
    d = np.diff(t)
    if np.any(d <= 0):
        raise ValueError("time grid must be strictly increasing")
    if np.max(np.abs(d - d.mean())) > 1e-12 * max(abs(d.mean()), np.max(np.abs(t))):
        raise ValueError("time grid must be uniform")
    return t


@dataclass(frozen=True)
class Spectrum:
    """Non-negative spectral density sampled on a uniform frequency grid (MHz)."""

    f_grid: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f_grid, dtype=float)
        s = np.asarray(self.density, dtype=float)
        if f.shape != s.shape or f.ndim != 1:
            raise ValueError("frequency grid and density must be 1-D arrays of equal length")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise ValueError("spectral density must be finite and non-negative")
        object.__setattr__(self, "f_grid", f)
        object.__setattr__(self, "density", s)

    @property
    def df(self):
        return self.f_grid[1] - self.f_grid[0]

    def integral(self):
        return float(np.trapezoid(self.density, self.f_grid))

    def normalized(self):
        return Spectrum(self.f_grid, self.density / self.integral())

    def peak_frequency(self):
        return float(self.f_grid[np.argmax(self.density)])

    def half_max_width(self):
        """FWHM from linear interpolation of the outermost half-maximum crossings."""
        return half_max_width(self.f_grid, self.density)

    def to_table(self):
        return ("frequency_mhz", "density_per_mhz"), (self.f_grid, self.density)


def half_max_width(x, y):
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    i_pk = int(np.argmax(y))
    half = 0.5 * y[i_pk]
    above = np.nonzero(y >= half)[0]
    lo, hi = above[0], above[-1]
    if lo == 0 or hi == len(y) - 1:
        raise ValueError("half-maximum crossings are not bracketed by the grid")
    x_lo = np.interp(half, [y[lo - 1], y[lo]], [x[lo - 1], x[lo]])
    x_hi = np.interp(half, [y[hi + 1], y[hi]], [x[hi + 1], x[hi]])
    return float(x_hi - x_lo)


def lorentzian_density(f, center, fwhm):
    """Unit-area Lorentzian density of FWHM ``fwhm`` (same units as ``f``)."""
    hw = 0.5 * fwhm
    return hw / np.pi / ((np.asarray(f, dtype=float) - center) ** 2 + hw ** 2)


@dataclass(frozen=True)
class Wavepacket:
    """
    A unit-norm single-photon pulse.

    ``t_grid`` in ns, ``envelope`` complex in the frame rotating at
    ``central_frequency`` (MHz).  ``sum(|envelope|^2) * dt == 1``.
    """

    t_grid: np.ndarray
    envelope: np.ndarray
    central_frequency: float = 0.0
    spectral_fwhm: Linewidth = field(default=None)

    def __post_init__(self):
        t = _check_uniform(self.t_grid)
        e = np.asarray(self.envelope, dtype=complex)
        if e.shape != t.shape:
            raise ValueError("envelope and time grid differ in length")
        norm = np.sum(np.abs(e) ** 2) * (t[1] - t[0])
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"wavepacket is not unit-normalized (norm {norm:.12g})")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "envelope", e)

    @classmethod
    def from_samples(cls, t_grid, envelope, central_frequency=0.0, spectral_fwhm=None):
        """Normalize arbitrary samples into a Wavepacket."""
        t = _check_uniform(t_grid)
        e = np.asarray(envelope, dtype=complex)
        norm = np.sum(np.abs(e) ** 2) * (t[1] - t[0])
        if norm <= 0:
            raise ValueError("envelope is identically zero")
        return cls(t, e / np.sqrt(norm), central_frequency, spectral_fwhm)

    @property
    def dt(self):
        return self.t_grid[1] - self.t_grid[0]

    def norm(self):
        return float(np.sum(np.abs(self.envelope) ** 2) * self.dt)

    def intensity(self):
        return np.abs(self.envelope) ** 2

    def shifted(self, n_samples):
        """Delay the envelope by an integer number of grid steps (cyclic)."""
        return Wavepacket(self.t_grid, np.roll(self.envelope, n_samples),
                          self.central_frequency, self.spectral_fwhm)

    def with_carrier(self, carrier_mhz):
        """Envelope multiplied by an explicit carrier, for visualization export only."""
        return self.envelope * np.exp(-1j * TWO_PI * MHZ_NS * carrier_mhz * self.t_grid)

    def to_table(self):
        return (("time_ns", "envelope_re", "envelope_im", "intensity_per_ns"),
                (self.t_grid, self.envelope.real, self.envelope.imag, self.intensity()))


def make_rising_exponential(central_frequency, tau, t_grid_spec=None, peak_time=0.0,
                            min_retained=1.0 - 1e-6):
    """
    Time-reversed spontaneous-emission pulse: intensity grows as exp(t/tau)
    up to ``peak_time`` and is cut off sharply afterwards.

    :param central_frequency: MHz
    :param tau: :class:`Lifetime` or ns
    :param t_grid_spec: :class:`GridSpec` (default 2**14 points, 40 tau before, 24 tau after)
    :param peak_time: time of the cutoff, ns
    :param min_retained: minimum fraction of the infinite pulse that must fit on the grid
    """
    tau_ns = tau.tau if isinstance(tau, Lifetime) else float(Lifetime(float(tau)).tau)
    spec = t_grid_spec or GridSpec()
    t = spec.build(tau_ns, peak_time)
    retained = 1.0 - np.exp(-(peak_time - t[0]) / tau_ns)
    if retained < min_retained:
        raise TruncationError(
            f"grid starts {(peak_time - t[0]) / tau_ns:.3g} tau before the peak; "
            f"retained norm {retained:.9f} < {min_retained}")
    s = t - peak_time
    env = np.where(s <= 0, np.exp(0.5 * np.minimum(s, 0.0) / tau_ns), 0.0)
    return Wavepacket.from_samples(t, env, central_frequency, lifetime_to_fwhm(tau_ns))


def spectral_amplitude(w, f_offsets):
    """
    Fourier sum ``a(f) = sum E(t) exp(+i 2 pi f t) dt`` at offsets from the
    central frequency (MHz), in sqrt(ns) units so that ``sum |a|^2 df * 1e-3``
    approximates the norm.  Uniformly spaced offsets go through a chirp-z
    transform; anything else is summed directly.
    """
    f = np.asarray(f_offsets, dtype=float)
    nz = np.nonzero(np.abs(w.envelope) > 0)[0]
    t = w.t_grid[nz[0]:nz[-1] + 1]
    e = w.envelope[nz[0]:nz[-1] + 1]
    k = TWO_PI * MHZ_NS * f.ravel()
    if k.size > 2 and np.allclose(np.diff(k), k[1] - k[0], rtol=1e-9, atol=0):
        dk = k[1] - k[0]
        a = czt(e, m=k.size, w=np.exp(1j * dk * w.dt), a=np.exp(-1j * k[0] * w.dt))
        out = a * np.exp(1j * k * t[0]) * w.dt
    else:
        out = np.empty(k.size, dtype=complex)
        chunk = max(1, 2 ** 22 // len(t))
        for i in range(0, k.size, chunk):
            out[i:i + chunk] = np.exp(1j * np.outer(k[i:i + chunk], t)) @ e * w.dt
    return out.reshape(f.shape)


def spectrum_of(w):
    """
    Power spectrum |a(f)|^2 of a wavepacket, on the FFT frequency grid centred
    at ``w.central_frequency``.  Density is per MHz and integrates to the
    wavepacket norm.
    """
    n = len(w.t_grid)
    a = n * w.dt * np.fft.ifft(w.envelope)
    dens = np.abs(np.fft.fftshift(a)) ** 2 * MHZ_NS
    f = np.fft.fftshift(np.fft.fftfreq(n, d=w.dt)) / MHZ_NS + w.central_frequency
    # round-off can leave -0.0; density is a squared modulus
    return Spectrum(f, np.maximum(dens, 0.0))
