"""
Frequency-domain scattering of a single photon by a two-level emitter
perfectly coupled to a one-dimensional channel.

For a monochromatic photon detuned by ``d`` (MHz) from an emitter of FWHM
``gamma``, the reflection amplitude is ``r = -a/(a + i d)`` with ``a = gamma/2``
and the transmission amplitude is ``t = 1 + r``.  A coupling efficiency
``eta`` scales the scattered amplitude, ``r_eff = eta * r``.
"""
from dataclasses import dataclass

import numpy as np

from .quantities import Linewidth
from .wavepacket import Spectrum


@dataclass(frozen=True)
class EmitterParams:
    transition_frequency: float  # MHz
    natural_linewidth: Linewidth
    coupling_efficiency: float = 1.0

    def __post_init__(self):
        if not isinstance(self.natural_linewidth, Linewidth):
            object.__setattr__(self, "natural_linewidth", Linewidth(float(self.natural_linewidth)))
        if not 0.0 <= self.coupling_efficiency <= 1.0:
            raise ValueError(f"coupling efficiency must lie in [0, 1], got {self.coupling_efficiency!r}")


@dataclass(frozen=True)
class ScatterFractions:
    reflected: float
    transmitted: float

    def __post_init__(self):
        for name in ("reflected", "transmitted"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1 + 1e-12:
                raise ValueError(f"{name} fraction {v!r} outside [0, 1]")


def reflection_amplitude(detuning, gamma_t, efficiency=1.0):
    """
    :param detuning: photon frequency minus transition frequency, MHz (scalar or array)
    :param gamma_t: emitter FWHM, :class:`Linewidth` or MHz
    :param efficiency: amplitude coupling efficiency
    :return: complex reflection amplitude
    """
    g = gamma_t.fwhm if isinstance(gamma_t, Linewidth) else Linewidth(float(gamma_t)).fwhm
    a = 0.5 * g
    return -efficiency * a / (a + 1j * np.asarray(detuning, dtype=float))


def transmission_amplitude(detuning, gamma_t, efficiency=1.0):
    return 1.0 + reflection_amplitude(detuning, gamma_t, efficiency)


def reflectance(detuning, gamma_t, efficiency=1.0):
    return np.abs(reflection_amplitude(detuning, gamma_t, efficiency)) ** 2


def transmittance(detuning, gamma_t, efficiency=1.0):
    return np.abs(transmission_amplitude(detuning, gamma_t, efficiency)) ** 2


def _require_normalized(incident, tol=1e-6):
    total = incident.integral()
    if abs(total - 1.0) > tol:
        raise ValueError(f"incident spectrum must have unit integral, got {total:.9g}")


def scatter_fractions(incident, emitter, norm_tol=1e-6):
    """
    Integrated reflected and transmitted probabilities of a photon with
    unit-normalized spectrum ``incident`` (trapezoidal quadrature on its grid).
    """
    _require_normalized(incident, norm_tol)
    d = incident.f_grid - emitter.transition_frequency
    eta = emitter.coupling_efficiency
    R = np.trapezoid(reflectance(d, emitter.natural_linewidth, eta) * incident.density,
                     incident.f_grid)
    T = np.trapezoid(transmittance(d, emitter.natural_linewidth, eta) * incident.density,
                     incident.f_grid)
    return ScatterFractions(float(R), float(T))


def output_spectra(incident, emitter):
    """Reflected and transmitted spectra, ``|r|^2 S`` and ``|t|^2 S`` pointwise."""
    d = incident.f_grid - emitter.transition_frequency
    eta = emitter.coupling_efficiency
    refl = reflectance(d, emitter.natural_linewidth, eta) * incident.density
    trans = transmittance(d, emitter.natural_linewidth, eta) * incident.density
    return Spectrum(incident.f_grid, refl), Spectrum(incident.f_grid, trans)


def lorentzian_transmitted_fraction(gamma_s, gamma_t, detuning=0.0):
    """
    Closed form for a Lorentzian photon (FWHM ``gamma_s``) off an ideal emitter:
    reflected = gamma_t/(gamma_s+gamma_t) * L(detuning; FWHM gamma_s+gamma_t),
    normalized so the resonant value is gamma_t/(gamma_s+gamma_t).
    """
    w = gamma_s + gamma_t
    refl = gamma_t / w * (0.5 * w) ** 2 / (detuning ** 2 + (0.5 * w) ** 2)
    return 1.0 - refl
