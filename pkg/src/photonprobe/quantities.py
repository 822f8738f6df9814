"""
Units and closed-form scalar calculators.

Conventions used throughout the package
---------------------------------------
* Every linewidth is an ordinary-frequency full width at half maximum in MHz.
  Angular frequencies never leave this module except as phase evolution in
  :mod:`photonprobe.scatter_numeric`.
* Times are in ns.  A frequency ``f`` in MHz accumulates a phase of
  ``2*pi*f*t*1e-3`` rad over ``t`` ns (1 MHz x 1000 ns = one cycle).
* A Lorentzian line of FWHM ``gamma`` has an intensity 1/e time
  ``tau = 1/(2*pi*gamma)``.
"""
from dataclasses import dataclass

import numpy as np

MHZ_NS = 1e-3  # cycles per (MHz * ns)
TWO_PI = 2.0 * np.pi


class DomainError(ValueError):
    """Input outside the physical domain of a calculator."""


def angular(f_mhz):
    """Angular frequency in rad/ns for an ordinary frequency in MHz."""
    return TWO_PI * MHZ_NS * np.asarray(f_mhz, dtype=float)


def phase(f_mhz, t_ns):
    """Phase in rad accumulated at frequency ``f_mhz`` over ``t_ns``."""
    return angular(f_mhz) * np.asarray(t_ns, dtype=float)


@dataclass(frozen=True)
class Linewidth:
    """Ordinary-frequency FWHM in MHz."""

    fwhm: float

    def __post_init__(self):
        if not np.isfinite(self.fwhm) or self.fwhm <= 0:
            raise DomainError(f"linewidth must be positive, got {self.fwhm!r} MHz")


@dataclass(frozen=True)
class Lifetime:
    """Intensity 1/e decay time in ns."""

    tau: float

    def __post_init__(self):
        if not np.isfinite(self.tau) or self.tau <= 0:
            raise DomainError(f"lifetime must be positive, got {self.tau!r} ns")


@dataclass(frozen=True)
class CrossSectionInput:
    wavelength: float  # m
    gamma0: Linewidth
    gamma_hom: Linewidth

    def __post_init__(self):
        if not np.isfinite(self.wavelength) or self.wavelength <= 0:
            raise DomainError(f"wavelength must be positive, got {self.wavelength!r} m")
        if self.gamma_hom.fwhm < self.gamma0.fwhm:
            raise DomainError(
                "homogeneous width below the natural linewidth "
                f"({self.gamma_hom.fwhm} < {self.gamma0.fwhm} MHz)")


def _as_linewidth(g):
    return g if isinstance(g, Linewidth) else Linewidth(float(g))


def _as_lifetime(t):
    return t if isinstance(t, Lifetime) else Lifetime(float(t))


def fwhm_to_lifetime(g):
    """
    Convert a linewidth (MHz FWHM) to the 1/e lifetime in ns.

    :param g: :class:`Linewidth` or a float in MHz
    :return: :class:`Lifetime`
    """
    g = _as_linewidth(g)
    return Lifetime(1.0 / (TWO_PI * g.fwhm * MHZ_NS))


def lifetime_to_fwhm(t):
    """Inverse of :func:`fwhm_to_lifetime`."""
    t = _as_lifetime(t)
    return Linewidth(1.0 / (TWO_PI * t.tau * MHZ_NS))


def cross_section(inp):
    """
    Extinction cross section of a two-level emitter, 3 lambda^2/(2 pi) * gamma0/gamma_hom.

    Branching into vibrational levels and phonon wings is not modelled; fold it
    into a coupling efficiency downstream.

    :param inp: :class:`CrossSectionInput`
    :return: area in m^2
    """
    ratio = inp.gamma0.fwhm / inp.gamma_hom.fwhm
    return 3.0 * inp.wavelength ** 2 / TWO_PI * ratio


def shot_noise_flux(dip_depth, integration_time, target_snr=1.0):
    """
    Minimum photon flux (1/s) for a fractional dip to reach ``target_snr``
    against Poisson noise: SNR = depth * sqrt(flux * time).
    """
    if not 0 < dip_depth <= 1:
        raise DomainError(f"dip depth must lie in (0, 1], got {dip_depth!r}")
    if integration_time <= 0:
        raise DomainError(f"integration time must be positive, got {integration_time!r} s")
    if target_snr <= 0:
        raise DomainError(f"target SNR must be positive, got {target_snr!r}")
    return (target_snr / dip_depth) ** 2 / integration_time


def shot_noise_depth(flux, integration_time, target_snr=1.0):
    """Smallest dip depth resolvable at ``target_snr``; inverse of :func:`shot_noise_flux`."""
    if flux <= 0 or integration_time <= 0:
        raise DomainError("flux and integration time must be positive")
    return target_snr / np.sqrt(flux * integration_time)
