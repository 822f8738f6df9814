"""Reflection and transmission by a two-level emitter in a one-dimensional waveguide."""
import numpy as np

from photonprobe.quantities import fwhm_to_lifetime
from photonprobe.scatter_analytic import (EmitterParams, lorentzian_transmitted_fraction,
                                          reflectance, scatter_fractions, transmittance)
from photonprobe.wavepacket import make_rising_exponential, spectrum_of

# A monochromatic photon on resonance is reflected completely.
print("detuning/gamma   R        T")
for d in (0.0, 0.5, 1.0, 3.0):
    print(f"{d:13.1f} {reflectance(20 * d, 20.0):8.4f} {transmittance(20 * d, 20.0):8.4f}")

# A photon as broad as the transition is split evenly.
photon = make_rising_exponential(0.0, fwhm_to_lifetime(20.0))
fr = scatter_fractions(spectrum_of(photon).normalized(), EmitterParams(0.0, 20.0))
print(f"equal widths: reflected {fr.reflected:.4f}, transmitted {fr.transmitted:.4f}")

# Narrower photons are reflected more completely.
for gs in (40.0, 20.0, 5.0, 1.0):
    t = lorentzian_transmitted_fraction(gs, 20.0)
    print(f"photon width {gs:5.1f} MHz -> transmitted {t:.4f}")

# Imperfect coupling leaks part of the light out of the guide.
em = EmitterParams(0.0, 20.0, 0.6)
r0, t0 = reflectance(0.0, 20.0, em.coupling_efficiency), transmittance(0.0, 20.0, em.coupling_efficiency)
print(f"coupling 0.6 on resonance: R = {r0:.3f}, T = {t0:.3f}, lost = {1 - r0 - t0:.3f}")
print(f"narrow grid check: {np.isclose(lorentzian_transmitted_fraction(20, 20), 0.5)}")
