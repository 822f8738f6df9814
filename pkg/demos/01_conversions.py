"""Linewidths, lifetimes, the resonant cross section and shot-noise budgets."""
from photonprobe.quantities import (CrossSectionInput, Linewidth, cross_section, fwhm_to_lifetime,
                                    lifetime_to_fwhm, shot_noise_depth, shot_noise_flux)

# A 20 MHz wide transition decays with tau = 1/(2 pi gamma).
tau = fwhm_to_lifetime(20.0)
print(f"20 MHz linewidth -> lifetime {tau.tau:.4f} ns")
print(f"4.2 ns lifetime  -> linewidth {lifetime_to_fwhm(4.2).fwhm:.3f} MHz")

# Homogeneous broadening beyond the natural width shrinks the cross section.
for ratio in (1.0, 2.0, 10.0):
    s = cross_section(CrossSectionInput(589e-9, Linewidth(1.0), Linewidth(ratio)))
    print(f"sigma(589 nm, gamma_hom/gamma0 = {ratio:g}) = {s:.4e} m^2")

# How many photons per second reveal a 1 % dip in one second at SNR 1, and back.
flux = shot_noise_flux(0.01, 1.0)
print(f"1 % dip in 1 s needs {flux:.0f} photons/s; that flux resolves "
      f"{shot_noise_depth(flux, 1.0):.3f} depth")
