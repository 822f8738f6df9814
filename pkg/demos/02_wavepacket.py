"""A rising-exponential single photon and its Lorentzian spectrum."""
import numpy as np

from photonprobe.quantities import fwhm_to_lifetime
from photonprobe.wavepacket import lorentzian_density, make_rising_exponential, spectrum_of

tau = fwhm_to_lifetime(20.0)
photon = make_rising_exponential(0.0, tau)
print(f"grid: {photon.t_grid.size} samples, dt = {photon.dt:.4f} ns, norm = {photon.norm():.12f}")

# The pulse grows as exp(t / 2 tau) in amplitude and stops abruptly at its peak.
i = np.argmax(photon.intensity())
print(f"peak at t = {photon.t_grid[i]:.3f} ns; intensity after the peak = {photon.intensity()[i + 1]:.2e}")

spec = spectrum_of(photon).normalized()
print(f"spectral FWHM {spec.half_max_width():.3f} MHz (expected 20)")
ref = lorentzian_density(spec.f_grid, 0.0, 20.0)
core = np.abs(spec.f_grid) < 100
print(f"max deviation from a 20 MHz Lorentzian within +-100 MHz: "
      f"{np.max(np.abs(spec.density - ref)[core]):.2e} per MHz")
