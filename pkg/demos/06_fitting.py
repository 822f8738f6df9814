"""Weighted Lorentzian and correlation fits with parameter uncertainties."""
import numpy as np

from photonprobe.fitting import (double_exponential, fit_double_exponential, fit_lorentzian,
                                 lorentzian, poisson_weights)

rng = np.random.default_rng(1)
x = np.linspace(-200, 200, 81)
counts = rng.poisson(lorentzian(x, 40000.0, -1200.0, 3.0, 58.0))
fit = fit_lorentzian(x, counts, weights=poisson_weights(counts))
for name in fit.names:
    print(f"{name:9s} {fit[name]:10.3f} +- {fit.error(name):.3f}")
print(f"depth {100 * fit.extras['depth']:.2f} %, converged after {fit.iterations} iterations")

# Holding the width at its known value tightens the amplitude.
fixed = fit_lorentzian(x, counts, weights=poisson_weights(counts), fixed={"fwhm": 58.0})
print(f"with fixed width: amplitude {fixed['amplitude']:.2f} +- {fixed.error('amplitude'):.2f}")

# Ten times fewer counts: the dip is only a few noise levels deep.
weak = rng.poisson(lorentzian(x, 4000.0, -120.0, 3.0, 58.0))
wf = fit_lorentzian(x, weak, weights=poisson_weights(weak), fixed={"fwhm": 58.0})
print(f"weak data, fixed width: centre {wf['center']:.1f} +- {wf.error('center'):.1f} MHz "
      f"after {wf.iterations} iterations")

# Antibunched correlation data: contrast and time constant.
tau = np.linspace(-40, 40, 161)
g2 = rng.poisson(500 * double_exponential(tau, 1.0, 0.9, 7.96)) / 500
g = fit_double_exponential(tau, g2)
print(f"g2(0) = {g.extras['g2_zero']:.3f}, time constant {g['time_constant']:.2f} ns, "
      f"implied linewidth {g.extras['implied_linewidth_mhz']:.1f} MHz")
