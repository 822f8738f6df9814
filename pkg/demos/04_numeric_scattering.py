"""Time-domain scattering on a discrete mode grid, checked against the analytic result."""
import numpy as np

from photonprobe.quantities import fwhm_to_lifetime
from photonprobe.scatter_analytic import EmitterParams
from photonprobe.scatter_numeric import (ModeGrid, compare_to_analytic, field_intensity, free_decay,
                                         simulate_scattering, visual_carrier)
from photonprobe.wavepacket import make_rising_exponential

tau = fwhm_to_lifetime(20.0).tau
em = EmitterParams(0.0, 20.0)

# An excited emitter alone decays at the configured rate.
decay = free_decay(em, 3.0, ModeGrid(2048, 40))
print(f"population after 3 lifetimes: {decay.final.atom_population:.4f} (exp(-3) = {np.exp(-3):.4f})")

# Send a resonant photon in and keep a few snapshots around the encounter.
photon = make_rising_exponential(0.0, tau)
traj = simulate_scattering(em, photon, grid=ModeGrid(2048, 40), save_times=[0.0, 2 * tau, 8 * tau])
arrive = traj.photon.arrival_time
print(f"photon front reaches the emitter at {arrive:.1f} ns; max norm drift {traj.max_norm_drift():.1e}")

z = np.linspace(-24 * tau, 24 * tau, 2401)
for k in (0, 2, 8):
    snap = field_intensity(traj.state_at(arrive + k * tau), traj.system, z, visual_carrier(tau))
    print(f"t = {k} tau: backward {snap.half_space_energy('backward'):.3f}, "
          f"forward {snap.half_space_energy('forward'):.3f}, "
          f"emitter {traj.state_at(arrive + k * tau).atom_population:.3f}")

rep = compare_to_analytic(traj)
print(f"reflected: numeric {rep['numeric_reflected']:.4f}, analytic {rep['analytic_reflected']:.4f}")
