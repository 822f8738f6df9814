"""
Time-domain scattering of one photon by a two-level emitter in 1D.

The field is expanded in running-wave modes of a periodic box: ``n_modes``
right-moving and ``n_modes`` left-moving modes share the same uniformly
spaced frequencies, and the emitter sits at ``z = 0`` coupling to all of them
with one real strength ``g``.  In the single-excitation subspace the state is
``beta |e,0> + sum_k c_k |g,1_k>`` and the Schroedinger equation is linear:

    d beta/dt = -i g sum_k c_k
    d c_k /dt = -i w_k c_k - i g beta

in a frame rotating at the emitter transition (angular units rad/ns).

Coupling convention: each direction contributes ``2 pi g^2 / df`` to the
emitter FWHM (``g`` and ``df`` ordinary frequencies in MHz), so
``gamma_t = 4 pi g^2 / df`` for the two directions together.  A band of
finite span S shifts the decay pole to ``gamma (1 + (2/pi) atan(gamma/S))``;
by default ``g`` is reduced by that factor so the discretized emitter decays
as ``exp(-2 pi gamma_t t)`` with the configured ``gamma_t``.

Integration uses the fourth-order integrating-factor (Lawson) Runge-Kutta
scheme with a fixed step: free phases are propagated exactly and only the
coupling is Runge-Kutta stepped.
"""
from dataclasses import dataclass, field

import numpy as np

from .quantities import MHZ_NS, TWO_PI, angular, fwhm_to_lifetime
from .scatter_analytic import EmitterParams, output_spectra, scatter_fractions
from .wavepacket import Spectrum, spectral_amplitude


class GridError(ValueError):
    """Mode grid violates a resolution bound."""


class IntegrationError(RuntimeError):
    """Norm drift exceeded the integration budget."""

    def __init__(self, message, step):
        super().__init__(f"{message} (step {step})")
        self.step = step


class TrajectoryTooShort(ValueError):
    """Emitter still excited at the end of the trajectory."""


MIN_MODES = 1024
MAX_SPACING_LINEWIDTHS = 1.0 / 50.0
MIN_SPAN_LINEWIDTHS = 40.0


@dataclass(frozen=True)
class ModeGrid:
    """Mode grid in units of the emitter linewidth."""

    n_modes: int = 4096
    span_linewidths: float = 60.0


@dataclass(frozen=True)
class DiscreteSystem:
    emitter: EmitterParams
    mode_offsets: np.ndarray  # MHz, relative to the transition frequency
    coupling: float  # MHz

    @property
    def n_modes(self):
        return len(self.mode_offsets)

    @property
    def spacing(self):
        return float(self.mode_offsets[1] - self.mode_offsets[0])

    @property
    def mode_frequencies(self):
        return self.mode_offsets + self.emitter.transition_frequency

    @property
    def box_length(self):
        """Box length (= revival time) in ns, with c = 1."""
        return 1.0 / (self.spacing * MHZ_NS)

    @property
    def tau(self):
        return fwhm_to_lifetime(self.emitter.natural_linewidth).tau

    @property
    def dim(self):
        return 2 * self.n_modes + 1


def build_system(emitter, grid=None, band_correction=True):
    """
    Discretize the continuum around ``emitter``.

    :param emitter: :class:`EmitterParams`
    :param grid: :class:`ModeGrid` (default 4096 modes over 60 linewidths)
    :param band_correction: compensate the finite-band shift of the decay rate
    :raises GridError: naming the violated bound
    """
    grid = grid or ModeGrid()
    gamma = emitter.natural_linewidth.fwhm
    if grid.n_modes < MIN_MODES:
        raise GridError(f"n_modes = {grid.n_modes} < {MIN_MODES}")
    if grid.span_linewidths < MIN_SPAN_LINEWIDTHS:
        raise GridError(f"frequency span {grid.span_linewidths} gamma_t < {MIN_SPAN_LINEWIDTHS} gamma_t")
    spacing = grid.span_linewidths * gamma / grid.n_modes
    if spacing > MAX_SPACING_LINEWIDTHS * gamma * (1 + 1e-12):
        raise GridError(f"mode spacing {spacing / gamma:.4g} gamma_t > gamma_t/50")
    offsets = (np.arange(grid.n_modes) - 0.5 * (grid.n_modes - 1)) * spacing
    g2 = gamma * spacing / (2.0 * TWO_PI)
    if band_correction:
        span = grid.n_modes * spacing
        g2 *= np.pi / (np.pi + 2.0 * np.arctan(gamma / span))
    g = np.sqrt(g2)
    return DiscreteSystem(emitter, offsets, float(g))


@dataclass(frozen=True)
class QuantumState:
    """Amplitudes ``[beta, c_right..., c_left...]`` at ``time`` (ns)."""

    atom_amplitude: complex
    mode_amplitudes: np.ndarray
    time: float = 0.0

    @classmethod
    def from_vector(cls, y, time):
        y = np.array(y, dtype=complex)
        return cls(complex(y[0]), y[1:], float(time))

    def vector(self):
        return np.concatenate(([self.atom_amplitude], self.mode_amplitudes))

    @property
    def n_modes(self):
        return len(self.mode_amplitudes) // 2

    @property
    def right(self):
        return self.mode_amplitudes[:self.n_modes]

    @property
    def left(self):
        return self.mode_amplitudes[self.n_modes:]

    @property
    def atom_population(self):
        return abs(self.atom_amplitude) ** 2

    def norm(self):
        return self.atom_population + float(np.sum(np.abs(self.mode_amplitudes) ** 2))

    def right_population(self):
        return float(np.sum(np.abs(self.right) ** 2))

    def left_population(self):
        return float(np.sum(np.abs(self.left) ** 2))


def excited_state(system):
    """Emitter excited, field in vacuum."""
    return QuantumState(1.0 + 0j, np.zeros(2 * system.n_modes, dtype=complex), 0.0)


@dataclass(frozen=True)
class IncidentPhoton:
    """Bookkeeping for a photon launched toward the emitter."""

    tau: float  # ns, photon lifetime
    detuning: float  # MHz, photon center minus transition
    arrival_time: float  # ns, when the pulse peak reaches z = 0
    retained_norm: float  # fraction of the photon captured by the mode grid


def incident_state(system, photon, lead=16.0):
    """
    Right-moving photon whose peak reaches the emitter at ``t = lead * tau_s``.

    The envelope of ``photon`` (a :class:`~photonprobe.wavepacket.Wavepacket`)
    is read as the spatial profile along z (c = 1): a rising exponential rises
    toward a sharp front, so the peak is the leading edge and the exponential
    tail follows it, as for a spontaneously emitted photon.  The field seen at
    z = 0 is therefore the envelope reversed in time, which leaves the power
    spectrum unchanged.  ``photon.central_frequency`` is read relative to the
    emitter.

    :return: (QuantumState, IncidentPhoton)
    """
    tau_s = fwhm_to_lifetime(photon.spectral_fwhm).tau
    detuning = photon.central_frequency - system.emitter.transition_frequency
    t_arr = lead * tau_s
    peak = photon.t_grid[np.argmax(np.abs(photon.envelope))]
    nu = system.mode_offsets - detuning
    # amplitude of the time-reversed envelope E(-t)
    a = spectral_amplitude(photon, -nu)
    # beyond the photon grid's Nyquist band the sampled sum only holds aliases
    a[np.abs(nu) > 0.5 / (photon.dt * MHZ_NS)] = 0.0
    # delay so the reversed envelope's peak (at -peak) lands on z = 0 at t_arr
    c = a * np.exp(1j * TWO_PI * MHZ_NS * system.mode_offsets * t_arr) \
        * np.exp(1j * TWO_PI * MHZ_NS * nu * peak) / np.sqrt(system.box_length)
    retained = float(np.sum(np.abs(c) ** 2))
    c /= np.sqrt(retained)
    modes = np.concatenate((c, np.zeros(system.n_modes, dtype=complex)))
    return (QuantumState(0j, modes, 0.0),
            IncidentPhoton(tau_s, float(detuning), float(t_arr), retained))


@dataclass(frozen=True)
class Trajectory:
    """
    Saved states of one run.  ``states[i]`` is the state vector at ``times[i]``;
    ``atom_population`` and ``norm`` are recorded at every integration step.
    """

    system: DiscreteSystem
    times: np.ndarray
    states: np.ndarray
    step_times: np.ndarray
    atom_population: np.ndarray
    norm: np.ndarray
    dt: float
    photon: IncidentPhoton = field(default=None)

    def __post_init__(self):
        for name in ("times", "states", "step_times", "atom_population", "norm"):
            getattr(self, name).setflags(write=False)

    def state(self, i=-1):
        return QuantumState.from_vector(self.states[i], self.times[i])

    def state_at(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 0.5 * self.dt:
            raise KeyError(f"no saved state at t = {t} ns")
        return self.state(i)

    @property
    def final(self):
        return self.state(-1)

    def max_norm_drift(self):
        return float(np.max(np.abs(self.norm - self.norm[0])))


def _lawson_rk4(y0, phases_half, g_ang, h, n_steps, save_idx, step_tol, total_tol):
    # The coupling kicks every mode by the same scalar -i g beta, so each
    # Runge-Kutta stage reduces to a handful of sums over the mode vector.
    ea, E = phases_half[0], phases_half[1:]
    ea2, E2 = ea * ea, E * E
    sum_E, sum_E2, n = E.sum(), E2.sum(), len(E)
    mig = -1j * g_ang
    b, c = complex(y0[0]), y0[1:].copy()
    saves = {}
    pop = np.empty(n_steps + 1)
    norm = np.empty(n_steps + 1)
    pop[0] = abs(b) ** 2
    norm[0] = pop[0] + np.vdot(c, c).real
    if 0 in save_idx:
        saves[0] = np.concatenate(([b], c))
    for step in range(1, n_steps + 1):
        Ec = E * c
        E2c = E * Ec
        s0, s1, s2 = c.sum(), Ec.sum(), E2c.sum()
        A1, B1 = mig * s0, mig * b
        A2 = mig * (s1 + 0.5 * h * B1 * sum_E)
        B2 = mig * ea * (b + 0.5 * h * A1)
        A3 = mig * (s1 + 0.5 * h * B2 * n)
        B3 = mig * (ea * b + 0.5 * h * A2)
        A4 = mig * (s2 + h * B3 * sum_E)
        B4 = mig * (ea2 * b + h * ea * A3)
        b = ea2 * b + (h / 6.0) * (ea2 * A1 + 2.0 * ea * (A2 + A3) + A4)
        c = E2c + (h / 6.0) * (B1 * E2 + 2.0 * (B2 + B3) * E + B4)
        pop[step] = abs(b) ** 2
        norm[step] = pop[step] + np.vdot(c, c).real
        if abs(norm[step] - norm[step - 1]) > step_tol:
            raise IntegrationError(
                f"per-step norm drift {abs(norm[step] - norm[step - 1]):.3g}", step)
        if abs(norm[step] - norm[0]) > total_tol:
            raise IntegrationError(f"cumulative norm drift {abs(norm[step] - norm[0]):.3g}", step)
        if step in save_idx:
            saves[step] = np.concatenate(([b], c))
    return saves, pop, norm


def evolve(system, initial, t_final, dt=None, save_times=None,
           step_tol=1e-10, total_tol=1e-6, photon=None):
    """
    Integrate the Schroedinger equation from ``initial.time`` to ``t_final`` (ns).

    :param dt: fixed step in ns (default: emitter lifetime / 400, shortened so
        the steps end exactly on ``t_final``)
    :param save_times: times (ns) at which full states are kept; snapped to the
        nearest step.  The initial and final states are always kept.
    :raises IntegrationError: if the norm drifts beyond ``step_tol`` in one step
        or ``total_tol`` overall
    """
    y0 = initial.vector()
    if abs(np.vdot(y0, y0).real - 1.0) > 1e-9:
        raise ValueError("initial state is not normalized")
    if len(y0) != system.dim:
        raise ValueError("state dimension does not match the system")
    t0 = initial.time
    duration = t_final - t0
    if duration <= 0:
        raise ValueError("t_final must exceed the initial time")
    dt = dt or system.tau / 400.0
    n_steps = max(1, int(np.ceil(duration / dt - 1e-9)))
    h = duration / n_steps
    save_idx = {0, n_steps}
    for t in (save_times if save_times is not None else ()):
        if t0 <= t <= t_final:
            save_idx.add(int(round((t - t0) / h)))
    w = angular(np.concatenate(([0.0], system.mode_offsets, system.mode_offsets)))
    E = np.exp(-0.5j * w * h)
    g_ang = TWO_PI * MHZ_NS * system.coupling
    saves, pop, norm = _lawson_rk4(y0, E, g_ang, h, n_steps, save_idx, step_tol, total_tol)
    idx = sorted(saves)
    return Trajectory(system=system,
                      times=t0 + np.array(idx, dtype=float) * h,
                      states=np.array([saves[i] for i in idx]),
                      step_times=t0 + np.arange(n_steps + 1) * h,
                      atom_population=pop, norm=norm, dt=h, photon=photon)


def simulate_scattering(emitter, photon, grid=None, lead=16.0, after=16.0, dt=None,
                        save_times=None, band_correction=True):
    """
    Launch ``photon`` at ``emitter`` and integrate until ``after`` photon
    lifetimes past the arrival of the pulse peak (at least ``after`` emitter
    lifetimes, so the emitter has decayed).

    :param save_times: extra snapshot times in ns measured from the arrival of the peak
    """
    system = build_system(emitter, grid, band_correction)
    psi0, inc = incident_state(system, photon, lead)
    t_final = inc.arrival_time + after * max(inc.tau, system.tau)
    if dt is None:
        dt = min(inc.tau, system.tau) / 400.0
    abs_times = None if save_times is None else [inc.arrival_time + t for t in save_times]
    return evolve(system, psi0, t_final, dt=dt, save_times=abs_times, photon=inc)


def free_decay(emitter, t_final_lifetimes=4.0, grid=None, dt=None):
    """Trajectory of an initially excited emitter (Wigner-Weisskopf check)."""
    system = build_system(emitter, grid)
    return evolve(system, excited_state(system), t_final_lifetimes * system.tau, dt=dt)


@dataclass(frozen=True)
class FieldSnapshot:
    """
    Field intensity (per ns of light travel) on ``z_grid`` (ns, c = 1) at
    ``time`` (ns).  ``right`` and ``left`` hold the intensities of each
    propagation direction alone; ``intensity`` is the coherent total.
    """

    z_grid: np.ndarray
    intensity: np.ndarray
    right: np.ndarray
    left: np.ndarray
    time: float

    def half_space_energy(self, side):
        mask = self.z_grid < 0 if side == "backward" else self.z_grid > 0
        if mask.sum() < 2:
            return 0.0
        return float(np.trapezoid(self.intensity[mask], self.z_grid[mask]))

    def to_table(self, length_unit=1.0):
        return (("z", "intensity", "right_intensity", "left_intensity"),
                (self.z_grid / length_unit, self.intensity * length_unit,
                 self.right * length_unit, self.left * length_unit))


def _mode_sum(amps, k, z, sign):
    out = np.empty(len(z), dtype=complex)
    chunk = max(1, 2 ** 22 // len(k))
    for i in range(0, len(z), chunk):
        out[i:i + chunk] = np.exp(sign * 1j * np.outer(z[i:i + chunk], k)) @ amps
    return out


def field_intensity(state, system, z_grid, carrier_mhz=0.0):
    """
    |sum_k c_k exp(i k z)|^2 on ``z_grid`` (ns, c = 1), right-moving modes with
    +k and left-moving with -k.  ``carrier_mhz`` adds an optical carrier
    offset so standing-wave fringes become visible.
    """
    z = np.asarray(z_grid, dtype=float)
    k = angular(system.mode_offsets + carrier_mhz)
    er = _mode_sum(state.right, k, z, +1)
    el = _mode_sum(state.left, k, z, -1)
    L = system.box_length
    return FieldSnapshot(z, np.abs(er + el) ** 2 / L, np.abs(er) ** 2 / L,
                         np.abs(el) ** 2 / L, state.time)


def visual_carrier(tau_ns, omega_tau=10.0):
    """Carrier frequency (MHz) with angular frequency ``omega_tau / tau``."""
    return omega_tau / (TWO_PI * tau_ns * MHZ_NS)


def scattered_spectra_numeric(trajectory, max_excitation=1e-4, min_after=12.0):
    """
    Long-time reflected (left-moving) and transmitted (right-moving) spectra.

    :raises TrajectoryTooShort: if the emitter population exceeds
        ``max_excitation`` at the end, or the run stops less than ``min_after``
        photon lifetimes after the pulse peak arrived
    """
    final = trajectory.final
    if final.atom_population >= max_excitation:
        raise TrajectoryTooShort(
            f"trajectory too short: emitter population {final.atom_population:.3g} at the end")
    inc = trajectory.photon
    if inc is not None and final.time - inc.arrival_time < min_after * inc.tau * (1 - 1e-9):
        raise TrajectoryTooShort(
            f"trajectory too short: {(final.time - inc.arrival_time) / inc.tau:.3g} "
            f"photon lifetimes after arrival < {min_after}")
    sys = trajectory.system
    f = sys.mode_frequencies
    df = sys.spacing
    return (Spectrum(f, np.abs(final.left) ** 2 / df),
            Spectrum(f, np.abs(final.right) ** 2 / df))


def incident_spectrum_numeric(trajectory):
    """Spectrum of the launched photon as represented on the mode grid."""
    psi0 = trajectory.state(0)
    sys = trajectory.system
    return Spectrum(sys.mode_frequencies, np.abs(psi0.right) ** 2 / sys.spacing)


def direction_fractions(state):
    """(left-moving, right-moving) populations."""
    return state.left_population(), state.right_population()


def compare_to_analytic(trajectory, window_widths=3.0):
    """
    Numeric scattered spectra against the frequency-domain result for the same
    launched photon (its spectrum on the mode grid, renormalized).

    Deviations are RMS over ``|f - f_c| <= window_widths * (gamma_s + gamma_t)``
    divided by the analytic peak; ``max_*`` are the largest pointwise gaps
    over the whole grid, also relative to the peak.
    """
    refl, trans = scattered_spectra_numeric(trajectory)
    inc = incident_spectrum_numeric(trajectory)
    inc = Spectrum(inc.f_grid, inc.density / inc.density.sum() / inc.df)
    sys = trajectory.system
    a_refl, a_trans = output_spectra(inc, sys.emitter)
    ph = trajectory.photon
    gamma_s = 1.0 / (TWO_PI * ph.tau * MHZ_NS)
    center = sys.emitter.transition_frequency + ph.detuning
    win = np.abs(inc.f_grid - center) <= window_widths * (gamma_s + sys.emitter.natural_linewidth.fwhm)
    out = {}
    for name, num, ana in (("reflected", refl, a_refl), ("transmitted", trans, a_trans)):
        peak = ana.density.max()
        d = num.density - ana.density
        out[f"l2_{name}"] = float(np.sqrt(np.mean(d[win] ** 2)) / peak)
        out[f"max_{name}"] = float(np.max(np.abs(d)) / peak)
    fr = scatter_fractions(Spectrum(inc.f_grid, inc.density / np.trapezoid(inc.density, inc.f_grid)),
                           sys.emitter)
    left, right = direction_fractions(trajectory.final)
    out.update(numeric_reflected=left, numeric_transmitted=right,
               analytic_reflected=fr.reflected, analytic_transmitted=fr.transmitted)
    return out
