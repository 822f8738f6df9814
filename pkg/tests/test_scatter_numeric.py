import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.signal import find_peaks

from photonprobe.quantities import fwhm_to_lifetime
from photonprobe.scatter_analytic import EmitterParams
from photonprobe.scatter_numeric import (GridError, IntegrationError, ModeGrid, QuantumState,
                                         TrajectoryTooShort, build_system, compare_to_analytic,
                                         evolve, excited_state, field_intensity, free_decay,
                                         incident_state, scattered_spectra_numeric,
                                         simulate_scattering, visual_carrier)
from photonprobe.wavepacket import make_rising_exponential

GAMMA = 20.0
TAU = fwhm_to_lifetime(GAMMA).tau
EM = EmitterParams(0.0, GAMMA)
SMALL = ModeGrid(2048, 40)


@pytest.mark.parametrize("grid", [ModeGrid(512, 10), ModeGrid(2048, 100), ModeGrid(4096, 20)])
def test_grid_bounds_enforced(grid):
    with pytest.raises(GridError):
        build_system(EM, grid)


def test_coupling_reproduces_linewidth():
    sys_ = build_system(EM, SMALL)
    span = sys_.n_modes * sys_.spacing
    bare = 4 * np.pi * sys_.coupling ** 2 / sys_.spacing
    assert bare * (1 + 2 / np.pi * np.arctan(GAMMA / span)) == pytest.approx(GAMMA, rel=1e-12)
    plain = build_system(EM, SMALL, band_correction=False)
    assert 4 * np.pi * plain.coupling ** 2 / plain.spacing == pytest.approx(GAMMA, rel=1e-12)


def test_free_decay_monotone_and_exponential():
    traj = free_decay(EM, t_final_lifetimes=3.0, grid=SMALL)
    p = traj.atom_population
    assert np.all(np.diff(p) <= 1e-12)
    t = traj.step_times
    m = t > 0.5 * TAU
    rate = -np.polyfit(t[m], np.log(p[m]), 1)[0]
    assert rate * TAU == pytest.approx(1.0, rel=0.01)


def test_uncorrected_band_decays_faster():
    corrected = free_decay(EM, 2.0, SMALL)
    sys_ = build_system(EM, SMALL, band_correction=False)
    plain = evolve(sys_, excited_state(sys_), 2.0 * TAU)
    assert plain.final.atom_population < corrected.final.atom_population


def test_coarse_step_raises():
    sys_ = build_system(EM, SMALL)
    with pytest.raises(IntegrationError):
        evolve(sys_, excited_state(sys_), 2 * TAU, dt=TAU / 4)


def test_unnormalized_initial_state_rejected():
    sys_ = build_system(EM, SMALL)
    bad = QuantumState(2.0 + 0j, np.zeros(2 * sys_.n_modes, complex), 0.0)
    with pytest.raises(ValueError):
        evolve(sys_, bad, TAU)


@settings(max_examples=8)
@given(st.integers(0, 2 ** 32 - 1))
def test_evolution_is_linear_and_unitary(seed):
    rng = np.random.default_rng(seed)
    sys_ = build_system(EM, SMALL)
    n = sys_.dim

    def rand_state():
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        return v / np.linalg.norm(v)

    a, b = rand_state(), rand_state()
    ca, cb = 0.6, 0.8j
    s = ca * a + cb * b
    s /= np.linalg.norm(s)
    k = 1.0 / np.linalg.norm(ca * a + cb * b)

    def run(v):
        return evolve(sys_, QuantumState.from_vector(v, 0.0), 0.5 * TAU).final.vector()

    ya, yb, ys = run(a), run(b), run(s)
    np.testing.assert_allclose(ys, k * (ca * ya + cb * yb), atol=1e-9)
    # inner products survive
    assert np.vdot(ya, yb) == pytest.approx(np.vdot(a, b), abs=1e-7)


def test_incident_state_geometry():
    sys_ = build_system(EM)
    photon = make_rising_exponential(0.0, TAU)
    psi, inc = incident_state(sys_, photon, lead=16.0)
    assert psi.atom_amplitude == 0 and psi.left_population() == 0.0
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    assert inc.retained_norm == pytest.approx(1.0, abs=0.02)
    assert inc.arrival_time == pytest.approx(16 * TAU)
    z = np.linspace(-40 * TAU, 10 * TAU, 5001)
    snap = field_intensity(psi, sys_, z)
    # sharp front closest to the emitter, exponential tail further away
    assert z[np.argmax(snap.intensity)] == pytest.approx(-16 * TAU, abs=0.2 * TAU)
    assert snap.half_space_energy("forward") < 1e-3
    tail = (z > -30 * TAU) & (z < -18 * TAU)
    slope = np.polyfit(z[tail], np.log(snap.intensity[tail]), 1)[0]
    assert slope * TAU == pytest.approx(1.0, rel=0.05)


def test_snapshot_fringes_and_forward_pulse(resonant_run):
    traj, inc = resonant_run, resonant_run.photon
    z = np.linspace(-24 * TAU, 24 * TAU, 4801)
    car = visual_carrier(TAU)
    early = field_intensity(traj.state_at(inc.arrival_time - 2 * TAU), traj.system, z, car)
    assert early.half_space_energy("forward") < 1e-3
    mid = field_intensity(traj.state_at(inc.arrival_time + 2 * TAU), traj.system, z, car)
    back = mid.intensity[z < 0]
    peaks, _ = find_peaks(back, prominence=0.05 * back.max())
    assert len(peaks) >= 3  # interference of incoming and reflected light
    late = field_intensity(traj.state_at(inc.arrival_time + 8 * TAU), traj.system, z)
    fwd = late.intensity[z > 0]
    assert z[z > 0][np.argmax(fwd)] == pytest.approx(8 * TAU, abs=0.5 * TAU)
    for snap in (early, mid, late):
        assert snap.half_space_energy("backward") + snap.half_space_energy("forward") <= 1.0 + 1e-6


def test_long_time_split_matches_analytic(resonant_run):
    rep = compare_to_analytic(resonant_run)
    assert rep["numeric_reflected"] + rep["numeric_transmitted"] == pytest.approx(1.0, abs=1e-4)
    assert rep["numeric_reflected"] == pytest.approx(rep["analytic_reflected"], abs=1e-3)
    refl, trans = scattered_spectra_numeric(resonant_run)
    total = (refl.density + trans.density).sum() * refl.df
    assert total == pytest.approx(1.0, abs=1e-4)


def test_short_run_is_reported():
    photon = make_rising_exponential(0.0, TAU)
    traj = simulate_scattering(EM, photon, grid=SMALL, after=3.0)
    with pytest.raises(TrajectoryTooShort):
        scattered_spectra_numeric(traj)


def test_saved_state_lookup(resonant_run):
    with pytest.raises(KeyError):
        resonant_run.state_at(resonant_run.photon.arrival_time + 0.37 * TAU)
