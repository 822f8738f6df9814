"""
Command-line front end.

    photonprobe snapshot [--config F] [--seed N] [--out DIR] [--time T ...]
    photonprobe spectra  [--config F] [--out DIR] [--numeric]
    photonprobe fig3     [--config F] [--seed N] [--out DIR] [--campaign] [--no-drift-correction]
    photonprobe calc lifetime 20MHz | linewidth 4.2ns | xsection 589nm [RATIO] | flux DEPTH TIME [SNR]

Exit status: 0 success, 2 configuration or input error, 3 numerical failure.
"""
import argparse
import os
import re
import sys

import numpy as np

from . import __version__
from .campaign import EstimationError, ReductionError, reduce_campaign, run_campaign
from .config import ConfigError, load_config
from .fitting import DegenerateDataError, FitError
from .io import RunManifest
from .pipeline import CalibrationError, compare_to_measurement, reconstruct
from .quantities import (CrossSectionInput, DomainError, Linewidth, cross_section, fwhm_to_lifetime,
                         lifetime_to_fwhm, shot_noise_flux)
from .scatter_analytic import output_spectra, scatter_fractions
from .scatter_numeric import (GridError, IntegrationError, TrajectoryTooShort, compare_to_analytic,
                              field_intensity, incident_spectrum_numeric,
                              scattered_spectra_numeric, simulate_scattering, visual_carrier)
from .svg import Plot
from .wavepacket import TruncationError, make_rising_exponential, spectrum_of

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

CONFIG_ERRORS = (ConfigError, GridError, TruncationError, DomainError)
NUMERIC_ERRORS = (IntegrationError, TrajectoryTooShort, FitError, DegenerateDataError,
                  CalibrationError, EstimationError, ReductionError)


# ---- shared setup

def _photon(cfg):
    target = cfg.target()
    gamma_s = cfg["photon.linewidth_mhz"]
    tau = fwhm_to_lifetime(gamma_s)
    return target, make_rising_exponential(target.transition_frequency + cfg["photon.detuning_mhz"], tau)


def _simulate(cfg, save_times_tau=None):
    target, photon = _photon(cfg)
    tau_s = fwhm_to_lifetime(photon.spectral_fwhm).tau
    tau_t = fwhm_to_lifetime(target.natural_linewidth).tau
    steps = cfg["numeric.steps_per_tau_count"]
    if steps < 1:
        raise ConfigError("numeric.steps_per_tau_count must be at least 1")
    save = None if save_times_tau is None else [t * tau_s for t in save_times_tau]
    return simulate_scattering(target, photon, grid=cfg.mode_grid(),
                               lead=cfg["numeric.lead_tau_ratio"],
                               after=cfg["numeric.after_tau_ratio"],
                               dt=min(tau_s, tau_t) / steps, save_times=save,
                               band_correction=cfg["numeric.band_correction_bool"])


# ---- commands

def cmd_snapshot(cfg, args, man):
    times = list(cfg["snapshot.times_tau_ratio"]) + list(args.time or [])
    if not cfg["snapshot.times_tau_ratio"]:
        raise ConfigError("snapshot.times_tau_ratio is empty")
    if any(t < 0 for t in times):
        raise ConfigError("snapshot times must be non-negative (measured from the first encounter)")
    traj = _simulate(cfg, times)
    inc = traj.photon
    tau_s = inc.tau
    half = cfg["snapshot.z_half_span_tau_ratio"]
    npts = cfg["snapshot.z_points_count"]
    if half <= 0 or npts < 3:
        raise ConfigError("snapshot z grid needs a positive span and at least 3 points")
    z = np.linspace(-half, half, npts) * tau_s
    carrier = visual_carrier(tau_s, cfg["snapshot.carrier_omega_tau_ratio"])
    zoom = cfg["snapshot.zoom_factor_ratio"]
    summary = {"arrival_time_ns": inc.arrival_time, "tau_s_ns": tau_s,
               "retained_norm": inc.retained_norm, "max_norm_drift": traj.max_norm_drift(),
               "carrier_mhz": carrier, "snapshots": {}}

    def emit(name, state, label):
        snap = field_intensity(state, traj.system, z, carrier)
        back = np.where(z < 0, snap.intensity, 0.0)
        fwd = np.where(z > 0, snap.intensity, 0.0)
        zt = z / tau_s
        man.table(f"{name}.csv", ("z_tau", "intensity", "backward", "forward", "forward_zoom"),
                  (zt, snap.intensity * tau_s, back * tau_s, fwd * tau_s, fwd * tau_s * zoom))
        p = Plot(label, "z / (c tau_s)", "intensity (per c tau_s)")
        p.line(zt[z < 0], (back * tau_s)[z < 0], "red", "backward")
        p.line(zt[z > 0], (fwd * tau_s)[z > 0], "blue", "forward")
        p.line(zt[z > 0], (fwd * tau_s * zoom)[z > 0], "green", f"forward x{zoom:g}")
        man.add(p.save(os.path.join(man.out_dir, f"{name}.svg")))
        summary["snapshots"][name] = {"time_ns": state.time,
                                      "backward_energy": snap.half_space_energy("backward"),
                                      "forward_energy": snap.half_space_energy("forward"),
                                      "atom_population": state.atom_population}

    emit("snapshot_incident", traj.state(0), "incident pulse before the encounter")
    for t in times:
        st = traj.state_at(inc.arrival_time + t * tau_s)
        emit(f"snapshot_t{t:g}tau", st, f"t = {t:g} tau_s after the first encounter")
    man.json("snapshot_summary.json", summary)
    print(f"snapshots at {', '.join(f'{t:g}' for t in times)} tau_s; "
          f"norm drift {traj.max_norm_drift():.2e}")


def cmd_spectra(cfg, args, man):
    target, photon = _photon(cfg)
    if args.numeric:
        traj = _simulate(cfg)
        refl, trans = scattered_spectra_numeric(traj)
        inc = incident_spectrum_numeric(traj)
        report = compare_to_analytic(traj)
        report["max_norm_drift"] = traj.max_norm_drift()
        report["method"] = "numeric"
    else:
        inc = spectrum_of(photon).normalized()
        refl, trans = output_spectra(inc, target)
        fr = scatter_fractions(inc, target)
        report = {"method": "analytic", "reflected": fr.reflected, "transmitted": fr.transmitted}
    f = inc.f_grid
    on = int(np.argmin(np.abs(f - target.transition_frequency)))
    report["transmitted_on_resonance_over_peak"] = float(trans.density[on] / trans.density.max())
    report["reflected_fwhm_mhz"] = refl.half_max_width()
    report["incident_fwhm_mhz"] = inc.half_max_width()
    man.table("spectra.csv", ("frequency_mhz", "incident", "reflected", "transmitted"),
              (f, inc.density, refl.density, trans.density))
    man.json("spectra_report.json", report)
    w = 5 * (photon.spectral_fwhm.fwhm + target.natural_linewidth.fwhm)
    m = np.abs(f - target.transition_frequency - cfg["photon.detuning_mhz"]) <= w
    p = Plot(f"scattered spectra ({report['method']})", "frequency (MHz)", "density (per MHz)")
    p.line(f[m], inc.density[m], "black", "incident")
    p.line(f[m], refl.density[m], "red", "reflected")
    p.line(f[m], trans.density[m], "blue", "transmitted")
    man.add(p.save(os.path.join(man.out_dir, "spectra.svg")))
    print(f"reflected FWHM {report['reflected_fwhm_mhz']:.4g} MHz; transmitted on resonance "
          f"{report['transmitted_on_resonance_over_peak']:.2e} of peak")


def cmd_fig3(cfg, args, man):
    drift = not args.no_drift_correction
    rec = reconstruct(cfg.source(), cfg.target(), cfg.laser(), cfg.detunings(), drift,
                      cfg["pipeline.center_shift_mhz"])
    det = rec.calibrated.detuning_grid
    man.table("fig3_model.csv", ("detuning_mhz", "uncalibrated", "calibrated"),
              (det, rec.uncalibrated.normalized_intensity, rec.calibrated.normalized_intensity))
    report = {"amplitude": rec.amplitude, "fwhm_mhz": rec.fwhm, "drift_correction": drift,
              "model_fit": rec.fit.as_dict(), "calibration": rec.calibrated.meta}
    p = Plot("single-photon extinction", "detuning (MHz)", "normalized intensity")
    if args.campaign:
        ccfg = cfg.campaign(man.seeds["campaign"])
        trace = run_campaign(ccfg, rec.calibrated)
        meas = reduce_campaign(trace)
        comp = compare_to_measurement(rec.calibrated, meas)
        man.table("campaign_trace.csv", *trace.to_table())
        names, cols = meas.to_table()
        man.table("fig3_measured.csv", names, cols)
        report["comparison"] = comp.as_dict()
        report["campaign"] = {"dark_counts_per_pixel_mean": float(trace.dark_counts_per_pixel().mean()),
                              "v0_estimates_v": trace.v0_estimates, "flags": trace.flags}
        base = meas.meta["baseline_counts"]
        p = Plot("single-photon extinction", "detuning (MHz)", "normalized intensity",
                 y2label="counts per pixel (dark subtracted)")
        p.points(meas.detuning_grid, meas.normalized_intensity, "black", "measured", yerr=meas.sigma)
        lo = min(meas.normalized_intensity.min(), rec.calibrated.normalized_intensity.min())
        hi = max(meas.normalized_intensity.max(), 1.0)
        pad = 0.1 * (hi - lo)
        p.ylim = (lo - pad, hi + pad)
        p.y2lim = (p.ylim[0] * base, p.ylim[1] * base)
    p.line(det, rec.calibrated.normalized_intensity, "red", "model")
    man.json("fig3_report.json", report)
    man.add(p.save(os.path.join(man.out_dir, "fig3.svg")))
    print(f"model dip: amplitude {100 * rec.amplitude:.3f} %, FWHM {rec.fwhm:.3f} MHz")


# ---- calc

FREQUENCY_MHZ = {"mhz": 1.0, "hz": 1e-6, "khz": 1e-3, "ghz": 1e3}
TIME_NS = {"ns": 1.0, "ps": 1e-3, "us": 1e3, "ms": 1e6, "s": 1e9}
TIME_S = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
LENGTH_M = {"m": 1.0, "um": 1e-6, "nm": 1e-9}


def parse_quantity(text, units, default):
    """``parse_quantity("20MHz", FREQUENCY_MHZ, "mhz")`` -> 20.0; a bare number is in ``default``."""
    m = re.fullmatch(r"\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-zA-Z]*)\s*", text)
    if not m:
        raise ConfigError(f"cannot parse quantity {text!r}")
    unit = m.group(2).lower() or default
    if unit not in units:
        raise ConfigError(f"{text!r}: expected a unit among {', '.join(units)}")
    return float(m.group(1)) * units[unit]


def cmd_calc(args, out=None):
    out = out or sys.stdout
    what, vals = args.quantity, args.values
    if what == "lifetime":
        g = parse_quantity(_one(vals), FREQUENCY_MHZ, "mhz")
        tau = fwhm_to_lifetime(g).tau
        print(f"tau = 1/(2 pi gamma) = {tau:.6g} ns   [gamma = {g:.6g} MHz]", file=out)
        return {"lifetime_ns": tau}
    if what == "linewidth":
        t = parse_quantity(_one(vals), TIME_NS, "ns")
        g = lifetime_to_fwhm(t).fwhm
        print(f"gamma = 1/(2 pi tau) = {g:.6g} MHz   [tau = {t:.6g} ns]", file=out)
        return {"linewidth_mhz": g}
    if what == "xsection":
        if not 1 <= len(vals) <= 2:
            raise ConfigError("usage: calc xsection WAVELENGTH [GAMMA_HOM/GAMMA0]")
        lam = parse_quantity(vals[0], LENGTH_M, "m")
        ratio = float(vals[1]) if len(vals) == 2 else 1.0
        if ratio <= 0:
            raise DomainError("gamma_hom/gamma0 must be positive")
        sigma = cross_section(CrossSectionInput(lam, Linewidth(1.0), Linewidth(ratio)))
        print(f"sigma = 3 lambda^2/(2 pi) * gamma0/gamma_hom = {sigma:.6g} m^2   "
              f"[lambda = {lam:.6g} m, gamma_hom/gamma0 = {ratio:.6g}]", file=out)
        return {"cross_section_m2": sigma}
    if what == "flux":
        if not 2 <= len(vals) <= 3:
            raise ConfigError("usage: calc flux DEPTH TIME [SNR]")
        depth = float(vals[0])
        T = parse_quantity(vals[1], TIME_S, "s")
        snr = float(vals[2]) if len(vals) == 3 else 1.0
        flux = shot_noise_flux(depth, T, snr)
        print(f"flux = (snr/depth)^2 / T = {flux:.6g} /s   "
              f"[depth = {depth:.6g}, T = {T:.6g} s, snr = {snr:.6g}]", file=out)
        return {"flux_per_s": flux}
    raise ConfigError(f"unknown calc quantity {what!r}")


def _one(vals):
    if len(vals) != 1:
        raise ConfigError("expected exactly one value")
    return vals[0]


# ---- entry point

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="configuration file (overrides paper.defaults)")
    common.add_argument("--seed", type=int, metavar="U64", help="random seed (overrides run.seed_u64)")
    common.add_argument("--out", metavar="DIR", default=None, help="output directory (default: out)")
    ap = argparse.ArgumentParser(prog="photonprobe",
                                 description="Single-photon scattering and extinction spectroscopy.",
                                 epilog="exit status: 0 success, 2 configuration error, 3 numerical failure")
    ap.add_argument("--version", action="version", version=f"photonprobe {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("snapshot", parents=[common], help="field snapshots of a scattered photon")
    s.add_argument("--time", type=float, action="append", metavar="T",
                   help="extra snapshot time in photon lifetimes after the encounter")
    s = sub.add_parser("spectra", parents=[common], help="incident, reflected and transmitted spectra")
    s.add_argument("--numeric", action="store_true", help="time-domain simulation with oracle report")
    s = sub.add_parser("fig3", parents=[common], help="calibrated extinction-spectrum reconstruction")
    s.add_argument("--campaign", action="store_true", help="overlay a synthetic measurement campaign")
    s.add_argument("--no-drift-correction", action="store_true", help="skip the drift correction")
    s = sub.add_parser("calc", parents=[common], help="scalar calculators")
    s.add_argument("quantity", choices=["lifetime", "linewidth", "xsection", "flux"])
    s.add_argument("values", nargs="+")
    return ap


COMMANDS = {"snapshot": cmd_snapshot, "spectra": cmd_spectra, "fig3": cmd_fig3}


def _seed(value):
    if value is not None and not 0 <= value < 2 ** 64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {value}")
    return value


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    if args.command == "calc" and args.out is None:
        try:
            _seed(args.seed)
            cmd_calc(args)
        except (ConfigError, DomainError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK

    out_dir = args.out or "out"
    os.makedirs(out_dir, exist_ok=True)
    man = RunManifest(" ".join(["photonprobe"] + list(argv if argv is not None else sys.argv[1:])),
                      {}, __version__, {}, out_dir)
    code, status, err = EXIT_OK, "ok", None
    try:
        cfg = load_config(args.config)
        seed = _seed(args.seed)
        if seed is not None:
            cfg = cfg.with_overrides(**{"run.seed_u64": seed})
        man.config = cfg.as_dict()
        man.seeds = {"campaign": cfg["run.seed_u64"]}
        if args.command == "calc":
            man.json("calc.json", cmd_calc(args))
        else:
            man.text("resolved.cfg", cfg.to_text())
            COMMANDS[args.command](cfg, args, man)
    except CONFIG_ERRORS as exc:
        code, status, err = EXIT_CONFIG, "config_error", str(exc)
    except NUMERIC_ERRORS as exc:
        code, status, err = EXIT_NUMERIC, "numerical_failure", str(exc)
    except ValueError as exc:
        # parameter validation in the domain types
        code, status, err = EXIT_CONFIG, "config_error", str(exc)
    except Exception as exc:
        man.finish("internal_error", 1, f"{type(exc).__name__}: {exc}")
        raise
    if err:
        print(f"error: {err}", file=sys.stderr)
    man.finish(status, code, err)
    return code


if __name__ == "__main__":
    sys.exit(main())
