"""
Run configuration: INI-style sections whose keys carry their unit as a suffix.

The shipped ``paper.defaults`` defines every accepted key; a user file only
overrides values.  Keys may be given inside a section or flat as
``section.key = value`` before the first header.
"""
import configparser
from importlib import resources

import numpy as np

from .campaign import AmplitudeDecay, CampaignConfig, DriftModel
from .pipeline import LaserReference, SourceModel, default_detunings
from .scatter_analytic import EmitterParams
from .scatter_numeric import ModeGrid

UNIT_SUFFIXES = ("_mhz", "_mhz_per_v", "_mhz_per_s", "_mhz_per_scan", "_hz", "_s", "_ns", "_v",
                 "_fraction", "_ratio", "_count", "_bool", "_u64")
LIST_KEYS = {("snapshot", "times_tau_ratio")}
ROOT = "__root__"


class ConfigError(ValueError):
    pass


def defaults_text():
    return resources.files("photonprobe").joinpath("data/paper.defaults").read_text()


def _parse(text, origin):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(f"[{ROOT}]\n" + text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from None
    out = {}
    for sec in cp.sections():
        for key, raw in cp.items(sec):
            if sec == ROOT:
                if "." not in key:
                    raise ConfigError(f"{origin}: key {key!r} outside a section must be 'section.key'")
                s, k = key.split(".", 1)
            else:
                s, k = sec, key
            out.setdefault(s, {})[k] = raw.strip()
    return out


def _convert(section, key, raw):
    where = f"{section}.{key}"
    if not key.endswith(UNIT_SUFFIXES):
        raise ConfigError(f"{where}: key must end in a unit suffix {UNIT_SUFFIXES}")
    try:
        if (section, key) in LIST_KEYS:
            return [float(v) for v in raw.split(",") if v.strip()]
        if key.endswith("_bool"):
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                raise ValueError(raw)
            return low in ("true", "yes", "1", "on")
        if key.endswith(("_count", "_u64")):
            v = int(raw)
            if v < 0 or (key.endswith("_u64") and v >= 2 ** 64):
                raise ValueError(raw)
            return v
        v = float(raw)
        if not np.isfinite(v):
            raise ValueError(raw)
        return v
    except ValueError:
        raise ConfigError(f"{where}: cannot read value {raw!r}") from None


class Config:
    """Resolved configuration; ``values[section][key]`` holds typed values."""

    def __init__(self, values):
        self.values = values

    def __getitem__(self, dotted):
        s, k = dotted.split(".", 1)
        return self.values[s][k]

    def with_overrides(self, **dotted):
        vals = {s: dict(v) for s, v in self.values.items()}
        for key, v in dotted.items():
            s, k = key.split(".", 1)
            if s not in vals or k not in vals[s]:
                raise ConfigError(f"unknown configuration key {key!r}")
            vals[s][k] = v
        return Config(vals)

    def as_dict(self):
        return {s: dict(v) for s, v in self.values.items()}

    def to_text(self):
        """Resolved configuration in the input format, floats at full precision."""
        lines = []
        for s, kv in self.values.items():
            lines.append(f"[{s}]")
            for k, v in kv.items():
                if isinstance(v, bool):
                    txt = "true" if v else "false"
                elif isinstance(v, list):
                    txt = ", ".join(repr(float(x)) for x in v)
                elif isinstance(v, float):
                    txt = repr(v)
                else:
                    txt = str(v)
                lines.append(f"{k} = {txt}")
            lines.append("")
        return "\n".join(lines)

    # builders

    def source(self):
        return SourceModel(self["source.natural_linewidth_mhz"], self["source.jitter_fwhm_mhz"])

    def target(self):
        return EmitterParams(self["target.transition_frequency_mhz"],
                             self["target.natural_linewidth_mhz"],
                             self["target.coupling_efficiency_fraction"])

    def laser(self):
        return LaserReference(self["laser.dip_amplitude_fraction"], self["laser.dip_fwhm_mhz"],
                              self["laser.drift_correction_fraction"])

    def detunings(self):
        half = self["pipeline.detuning_half_span_mhz"]
        step = self["pipeline.detuning_step_mhz"]
        if not (half > 0 and step > 0):
            raise ConfigError("pipeline detuning span and step must be positive")
        return default_detunings(half, 1.0, step)

    def mode_grid(self):
        return ModeGrid(self["numeric.n_modes_count"], self["numeric.span_linewidth_ratio"])

    def campaign(self, seed=None):
        c = self.values["campaign"]
        return CampaignConfig(
            steps_per_scan=c["steps_per_scan_count"], residence_time_s=c["residence_time_s"],
            scans_per_cycle=c["scans_per_cycle_count"], cycles=c["cycles_count"],
            stark_slope_mhz_per_v=c["stark_slope_mhz_per_v"],
            scan_half_span_mhz=c["scan_half_span_mhz"], signal_rate_hz=c["signal_rate_hz"],
            dark_rate_hz=c["dark_rate_hz"],
            drift=DriftModel(c["drift_linear_mhz_per_s"], c["drift_walk_mhz_per_scan"]),
            amplitude_decay=AmplitudeDecay(c["amplitude_final_fraction"]),
            recalibrate=c["recalibrate_bool"], v0_initial_v=c["v0_initial_v"],
            calibration_time_s=c["calibration_time_s"], calib_steps=c["calib_steps_count"],
            calib_residence_s=c["calib_residence_s"], calib_half_span_mhz=c["calib_half_span_mhz"],
            calib_peak_rate_hz=c["calib_peak_rate_hz"],
            calib_background_rate_hz=c["calib_background_rate_hz"],
            calib_fwhm_mhz=c["calib_fwhm_mhz"],
            rng_seed=self["run.seed_u64"] if seed is None else seed)


def _schema():
    return {s: {k: _convert(s, k, v) for k, v in kv.items()}
            for s, kv in _parse(defaults_text(), "paper.defaults").items()}


def load_config(path=None, text=None):
    """
    Defaults overlaid with the file at ``path`` (or the string ``text``).

    :raises ConfigError: unreadable file, unknown section or key, missing unit, bad value
    """
    values = _schema()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read configuration {path}: {exc.strerror}") from None
    if text is not None:
        for s, kv in _parse(text, str(path or "<text>")).items():
            if s not in values:
                raise ConfigError(f"unknown section [{s}]; expected one of {sorted(values)}")
            for k, raw in kv.items():
                if not k.endswith(UNIT_SUFFIXES):
                    raise ConfigError(f"{s}.{k}: key must end in a unit suffix {UNIT_SUFFIXES}")
                if k not in values[s]:
                    hint = [c for c in values[s] if c.split("_")[0] == k.split("_")[0]]
                    raise ConfigError(f"unknown key {s}.{k}" + (f" (did you mean {hint[0]}?)" if hint else ""))
                values[s][k] = _convert(s, k, raw)
    return Config(values)
