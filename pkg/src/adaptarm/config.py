"""Experiment presets, structured-text configuration and CSV serialization.

The config format is INI-style with sections [plant], [controller],
[reference], [sim], [tau_star] (plus an optional [sweep] grid used by the
sweep command). Every key has a documented default; unknown sections or keys
are rejected by name. An empty document reproduces the fig1 preset.
"""
from __future__ import annotations

import configparser
import copy
import csv
import io
import math

import numpy as np

from .control import ControlLaw
from .dynamics import ManipulatorParams, N_PARAMS
from .reference import (
    ConfigError,
    FeedbackKind,
    Interconnection,
    ReferenceConfig,
    ReferenceForm,
    SineTrajectory,
)
from .sim import CSV_COLUMNS, ControlUpdate, SimConfig, SimLog, TauStar, diag_remainder

__all__ = [
    "PRESET_NAMES",
    "preset",
    "parse_config",
    "read_config",
    "serialize_config",
    "write_csv",
    "read_csv",
    "fill_remainder",
]

PRESET_NAMES = ("fig1", "fig2", "fig3", "fig4", "fig5")

_A0 = 100.0


def preset(name: str) -> SimConfig:
    """Fresh SimConfig for one of the five bundled tracking experiments.

    All presets share the arm (3.6/2.7 kg, 1.8/1.8 m links), lambda_c = 10,
    lambda_s = 0.5, Gamma = 10 I, zero initial estimate, a 5 ms control period
    with 1 ms plant substeps and the (pi/3) sin(pi t) joint trajectory.
    They differ in cascade degree and reference form:
      fig1  degree 1, lowfreq coupling
      fig2  degree 2, full coupling
      fig3  degree 3, full coupling
      fig4  degree 2, modified (symmetric) form, Lambda = alpha I
      fig5  degree 3, modified (symmetric) form, Lambda = alpha I
    """
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset '{name}' (choose from {', '.join(PRESET_NAMES)})")
    if name == "fig1":
        ref = ReferenceConfig(ell=1, alphas=(_A0, 2.0 * math.sqrt(_A0)),
                              interconnection=Interconnection.LOWFREQ)
    elif name == "fig2":
        ref = ReferenceConfig(ell=2, alphas=(_A0, 3.0 * _A0 ** (2 / 3), 3.0 * _A0 ** (1 / 3)),
                              interconnection=Interconnection.FULL)
    elif name == "fig3":
        ref = ReferenceConfig(ell=3, alphas=(_A0, 4.0 * _A0 ** (3 / 4), 6.0 * _A0 ** (1 / 2),
                                             4.0 * _A0 ** (1 / 4)),
                              interconnection=Interconnection.FULL)
    elif name == "fig4":
        a = _A0 ** (1 / 3)
        ref = ReferenceConfig(ell=2, alphas=(), alpha=a, Lambda=a * np.eye(2),
                              form=ReferenceForm.MODIFIED,
                              interconnection=Interconnection.FULL)
    else:
        a = _A0 ** (1 / 4)
        ref = ReferenceConfig(ell=3, alphas=(), alpha=a, Lambda=a * np.eye(2),
                              form=ReferenceForm.MODIFIED,
                              interconnection=Interconnection.FULL)
    return SimConfig(ref=ref)


# -- schema --------------------------------------------------------------------

_SCHEMA = {
    "plant": ("m1", "m2", "l1", "l2", "q0", "qdot0"),
    "controller": ("law", "gamma", "theta_hat0", "theta_box"),
    "reference": ("ell", "alphas", "alpha", "lambda_matrix", "lambda_s", "lambda_c",
                  "lambda_c_star", "form", "interconnection", "feedback",
                  "traj_amplitude", "traj_omega"),
    "sim": ("preset", "dt_control", "dt_plant", "t_end", "seed", "log_every",
            "control_update"),
    "tau_star": ("kind", "amplitude", "t_on", "freq", "phase", "path"),
}


def _floats(key: str, raw: str, n: int = None) -> np.ndarray:
    try:
        vals = np.array([float(v) for v in raw.replace(",", " ").split()])
    except ValueError:
        raise ConfigError(f"key '{key}': cannot parse '{raw}' as numbers") from None
    if n is not None and vals.shape[0] != n:
        raise ConfigError(f"key '{key}': expected {n} values, got {vals.shape[0]}")
    return vals


def _float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key '{key}': cannot parse '{raw}' as a number") from None


def _int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"key '{key}': cannot parse '{raw}' as an integer") from None


def _enum(key: str, raw: str, enum_cls):
    try:
        return enum_cls(raw.strip().lower())
    except ValueError:
        options = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"key '{key}': '{raw}' is not one of {options}") from None


def parse_config(text: str, preset_name: str = None) -> SimConfig:
    """Build a validated SimConfig from structured text.

    Precedence: preset named in [sim] (or the preset_name argument) supplies
    the base values, explicit keys override it, everything else defaults.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    for section in parser.sections():
        if section == "sweep":
            continue
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section '[{section}]'")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in section '[{section}]'")

    def get(section, key, default=None):
        if parser.has_section(section) and key in parser[section]:
            return parser[section][key].strip()
        return default

    base = get("sim", "preset", preset_name)
    cfg = preset(base) if base else preset("fig1")

    m1 = _float("m1", get("plant", "m1")) if get("plant", "m1") else cfg.plant.m1
    m2 = _float("m2", get("plant", "m2")) if get("plant", "m2") else cfg.plant.m2
    l1 = _float("l1", get("plant", "l1")) if get("plant", "l1") else cfg.plant.l1
    l2 = _float("l2", get("plant", "l2")) if get("plant", "l2") else cfg.plant.l2
    if min(m1, m2, l1, l2) <= 0:
        raise ConfigError("plant masses and lengths must be positive")
    cfg.plant = ManipulatorParams(m1, m2, l1, l2)

    for key, attr in (("q0", "q0"), ("qdot0", "qdot0")):
        raw = get("plant", key)
        if raw is not None:
            setattr(cfg, attr, None if raw.lower() == "tracking" else _floats(key, raw, 2))

    raw = get("controller", "law")
    if raw is not None:
        cfg.law = _enum("law", raw, ControlLaw)
    raw = get("controller", "gamma")
    if raw is not None:
        vals = _floats("gamma", raw)
        if vals.shape[0] == 1:
            cfg.gamma = vals[0] * np.eye(N_PARAMS)
        elif vals.shape[0] == N_PARAMS:
            cfg.gamma = np.diag(vals)
        elif vals.shape[0] == N_PARAMS * N_PARAMS:
            cfg.gamma = vals.reshape(N_PARAMS, N_PARAMS)
        else:
            raise ConfigError("key 'gamma': give 1 (scalar), 3 (diagonal) or 9 values")
    raw = get("controller", "theta_hat0")
    if raw is not None:
        cfg.theta_hat0 = _floats("theta_hat0", raw, N_PARAMS)
    raw = get("controller", "theta_box")
    if raw is not None:
        if raw.lower() == "none":
            cfg.theta_box = None
        else:
            vals = _floats("theta_box", raw, 2 * N_PARAMS)
            cfg.theta_box = (vals[:N_PARAMS], vals[N_PARAMS:])

    rc = cfg.ref
    raw = get("reference", "ell")
    if raw is not None:
        rc.ell = _int("ell", raw)
    raw = get("reference", "alphas")
    if raw is not None:
        rc.alphas = tuple(_floats("alphas", raw))
    raw = get("reference", "alpha")
    if raw is not None:
        rc.alpha = _float("alpha", raw)
    raw = get("reference", "lambda_matrix")
    if raw is not None:
        if raw.lower() == "none":
            rc.Lambda = None
        else:
            vals = _floats("lambda_matrix", raw)
            if vals.shape[0] == 1:
                rc.Lambda = vals[0] * np.eye(2)
            elif vals.shape[0] == 4:
                rc.Lambda = vals.reshape(2, 2)
            else:
                raise ConfigError("key 'lambda_matrix': give 1 value or 4 (row-major)")
    for key, attr in (("lambda_s", "lambda_s"), ("lambda_c", "lambda_c"),
                      ("lambda_c_star", "lambda_c_star")):
        raw = get("reference", key)
        if raw is not None:
            setattr(rc, attr, _float(key, raw))
    raw = get("reference", "form")
    if raw is not None:
        rc.form = _enum("form", raw, ReferenceForm)
    raw = get("reference", "interconnection")
    if raw is not None:
        rc.interconnection = _enum("interconnection", raw, Interconnection)
    raw = get("reference", "feedback")
    if raw is not None:
        rc.feedback = _enum("feedback", raw, FeedbackKind)
    amp_raw = get("reference", "traj_amplitude")
    om_raw = get("reference", "traj_omega")
    if amp_raw is not None or om_raw is not None:
        amp = _floats("traj_amplitude", amp_raw, 2) if amp_raw else cfg.trajectory.amplitude
        om = _float("traj_omega", om_raw) if om_raw else cfg.trajectory.omega
        cfg.trajectory = SineTrajectory(amplitude=amp, omega=om)

    for key, attr, conv in (("dt_control", "dt_control", _float),
                            ("dt_plant", "dt_plant", _float),
                            ("t_end", "t_end", _float),
                            ("seed", "seed", _int),
                            ("log_every", "log_every", _int)):
        raw = get("sim", key)
        if raw is not None:
            setattr(cfg, attr, conv(key, raw))
    raw = get("sim", "control_update")
    if raw is not None:
        cfg.control_update = _enum("control_update", raw, ControlUpdate)

    if parser.has_section("tau_star"):
        sec = parser["tau_star"]
        kind = sec.get("kind", cfg.tau_star.kind).strip().lower()
        amplitude = (_floats("amplitude", sec["amplitude"], 2)
                     if "amplitude" in sec else cfg.tau_star.amplitude)
        cfg.tau_star = TauStar(
            kind=kind, amplitude=amplitude,
            t_on=_float("t_on", sec["t_on"]) if "t_on" in sec else cfg.tau_star.t_on,
            freq=_float("freq", sec["freq"]) if "freq" in sec else cfg.tau_star.freq,
            phase=_float("phase", sec["phase"]) if "phase" in sec else cfg.tau_star.phase,
            path=sec.get("path", cfg.tau_star.path).strip())

    cfg.validate()
    return cfg


def read_config(path: str, preset_name: str = None) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), preset_name=preset_name)


def _fmt(x) -> str:
    return repr(float(x))


def _fmt_vec(v) -> str:
    return ", ".join(_fmt(x) for x in np.asarray(v).ravel())


def serialize_config(cfg: SimConfig) -> str:
    """Render every documented key explicitly; floats round-trip bit-exactly."""
    rc = cfg.ref
    out = io.StringIO()
    w = out.write
    w("[plant]\n")
    w(f"m1 = {_fmt(cfg.plant.m1)}\nm2 = {_fmt(cfg.plant.m2)}\n")
    w(f"l1 = {_fmt(cfg.plant.l1)}\nl2 = {_fmt(cfg.plant.l2)}\n")
    w(f"q0 = {'tracking' if cfg.q0 is None else _fmt_vec(cfg.q0)}\n")
    w(f"qdot0 = {'tracking' if cfg.qdot0 is None else _fmt_vec(cfg.qdot0)}\n\n")
    w("[controller]\n")
    w(f"law = {cfg.law.value}\n")
    w(f"gamma = {_fmt_vec(cfg.gamma)}\n")
    w(f"theta_hat0 = {_fmt_vec(cfg.theta_hat0)}\n")
    if cfg.theta_box is None:
        w("theta_box = none\n\n")
    else:
        w(f"theta_box = {_fmt_vec(cfg.theta_box[0])}, {_fmt_vec(cfg.theta_box[1])}\n\n")
    w("[reference]\n")
    w(f"ell = {rc.ell}\n")
    w(f"alphas = {_fmt_vec(rc.alphas) if rc.alphas else ''}\n")
    w(f"alpha = {_fmt(rc.alpha)}\n")
    w(f"lambda_matrix = {'none' if rc.Lambda is None else _fmt_vec(rc.Lambda)}\n")
    w(f"lambda_s = {_fmt(rc.lambda_s)}\nlambda_c = {_fmt(rc.lambda_c)}\n")
    w(f"lambda_c_star = {_fmt(rc.lambda_c_star)}\n")
    w(f"form = {rc.form.value}\n")
    w(f"interconnection = {rc.interconnection.value}\n")
    w(f"feedback = {rc.feedback.value}\n")
    w(f"traj_amplitude = {_fmt_vec(cfg.trajectory.amplitude)}\n")
    w(f"traj_omega = {_fmt(cfg.trajectory.omega)}\n\n")
    w("[sim]\n")
    w(f"dt_control = {_fmt(cfg.dt_control)}\ndt_plant = {_fmt(cfg.dt_plant)}\n")
    w(f"t_end = {_fmt(cfg.t_end)}\nseed = {cfg.seed}\nlog_every = {cfg.log_every}\n")
    w(f"control_update = {cfg.control_update.value}\n\n")
    w("[tau_star]\n")
    ts = cfg.tau_star
    w(f"kind = {ts.kind}\namplitude = {_fmt_vec(ts.amplitude)}\n")
    w(f"t_on = {_fmt(ts.t_on)}\nfreq = {_fmt(ts.freq)}\nphase = {_fmt(ts.phase)}\n")
    w(f"path = {ts.path}\n")
    return out.getvalue()


# -- CSV -----------------------------------------------------------------------

def write_csv(log: SimLog, path: str):
    """One row per logged control period, fixed column order, lossless floats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        n = len(log)
        for i in range(n):
            row = [log.t[i], log.q[i, 0], log.q[i, 1], log.q_d[i, 0], log.q_d[i, 1],
                   log.qdot[i, 0], log.qdot[i, 1], log.e[i, 0], log.e[i, 1],
                   log.edot[i, 0], log.edot[i, 1], log.z[i, 0], log.z[i, 1],
                   log.s[i, 0], log.s[i, 1], log.tau[i, 0], log.tau[i, 1],
                   log.tau_star[i, 0], log.tau_star[i, 1],
                   log.theta_hat[i, 0], log.theta_hat[i, 1], log.theta_hat[i, 2],
                   log.psi[i, 0], log.psi[i, 1], log.V[i]]
            out = [repr(float(v)) for v in row]
            if log.rem is None:
                out += ["", ""]
            else:
                out += [repr(float(log.rem[i, 0])), repr(float(log.rem[i, 1]))]
            writer.writerow(out)


def read_csv(path: str) -> dict:
    """Columns keyed by header name; empty cells read back as NaN."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) if v != "" else math.nan for v in row] for row in reader]
    data = np.array(rows) if rows else np.empty((0, len(header)))
    return {name: data[:, j] for j, name in enumerate(header)}


def fill_remainder(log: SimLog) -> SimLog:
    """Separate pass filling the remainder columns from the logged s signal."""
    dt = float(log.t[1] - log.t[0]) if len(log) > 1 else log.config.dt_control
    log.rem = diag_remainder(log.s, dt, log.config.ref.ell)
    return log


def clone(cfg: SimConfig) -> SimConfig:
    """Deep copy for derived runs (presets hand out fresh objects already)."""
    return copy.deepcopy(cfg)
