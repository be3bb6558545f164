"""Command-line interface: run | verify | compare | sweep.

Exit codes: 0 success, 2 configuration error, 3 aborted simulation,
4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import config as cfgmod
from . import sim as simmod
from . import verify as vfy
from .reference import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORTED = 3
EXIT_VERIFY = 4


def _load_config(args) -> simmod.SimConfig:
    if getattr(args, "config", None):
        cfg = cfgmod.read_config(args.config, preset_name=getattr(args, "preset", None))
    elif getattr(args, "preset", None):
        cfg = cfgmod.preset(args.preset)
    else:
        cfg = cfgmod.preset("fig1")
    if getattr(args, "t_end", None) is not None:
        cfg.t_end = args.t_end
        cfg.validate()
    return cfg


def cmd_run(args) -> int:
    cfg = _load_config(args)
    log = simmod.run(cfg)
    cfgmod.write_csv(log, args.out)
    if log.aborted:
        print(f"aborted: last finite row index {log.abort_row}", file=sys.stderr)
        return EXIT_ABORTED
    print(f"wrote {len(log)} rows to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = vfy.run_suite(level=args.level, seed=args.seed)
    print(vfy.render_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMPARE_COLUMNS = ("t", "nl_e1", "nl_e2", "lin_e1", "lin_e2",
                   "diff1", "diff2", "rem1", "rem2")


def cmd_compare(args) -> int:
    """Nonlinear closed loop vs its certainty-equivalence linear model."""
    cfg = _load_config(args)
    log = simmod.run(cfg)
    if log.aborted:
        print(f"aborted: last finite row index {log.abort_row}", file=sys.stderr)
        return EXIT_ABORTED
    t_lin, e_lin = simmod.linear_ce_response(cfg)
    n = min(len(log), t_lin.shape[0])
    cfgmod.fill_remainder(log)
    diff = log.e[:n] - e_lin[:n]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMPARE_COLUMNS)
        for i in range(n):
            writer.writerow([repr(float(v)) for v in
                             (log.t[i], log.e[i, 0], log.e[i, 1],
                              e_lin[i, 0], e_lin[i, 1], diff[i, 0], diff[i, 1],
                              log.rem[i, 0], log.rem[i, 1])])
    half = log.t[n - 1] / 2.0
    print(f"wrote {n} rows to {args.out}")
    print(f"rms difference (nonlinear vs linear): "
          f"{simmod.rms_window(log.t[:n], diff, 0.0, log.t[n - 1]):.6g}")
    print(f"rms remainder d^{cfg.ref.ell}s/dt^{cfg.ref.ell} over second half: "
          f"{simmod.rms_window(log.t, log.rem, half, log.t[-1]):.6g}")
    return EXIT_OK


def _sweep_point(payload):
    name, text, out_dir = payload
    try:
        cfg = cfgmod.parse_config(text)
        log = simmod.run(cfg)
        cfgmod.write_csv(log, os.path.join(out_dir, f"{name}.csv"))
        if log.aborted:
            return name, "aborted", {}
        summary = {
            "rms_e": simmod.rms_window(log.t, log.e, log.t[-1] / 2.0, log.t[-1]),
            "rms_edot": simmod.rms_window(log.t, log.edot, log.t[-1] / 2.0, log.t[-1]),
            "sup_e_tail": float(np.abs(log.e[log.t >= 0.75 * log.t[-1]]).max()),
        }
        try:
            rem = simmod.diag_remainder(log.s, float(log.t[1] - log.t[0]), cfg.ref.ell)
            summary["rms_remainder"] = simmod.rms_window(
                log.t, rem, log.t[-1] / 2.0, log.t[-1])
        except ValueError:
            summary["rms_remainder"] = float("nan")
        return name, "ok", summary
    except ConfigError as exc:
        return name, f"rejected: {exc}", {}
    except Exception as exc:  # keep the sweep going, report the point
        return name, f"failed: {exc}", {}


def cmd_sweep(args) -> int:
    """Cartesian grid over numeric config keys listed in the [sweep] section."""
    import configparser

    with open(args.config, "r", encoding="utf-8") as fh:
        text = fh.read()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not parser.has_section("sweep"):
        print("config error: sweep needs a [sweep] section with dotted keys",
              file=sys.stderr)
        return EXIT_CONFIG
    grid_keys = []
    grid_values = []
    for key, raw in parser["sweep"].items():
        if "." not in key:
            print(f"config error: sweep key '{key}' must be section.key", file=sys.stderr)
            return EXIT_CONFIG
        grid_keys.append(key)
        # ';' separates grid points holding vector values, ',' separates scalars
        sep = ";" if ";" in raw else ","
        grid_values.append([v.strip() for v in raw.split(sep)])
    parser.remove_section("sweep")

    os.makedirs(args.out, exist_ok=True)
    points = []
    for combo in itertools.product(*grid_values):
        p = configparser.ConfigParser(interpolation=None)
        p.read_string(text)
        p.remove_section("sweep")
        tags = []
        for key, val in zip(grid_keys, combo):
            section, opt = key.split(".", 1)
            if not p.has_section(section):
                p.add_section(section)
            p.set(section, opt, val)
            tags.append(f"{opt}={val}")
        name = "__".join(tags).replace("/", "_").replace(" ", "")
        buf = []
        for section in p.sections():
            buf.append(f"[{section}]")
            buf += [f"{k} = {v}" for k, v in p[section].items()]
            buf.append("")
        points.append((name, "\n".join(buf), args.out))

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, points))
    else:
        results = [_sweep_point(p) for p in points]

    summary_path = os.path.join(args.out, "summary.csv")
    fields = ("point", "status", "rms_e", "rms_edot", "sup_e_tail", "rms_remainder")
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for name, status, summary in results:
            writer.writerow([name, status] +
                            [repr(float(summary[k])) if k in summary else ""
                             for k in fields[2:]])
    n_ok = sum(1 for _, status, _ in results if status == "ok")
    print(f"{n_ok}/{len(results)} points completed; summary at {summary_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptarm",
        description="Adaptive tracking control of a 2-DOF planar arm: "
                    "simulation runs, property verification, linear-model "
                    "comparison and parameter sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one configuration to CSV")
    p_run.add_argument("--config", help="config file (INI sections)")
    p_run.add_argument("--preset", choices=cfgmod.PRESET_NAMES,
                       help="bundled experiment preset")
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument("--t-end", type=float, dest="t_end", help="horizon override (s)")
    p_run.set_defaults(func=cmd_run)

    p_ver = sub.add_parser("verify", help="run the numerical property suites")
    p_ver.add_argument("--level", choices=("fast", "full"), default="fast")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.set_defaults(func=cmd_verify)

    p_cmp = sub.add_parser("compare", help="nonlinear vs linear-model tracking error")
    p_cmp.add_argument("--config", help="config file (INI sections)")
    p_cmp.add_argument("--preset", choices=cfgmod.PRESET_NAMES)
    p_cmp.add_argument("--out", required=True, help="output CSV path")
    p_cmp.add_argument("--t-end", type=float, dest="t_end")
    p_cmp.set_defaults(func=cmd_compare)

    p_swp = sub.add_parser("sweep", help="grid of runs from a [sweep] section")
    p_swp.add_argument("--config", required=True)
    p_swp.add_argument("--out", required=True, help="output directory")
    p_swp.add_argument("--jobs", type=int, default=1)
    p_swp.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
