#!/usr/bin/env python3
"""Tracking-error figure: e1, e2 versus time from a run CSV.

Writes both a raster (.png) and a vector (.pdf) file next to the requested
output stem. An optional second CSV is overlaid for side-by-side comparison
of two controllers on the same axes.
"""
from __future__ import annotations

import argparse
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from loader import load_run, rms_error  # noqa: E402


def plot_tracking(csv_path: str, figure_id: str, out_stem: str,
                  overlay_csv: str = None, overlay_label: str = None) -> dict:
    """Render the figure; returns the annotated RMS values by trace label."""
    data = load_run(csv_path)
    t = data["t"]
    half = t[-1] / 2.0
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(t, data["e1"], color="tab:blue", lw=1.2, label="joint 1")
    ax.plot(t, data["e2"], color="tab:red", lw=1.2, label="joint 2")
    annotations = {figure_id: rms_error(data, half, t[-1])}
    if overlay_csv:
        base = load_run(overlay_csv)
        label = overlay_label or "baseline"
        ax.plot(base["t"], base["e1"], color="tab:blue", lw=1.0, ls="--", alpha=0.6,
                label=f"joint 1 ({label})")
        ax.plot(base["t"], base["e2"], color="tab:red", lw=1.0, ls="--", alpha=0.6,
                label=f"joint 2 ({label})")
        annotations[label] = rms_error(base, base["t"][-1] / 2.0, base["t"][-1])
    note = "   ".join(f"rms[{k}] = {v:.3e}" for k, v in annotations.items())
    ax.set_xlabel("time (s)")
    ax.set_ylabel("position tracking error (rad)")
    ax.set_title(f"{figure_id}: position tracking errors")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right", fontsize=9)
    ax.annotate(note, xy=(0.02, 0.02), xycoords="axes fraction", fontsize=8)
    fig.tight_layout()
    stem, ext = os.path.splitext(out_stem)
    stem = stem if ext in (".png", ".pdf", "") else out_stem
    fig.savefig(stem + ".png", dpi=150)
    fig.savefig(stem + ".pdf")
    plt.close(fig)
    return annotations


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", required=True, help="run CSV")
    parser.add_argument("--fig-id", required=True, help="figure identifier")
    parser.add_argument("--out", required=True, help="output stem (.png/.pdf added)")
    parser.add_argument("--overlay-csv", help="second run CSV to overlay")
    parser.add_argument("--overlay-label", help="legend label for the overlay")
    args = parser.parse_args(argv)
    ann = plot_tracking(args.csv, args.fig_id, args.out,
                        overlay_csv=args.overlay_csv, overlay_label=args.overlay_label)
    for key, val in ann.items():
        print(f"rms[{key}] = {val:.6e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
