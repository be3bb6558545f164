#!/usr/bin/env python3
"""Nonlinear closed loop versus its linear comparison model, from a compare CSV.

Top axes overlay the two tracking errors per joint; the bottom axes show the
difference together with the logged remainder signal that bounds it.
"""
from __future__ import annotations

import argparse
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from loader import load_compare  # noqa: E402


def plot_compare(csv_path: str, out_stem: str) -> None:
    data = load_compare(csv_path)
    t = data["t"]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True,
                                   height_ratios=[3, 2])
    for j, color in ((1, "tab:blue"), (2, "tab:red")):
        ax1.plot(t, data[f"nl_e{j}"], color=color, lw=1.2, label=f"joint {j}, closed loop")
        ax1.plot(t, data[f"lin_e{j}"], color=color, lw=1.0, ls="--", alpha=0.7,
                 label=f"joint {j}, linear model")
    ax1.set_ylabel("tracking error (rad)")
    ax1.set_title("closed loop vs linear comparison model")
    ax1.grid(True, alpha=0.3)
    ax1.legend(fontsize=8, ncol=2)
    for j, color in ((1, "tab:blue"), (2, "tab:red")):
        ax2.plot(t, data[f"diff{j}"], color=color, lw=1.0, label=f"difference, joint {j}")
    rem = np.hypot(data["rem1"], data["rem2"])
    if np.all(np.isfinite(rem)):
        ax2r = ax2.twinx()
        ax2r.plot(t, rem, color="gray", lw=0.8, alpha=0.7)
        ax2r.set_ylabel("|remainder|", color="gray")
    ax2.set_xlabel("time (s)")
    ax2.set_ylabel("difference (rad)")
    ax2.grid(True, alpha=0.3)
    ax2.legend(fontsize=8)
    fig.tight_layout()
    stem, ext = os.path.splitext(out_stem)
    stem = stem if ext in (".png", ".pdf", "") else out_stem
    fig.savefig(stem + ".png", dpi=150)
    fig.savefig(stem + ".pdf")
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", required=True, help="compare CSV")
    parser.add_argument("--out", required=True, help="output stem (.png/.pdf added)")
    args = parser.parse_args(argv)
    plot_compare(args.csv, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
