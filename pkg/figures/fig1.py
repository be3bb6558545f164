#!/usr/bin/env python3
"""Figure 1: tracking errors of the fig1 preset run."""
import argparse

from plot_tracking import plot_tracking


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", required=True, help="fig1 preset run CSV")
    parser.add_argument("--out", required=True, help="output stem")
    args = parser.parse_args(argv)
    plot_tracking(args.csv, "fig1", args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
