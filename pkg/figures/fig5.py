#!/usr/bin/env python3
"""Figure 5: tracking errors of the fig5 preset (modified reference form).

With --baseline-csv the matching original-form run (fig3) is overlaid so the
two forms can be compared on one axes.
"""
import argparse

from plot_tracking import plot_tracking


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", required=True, help="fig5 preset run CSV")
    parser.add_argument("--out", required=True, help="output stem")
    parser.add_argument("--baseline-csv", help="fig3 run CSV to overlay")
    args = parser.parse_args(argv)
    plot_tracking(args.csv, "fig5", args.out,
                  overlay_csv=args.baseline_csv, overlay_label="fig3")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
