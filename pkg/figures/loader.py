"""Shared CSV loader for the figure scripts.

Pure consumer of the simulator's documented CSV contract: nothing is
recomputed from dynamics, and the schema is pinned here independently so a
drifting producer fails loudly with the offending column named.
"""
from __future__ import annotations

import csv
import math

import numpy as np

RUN_COLUMNS = ("t", "q1", "q2", "qd1", "qd2", "dq1", "dq2", "e1", "e2",
               "edot1", "edot2", "z1", "z2", "s1", "s2", "tau1", "tau2",
               "taustar1", "taustar2", "that1", "that2", "that3",
               "psi1", "psi2", "V", "rem1", "rem2")

COMPARE_COLUMNS = ("t", "nl_e1", "nl_e2", "lin_e1", "lin_e2",
                   "diff1", "diff2", "rem1", "rem2")


class SchemaError(ValueError):
    """The CSV does not carry the documented columns."""


def _load(path: str, required) -> dict:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file")
        rows = [[float(v) if v != "" else math.nan for v in row] for row in reader]
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column '{missing[0]}'")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.array(rows)
    return {name: data[:, j] for j, name in enumerate(header)}


def load_run(path: str) -> dict:
    return _load(path, RUN_COLUMNS)


def load_compare(path: str) -> dict:
    return _load(path, COMPARE_COLUMNS)


def rms_error(data: dict, t0: float, t1: float, cols=("e1", "e2")) -> float:
    """RMS of the error vector over a time window.

    Matches the simulator's sweep-summary statistic exactly (same formula on
    the same serialized samples).
    """
    t = data["t"]
    mask = (t >= t0) & (t <= t1)
    if not np.any(mask):
        raise ValueError(f"window [{t0}, {t1}] selects no samples")
    stacked = np.stack([data[c][mask] for c in cols], axis=1)
    return float(np.sqrt(np.mean(np.sum(stacked ** 2, axis=1))))
