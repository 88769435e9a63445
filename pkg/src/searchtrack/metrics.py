"""OSPA distance and run-level indicator aggregation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

INDICATORS = ("ospa_dist", "ospa_loc", "ospa_card", "search_entropy")


@dataclass(frozen=True)
class OspaParams:
    p: float = 1.0
    c: float = 100.0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("OSPA order p must be >= 1")
        if not self.c > 0:
            raise ValueError("OSPA cutoff c must be positive")


def ospa(X, Y, params: OspaParams = OspaParams()) -> tuple[float, float, float]:
    """OSPA (dist, loc, card) between two planar point sets of shape (m, 2) and (n, 2)."""
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    if len(X) > len(Y):
        X, Y = Y, X
    m, n = len(X), len(Y)
    if n == 0:
        return 0.0, 0.0, 0.0
    p, c = params.p, params.c
    if m:
        D = np.minimum(c, np.linalg.norm(X[:, None, :] - Y[None, :, :], axis=-1)) ** p
        rows, cols = linear_sum_assignment(D)
        loc_cost = float(D[rows, cols].sum())
    else:
        loc_cost = 0.0
    card_cost = c**p * (n - m)
    dist = ((loc_cost + card_cost) / n) ** (1.0 / p)
    loc = (loc_cost / n) ** (1.0 / p)
    card = (card_cost / n) ** (1.0 / p)
    return dist, loc, card


def aggregate_run(records: Sequence) -> dict:
    """Time-averaged indicators over the records of one run."""
    if not records:
        raise ValueError("no records to aggregate")
    return {
        key: float(np.mean([getattr(rec, key) for rec in records])) for key in INDICATORS
    }


def mc_summary(rows: Sequence[dict]) -> dict:
    """Monte-Carlo mean and standard error of each indicator across runs."""
    out = {"n_runs": len(rows)}
    for key in INDICATORS:
        vals = np.array([row[key] for row in rows], dtype=float)
        out[key] = float(vals.mean())
        out[key + "_se"] = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return out
