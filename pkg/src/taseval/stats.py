"""Rank correlation and inter-rater agreement."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .exceptions import ConstantInput, DegenerateVariance, LengthMismatch

__all__ = ["spearman", "icc3k", "RatingsMatrix"]


def spearman(x, y) -> float:
    """Spearman's rho: Pearson correlation of average ranks."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise LengthMismatch(f"{x.size} vs {y.size} values")
    if x.size < 3:
        raise LengthMismatch("need at least 3 paired values")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ConstantInput("rank correlation is undefined for constant input")
    rx = rankdata(x) - (x.size + 1) / 2.0
    ry = rankdata(y) - (y.size + 1) / 2.0
    rho = float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))
    return min(1.0, max(-1.0, rho))


@dataclass(frozen=True, eq=False)
class RatingsMatrix:
    """Items x raters scores (1-10 scale in the human study)."""

    values: np.ndarray
    items: tuple = ()
    scale: str = "1-10"

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("ratings must be an items x raters matrix")
        if v.shape[0] < 2 or v.shape[1] < 2:
            raise ValueError("need at least 2 items and 2 raters")
        if not np.all(np.isfinite(v)):
            raise ValueError("ratings contain missing or non-finite cells")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.items and len(self.items) != v.shape[0]:
            raise ValueError("item labels do not match the row count")
        object.__setattr__(self, "items", tuple(self.items))


def icc3k(m) -> float:
    """ICC(3,k), two-way mixed consistency for the mean of k raters.

    ``(MS_rows - MS_error) / MS_rows`` from the items x raters ANOVA.
    """
    v = m.values if isinstance(m, RatingsMatrix) else RatingsMatrix(m).values
    n, k = v.shape
    grand = v.mean()
    ss_rows = k * np.sum((v.mean(axis=1) - grand) ** 2)
    ss_cols = n * np.sum((v.mean(axis=0) - grand) ** 2)
    ss_err = np.sum((v - grand) ** 2) - ss_rows - ss_cols
    ms_rows = ss_rows / (n - 1)
    ms_err = max(ss_err, 0.0) / ((n - 1) * (k - 1))
    if ms_rows <= 1e-15 * max(1.0, float(np.sum(v * v))):
        raise DegenerateVariance("items do not vary; ICC is undefined")
    return float((ms_rows - ms_err) / ms_rows)
