"""Metric-versus-human correlation tables."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..exceptions import ConstantInput, DegenerateVariance, ItemMismatch, ParseError
from ..stats import RatingsMatrix, icc3k, spearman
from .runner import METRIC_COLUMNS

__all__ = [
    "ATTRIBUTE_COMPONENT",
    "Ratings",
    "read_ratings",
    "read_report_metrics",
    "correlate",
    "correlate_files",
    "table_to_csv",
]

# rated attribute -> the TAS component that targets it
ATTRIBUTE_COMPONENT = {"color": "s_clr", "font": "s_fnt", "background": "s_bg"}
_ALIASES = {"colour": "color", "clr": "color", "fnt": "font", "bg": "background"}


@dataclass(frozen=True)
class Ratings:
    """Per-attribute rating matrices sharing one item order."""

    items: tuple
    by_attribute: dict  # attribute -> RatingsMatrix

    def human_mean(self) -> np.ndarray:
        return np.mean([m.values.mean(axis=1) for m in self.by_attribute.values()], axis=0)

    def mean_matrix(self) -> RatingsMatrix:
        """Items x raters matrix of each rater's mean over attributes."""
        stack = np.mean([m.values for m in self.by_attribute.values()], axis=0)
        return RatingsMatrix(stack, self.items)


def read_ratings(path) -> Ratings:
    """CSV with header ``item_id[,attribute],rater1,...``.

    Without an attribute column all rows form a single ``overall`` matrix.
    Every attribute must list the same items in the same order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("ratings file is empty", 1) from None
        header = [h.strip() for h in header]
        if not header or header[0] not in ("item_id", "pair_id", "item"):
            raise ParseError("first column must be item_id", 1)
        has_attr = len(header) > 1 and header[1] == "attribute"
        first_rater = 2 if has_attr else 1
        if len(header) - first_rater < 2:
            raise ParseError("need at least two rater columns", 1)
        groups = {}
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ParseError(f"expected {len(header)} columns, got {len(rec)}", lineno)
            attr = rec[1].strip().lower() if has_attr else "overall"
            attr = _ALIASES.get(attr, attr)
            try:
                scores = [float(c) for c in rec[first_rater:]]
            except ValueError:
                raise ParseError("rating cells must be numeric (no missing cells)", lineno) from None
            groups.setdefault(attr, ([], []))
            groups[attr][0].append(rec[0].strip())
            groups[attr][1].append(scores)
    if not groups:
        raise ParseError("no ratings rows", 2)
    items = None
    mats = {}
    for attr, (ids, vals) in groups.items():
        if items is None:
            items = tuple(ids)
        elif tuple(ids) != items:
            raise ItemMismatch(f"attribute {attr!r} lists items in a different order")
        try:
            mats[attr] = RatingsMatrix(np.asarray(vals), tuple(ids))
        except ValueError as exc:
            raise ParseError(f"attribute {attr!r}: {exc}") from None
    return Ratings(items, mats)


def read_report_metrics(path) -> tuple:
    """Scored rows of a report CSV as ``(item ids, {metric: array})``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "pair_id" not in reader.fieldnames:
            raise ParseError("report has no pair_id column", 1)
        ids, cols = [], {c: [] for c in METRIC_COLUMNS}
        for row in reader:
            if row.get("status", "ok") != "ok":
                continue
            ids.append(row["pair_id"])
            for c in METRIC_COLUMNS:
                v = row.get(c, "")
                cols[c].append(float(v) if v not in ("", None) else np.nan)
    return tuple(ids), {c: np.asarray(v) for c, v in cols.items()}


def _rho(x, y):
    if np.any(np.isnan(x)):
        return None, "missing values"
    try:
        return spearman(x, y), ""
    except ConstantInput:
        return None, "constant input"


def correlate(items, metrics: dict, ratings: Ratings) -> list:
    """Spearman rho per metric and ICC(3,k) per attribute.

    Returns rows ``(kind, name, target, value, n, note)``; ``value`` is None
    where the statistic is undefined.
    """
    items = tuple(items)
    if items != ratings.items:
        if set(items) == set(ratings.items):
            raise ItemMismatch("report and ratings list the same items in a different order")
        missing = sorted(set(items) ^ set(ratings.items))[:5]
        raise ItemMismatch(f"report and ratings items differ (e.g. {', '.join(missing)})")
    n = len(items)
    human = ratings.human_mean()
    table = []
    for name in METRIC_COLUMNS:
        if name not in metrics:
            continue
        rho, note = _rho(np.asarray(metrics[name], dtype=np.float64), human)
        table.append(("spearman", name, "human_mean", rho, n, note))
    for attr, comp in ATTRIBUTE_COMPONENT.items():
        if attr in ratings.by_attribute and comp in metrics:
            rho, note = _rho(np.asarray(metrics[comp], dtype=np.float64),
                             ratings.by_attribute[attr].values.mean(axis=1))
            table.append(("spearman", comp, attr, rho, n, note))
    mats = dict(ratings.by_attribute)
    if len(mats) > 1:
        mats["mean"] = ratings.mean_matrix()
    for attr, m in mats.items():
        try:
            value, note = icc3k(m), ""
        except DegenerateVariance:
            value, note = None, "no item variance"
        table.append(("icc3k", attr, "raters", value, n, note))
    return table


def table_to_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("kind", "name", "target", "value", "n", "note"))
    for kind, name, target, value, n, note in table:
        w.writerow((kind, name, target, "" if value is None else repr(float(value)), n, note))
    return buf.getvalue()


def correlate_files(report_csv, ratings_csv, out_dir=None) -> list:
    items, metrics = read_report_metrics(report_csv)
    table = correlate(items, metrics, read_ratings(ratings_csv))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "correlation.csv").write_text(table_to_csv(table), encoding="utf-8")
    return table
