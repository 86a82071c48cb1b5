"""Recognition-side metrics on OCR transcripts."""
from __future__ import annotations

import unicodedata

from .exceptions import EmptyBatch

__all__ = ["levenshtein", "ned", "normalize_transcript", "rec_acc"]


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit insert, delete and substitute costs."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def ned(pred: str, gt: str) -> float:
    """``1 - levenshtein / max(len)`` after NFC normalization; two empties give 1."""
    pred = unicodedata.normalize("NFC", pred)
    gt = unicodedata.normalize("NFC", gt)
    longest = max(len(pred), len(gt))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(pred, gt) / longest


def normalize_transcript(s: str) -> str:
    """NFC with all whitespace removed; case is kept."""
    return "".join(unicodedata.normalize("NFC", s).split())


def rec_acc(rows) -> float:
    """Fraction of ``(pred, gt)`` rows that match exactly after normalization."""
    rows = list(rows)
    if not rows:
        raise EmptyBatch("recognition accuracy of an empty batch")
    hits = sum(normalize_transcript(p) == normalize_transcript(g) for p, g in rows)
    return hits / len(rows)
