"""Pair manifests: JSON-lines parsing, CSV import and filter validation."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..exceptions import DuplicatePairId, ParseError, TasEvalError
from ..image import read_image

__all__ = [
    "LANGS",
    "SOURCES",
    "SPLITS",
    "MIN_AREA",
    "PairEntry",
    "PairManifest",
    "Violation",
    "parse_manifest",
    "import_csv_manifest",
    "validate_manifest",
    "write_manifest",
]

LANGS = ("ko", "ar", "ja", "other")
SOURCES = ("open", "crawl", "synth")
SPLITS = ("train", "eval")
MIN_AREA = 1000

_KNOWN = ("pairId", "lang", "imageA", "imageB", "textA", "textB", "source", "split", "generated")


@dataclass(frozen=True)
class PairEntry:
    """One same-style pair.

    ``image_b`` is the target (ground truth) and may be missing when a
    ``generated`` candidate is scored without references.
    """

    pair_id: str
    lang: str
    image_a: str
    image_b: str | None
    text_a: str
    text_b: str
    source: str = "open"
    split: str = "eval"
    generated: str | None = None
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def to_json(self) -> dict:
        d = {
            "pairId": self.pair_id, "lang": self.lang, "imageA": self.image_a, "imageB": self.image_b,
            "textA": self.text_a, "textB": self.text_b, "source": self.source, "split": self.split,
        }
        if self.generated is not None:
            d["generated"] = self.generated
        d.update(self.extra)
        return d


@dataclass(frozen=True)
class PairManifest:
    entries: tuple
    base_dir: Path = Path(".")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def resolve(self, rel) -> Path | None:
        if rel is None:
            return None
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p


def _entry_from_obj(obj, line):
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", line)
    missing = [k for k in ("pairId", "imageA", "textA", "textB") if k not in obj]
    if missing:
        raise ParseError(f"missing field(s) {', '.join(missing)}", line)
    if obj.get("imageB") is None and obj.get("generated") is None:
        raise ParseError("imageB may only be omitted when a generated image is given", line)
    lang = obj.get("lang", "other")
    source = obj.get("source", "open")
    split = obj.get("split", "eval")
    for name, val, allowed in (("lang", lang, LANGS), ("source", source, SOURCES), ("split", split, SPLITS)):
        if val not in allowed:
            raise ParseError(f"{name} {val!r} not in {allowed}", line)
    for name in ("pairId", "imageA", "textA", "textB"):
        if not isinstance(obj[name], str):
            raise ParseError(f"{name} must be a string", line)
    return PairEntry(
        pair_id=obj["pairId"], lang=lang, image_a=obj["imageA"], image_b=obj.get("imageB"),
        text_a=obj["textA"], text_b=obj["textB"], source=source, split=split,
        generated=obj.get("generated"),
        extra={k: v for k, v in obj.items() if k not in _KNOWN},
    )


def _check_unique(entries):
    seen = set()
    for e in entries:
        if e.pair_id in seen:
            raise DuplicatePairId(e.pair_id)
        seen.add(e.pair_id)


def parse_manifest(path) -> PairManifest:
    """Parse a JSON-lines manifest; blank lines are skipped, unknown keys kept."""
    path = Path(path)
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", lineno) from None
            entries.append(_entry_from_obj(obj, lineno))
    _check_unique(entries)
    return PairManifest(tuple(entries), path.parent)


def import_csv_manifest(path) -> PairManifest:
    """Read the same fields from a CSV file with a header row."""
    path = Path(path)
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            obj = {k: (v if v != "" else None) for k, v in row.items() if k is not None}
            for k in ("textA", "textB"):
                if obj.get(k) is None and k in row:
                    obj[k] = ""
            entries.append(_entry_from_obj(obj, lineno))
    _check_unique(entries)
    return PairManifest(tuple(entries), path.parent)


def write_manifest(path, entries) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in entries:
            fh.write(json.dumps(e.to_json(), ensure_ascii=False, sort_keys=False) + "\n")


@dataclass(frozen=True)
class Violation:
    pair_id: str
    field: str
    rule: str
    detail: str

    def as_dict(self):
        return {"pairId": self.pair_id, "field": self.field, "rule": self.rule, "detail": self.detail}


def _check_image(m, e, key, rel, out):
    path = m.resolve(rel)
    if not path.is_file():
        out.append(Violation(e.pair_id, key, "missing", str(path)))
        return
    try:
        img = read_image(path)
    except (TasEvalError, OSError) as exc:
        out.append(Violation(e.pair_id, key, "undecodable", str(exc)))
        return
    area = img.width * img.height
    if area < MIN_AREA:
        out.append(Violation(e.pair_id, key, "area", f"{img.width}x{img.height} = {area} px < {MIN_AREA}"))
    if not img.width > img.height:
        out.append(Violation(e.pair_id, key, "orientation", f"{img.width}x{img.height} is not landscape"))


def validate_manifest(m: PairManifest) -> list:
    """Check files, the minimum-area and landscape rules and non-empty texts.

    Returns the violations; the manifest is never modified.
    """
    out = []
    for e in m:
        for key, rel in (("imageA", e.image_a), ("imageB", e.image_b), ("generated", e.generated)):
            if rel is not None:
                _check_image(m, e, key, rel, out)
        for key, text in (("textA", e.text_a), ("textB", e.text_b)):
            if text == "":
                out.append(Violation(e.pair_id, key, "empty-text", "text is empty"))
    return out
