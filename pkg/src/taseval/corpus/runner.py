"""Batch evaluation of a manifest with per-pair error isolation."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__
from ..evaluate import EvalMode, evaluate_pair
from ..exceptions import MissingGroundTruth, ParseError, TasEvalError
from ..image import read_image
from ..simmetrics import PSNR_CAP_DB
from ..style.extract import CANVAS
from ..style.glyphs import DEFAULT_TEMPLATE, load_template
from .manifest import PairManifest

__all__ = [
    "METRIC_COLUMNS",
    "REPORT_COLUMNS",
    "EvalReport",
    "read_transcripts",
    "worker_count",
    "parse_extractor",
    "run_eval",
    "summarize",
    "format_summary",
]

METRIC_COLUMNS = ("ssim", "psnr", "mse", "s_clr", "s_fnt", "s_bg", "tas", "ned")
REPORT_COLUMNS = ("pair_id", "lang", "mode", "status", "error", *METRIC_COLUMNS, "recognized")
THREADS_ENV = "TASEVAL_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Worker processes: explicit request, else ``TASEVAL_THREADS``, else 1."""
    if requested is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        if env:
            try:
                requested = int(env)
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            requested = 1
    if requested < 1:
        raise ValueError("worker count must be >= 1")
    return requested


def parse_extractor(spec: str):
    """``classical`` or ``external:<dir>`` to ``(mode, dir)``."""
    if spec == "classical":
        return "classical", None
    if spec.startswith("external:") and len(spec) > len("external:"):
        return "external", spec[len("external:"):]
    raise ValueError(f"extractor must be 'classical' or 'external:<dir>', got {spec!r}")


def read_transcripts(path) -> dict:
    """TSV of ``pair_id<TAB>side<TAB>text`` to ``{(pair_id, side): text}``."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise ParseError("expected pair_id<TAB>side<TAB>text", lineno)
            pid, side, text = parts
            if lineno == 1 and (pid, side) == ("pair_id", "side"):
                continue
            out[(pid, side)] = text
    return out


def _transcript_for(transcripts, pair_id):
    if transcripts is None:
        return None
    for side in ("gen", "b"):
        if (pair_id, side) in transcripts:
            return transcripts[(pair_id, side)]
    return None


@dataclass(frozen=True)
class _Job:
    entry: object
    base_dir: str
    mode: str
    extractor: str
    external_dir: str | None
    template: str
    transcript: str | None


def _error_row(entry, mode, exc):
    row = {c: "" for c in REPORT_COLUMNS}
    row.update(pair_id=entry.pair_id, lang=entry.lang, mode=mode, status="error",
               error=f"{type(exc).__name__}: {exc}")
    return row


def _run_job(job: _Job) -> dict:
    e = job.entry
    base = Path(job.base_dir)

    def resolve(rel):
        p = Path(rel)
        return p if p.is_absolute() else base / p

    try:
        mode = EvalMode(job.mode)
        candidate_rel = e.generated if e.generated is not None else e.image_b
        gt = None
        if mode is EvalMode.WITH_GT:
            # without a separate generated image the target has nothing to be compared with
            if e.generated is None or e.image_b is None:
                raise MissingGroundTruth(f"{e.pair_id}: WITH_GT needs both a generated image and imageB")
            gt = read_image(resolve(e.image_b))
        src = read_image(resolve(e.image_a))
        gen = read_image(resolve(candidate_rel))
        row = evaluate_pair(gen, src, gt, (e.text_a, e.text_b), load_template(job.template), mode,
                            e.pair_id, job.transcript, job.extractor, job.external_dir)
    except (TasEvalError, OSError, ValueError, KeyError) as exc:
        return _error_row(e, job.mode, exc)
    flat = row.flat()
    flat.update(lang=e.lang, status="ok", error="")
    return {c: flat.get(c, "") for c in REPORT_COLUMNS}


def _fmt(v):
    if v is None or v == "":
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _mean(values):
    return math.fsum(values) / len(values) if values else None


def summarize(rows) -> dict:
    """Per-language and overall means of scored rows, PSNR capped.

    Rows are reduced in pair-id order with exactly rounded sums, so any
    recomputation from the report table reproduces the aggregates exactly.
    """
    rows = sorted(rows, key=lambda r: r["pair_id"])
    groups = {}
    for r in rows:
        groups.setdefault(r["lang"], []).append(r)
    groups = {k: groups[k] for k in sorted(groups)}
    groups["all"] = rows
    out = {}
    for lang, rs in groups.items():
        ok = [r for r in rs if r["status"] == "ok"]
        agg = {"n_scored": len(ok), "n_errors": len(rs) - len(ok)}
        for c in METRIC_COLUMNS:
            vals = [float(r[c]) for r in ok if r[c] not in ("", None)]
            if c == "psnr":
                vals = [min(v, PSNR_CAP_DB) for v in vals]
            agg[c] = _mean(vals)
        rec = [r["recognized"] in (True, "1", "True", "true") for r in ok if r["recognized"] not in ("", None)]
        agg["rec_acc"] = _mean([1.0 if x else 0.0 for x in rec])
        out[lang] = agg
    return out


def format_summary(summary: dict) -> str:
    cols = ("n_scored", "n_errors", "ssim", "psnr", "mse", "s_clr", "s_fnt", "s_bg", "tas", "rec_acc", "ned")
    lines = ["lang   " + " ".join(f"{c:>8}" for c in cols)]
    for lang, agg in summary.items():
        cells = []
        for c in cols:
            v = agg[c]
            cells.append(f"{'-':>8}" if v is None else (f"{v:>8d}" if isinstance(v, int) else f"{v:>8.4f}"))
        lines.append(f"{lang:<6} " + " ".join(cells))
    return "\n".join(lines)


@dataclass
class EvalReport:
    rows: list
    summary: dict
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in REPORT_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return "inf" if v > 0 else "-inf"
            return v

        rows = [{k: clean(v) for k, v in r.items()} for r in self.rows]
        return json.dumps({"metadata": self.metadata, "summary": self.summary, "rows": rows},
                          indent=1, ensure_ascii=False, sort_keys=False) + "\n"


def run_eval(manifest: PairManifest, mode="GT_FREE", extractor="classical", out_dir=None,
             transcripts=None, workers: int | None = None, template: str = DEFAULT_TEMPLATE) -> EvalReport:
    """Score every pair; failures become error rows rather than aborting.

    Writes ``report.csv``, ``report.json`` and ``summary.csv`` into ``out_dir``
    when given. Output contains no timestamps, so identical inputs give
    byte-identical files.
    """
    mode = EvalMode.parse(mode)
    ext_mode, ext_dir = parse_extractor(extractor)
    load_template(template)
    if isinstance(transcripts, (str, Path)):
        transcripts = read_transcripts(transcripts)
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
    jobs = [_Job(e, str(manifest.base_dir), mode.value, ext_mode, ext_dir, template,
                 _transcript_for(transcripts, e.pair_id)) for e in manifest]
    n_workers = min(worker_count(workers), max(len(jobs), 1))
    if n_workers == 1:
        rows = [_run_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * n_workers))))
    rows.sort(key=lambda r: r["pair_id"])
    metadata = {
        "toolkit": "taseval",
        "version": __version__,
        "mode": mode.value,
        "extractor": extractor,
        "template": template,
        "canvas": [CANVAS, CANVAS],
        "color_mask": "ink",
        "psnr_cap_db": PSNR_CAP_DB,
        "ned": "1 - levenshtein / max length, NFC",
        "rec_acc_normalization": "NFC, whitespace removed, case kept",
        "seed": None,
        "n_pairs": len(rows),
    }
    report = EvalReport(rows, summarize(rows), metadata)
    if out is not None:
        (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = ("n_scored", "n_errors", *METRIC_COLUMNS, "rec_acc")
        w.writerow(("lang", *keys))
        for lang, agg in report.summary.items():
            w.writerow((lang, *[_fmt(agg[k]) for k in keys]))
        (out / "summary.csv").write_text(buf.getvalue(), encoding="utf-8")
    return report
