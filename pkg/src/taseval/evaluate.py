"""Per-pair metric suite for edited images, with or without ground truth."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .exceptions import MissingGroundTruth
from .image import Colorspace, check_image, resize_bilinear, to_grayscale
from .simmetrics import mse, psnr, ssim
from .style.extract import CANVAS
from .tas import TasReport, tas
from .textmetrics import ned, normalize_transcript

__all__ = ["EvalMode", "MetricRow", "evaluate_pair"]


class EvalMode(str, enum.Enum):
    WITH_GT = "WITH_GT"
    GT_FREE = "GT_FREE"

    @classmethod
    def parse(cls, s):
        if isinstance(s, cls):
            return s
        key = str(s).lower().replace("-", "").replace("_", "")
        if key in ("gt", "withgt"):
            return cls.WITH_GT
        if key in ("gtfree", "free"):
            return cls.GT_FREE
        raise ValueError(f"unknown evaluation mode {s!r}")


@dataclass(frozen=True)
class MetricRow:
    pair_id: str
    ssim: float
    psnr: float
    mse: float
    tas: TasReport
    ned: float | None
    recognized: bool | None
    mode: EvalMode

    def flat(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "mode": self.mode.value,
            "ssim": self.ssim,
            "psnr": self.psnr,
            "mse": self.mse,
            "s_clr": self.tas.s_clr,
            "s_fnt": self.tas.s_fnt,
            "s_bg": self.tas.s_bg,
            "tas": self.tas.tas,
            "ned": self.ned,
            "recognized": self.recognized,
        }


def evaluate_pair(gen, src, gt=None, texts=("", ""), tpl=None, mode=EvalMode.WITH_GT,
                  pair_id="pair", transcript: str | None = None, extractor="classical",
                  external_dir=None, canvas=(CANVAS, CANVAS)) -> MetricRow:
    """Score an edited image.

    ``WITH_GT`` compares ``gen`` against ``gt``; ``GT_FREE`` against the source
    ``src`` and never touches ``gt``. Pixel metrics use grayscale copies of
    both images resampled to the canvas. ``texts`` is ``(source, target)``;
    the OCR ``transcript`` of ``gen``, when given, is scored against the target.
    In external mode the reference side is read as ``a`` and ``gen`` as ``b``.
    """
    mode = EvalMode.parse(mode)
    if mode is EvalMode.WITH_GT:
        if gt is None:
            raise MissingGroundTruth(f"{pair_id}: ground truth required in WITH_GT mode")
        ref = gt
    else:
        ref = src
    ref = check_image(ref, Colorspace.SRGB, "reference")
    gen = check_image(gen, Colorspace.SRGB, "generated")
    w, h = canvas
    gr = to_grayscale(resize_bilinear(ref, w, h))
    gg = to_grayscale(resize_bilinear(gen, w, h))
    text_b = texts if isinstance(texts, str) else texts[-1]
    report = tas(ref, gen, text_b, tpl, extractor, external_dir, pair_id, canvas)
    p = psnr(gr, gg)
    if transcript is None:
        n, rec = None, None
    else:
        n = ned(transcript, text_b)
        rec = normalize_transcript(transcript) == normalize_transcript(text_b)
    return MetricRow(pair_id, ssim(gr, gg), p if math.isfinite(p) else math.inf, mse(gr, gg),
                     report, n, rec, mode)
