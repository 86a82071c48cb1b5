"""Text appearance similarity: colour, font and background terms and their mean."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .colordiff import color_similarity
from .exceptions import UncoveredCodepoint
from .fsim import FsimParams, fsim
from .image import to_grayscale
from .simmetrics import SsimParams, ms_ssim
from .style.extract import CANVAS, StyleTriple, extract_style
from .style.glyphs import DEFAULT_TEMPLATE, GlyphTemplate, load_template, render_text_gray

__all__ = ["TasReport", "tas", "tas_from_components", "compare_triples", "TextAppearanceSimilarity"]

COLOR_MASK_POLICIES = ("ink", "all")


@dataclass(frozen=True)
class TasReport:
    s_clr: float
    s_fnt: float
    s_bg: float
    tas: float
    extractor: str = "CLASSICAL"
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("s_clr", "s_fnt", "s_bg", "tas"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def as_dict(self):
        return asdict(self)


def tas_from_components(s_clr: float, s_fnt: float, s_bg: float, extractor="CLASSICAL", notes=None) -> TasReport:
    """Assemble a report; the score is the plain mean of the three terms."""
    s_clr, s_fnt, s_bg = float(s_clr), float(s_fnt), float(s_bg)
    return TasReport(s_clr, s_fnt, s_bg, (s_clr + s_fnt + s_bg) / 3.0, extractor, dict(notes or {}))


def _ink_mask(text, tpl, canvas):
    try:
        return render_text_gray(text, tpl, canvas).plane() < 0.5
    except UncoveredCodepoint:
        return None


def compare_triples(ta: StyleTriple, tb: StyleTriple, text_b: str | None = None,
                    tpl: GlyphTemplate | None = None, color_mask: str = "ink",
                    fsim_params: FsimParams = FsimParams(),
                    ssim_params: SsimParams = SsimParams()) -> TasReport:
    """Score two already-extracted style triples.

    With ``color_mask="ink"`` the colour term averages Delta E00 over the glyph
    pixels of the shared ``text_b`` render only, so the white backdrop both
    renders share does not dilute it. ``"all"`` averages over every pixel.
    """
    if color_mask not in COLOR_MASK_POLICIES:
        raise ValueError(f"color_mask must be one of {COLOR_MASK_POLICIES}")
    h, w = ta.colorized.height, ta.colorized.width
    mask = None
    policy = "all"
    if color_mask == "ink" and text_b is not None:
        mask = _ink_mask(text_b, tpl or load_template(DEFAULT_TEMPLATE), (w, h))
        if mask is not None and mask.any():
            policy = "ink"
        else:
            mask = None
    s_clr = color_similarity(ta.colorized, tb.colorized, mask)
    s_fnt = fsim(ta.font_glyph, tb.font_glyph, fsim_params)
    s_bg = ms_ssim(to_grayscale(ta.background), to_grayscale(tb.background), ssim_params)
    s_bg = min(max(s_bg, 0.0), 1.0)
    extractor = ta.extractor if ta.extractor == tb.extractor else f"{ta.extractor}/{tb.extractor}"
    notes = {
        "color_mask": policy,
        "resolution": f"{w}x{h}",
        "degenerate": bool(ta.degenerate or tb.degenerate),
    }
    return tas_from_components(s_clr, s_fnt, s_bg, extractor, notes)


def tas(img_a, img_b, text_b: str, tpl: GlyphTemplate | None = None, mode: str = "classical",
        external_dir=None, pair_id: str | None = None, canvas=(CANVAS, CANVAS),
        color_mask: str = "ink") -> TasReport:
    """Text appearance similarity of two text images.

    Both images are disentangled with the same target text ``text_b``, so the
    colour renders differ only in fill colour, and the per-attribute
    similarities are averaged.
    """
    tpl = tpl or load_template(DEFAULT_TEMPLATE)
    ta = extract_style(img_a, text_b, tpl, mode, external_dir, pair_id, "a", canvas)
    tb = extract_style(img_b, text_b, tpl, mode, external_dir, pair_id, "b", canvas)
    report = compare_triples(ta, tb, text_b, tpl, color_mask)
    report.notes["template"] = tpl.name
    return report


class TextAppearanceSimilarity(BaseEstimator):
    """Estimator-style front end for :func:`tas`.

    ``transform`` maps records ``(img_a, img_b, text_b[, pair_id])`` to an
    ``n x 4`` array of ``(s_clr, s_fnt, s_bg, tas)``.
    """

    def __init__(self, template=DEFAULT_TEMPLATE, mode="classical", external_dir=None,
                 canvas=CANVAS, color_mask="ink"):
        self.template = template
        self.mode = mode
        self.external_dir = external_dir
        self.canvas = canvas
        self.color_mask = color_mask

    def fit(self, X=None, y=None):
        if self.mode not in ("classical", "external"):
            raise ValueError(f"mode must be 'classical' or 'external', got {self.mode!r}")
        if self.color_mask not in COLOR_MASK_POLICIES:
            raise ValueError(f"color_mask must be one of {COLOR_MASK_POLICIES}")
        self.template_ = self.template if isinstance(self.template, GlyphTemplate) else load_template(self.template)
        return self

    def score_pair(self, img_a, img_b, text_b, pair_id=None) -> TasReport:
        if not hasattr(self, "template_"):
            self.fit()
        c = self.canvas
        canvas = (c, c) if np.isscalar(c) else tuple(c)
        return tas(img_a, img_b, text_b, self.template_, self.mode, self.external_dir, pair_id,
                   canvas, self.color_mask)

    def transform(self, X):
        out = []
        for rec in X:
            r = self.score_pair(*rec)
            out.append((r.s_clr, r.s_fnt, r.s_bg, r.tas))
        return np.asarray(out, dtype=np.float64).reshape(-1, 4)
