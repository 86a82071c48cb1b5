"""Embedded bitmap glyph atlases and single-line text rendering."""
from __future__ import annotations

import functools
import unicodedata
from dataclasses import dataclass, field
from importlib import resources

import cv2
import numpy as np

from ..exceptions import EmptyText, UncoveredCodepoint
from ..image import Colorspace, RasterImage

__all__ = [
    "GlyphTemplate",
    "available_templates",
    "load_template",
    "render_text_gray",
    "render_line_bitmap",
    "fit_to_canvas",
    "is_rtl",
    "DEFAULT_TEMPLATE",
    "LAYOUT_MARGIN",
]

DEFAULT_TEMPLATE = "sans"
# fraction of the canvas left free on every side
LAYOUT_MARGIN = 0.10
_ATLAS_FILE = "atlases.npz"


@dataclass(frozen=True, eq=False)
class GlyphTemplate:
    """Immutable map from codepoint to binary glyph bitmap.

    Every bitmap is ``cell_size`` rows tall and as wide as the glyph's advance.
    ``sample_text`` is the neutral string rendered when a template glyph image
    is needed independently of any particular text.
    """

    name: str
    glyphs: dict = field(repr=False)
    cell_size: int
    coverage: frozenset
    sample_text: str = "HAG"

    def covers(self, ch: str) -> bool:
        return ord(ch) in self.glyphs

    def bitmap(self, ch: str) -> np.ndarray:
        try:
            return self.glyphs[ord(ch)]
        except KeyError:
            raise UncoveredCodepoint(
                f"U+{ord(ch):04X} ({ch!r}) is not covered by template {self.name!r}"
            ) from None


@functools.lru_cache(maxsize=1)
def _atlas_arrays():
    with resources.files(__package__).joinpath("data", _ATLAS_FILE).open("rb") as fh:
        with np.load(fh) as npz:
            return {k: npz[k] for k in npz.files}


def available_templates() -> list[str]:
    names = {k.split("/")[0] for k in _atlas_arrays() if "/" in k}
    return sorted(names)


@functools.lru_cache(maxsize=None)
def load_template(name: str = DEFAULT_TEMPLATE) -> GlyphTemplate:
    """Load one of the shipped atlases (see :func:`available_templates`)."""
    arrays = _atlas_arrays()
    if f"{name}/codepoints" not in arrays:
        raise KeyError(f"unknown glyph template {name!r}; available: {', '.join(available_templates())}")
    cell = int(arrays["cell"][0])
    width = int(arrays[f"{name}/strip_width"][0])
    strip = np.unpackbits(arrays[f"{name}/strip"], axis=1, count=width).astype(bool)
    glyphs = {}
    x = 0
    for cp, w in zip(arrays[f"{name}/codepoints"].tolist(), arrays[f"{name}/widths"].tolist()):
        bm = strip[:, x:x + w].copy()
        bm.setflags(write=False)
        glyphs[cp] = bm
        x += w
    scripts = frozenset(str(s) for s in arrays[f"{name}/scripts"])
    return GlyphTemplate(name=name, glyphs=glyphs, cell_size=cell, coverage=scripts)


def is_rtl(text: str) -> bool:
    """True when the string contains right-to-left (Arabic or Hebrew) letters."""
    return any(unicodedata.bidirectional(ch) in ("AL", "R") for ch in text)


def render_line_bitmap(text: str, tpl: GlyphTemplate) -> np.ndarray:
    """Concatenate glyph bitmaps into one ``cell_size``-tall boolean strip."""
    text = unicodedata.normalize("NFC", text)
    if not text:
        raise EmptyText("cannot render an empty string")
    chars = list(text)
    if is_rtl(text):
        chars.reverse()
    return np.concatenate([tpl.bitmap(ch) for ch in chars], axis=1)


def fit_to_canvas(coverage: np.ndarray, width: int, height: int, margin: float = LAYOUT_MARGIN) -> np.ndarray:
    """Uniformly scale an ink-coverage array to fit the canvas and centre it."""
    h, w = coverage.shape
    scale = min((1.0 - 2.0 * margin) * width / w, (1.0 - 2.0 * margin) * height / h)
    nw = max(1, int(round(w * scale)))
    nh = max(1, int(round(h * scale)))
    resized = cv2.resize(coverage.astype(np.float64), (nw, nh), interpolation=cv2.INTER_AREA)
    out = np.zeros((height, width))
    x0 = (width - nw) // 2
    y0 = (height - nh) // 2
    out[y0:y0 + nh, x0:x0 + nw] = np.clip(resized, 0.0, 1.0)
    return out


def render_text_gray(text: str, tpl: GlyphTemplate, canvas=(128, 128)) -> RasterImage:
    """Render one line of text: background 1.0, ink 0.0, centred with a 10% margin.

    ``canvas`` is ``(width, height)``.
    """
    width, height = canvas
    strip = render_line_bitmap(text, tpl)
    ink = fit_to_canvas(strip.astype(np.float64), width, height)
    return RasterImage(1.0 - ink, Colorspace.GRAY)
