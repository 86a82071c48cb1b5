"""Classical style disentangling: text mask, text colour, font geometry, background.

These estimators stand in for a learned style encoder. Each produces one plane
of a :class:`StyleTriple`; :func:`extract_style` runs them all, or loads the
planes a learned model wrote to disk.
"""
from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import cv2
import numpy as np
from scipy import ndimage
from sklearn.base import BaseEstimator, TransformerMixin

from ..colordiff import LabPixel
from ..exceptions import EmptyMask, MissingExternalFile
from ..image import (
    Colorspace,
    RasterImage,
    check_image,
    lab_array_to_srgb,
    read_image,
    resize_bilinear,
    srgb_array_to_lab,
    to_grayscale,
)
from .glyphs import (
    DEFAULT_TEMPLATE,
    GlyphTemplate,
    fit_to_canvas,
    load_template,
    render_line_bitmap,
    render_text_gray,
)

__all__ = [
    "CANVAS",
    "WHITE_LAB",
    "TextMask",
    "FontStyle",
    "StyleTriple",
    "StyleExtractor",
    "otsu_threshold",
    "extract_text_mask",
    "estimate_text_color",
    "colorize",
    "normalize_glyph_region",
    "measure_font_style",
    "stylize_template",
    "reshape_font_template",
    "remove_text",
    "extract_style",
    "external_paths",
]

CANVAS = 128
WHITE_LAB = LabPixel(100.0, 0.0, 0.0)
MIN_COMPONENT_FRACTION = 0.001
MASK_DILATION_PX = 2
INPAINT_RADIUS = 2.0
EXTERNAL_SUFFIXES = ("clr", "fnt", "bg", "seg")


class TextMask(NamedTuple):
    mask: RasterImage
    degenerate: bool


# ---------------------------------------------------------------- mask

def otsu_threshold(levels: np.ndarray) -> int:
    """Otsu split of integer levels 0..255; pixels ``<= t`` form the low class.

    Flat stretches of the between-class variance (empty histogram bins) are
    resolved to their midpoint so a mirrored histogram gives the mirrored
    threshold.
    """
    hist = np.bincount(levels.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    bins = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)[:-1]
    m0 = np.cumsum(hist * bins)[:-1]
    w1 = total - w0
    mu_t = (hist * bins).sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (mu_t * w0 / total - m0) ** 2 / (w0 * w1)
    between = np.where((w0 > 0) & (w1 > 0), between * total, -1.0)
    best = between.max()
    ties = np.flatnonzero(between >= best - 1e-9 * abs(best))
    # the widest-plateau run containing the maximum, split at its centre
    runs = np.split(ties, np.flatnonzero(np.diff(ties) > 1) + 1)
    run = max(runs, key=len)
    return int((run[0] + run[-1]) // 2)


def _border(mask):
    return np.concatenate([mask[0], mask[-1], mask[1:-1, 0], mask[1:-1, -1]])


def _close3(mask):
    padded = np.pad(mask, 1, mode="edge")
    closed = ndimage.binary_closing(padded, structure=np.ones((3, 3), bool))
    return closed[1:-1, 1:-1]


def extract_text_mask(img) -> TextMask:
    """Binary text mask from Otsu-thresholded luma.

    The class occupying less of the image border is taken as text. Components
    smaller than 0.1% of the image are dropped and the result is closed with a
    3x3 element. Single-valued images give an empty mask with
    ``degenerate=True``.
    """
    img = check_image(img, Colorspace.SRGB)
    luma = to_grayscale(img).plane()
    levels = np.clip(np.rint(luma * 255.0), 0, 255).astype(np.int64)
    if levels.min() == levels.max():
        warnings.warn("image luma is single-valued; returning an empty text mask", RuntimeWarning, stacklevel=2)
        return TextMask(RasterImage(np.zeros(luma.shape), Colorspace.GRAY), True)
    t = otsu_threshold(levels)
    low = levels <= t
    border_low = _border(low).mean()
    if border_low < 0.5:
        fg = low
    elif border_low > 0.5:
        fg = ~low
    else:
        fg = low if low.sum() <= (~low).sum() else ~low

    labels, n = ndimage.label(fg, structure=np.ones((3, 3), bool))
    if n:
        sizes = np.bincount(labels.ravel(), minlength=n + 1)
        keep = sizes >= MIN_COMPONENT_FRACTION * fg.size
        keep[0] = False
        fg = keep[labels]
    fg = _close3(fg)
    return TextMask(RasterImage(fg.astype(np.float64), Colorspace.GRAY), False)


def _mask_array(mask) -> np.ndarray:
    if isinstance(mask, TextMask):
        mask = mask.mask
    arr = mask.plane() if isinstance(mask, RasterImage) else np.asarray(mask)
    if arr.ndim == 3:
        arr = arr[:, :, 0]
    return arr > 0.5


# ---------------------------------------------------------------- colour

def estimate_text_color(img, mask) -> LabPixel:
    """Channel-wise median of the Lab values under the mask."""
    img = check_image(img, Colorspace.SRGB)
    m = _mask_array(mask)
    if not m.any():
        raise EmptyMask("cannot estimate a text colour from an empty mask")
    lab = srgb_array_to_lab(img.data[m])
    med = np.median(lab, axis=0)
    return LabPixel(float(med[0]), float(med[1]), float(med[2]))


def colorize(gray, fill, bg=WHITE_LAB) -> RasterImage:
    """Blend ``fill`` (ink, gray 0) and ``bg`` (gray 1) in Lab and return sRGB."""
    gray = check_image(gray, Colorspace.GRAY, "gray")
    g = np.clip(gray.plane(), 0.0, 1.0)
    # renders hold few distinct levels; convert each level once
    levels, inverse = np.unique(g, return_inverse=True)
    lab = (1.0 - levels)[:, None] * np.asarray(fill, dtype=np.float64) + levels[:, None] * np.asarray(bg, dtype=np.float64)
    return RasterImage(lab_array_to_srgb(lab)[inverse.reshape(g.shape)], Colorspace.SRGB)


# ---------------------------------------------------------------- font

@dataclass(frozen=True)
class FontStyle:
    """Text-independent stroke geometry of a glyph mask.

    ``stroke`` is the mean stroke thickness relative to the dominant glyph
    height; ``slant`` the horizontal shear (pixels per pixel of height) that
    best uprights the vertical strokes.
    """

    stroke: float
    slant: float


def _bbox(m):
    rows = np.flatnonzero(m.any(axis=1))
    cols = np.flatnonzero(m.any(axis=0))
    return rows[0], rows[-1] + 1, cols[0], cols[-1] + 1


def normalize_glyph_region(img, mask, canvas=(CANVAS, CANVAS)) -> RasterImage:
    """Binarized crop of the mask's bounding box laid out on the template canvas."""
    m = _mask_array(mask)
    if not m.any():
        raise EmptyMask("empty glyph mask")
    r0, r1, c0, c1 = _bbox(m)
    ink = fit_to_canvas(m[r0:r1, c0:c1].astype(np.float64), canvas[0], canvas[1])
    return RasterImage(1.0 - ink, Colorspace.GRAY)


def _glyph_height(m):
    labels, n = ndimage.label(m, structure=np.ones((3, 3), bool))
    if n == 0:
        return 0.0
    heights = np.array([sl[0].stop - sl[0].start for sl in ndimage.find_objects(labels)], dtype=np.float64)
    tall = heights[heights >= 0.5 * heights.max()]
    return float(np.median(tall))


_SLANT_GRID = np.linspace(-0.6, 0.6, 25)


def _estimate_slant(m):
    ys, xs = np.nonzero(m)
    if xs.size < 2:
        return 0.0
    height = ys.astype(np.float64).mean() - ys
    best, best_s = -1.0, 0.0
    scores = []
    for s in _SLANT_GRID:
        xp = xs - s * height
        xp = xp - xp.min()
        lo = np.floor(xp).astype(np.intp)
        frac = xp - lo
        hist = np.bincount(lo, weights=1.0 - frac, minlength=lo.max() + 2)
        hist += np.bincount(lo + 1, weights=frac, minlength=lo.max() + 2)
        score = float(np.sum(hist * hist))
        scores.append(score)
        if score > best:
            best, best_s = score, s
    # parabolic refinement around the discrete optimum
    i = int(np.argmax(scores))
    if 0 < i < len(scores) - 1:
        y0, y1, y2 = scores[i - 1], scores[i], scores[i + 1]
        den = y0 - 2.0 * y1 + y2
        if den < 0:
            step = _SLANT_GRID[1] - _SLANT_GRID[0]
            best_s = _SLANT_GRID[i] + 0.5 * step * (y0 - y2) / den
    return float(best_s)


def measure_font_style(mask) -> FontStyle:
    """Stroke thickness and slant of a binary glyph mask."""
    m = _mask_array(mask)
    area = float(m.sum())
    if area == 0:
        raise EmptyMask("cannot measure the font of an empty mask")
    padded = np.pad(m, 1)
    perimeter = float(np.sum(padded[1:, :] != padded[:-1, :]) + np.sum(padded[:, 1:] != padded[:, :-1]))
    thickness = 2.0 * area / perimeter
    height = _glyph_height(m)
    return FontStyle(stroke=thickness / max(height, 1.0), slant=_estimate_slant(m))


@functools.lru_cache(maxsize=64)
def _template_reference(tpl: GlyphTemplate, canvas):
    """Template sample strip and the style measured on its canvas rendering."""
    strip = render_line_bitmap(tpl.sample_text, tpl)
    rendered = render_text_gray(tpl.sample_text, tpl, canvas).plane() < 0.5
    return strip, measure_font_style(rendered), _glyph_height(strip)


def _shear(coverage, shear):
    h, w = coverage.shape
    pad = int(np.ceil(abs(shear) * h / 2.0)) + 1
    wide = np.pad(coverage, ((0, 0), (pad, pad)))
    yc = (h - 1) / 2.0
    # x_out = x_in + shear * (yc - y)
    mat = np.array([[1.0, -shear, shear * yc], [0.0, 1.0, 0.0]])
    return cv2.warpAffine(wide, mat, (wide.shape[1], h), flags=cv2.INTER_LINEAR, borderValue=0.0)


def _adjust_stroke(ink, delta):
    if abs(delta) < 0.25:
        return ink
    if delta > 0:
        return ndimage.distance_transform_edt(~ink) <= delta / 2.0
    return ndimage.distance_transform_edt(ink) > -delta / 2.0


def stylize_template(tpl: GlyphTemplate, style: FontStyle, canvas=(CANVAS, CANVAS)) -> RasterImage:
    """Render the template sample text with ``style``'s stroke and slant applied."""
    canvas = tuple(canvas)
    strip, ref, strip_height = _template_reference(tpl, canvas)
    ink = strip.astype(np.float64)
    shear = style.slant - ref.slant
    if abs(shear) > 1e-3:
        ink = _shear(ink, shear)
    binary = ink >= 0.5
    # keep at least a hairline, and never more than doubles the glyph height
    stroke = min(max(style.stroke, 0.25 * ref.stroke), 4.0 * ref.stroke)
    binary = _adjust_stroke(binary, (stroke - ref.stroke) * strip_height)
    if not binary.any():
        binary = strip
    r0, r1, c0, c1 = _bbox(binary)
    # keep the template's side bearings and strip height so an unchanged
    # style lands exactly where the plain template render does
    _, _, s0, s1 = _bbox(strip)
    c0, c1 = max(c0 - s0, 0), min(c1 + strip.shape[1] - s1, binary.shape[1])
    cropped = binary[:, c0:c1] if (r1 - r0) <= strip.shape[0] else binary[r0:r1, c0:c1]
    coverage = fit_to_canvas(cropped.astype(np.float64), canvas[0], canvas[1])
    return RasterImage(1.0 - coverage, Colorspace.GRAY)


def reshape_font_template(img, mask, tpl: GlyphTemplate, canvas=(CANVAS, CANVAS)) -> RasterImage:
    """Template glyph image carrying the source's stroke thickness and slant."""
    m = _mask_array(mask)
    if not m.any():
        raise EmptyMask("cannot reshape a template from an empty mask")
    return stylize_template(tpl, measure_font_style(m), canvas)


# ---------------------------------------------------------------- background

def remove_text(img, mask) -> RasterImage:
    """Inpaint the (2-px dilated) text region by fast marching from its boundary."""
    img = check_image(img, Colorspace.SRGB)
    m = _mask_array(mask)
    if not m.any():
        return img
    grown = ndimage.binary_dilation(m, structure=np.ones((3, 3), bool), iterations=MASK_DILATION_PX)
    if grown.all():
        fill = np.median(img.data.reshape(-1, 3), axis=0)
        return RasterImage(np.broadcast_to(fill, img.shape), Colorspace.SRGB)
    # only pixels within the inpainting radius of the hole are ever read
    r0, r1, c0, c1 = _bbox(grown)
    pad = int(np.ceil(INPAINT_RADIUS)) + 2
    r0, c0 = max(r0 - pad, 0), max(c0 - pad, 0)
    r1, c1 = min(r1 + pad, img.height), min(c1 + pad, img.width)
    m8 = grown[r0:r1, c0:c1].astype(np.uint8)
    out = img.data.copy()
    # 16-bit single-channel input: OpenCV's float path is unreliable and 8 bits
    # would quantize the fill
    for c in range(3):
        chan = np.round(img.data[r0:r1, c0:c1, c] * 65535.0).astype(np.uint16)
        filled = cv2.inpaint(chan, m8, INPAINT_RADIUS, cv2.INPAINT_TELEA) / 65535.0
        out[r0:r1, c0:c1, c] = np.where(m8 > 0, filled, img.data[r0:r1, c0:c1, c])
    return RasterImage(np.clip(out, 0.0, 1.0), Colorspace.SRGB)


# ---------------------------------------------------------------- triple

@dataclass(frozen=True, eq=False)
class StyleTriple:
    """Colorized render, font-reshaped glyph, text-free background and text mask."""

    colorized: RasterImage
    font_glyph: RasterImage
    background: RasterImage
    mask: RasterImage
    extractor: str
    text_color: LabPixel | None = None
    font_style: FontStyle | None = None
    degenerate: bool = False
    notes: dict = field(default_factory=dict)


def external_paths(directory, pair_id: str, side: str) -> dict:
    """Expected ``<dir>/<pair_id>.<side>.{clr,fnt,bg,seg}.png`` paths."""
    directory = Path(directory)
    return {s: directory / f"{pair_id}.{side}.{s}.png" for s in EXTERNAL_SUFFIXES}


def _load_external(directory, pair_id, side, canvas):
    paths = external_paths(directory, pair_id, side)
    for path in paths.values():
        if not path.is_file():
            raise MissingExternalFile(f"missing external style plane: {path}")
    w, h = canvas
    clr = resize_bilinear(read_image(paths["clr"]), w, h)
    fnt = resize_bilinear(to_grayscale(read_image(paths["fnt"])), w, h)
    bg = resize_bilinear(read_image(paths["bg"]), w, h)
    seg = resize_bilinear(to_grayscale(read_image(paths["seg"])), w, h)
    seg = RasterImage((seg.plane() >= 0.5).astype(np.float64), Colorspace.GRAY)
    return StyleTriple(clr, fnt, bg, seg, extractor="EXTERNAL")


def _working_image(img, canvas):
    """Aspect-preserving resample with the same pixel count as the canvas.

    Stroke and slant are measured here; squeezing a wide crop into the square
    canvas would shear and thin the strokes and blur the font differences.
    """
    target = canvas[0] * canvas[1]
    scale = np.sqrt(target / float(img.width * img.height))
    w = max(16, int(round(img.width * scale)))
    h = max(16, int(round(img.height * scale)))
    if (w, h) == (img.width, img.height):
        return img
    if scale < 1.0:
        data = cv2.resize(img.data, (w, h), interpolation=cv2.INTER_AREA)
        return RasterImage(np.clip(data, 0.0, 1.0), Colorspace.SRGB)
    return resize_bilinear(img, w, h)


def _to_canvas(plane_img, canvas, binary=False):
    out = resize_bilinear(plane_img, canvas[0], canvas[1])
    if binary:
        return RasterImage((out.plane() >= 0.5).astype(np.float64), Colorspace.GRAY)
    return out


def _stroke_core(m):
    """Mask minus its anti-aliased rim, when enough of the stroke survives."""
    core = ndimage.binary_erosion(m, structure=np.ones((3, 3), bool))
    return core if core.sum() >= 0.2 * m.sum() else m


def _classical(img, target_text, tpl, canvas):
    work = _working_image(img, canvas)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tm = extract_text_mask(work)
    m = _mask_array(tm.mask)
    gray = render_text_gray(target_text, tpl, canvas)
    if tm.degenerate or not m.any():
        # no text found: whole-image colour, neutral template, image as background
        med = np.median(srgb_array_to_lab(work.data.reshape(-1, 3)), axis=0)
        color = LabPixel(*map(float, med))
        _, ref, _ = _template_reference(tpl, tuple(canvas))
        return StyleTriple(colorize(gray, color), stylize_template(tpl, ref, canvas), _to_canvas(work, canvas),
                           _to_canvas(tm.mask, canvas, binary=True), extractor="CLASSICAL",
                           text_color=color, font_style=ref, degenerate=True)
    color = estimate_text_color(work, _stroke_core(m))
    style = measure_font_style(m)
    return StyleTriple(
        colorized=colorize(gray, color),
        font_glyph=stylize_template(tpl, style, canvas),
        background=_to_canvas(remove_text(work, m), canvas),
        mask=_to_canvas(tm.mask, canvas, binary=True),
        extractor="CLASSICAL",
        text_color=color,
        font_style=style,
    )


def extract_style(img, texts, tpl: GlyphTemplate | None = None, mode: str = "classical",
                  external_dir=None, pair_id: str | None = None, side: str = "a",
                  canvas=(CANVAS, CANVAS)) -> StyleTriple:
    """Disentangle ``img`` into a 128x128 :class:`StyleTriple`.

    Parameters
    ----------
    img : RasterImage or array
        sRGB text image.
    texts : str or (str, str)
        Target text, or ``(source, target)``; the colorized render shows the
        target text.
    tpl : GlyphTemplate, optional
        Template atlas, the default sans atlas when omitted.
    mode : {"classical", "external"}
        ``external`` loads ``<external_dir>/<pair_id>.<side>.*.png`` instead of
        estimating the planes.
    """
    canvas = tuple(canvas)
    if mode.lower() == "external":
        if external_dir is None or pair_id is None:
            raise ValueError("external mode needs external_dir and pair_id")
        return _load_external(external_dir, pair_id, side, canvas)
    if mode.lower() != "classical":
        raise ValueError(f"unknown extractor mode {mode!r}")
    target = texts if isinstance(texts, str) else texts[-1]
    img = check_image(img, Colorspace.SRGB)
    return _classical(img, target, tpl or load_template(DEFAULT_TEMPLATE), canvas)


class StyleExtractor(BaseEstimator, TransformerMixin):
    """Estimator wrapper around :func:`extract_style`.

    ``transform`` takes an iterable of ``(image, target_text)`` records and
    returns one :class:`StyleTriple` per record. External mode additionally
    needs ``(image, target_text, pair_id, side)``.
    """

    def __init__(self, template=DEFAULT_TEMPLATE, mode="classical", external_dir=None, canvas=CANVAS):
        self.template = template
        self.mode = mode
        self.external_dir = external_dir
        self.canvas = canvas

    def fit(self, X=None, y=None):
        if self.mode not in ("classical", "external"):
            raise ValueError(f"mode must be 'classical' or 'external', got {self.mode!r}")
        if self.mode == "external" and self.external_dir is None:
            raise ValueError("external mode needs external_dir")
        self.template_ = self.template if isinstance(self.template, GlyphTemplate) else load_template(self.template)
        return self

    def _canvas(self):
        c = self.canvas
        return (c, c) if np.isscalar(c) else tuple(c)

    def extract(self, img, target_text, pair_id=None, side="a") -> StyleTriple:
        if not hasattr(self, "template_"):
            self.fit()
        return extract_style(img, target_text, self.template_, self.mode, self.external_dir,
                             pair_id, side, self._canvas())

    def transform(self, X):
        return [self.extract(*record) for record in X]
