"""Synthetic same-style pairs with controlled attribute changes.

Image A draws a font, a fill/background colour pair and a background family.
Image B copies A and changes only what the variation names:

* ``T``   new text, same style
* ``F``   new font
* ``C``   new fill colour (at least 20 Delta E00 away, still legible)
* ``B``   new background family and colour
* ``FCB`` font, fill and background all changed, same text
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..colordiff import ciede2000
from ..exceptions import InvalidConfig
from ..image import Colorspace, RasterImage, blur_array, gaussian_kernel, srgb_array_to_lab, write_image
from ..style.glyphs import available_templates, fit_to_canvas, load_template, render_line_bitmap
from .manifest import PairEntry, PairManifest, write_manifest

__all__ = [
    "VARIATIONS",
    "BACKGROUND_FAMILIES",
    "DEFAULT_FONTS",
    "DEFAULT_PALETTE",
    "VariationConfig",
    "load_config",
    "render_pair_side",
    "sample_pairs",
    "synth_variations",
]

VARIATIONS = ("T", "F", "C", "B", "FCB")
BACKGROUND_FAMILIES = ("solid", "gradient", "noise")
DEFAULT_FONTS = ("sans", "sans-bold", "sans-oblique", "sans-bold-oblique")
# (fill, background) sRGB hex pairs; fills and backgrounds are also mixed freely
DEFAULT_PALETTE = (
    ("#1a1a1a", "#f2efe6"),
    ("#b3122e", "#fbe9c8"),
    ("#0b3d91", "#dfe8f5"),
    ("#f7f7f7", "#27313d"),
    ("#ffd400", "#1c1c40"),
    ("#146b3a", "#eaf4e4"),
    ("#6a1b9a", "#f3e5f5"),
    ("#ffffff", "#a4161a"),
    ("#e65100", "#fff8e1"),
    ("#00e5ff", "#102a2e"),
)
MIN_FILL_DELTA_E = 20.0
# minimum L* gap between fill and background so text stays segmentable
MIN_CONTRAST_L = 30.0

WORDS = {
    "other": (
        "ABOUT", "BRAVE", "CANDLE", "DELTA", "EMBER", "FABLE", "GARDEN", "HARBOR", "ISLAND", "JUNGLE",
        "KETTLE", "LANTERN", "MEADOW", "NECTAR", "ORBIT", "PEPPER", "QUARTZ", "RIVER", "SILVER", "TIMBER",
        "UNITY", "VELVET", "WINTER", "YONDER", "ZEPHYR", "MARKET", "STONE", "CLOUD", "PLANET", "RHYTHM",
        "BAKERY", "CASTLE", "DRAGON", "FOREST", "GOLDEN", "HUNTER", "MIRROR", "PARADE", "SUMMER", "TOWER",
    ),
    "ar": (
        "سلام", "كتاب", "بحر", "شمس",
        "قمر", "باب", "سوق", "نور",
        "قلم", "دار", "ورد", "نهر",
    ),
}


def _hex_to_rgb(h):
    h = h.lstrip("#")
    if len(h) != 6:
        raise InvalidConfig(f"bad colour {h!r}; expected #rrggbb")
    return tuple(int(h[i:i + 2], 16) / 255.0 for i in (0, 2, 4))


def _rgb_to_hex(rgb):
    return "#" + "".join(f"{int(round(c * 255)):02x}" for c in rgb)


def _lab(rgb):
    return tuple(float(v) for v in srgb_array_to_lab(np.asarray(rgb, dtype=np.float64)))


@dataclass(frozen=True)
class VariationConfig:
    n_pairs: int = 200
    canvas: tuple = (192, 96)
    fonts: tuple = DEFAULT_FONTS
    palette: tuple = DEFAULT_PALETTE
    backgrounds: tuple = BACKGROUND_FAMILIES
    variation: tuple = ("T",)
    seed: int = 0
    lang: str = "other"
    margin: float = 0.12

    def __post_init__(self):
        var = (self.variation,) if isinstance(self.variation, str) else tuple(self.variation)
        object.__setattr__(self, "variation", var)
        object.__setattr__(self, "canvas", tuple(int(c) for c in self.canvas))
        object.__setattr__(self, "fonts", tuple(self.fonts))
        object.__setattr__(self, "backgrounds", tuple(self.backgrounds))
        object.__setattr__(self, "palette", tuple(tuple(p) for p in self.palette))
        if not isinstance(self.n_pairs, int) or self.n_pairs < 1:
            raise InvalidConfig("n_pairs must be a positive integer")
        if len(self.canvas) != 2 or min(self.canvas) < 16:
            raise InvalidConfig("canvas must be [width, height] with both sides >= 16")
        if not var or any(v not in VARIATIONS for v in var):
            raise InvalidConfig(f"variation must be drawn from {VARIATIONS}")
        if any("F" in v for v in var) and len(set(self.fonts)) < 2:
            raise InvalidConfig("font variation needs at least two fonts")
        if any("B" in v for v in var) and len(set(self.backgrounds)) < 2:
            raise InvalidConfig("background variation needs at least two background families")
        unknown = [f for f in self.fonts if f not in available_templates()]
        if unknown:
            raise InvalidConfig(f"unknown font atlas(es): {', '.join(unknown)}")
        bad = [b for b in self.backgrounds if b not in BACKGROUND_FAMILIES]
        if bad or not self.backgrounds:
            raise InvalidConfig(f"backgrounds must be drawn from {BACKGROUND_FAMILIES}")
        if len(self.palette) < 2:
            raise InvalidConfig("palette needs at least two fill/background pairs")
        for pair in self.palette:
            if len(pair) != 2:
                raise InvalidConfig("palette entries are [fill, background] pairs")
            _hex_to_rgb(pair[0])
            _hex_to_rgb(pair[1])
        if self.lang not in WORDS:
            raise InvalidConfig(f"lang must be one of {tuple(WORDS)}")
        if self.lang == "ar":
            missing = [f for f in self.fonts if "arabic" not in load_template(f).coverage]
            if missing:
                raise InvalidConfig(f"font(s) without Arabic glyphs: {', '.join(missing)}")
        if not 0.0 <= self.margin < 0.5:
            raise InvalidConfig("margin must lie in [0, 0.5)")

    def to_json(self):
        d = asdict(self)
        d["canvas"] = list(self.canvas)
        d["fonts"] = list(self.fonts)
        d["palette"] = [list(p) for p in self.palette]
        d["backgrounds"] = list(self.backgrounds)
        d["variation"] = list(self.variation)
        return d


def load_config(path) -> VariationConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config is not valid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise InvalidConfig("config must be a JSON object")
    known = set(VariationConfig.__dataclass_fields__)
    unknown = set(obj) - known
    if unknown:
        raise InvalidConfig(f"unknown config key(s): {', '.join(sorted(unknown))}")
    try:
        return VariationConfig(**obj)
    except TypeError as exc:
        raise InvalidConfig(str(exc)) from None


# ---------------------------------------------------------------- rendering

@dataclass(frozen=True)
class SideSpec:
    text: str
    font: str
    fill: tuple
    bg_family: str
    bg_color: tuple
    bg_seed: int

    def to_json(self):
        return {
            "text": self.text, "font": self.font,
            "fill": _rgb_to_hex(self.fill), "fillLab": [round(v, 6) for v in _lab(self.fill)],
            "bgFamily": self.bg_family, "bgColor": _rgb_to_hex(self.bg_color), "bgSeed": self.bg_seed,
        }


def _background(spec: SideSpec, width, height):
    base = np.asarray(spec.bg_color, dtype=np.float64)
    rng = np.random.default_rng(spec.bg_seed)
    if spec.bg_family == "solid":
        return np.broadcast_to(base, (height, width, 3)).copy()
    if spec.bg_family == "gradient":
        angle = rng.uniform(0.0, 2.0 * np.pi)
        yy, xx = np.mgrid[0:height, 0:width]
        ramp = (np.cos(angle) * (xx - width / 2) + np.sin(angle) * (yy - height / 2)) / max(width, height)
        # shift toward black or white, whichever has room
        target = np.zeros(3) if base.mean() > 0.5 else np.ones(3)
        t = 0.5 + ramp  # 0..1 across the image
        return base + 0.3 * t[:, :, None] * (target - base)
    # smooth mid-frequency noise, independent per channel with a shared luma part
    noise = rng.standard_normal((height, width, 4))
    k = gaussian_kernel(2.5)
    smooth = np.stack([blur_array(noise[:, :, c], k) for c in range(4)], axis=-1)
    smooth /= smooth.std(axis=(0, 1), keepdims=True) + 1e-12
    lum = smooth[:, :, 3:4]
    chroma = smooth[:, :, :3]
    return base + 0.12 * lum + 0.04 * chroma


def render_pair_side(spec: SideSpec, canvas, margin=0.12):
    """Return (sRGB image, ground-truth coverage) for one side of a pair."""
    width, height = canvas
    tpl = load_template(spec.font)
    cov = fit_to_canvas(render_line_bitmap(spec.text, tpl).astype(np.float64), width, height, margin)
    bg = _background(spec, width, height)
    fill = np.asarray(spec.fill, dtype=np.float64)
    img = bg * (1.0 - cov[:, :, None]) + fill * cov[:, :, None]
    img = np.round(np.clip(img, 0.0, 1.0) * 255.0) / 255.0
    return RasterImage(img, Colorspace.SRGB), cov


# ---------------------------------------------------------------- sampling

def _pick(rng, seq, exclude=()):
    options = [s for s in seq if s not in exclude]
    return options[int(rng.integers(len(options)))]


def _legible(fill, bg):
    return abs(_lab(fill)[0] - _lab(bg)[0]) >= MIN_CONTRAST_L


def _new_fill(rng, fill, bg, fills):
    fl = _lab(fill)
    options = [f for f in fills if ciede2000(_lab(f), fl) >= MIN_FILL_DELTA_E and _legible(f, bg)]
    if options:
        return options[int(rng.integers(len(options)))]
    # synthesize one: push lightness away from the fill but keep contrast with bg
    bl = _lab(bg)[0]
    for _ in range(64):
        cand = tuple(float(v) for v in rng.uniform(0, 1, 3))
        if ciede2000(_lab(cand), fl) >= MIN_FILL_DELTA_E and abs(_lab(cand)[0] - bl) >= MIN_CONTRAST_L:
            return cand
    raise InvalidConfig("palette cannot provide a legible fill colour different enough from the source")


def _new_background(rng, fill, bg, bgs):
    bl = _lab(bg)
    options = [b for b in bgs if ciede2000(_lab(b), bl) >= MIN_FILL_DELTA_E and _legible(fill, b)]
    if not options:
        options = [b for b in bgs if b != bg and _legible(fill, b)]
    if not options:
        raise InvalidConfig("palette offers no alternative legible background colour")
    return options[int(rng.integers(len(options)))]


def _side_a(rng, cfg, words, fills_bgs):
    fill, bg = fills_bgs[int(rng.integers(len(fills_bgs)))]
    return SideSpec(
        text=_pick(rng, words),
        font=_pick(rng, cfg.fonts),
        fill=fill,
        bg_family=_pick(rng, cfg.backgrounds),
        bg_color=bg,
        bg_seed=int(rng.integers(2**31)),
    )


def _side_b(rng, cfg, a: SideSpec, variation, words, fills, bgs):
    text, font, fill = a.text, a.font, a.fill
    family, bg_color, bg_seed = a.bg_family, a.bg_color, a.bg_seed
    if variation == "T":
        text = _pick(rng, words, exclude=(a.text,))
    if "F" in variation:
        font = _pick(rng, cfg.fonts, exclude=(a.font,))
    if "B" in variation:
        family = _pick(rng, cfg.backgrounds, exclude=(a.bg_family,))
        bg_color = _new_background(rng, fill if "C" not in variation else a.fill, a.bg_color, bgs)
        bg_seed = int(rng.integers(2**31))
    if "C" in variation:
        fill = _new_fill(rng, a.fill, bg_color, fills)
    return SideSpec(text, font, fill, family, bg_color, bg_seed)


def sample_pairs(cfg: VariationConfig):
    """Yield ``(pair_id, variation, side_a, side_b)`` deterministically from the seed."""
    words = WORDS[cfg.lang]
    pal = [(_hex_to_rgb(f), _hex_to_rgb(b)) for f, b in cfg.palette]
    pal = [p for p in pal if _legible(*p)]
    if not pal:
        raise InvalidConfig("no palette pair has enough fill/background contrast")
    fills = list(dict.fromkeys(p[0] for p in pal))
    bgs = list(dict.fromkeys(p[1] for p in pal))
    for vi, variation in enumerate(cfg.variation):
        for i in range(cfg.n_pairs):
            rng = np.random.default_rng([cfg.seed, VARIATIONS.index(variation), i])
            a = _side_a(rng, cfg, words, pal)
            b = _side_b(rng, cfg, a, variation, words, fills, bgs)
            yield f"{variation}-{i:05d}", variation, a, b


def synth_variations(cfg: VariationConfig, out_dir) -> tuple:
    """Render the configured pairs under ``out_dir``.

    Writes ``images/<id>.{a,b}.png``, ground-truth masks under ``masks/``,
    ``manifest.jsonl`` and ``sidecar.json``. Returns ``(manifest, sidecar)``.
    """
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    entries, records = [], []
    for pair_id, variation, a, b in sample_pairs(cfg):
        side_paths = {}
        for side, spec in (("a", a), ("b", b)):
            img, cov = render_pair_side(spec, cfg.canvas, cfg.margin)
            rel = f"images/{pair_id}.{side}.png"
            write_image(out / rel, img)
            mask_rel = f"masks/{pair_id}.{side}.png"
            write_image(out / mask_rel, RasterImage((cov >= 0.5).astype(np.float64), Colorspace.GRAY))
            side_paths[side] = (rel, mask_rel)
        entries.append(PairEntry(
            pair_id=pair_id, lang=cfg.lang, image_a=side_paths["a"][0], image_b=side_paths["b"][0],
            text_a=a.text, text_b=b.text, source="synth", split="eval",
            extra={"variation": variation},
        ))
        records.append({
            "pairId": pair_id, "variation": variation,
            "a": {**a.to_json(), "mask": side_paths["a"][1]},
            "b": {**b.to_json(), "mask": side_paths["b"][1]},
            "fillDeltaE": round(ciede2000(_lab(a.fill), _lab(b.fill)), 6),
        })
    write_manifest(out / "manifest.jsonl", entries)
    sidecar = {"config": cfg.to_json(), "pairs": records}
    (out / "sidecar.json").write_text(json.dumps(sidecar, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    return PairManifest(tuple(entries), out), sidecar
