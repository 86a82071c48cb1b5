"""Rasterize the shipped glyph atlases from the DejaVu TrueType fonts.

Run once at development time; the package only reads the resulting
``atlases.npz`` and never touches a font engine.

    python tools/build_atlases.py
"""
from pathlib import Path

import numpy as np
from fontTools.ttLib import TTFont
from PIL import Image, ImageDraw, ImageFont

import matplotlib

FONT_DIR = Path(matplotlib.get_data_path()) / "fonts" / "ttf"
OUT = Path(__file__).resolve().parents[1] / "src" / "taseval" / "style" / "data" / "atlases.npz"

CELL = 64
ATLASES = {
    "sans": "DejaVuSans.ttf",
    "sans-bold": "DejaVuSans-Bold.ttf",
    "sans-oblique": "DejaVuSans-Oblique.ttf",
    "sans-bold-oblique": "DejaVuSans-BoldOblique.ttf",
    "serif": "DejaVuSerif.ttf",
    "serif-bold": "DejaVuSerif-Bold.ttf",
    "mono": "DejaVuSansMono.ttf",
}
RANGES = {
    "latin": range(0x20, 0x7F),
    "arabic": range(0x0621, 0x064B),
}


def _font_size(path):
    # largest size whose ascent + descent fits the cell
    for size in range(CELL, 8, -1):
        font = ImageFont.truetype(str(path), size)
        ascent, descent = font.getmetrics()
        if ascent + descent <= CELL:
            return font
    raise RuntimeError(path)


def build():
    arrays = {}
    for name, filename in ATLASES.items():
        path = FONT_DIR / filename
        cmap = TTFont(str(path)).getBestCmap()
        font = _font_size(path)
        cps, widths, strips, scripts = [], [], [], []
        for script, rng in RANGES.items():
            covered = [cp for cp in rng if cp in cmap]
            if len(covered) < len(rng) and script != "latin":
                # partial script coverage is not advertised
                if len(covered) < 0.8 * len(rng):
                    continue
            scripts.append(script)
            for cp in covered:
                ch = chr(cp)
                adv = max(1, int(round(font.getlength(ch))))
                canvas = Image.new("L", (adv, CELL), 0)
                ImageDraw.Draw(canvas).text((0, 0), ch, fill=255, font=font)
                bitmap = np.asarray(canvas) >= 128
                cps.append(cp)
                widths.append(adv)
                strips.append(bitmap)
        strip = np.concatenate(strips, axis=1)
        arrays[f"{name}/codepoints"] = np.asarray(cps, dtype=np.int32)
        arrays[f"{name}/widths"] = np.asarray(widths, dtype=np.int32)
        arrays[f"{name}/strip"] = np.packbits(strip, axis=1)
        arrays[f"{name}/strip_width"] = np.asarray([strip.shape[1]], dtype=np.int32)
        arrays[f"{name}/scripts"] = np.asarray(scripts)
        print(name, len(cps), "glyphs", scripts)
    arrays["cell"] = np.asarray([CELL], dtype=np.int32)
    np.savez_compressed(OUT, **arrays)
    print("wrote", OUT, OUT.stat().st_size, "bytes")


if __name__ == "__main__":
    build()
