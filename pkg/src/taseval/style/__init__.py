"""Glyph templates and style disentangling."""
from .extract import (
    StyleExtractor,
    StyleTriple,
    TextMask,
    FontStyle,
    colorize,
    estimate_text_color,
    extract_style,
    extract_text_mask,
    measure_font_style,
    normalize_glyph_region,
    remove_text,
    reshape_font_template,
    stylize_template,
)
from .glyphs import (
    DEFAULT_TEMPLATE,
    GlyphTemplate,
    available_templates,
    load_template,
    render_line_bitmap,
    render_text_gray,
)

__all__ = [
    "StyleExtractor",
    "StyleTriple",
    "TextMask",
    "FontStyle",
    "colorize",
    "estimate_text_color",
    "extract_style",
    "extract_text_mask",
    "measure_font_style",
    "normalize_glyph_region",
    "remove_text",
    "reshape_font_template",
    "stylize_template",
    "DEFAULT_TEMPLATE",
    "GlyphTemplate",
    "available_templates",
    "load_template",
    "render_line_bitmap",
    "render_text_gray",
]
