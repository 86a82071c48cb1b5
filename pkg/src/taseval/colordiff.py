"""CIEDE2000 colour difference and the normalized colour-similarity term."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import EmptyMask, NonFiniteInput, ShapeMismatch
from .image import Colorspace, RasterImage, check_image, srgb_array_to_lab

__all__ = [
    "LabPixel",
    "Ciede2000Params",
    "ciede2000",
    "ciede2000_array",
    "mean_image_ciede2000",
    "color_similarity",
    "COLOR_SATURATION_DE",
]

# mean Delta E at which colour similarity bottoms out
COLOR_SATURATION_DE = 50.0


class LabPixel(NamedTuple):
    L: float
    a: float
    b: float


@dataclass(frozen=True)
class Ciede2000Params:
    kL: float = 1.0
    kC: float = 1.0
    kH: float = 1.0

    def __post_init__(self):
        if not (self.kL > 0 and self.kC > 0 and self.kH > 0):
            raise ValueError("CIEDE2000 parametric weights must be positive")


_POW25_7 = 25.0**7


def ciede2000_array(lab1, lab2, params: Ciede2000Params = Ciede2000Params()) -> np.ndarray:
    """Vectorized CIEDE2000 over ``(..., 3)`` Lab arrays."""
    lab1 = np.asarray(lab1, dtype=np.float64)
    lab2 = np.asarray(lab2, dtype=np.float64)
    if lab1.shape != lab2.shape:
        raise ShapeMismatch(f"{lab1.shape} vs {lab2.shape}")
    L1, a1, b1 = lab1[..., 0], lab1[..., 1], lab1[..., 2]
    L2, a2, b2 = lab2[..., 0], lab2[..., 1], lab2[..., 2]

    c_bar = 0.5 * (np.hypot(a1, b1) + np.hypot(a2, b2))
    c_bar7 = c_bar**7
    g = 0.5 * (1.0 - np.sqrt(c_bar7 / (c_bar7 + _POW25_7)))
    a1p = (1.0 + g) * a1
    a2p = (1.0 + g) * a2
    c1p = np.hypot(a1p, b1)
    c2p = np.hypot(a2p, b2)
    h1p = np.degrees(np.arctan2(b1, a1p)) % 360.0
    h2p = np.degrees(np.arctan2(b2, a2p)) % 360.0
    # hue is undefined for achromatic colours
    h1p = np.where(c1p == 0, 0.0, h1p)
    h2p = np.where(c2p == 0, 0.0, h2p)

    dLp = L2 - L1
    dCp = c2p - c1p
    chroma_zero = (c1p * c2p) == 0
    dh = h2p - h1p
    dh = np.where(dh > 180.0, dh - 360.0, np.where(dh < -180.0, dh + 360.0, dh))
    dh = np.where(chroma_zero, 0.0, dh)
    dHp = 2.0 * np.sqrt(c1p * c2p) * np.sin(np.radians(dh) / 2.0)

    Lp_bar = 0.5 * (L1 + L2)
    Cp_bar = 0.5 * (c1p + c2p)
    hsum = h1p + h2p
    far = np.abs(h1p - h2p) > 180.0
    hp_bar = np.where(far, np.where(hsum < 360.0, (hsum + 360.0) / 2.0, (hsum - 360.0) / 2.0), hsum / 2.0)
    hp_bar = np.where(chroma_zero, hsum, hp_bar)

    t = (
        1.0
        - 0.17 * np.cos(np.radians(hp_bar - 30.0))
        + 0.24 * np.cos(np.radians(2.0 * hp_bar))
        + 0.32 * np.cos(np.radians(3.0 * hp_bar + 6.0))
        - 0.20 * np.cos(np.radians(4.0 * hp_bar - 63.0))
    )
    d_theta = 30.0 * np.exp(-(((hp_bar - 275.0) / 25.0) ** 2))
    cp_bar7 = Cp_bar**7
    r_c = 2.0 * np.sqrt(cp_bar7 / (cp_bar7 + _POW25_7))
    l50 = (Lp_bar - 50.0) ** 2
    s_l = 1.0 + 0.015 * l50 / np.sqrt(20.0 + l50)
    s_c = 1.0 + 0.045 * Cp_bar
    s_h = 1.0 + 0.015 * Cp_bar * t
    r_t = -np.sin(np.radians(2.0 * d_theta)) * r_c

    tl = dLp / (params.kL * s_l)
    tc = dCp / (params.kC * s_c)
    th = dHp / (params.kH * s_h)
    return np.sqrt(np.maximum(tl**2 + tc**2 + th**2 + r_t * tc * th, 0.0))


def ciede2000(p, q, k: Ciede2000Params = Ciede2000Params()) -> float:
    """CIEDE2000 difference between two Lab colours."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
        raise NonFiniteInput("Lab values must be finite")
    return float(ciede2000_array(p, q, k))


def mean_image_ciede2000(a, b, mask=None, params: Ciede2000Params = Ciede2000Params()) -> float:
    """Mean per-pixel Delta E00 between two LAB images, optionally under a mask."""
    a = check_image(a, Colorspace.LAB, "a")
    b = check_image(b, Colorspace.LAB, "b")
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    de = ciede2000_array(a.data, b.data, params)
    if not np.all(np.isfinite(de)):
        raise NonFiniteInput("non-finite Lab samples")
    if mask is None:
        return float(de.mean())
    m = mask.plane() if isinstance(mask, RasterImage) else np.asarray(mask)
    if m.ndim == 3:
        m = m[:, :, 0]
    if m.shape != de.shape:
        raise ShapeMismatch(f"mask {m.shape} vs image {de.shape}")
    m = m > 0.5
    if not m.any():
        raise EmptyMask("mask selects no pixels")
    return float(de[m].mean())


def color_similarity(ca, cb, mask=None) -> float:
    """``1 - min(mean Delta E00 / 50, 1)`` between two colorized renders."""
    ca = check_image(ca, Colorspace.SRGB, "ca")
    cb = check_image(cb, Colorspace.SRGB, "cb")
    if ca.shape != cb.shape:
        raise ShapeMismatch(f"{ca.shape} vs {cb.shape}")
    if mask is None:
        de = ciede2000_array(srgb_array_to_lab(ca.data), srgb_array_to_lab(cb.data)).mean()
        return similarity_from_delta_e(float(de))
    m = mask.plane() if isinstance(mask, RasterImage) else np.asarray(mask)
    if m.ndim == 3:
        m = m[:, :, 0]
    if m.shape != ca.shape[:2]:
        raise ShapeMismatch(f"mask {m.shape} vs image {ca.shape[:2]}")
    m = m > 0.5
    if not m.any():
        raise EmptyMask("mask selects no pixels")
    # convert only the selected pixels
    de = ciede2000_array(srgb_array_to_lab(ca.data[m]), srgb_array_to_lab(cb.data[m])).mean()
    return similarity_from_delta_e(float(de))


def similarity_from_delta_e(de: float) -> float:
    return 1.0 - min(de / COLOR_SATURATION_DE, 1.0)
