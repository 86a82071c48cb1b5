"""Reference-based metrics: MSE, PSNR, SSIM, MS-SSIM and Frechet distance."""
from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import (
    DegenerateCovariance,
    DimensionMismatch,
    ImageTooSmall,
    ShapeMismatch,
)
from .image import Colorspace, blur_array, check_image, gaussian_kernel

__all__ = [
    "SsimParams",
    "MS_SSIM_WEIGHTS",
    "PSNR_CAP_DB",
    "mse",
    "psnr",
    "ssim",
    "ssim_maps",
    "ms_ssim",
    "ms_ssim_levels",
    "FeatureSet",
    "frechet_distance",
    "read_feature_set",
    "write_feature_set",
]

MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
# stand-in for +inf PSNR inside aggregate statistics
PSNR_CAP_DB = 100.0


@dataclass(frozen=True)
class SsimParams:
    k1: float = 0.01
    k2: float = 0.03
    window_sigma: float = 1.5
    window_size: int = 11
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window_size % 2 != 1 or self.window_size < 1:
            raise ValueError("window_size must be a positive odd integer")
        if not (self.k1 > 0 and self.k2 > 0):
            raise ValueError("k1 and k2 must be positive")

    def kernel(self):
        return gaussian_kernel(self.window_sigma, radius=self.window_size // 2)


def _pair(a, b, colorspace=None):
    a = check_image(a, colorspace, "a")
    b = check_image(b, colorspace, "b")
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    return a, b


def mse(a, b) -> float:
    a, b = _pair(a, b)
    d = a.data - b.data
    return float(np.mean(d * d))


def psnr(a, b, data_range: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(data_range**2 / err)


def ssim_maps(x: np.ndarray, y: np.ndarray, p: SsimParams = SsimParams()):
    """Luminance and contrast-structure maps for 2-D float arrays."""
    k = p.kernel()
    c1 = (p.k1 * p.dynamic_range) ** 2
    c2 = (p.k2 * p.dynamic_range) ** 2
    mu_x = blur_array(x, k)
    mu_y = blur_array(y, k)
    sxx = blur_array(x * x, k) - mu_x * mu_x
    syy = blur_array(y * y, k) - mu_y * mu_y
    sxy = blur_array(x * y, k) - mu_x * mu_y
    lum = (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1)
    cs = (2.0 * sxy + c2) / (sxx + syy + c2)
    return lum, cs


def _gray_planes(a, b, p):
    a, b = _pair(a, b, Colorspace.GRAY)
    if min(a.height, a.width) < p.window_size:
        raise ImageTooSmall(f"{a.width}x{a.height} is smaller than the {p.window_size}-px window")
    return a.plane(), b.plane()


def ssim(a, b, p: SsimParams = SsimParams()) -> float:
    """Mean SSIM index over all pixels using Gaussian-weighted local moments."""
    x, y = _gray_planes(a, b, p)
    lum, cs = ssim_maps(x, y, p)
    return float(np.mean(lum * cs))


def _downsample(x):
    h, w = (x.shape[0] // 2) * 2, (x.shape[1] // 2) * 2
    x = x[:h, :w]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def ms_ssim_levels(height: int, width: int, window_size: int = 11, max_levels: int = 5) -> int:
    """Number of dyadic levels whose smallest side still fits the window."""
    levels = 0
    h, w = height, width
    while levels < max_levels and min(h, w) >= window_size:
        levels += 1
        h, w = h // 2, w // 2
    return levels


def _signed_pow(v, w):
    return math.copysign(abs(v) ** w, v)


def ms_ssim(a, b, p: SsimParams = SsimParams(), weights=MS_SSIM_WEIGHTS) -> float:
    """Multi-scale SSIM.

    Contrast-structure means at every level but the coarsest, where the full
    SSIM mean is used, each raised to its level weight. When the image
    supports fewer levels than ``weights`` provides, the leading weights are
    kept and renormalized to sum to one. Negative level scores keep their sign
    under the fractional power, so the result stays in ``[-1, 1]``.
    """
    x, y = _gray_planes(a, b, p)
    levels = ms_ssim_levels(x.shape[0], x.shape[1], p.window_size, len(weights))
    w = np.asarray(weights[:levels], dtype=np.float64)
    w = w / w.sum()
    score = 1.0
    for level in range(levels):
        lum, cs = ssim_maps(x, y, p)
        if level == levels - 1:
            score *= _signed_pow(float(np.mean(lum * cs)), w[level])
        else:
            score *= _signed_pow(float(np.mean(cs)), w[level])
            x, y = _downsample(x), _downsample(y)
    return float(score)


# ---------------------------------------------------------------- Frechet

@dataclass(frozen=True, eq=False)
class FeatureSet:
    """``n x d`` matrix of feature vectors, one sample per row."""

    rows: np.ndarray

    def __post_init__(self):
        arr = np.array(self.rows, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("feature rows must form a 2-D matrix")
        if arr.shape[0] < 2:
            raise DegenerateCovariance("need at least two samples for a covariance")
        if not np.all(np.isfinite(arr)):
            raise DegenerateCovariance("feature set contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "rows", arr)

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def d(self):
        return self.rows.shape[1]


def _psd_sqrt(m, rel_floor=1e-10):
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    top = max(vals.max(), 0.0)
    vals = np.where(vals > rel_floor * top, vals, 0.0)
    return (vecs * np.sqrt(vals)) @ vecs.T, vals


def frechet_distance(fa, fb) -> float:
    """Frechet distance between Gaussians fitted to two feature sets.

    ``|mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2))`` with the trace of
    the cross term taken from the eigenvalues of ``S_a^(1/2) S_b S_a^(1/2)``.
    """
    fa = fa if isinstance(fa, FeatureSet) else FeatureSet(fa)
    fb = fb if isinstance(fb, FeatureSet) else FeatureSet(fb)
    if fa.d != fb.d:
        raise DimensionMismatch(f"feature dimensions differ: {fa.d} vs {fb.d}")
    mu_a, mu_b = fa.rows.mean(axis=0), fb.rows.mean(axis=0)
    cov_a = np.atleast_2d(np.cov(fa.rows, rowvar=False))
    cov_b = np.atleast_2d(np.cov(fb.rows, rowvar=False))
    root_a, _ = _psd_sqrt(cov_a)
    inner = root_a @ cov_b @ root_a
    vals = np.linalg.eigvalsh(0.5 * (inner + inner.T))
    top = max(vals.max(), 0.0)
    vals = np.where(vals > 1e-10 * top, vals, 0.0)
    diff = mu_a - mu_b
    value = float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.sqrt(vals).sum())
    return max(value, 0.0)


_FSET_MAGIC = b"FSET"


def write_feature_set(path, fs: FeatureSet) -> None:
    """Binary layout: ``FSET``, little-endian u32 n, u32 d, then float64 rows."""
    fs = fs if isinstance(fs, FeatureSet) else FeatureSet(fs)
    with open(path, "wb") as fh:
        fh.write(_FSET_MAGIC + struct.pack("<II", fs.n, fs.d))
        fh.write(np.ascontiguousarray(fs.rows, dtype="<f8").tobytes())


def read_feature_set(path) -> FeatureSet:
    """Read a feature set from the binary ``FSET`` layout or a CSV file."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == _FSET_MAGIC:
        if len(raw) < 12:
            raise ValueError("truncated FSET header")
        n, d = struct.unpack("<II", raw[4:12])
        body = raw[12:]
        if len(body) != 8 * n * d:
            raise ValueError(f"FSET body holds {len(body)} bytes, expected {8 * n * d}")
        return FeatureSet(np.frombuffer(body, dtype="<f8").reshape(n, d))
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                rows.append([float(c) for c in rec])
            except ValueError:
                if rows:
                    raise
                continue  # header line
    return FeatureSet(np.asarray(rows, dtype=np.float64))
