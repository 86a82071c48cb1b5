"""Frequency-domain helpers: FFT wrappers and the log-Gabor filter bank."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .exceptions import InvalidBankParams
from .image import Colorspace, RasterImage, check_image

__all__ = ["fft2", "ifft2", "FilterBank", "log_gabor_bank", "log_gabor_radial", "frequency_grid"]


def fft2(img) -> np.ndarray:
    """Unnormalized 2-D DFT of a GRAY image (or a bare 2-D array)."""
    if isinstance(img, np.ndarray) and img.ndim == 2:
        return scipy.fft.fft2(img)
    return scipy.fft.fft2(check_image(img, Colorspace.GRAY).plane())


def ifft2(plane: np.ndarray) -> RasterImage:
    """Inverse of :func:`fft2`; the imaginary residue is dropped."""
    return RasterImage(scipy.fft.ifft2(plane).real, Colorspace.GRAY)


def frequency_grid(width: int, height: int):
    """Normalized radius and angle of every DFT bin, DC at index ``[0, 0]``.

    Odd and even sizes follow the usual phase-congruency convention so the
    grid spans ``[-0.5, 0.5)`` cycles/pixel. The DC radius is set to 1 to
    keep ``log`` finite; callers zero that bin afterwards.
    """
    def axis(n):
        if n % 2:
            return np.arange(-(n - 1) / 2, (n - 1) / 2 + 1) / max(n - 1, 1)
        return np.arange(-n / 2, n / 2) / n

    x, y = np.meshgrid(axis(width), axis(height))
    radius = np.fft.ifftshift(np.sqrt(x**2 + y**2))
    theta = np.fft.ifftshift(np.arctan2(-y, x))
    radius[0, 0] = 1.0
    return radius, theta


def log_gabor_radial(f, f0: float, sigma_onf: float):
    """Log-Gaussian radial transfer function, peaking at 1 for ``f == f0``."""
    return np.exp(-(np.log(np.asarray(f) / f0) ** 2) / (2.0 * math.log(sigma_onf) ** 2))


def _butterworth(radius, cutoff=0.45, order=15):
    return 1.0 / (1.0 + (radius / cutoff) ** (2 * order))


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Real-valued frequency responses indexed ``[orientation, scale, y, x]``."""

    scales: int
    orientations: int
    responses: np.ndarray

    @property
    def shape(self):
        return self.responses.shape[2:]


@functools.lru_cache(maxsize=16)
def _bank_cached(width, height, scales, orientations, min_wavelength, mult, sigma_onf, d_theta_on_sigma):
    radius, theta = frequency_grid(width, height)
    lowpass = _butterworth(radius)
    radial = []
    for s in range(scales):
        f0 = 1.0 / (min_wavelength * mult**s)
        g = log_gabor_radial(radius, f0, sigma_onf) * lowpass
        g[0, 0] = 0.0
        radial.append(g)

    theta_sigma = math.pi / orientations / d_theta_on_sigma
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    out = np.empty((orientations, scales, height, width))
    for o in range(orientations):
        angle = o * math.pi / orientations
        ds = sin_t * math.cos(angle) - cos_t * math.sin(angle)
        dc = cos_t * math.cos(angle) + sin_t * math.sin(angle)
        dtheta = np.abs(np.arctan2(ds, dc))
        spread = np.exp(-(dtheta**2) / (2.0 * theta_sigma**2))
        for s in range(scales):
            out[o, s] = radial[s] * spread
    out.setflags(write=False)
    return out


def log_gabor_bank(
    width: int,
    height: int,
    scales: int = 4,
    orientations: int = 4,
    min_wavelength: float = 6.0,
    mult: float = 2.0,
    sigma_onf: float = 0.55,
    d_theta_on_sigma: float = 1.2,
) -> FilterBank:
    """Build (or fetch from cache) a log-Gabor bank for a ``width x height`` image.

    Each response is the radial log-Gaussian times an angular Gaussian spread,
    band-limited by a Butterworth low-pass with its DC bin forced to zero.
    """
    if scales < 1 or orientations < 1 or min_wavelength < 2:
        raise InvalidBankParams("need scales >= 1, orientations >= 1, min_wavelength >= 2")
    if width < 1 or height < 1 or mult <= 0 or not 0 < sigma_onf < 1 or d_theta_on_sigma <= 0:
        raise InvalidBankParams("bank dimensions and ratios must be positive (0 < sigma_onf < 1)")
    responses = _bank_cached(
        int(width), int(height), int(scales), int(orientations),
        float(min_wavelength), float(mult), float(sigma_onf), float(d_theta_on_sigma),
    )
    return FilterBank(int(scales), int(orientations), responses)
