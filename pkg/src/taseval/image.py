"""Raster containers, codecs, colour conversion, resampling and blurring.

Images are float arrays in ``[0, 1]`` with shape ``(height, width, channels)``
tagged with a colour space. Quantization to 8 bits only happens at file I/O.
"""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .exceptions import (
    MalformedImage,
    NonPositiveSigma,
    UnsupportedFormat,
    WrongColorspace,
    ZeroDimension,
)

__all__ = [
    "Colorspace",
    "RasterImage",
    "check_image",
    "decode_image",
    "encode_image",
    "read_image",
    "write_image",
    "to_grayscale",
    "srgb_to_linear",
    "linear_to_srgb",
    "srgb_to_lab",
    "lab_to_srgb",
    "resize_bilinear",
    "gaussian_kernel",
    "gaussian_blur",
]


class Colorspace(str, enum.Enum):
    SRGB = "SRGB"
    LINEAR = "LINEAR"
    GRAY = "GRAY"
    LAB = "LAB"


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Immutable planar image.

    ``data`` has shape ``(height, width, channels)``; GRAY images carry one
    channel, every other colour space three.
    """

    data: np.ndarray
    colorspace: Colorspace = Colorspace.SRGB

    def __post_init__(self):
        cs = Colorspace(self.colorspace)
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ValueError(f"expected a 2-D or 3-D array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ZeroDimension(f"image has zero extent {arr.shape[:2]}")
        want = 1 if cs is Colorspace.GRAY else 3
        if arr.shape[2] != want:
            raise ValueError(f"{cs.value} images need {want} channel(s), got {arr.shape[2]}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "colorspace", cs)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self):
        return self.data.shape

    def plane(self) -> np.ndarray:
        """The single channel of a GRAY image as a 2-D array."""
        if self.channels != 1:
            raise WrongColorspace(f"plane() needs a 1-channel image, got {self.colorspace.value}")
        return self.data[:, :, 0]

    def flat(self) -> np.ndarray:
        """Row-major interleaved samples."""
        return self.data.reshape(-1)

    def with_data(self, data) -> "RasterImage":
        return RasterImage(data, self.colorspace)

    def __repr__(self):
        return f"RasterImage({self.width}x{self.height}x{self.channels}, {self.colorspace.value})"


def check_image(img, colorspace=None, name="image") -> RasterImage:
    """Coerce ``img`` to a :class:`RasterImage` and verify its colour space.

    Bare arrays are accepted: 2-D or single-channel arrays are read as GRAY,
    three-channel arrays as sRGB.
    """
    if not isinstance(img, RasterImage):
        arr = np.asarray(img, dtype=np.float64)
        if arr.ndim == 2 or (arr.ndim == 3 and arr.shape[2] == 1):
            img = RasterImage(arr, Colorspace.GRAY)
        else:
            img = RasterImage(arr, Colorspace.SRGB)
    if colorspace is not None:
        allowed = (colorspace,) if isinstance(colorspace, (str, Colorspace)) else tuple(colorspace)
        allowed = tuple(Colorspace(c) for c in allowed)
        if img.colorspace not in allowed:
            names = "/".join(c.value for c in allowed)
            raise WrongColorspace(f"{name} must be {names}, got {img.colorspace.value}")
    return img


# ---------------------------------------------------------------- file I/O

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8"


def decode_image(data: bytes) -> RasterImage:
    """Decode PNG or baseline JPEG bytes to an sRGB image in ``[0, 1]``.

    Alpha is composited over white.
    """
    if data[:8] != _PNG_MAGIC and data[:2] != _JPEG_MAGIC:
        if len(data) < 8:
            raise MalformedImage("byte stream too short to be an image")
        raise UnsupportedFormat("only PNG and JPEG are supported")
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode in ("RGBA", "LA", "PA") or (im.mode == "P" and "transparency" in im.info):
                im = im.convert("RGBA")
                rgba = np.asarray(im, dtype=np.float64) / 255.0
                alpha = rgba[:, :, 3:4]
                rgb = rgba[:, :, :3] * alpha + (1.0 - alpha)
            else:
                if im.mode in ("I;16", "I;16B", "I"):
                    arr = np.asarray(im, dtype=np.float64)
                    rgb = np.repeat((arr / 65535.0)[:, :, None], 3, axis=2)
                else:
                    rgb = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise MalformedImage(f"cannot decode image: {exc}") from exc
    return RasterImage(rgb, Colorspace.SRGB)


def _to_uint8(img: RasterImage) -> np.ndarray:
    return np.clip(np.rint(img.data * 255.0), 0, 255).astype(np.uint8)


def encode_image(img: RasterImage, fmt: str = "PNG") -> bytes:
    """Encode a GRAY or sRGB image as PNG (lossless) or JPEG."""
    img = check_image(img, (Colorspace.SRGB, Colorspace.GRAY))
    fmt = fmt.upper()
    if fmt == "JPG":
        fmt = "JPEG"
    if fmt not in ("PNG", "JPEG"):
        raise UnsupportedFormat(f"cannot encode {fmt}")
    q = _to_uint8(img)
    pil = Image.fromarray(q[:, :, 0], "L") if img.channels == 1 else Image.fromarray(q, "RGB")
    buf = io.BytesIO()
    if fmt == "PNG":
        pil.save(buf, format="PNG", optimize=False)
    else:
        pil.save(buf, format="JPEG", quality=95)
    return buf.getvalue()


def read_image(path) -> RasterImage:
    return decode_image(Path(path).read_bytes())


def write_image(path, img: RasterImage) -> None:
    path = Path(path)
    fmt = "JPEG" if path.suffix.lower() in (".jpg", ".jpeg") else "PNG"
    path.write_bytes(encode_image(img, fmt))


# ---------------------------------------------------------------- colour

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

# sRGB primaries, D65 white, 2 degree observer
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
D65_WHITE = np.array([0.95047, 1.0, 1.08883])
_EPS = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0


def to_grayscale(img) -> RasterImage:
    """BT.601 luma of gamma-encoded sRGB samples."""
    img = check_image(img, Colorspace.SRGB)
    d = img.data
    # summed so that white maps to exactly 1.0
    y = LUMA_WEIGHTS[0] * d[..., 0] + (LUMA_WEIGHTS[1] * d[..., 1] + LUMA_WEIGHTS[2] * d[..., 2])
    return RasterImage(y, Colorspace.GRAY)


def _decode_transfer(c):
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _encode_transfer(c):
    c = np.clip(c, 0.0, None)
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * np.power(c, 1.0 / 2.4) - 0.055)


def srgb_to_linear(img) -> RasterImage:
    img = check_image(img, Colorspace.SRGB)
    return RasterImage(_decode_transfer(img.data), Colorspace.LINEAR)


def linear_to_srgb(img) -> RasterImage:
    img = check_image(img, Colorspace.LINEAR)
    return RasterImage(np.clip(_encode_transfer(img.data), 0.0, 1.0), Colorspace.SRGB)


def srgb_array_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Array form of :func:`srgb_to_lab` for ``(..., 3)`` inputs."""
    xyz = _decode_transfer(np.asarray(rgb, dtype=np.float64)) @ _RGB_TO_XYZ.T
    t = xyz / D65_WHITE
    f = np.where(t > _EPS, np.cbrt(t), (_KAPPA * t + 16.0) / 116.0)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def lab_array_to_srgb(lab: np.ndarray) -> np.ndarray:
    """Inverse of :func:`srgb_array_to_lab`; out-of-gamut results are clipped."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    f = np.stack([fx, fy, fz], axis=-1)
    t = np.where(f**3 > _EPS, f**3, (116.0 * f - 16.0) / _KAPPA)
    # L below the linear segment knee uses L / kappa for Y
    t[..., 1] = np.where(lab[..., 0] > _KAPPA * _EPS, fy**3, lab[..., 0] / _KAPPA)
    xyz = t * D65_WHITE
    rgb = _encode_transfer(xyz @ _XYZ_TO_RGB.T)
    return np.clip(rgb, 0.0, 1.0)


def srgb_to_lab(img) -> RasterImage:
    """CIE L*a*b* under D65 with the standard sRGB transfer decoding."""
    img = check_image(img, Colorspace.SRGB)
    return RasterImage(srgb_array_to_lab(img.data), Colorspace.LAB)


def lab_to_srgb(img) -> RasterImage:
    img = check_image(img, Colorspace.LAB)
    return RasterImage(lab_array_to_srgb(img.data), Colorspace.SRGB)


# ---------------------------------------------------------------- resampling

def _bilinear_axis(n_in, n_out):
    # half-pixel centres, clamped to the edge
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = pos - lo
    return lo, hi, frac


def resize_array(arr: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize of an ``(H, W, ...)`` array."""
    h_in, w_in = arr.shape[:2]
    if (h_in, w_in) == (height, width):
        return np.array(arr, dtype=np.float64)
    y0, y1, fy = _bilinear_axis(h_in, height)
    x0, x1, fx = _bilinear_axis(w_in, width)
    extra = (None,) * (arr.ndim - 2)
    fy = fy[(slice(None), None) + extra]
    fx = fx[(None, slice(None)) + extra]
    top = arr[y0][:, x0] * (1.0 - fx) + arr[y0][:, x1] * fx
    bottom = arr[y1][:, x0] * (1.0 - fx) + arr[y1][:, x1] * fx
    return top * (1.0 - fy) + bottom * fy


def resize_bilinear(img, w: int, h: int) -> RasterImage:
    """Bilinear interpolation with edge clamping; keeps the colour space."""
    img = check_image(img)
    if w < 1 or h < 1:
        raise ZeroDimension(f"target size {w}x{h} must be at least 1x1")
    return RasterImage(resize_array(img.data, int(w), int(h)), img.colorspace)


# ---------------------------------------------------------------- filtering

def gaussian_kernel(sigma: float, radius: int | None = None) -> np.ndarray:
    """Normalized 1-D Gaussian taps, radius ``ceil(3 sigma)`` by default."""
    if not sigma > 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    if radius is None:
        radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def blur_array(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable edge-clamped convolution over the first two axes."""
    arr = np.asarray(arr, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if arr.ndim == 2 and kernel.size % 2 == 1 and min(arr.shape) > 1:
        # OpenCV correlates, hence the flip; replicate border == nearest
        k = np.ascontiguousarray(kernel[::-1])
        return cv2.sepFilter2D(arr, cv2.CV_64F, k, k, borderType=cv2.BORDER_REPLICATE)
    out = ndimage.convolve1d(arr, kernel, axis=0, mode="nearest")
    return ndimage.convolve1d(out, kernel, axis=1, mode="nearest")


def gaussian_blur(img, sigma: float) -> RasterImage:
    img = check_image(img)
    k = gaussian_kernel(sigma)
    return RasterImage(blur_array(img.data, k), img.colorspace)
