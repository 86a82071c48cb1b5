import io
import math

import numpy as np
import pytest
from PIL import Image

import oracles
from conftest import gray, srgb
from taseval.exceptions import MalformedImage, NonPositiveSigma, UnsupportedFormat, WrongColorspace, ZeroDimension
from taseval.fourier import fft2, ifft2, log_gabor_bank, log_gabor_radial
from taseval.exceptions import InvalidBankParams
from taseval.image import (
    Colorspace,
    RasterImage,
    blur_array,
    decode_image,
    encode_image,
    gaussian_blur,
    gaussian_kernel,
    lab_to_srgb,
    read_image,
    resize_bilinear,
    srgb_to_lab,
    to_grayscale,
    write_image,
)

# golden: oracles.srgb_to_lab_scalar(1, 0, 0)
RED_LAB = (53.24079414130722, 80.09245959641109, 67.20319651585301)
# golden: oracles.naive_bilinear of the 4x4 ramp (values 0..15 / 15) to 2x2
RAMP_2X2 = [[0.16666666666666666, 0.30000000000000004], [0.7, 0.8333333333333333]]
# golden: oracles.dense_blur(default_rng(7).random((8, 8)), 1.0), total and one sample
BLUR8_SUM = 31.483611638740342
BLUR8_AT_3_4 = 0.4911021828946329


def _png(arr, mode):
    buf = io.BytesIO()
    Image.fromarray(arr, mode).save(buf, format="PNG")
    return buf.getvalue()


# ---------------------------------------------------------------- codec

def test_decode_single_white_pixel():
    img = decode_image(_png(np.full((1, 1, 3), 255, np.uint8), "RGB"))
    assert (img.width, img.height, img.channels) == (1, 1, 3)
    assert img.flat().tolist() == [1.0, 1.0, 1.0]


def test_decode_black_white_row():
    img = decode_image(_png(np.array([[[0, 0, 0], [255, 255, 255]]], np.uint8), "RGB"))
    assert img.flat().tolist() == [0, 0, 0, 1, 1, 1]


def test_decode_truncated_stream():
    data = _png(np.zeros((8, 8, 3), np.uint8), "RGB")
    with pytest.raises(MalformedImage):
        decode_image(data[: len(data) // 2])


def test_decode_unknown_format():
    with pytest.raises(UnsupportedFormat):
        decode_image(b"GIF89a" + b"\0" * 20)


def test_alpha_composited_over_white():
    rgba = np.zeros((1, 2, 4), np.uint8)
    rgba[0, 0] = (0, 0, 0, 0)      # fully transparent black -> white
    rgba[0, 1] = (0, 0, 0, 255)
    img = decode_image(_png(rgba, "RGBA"))
    assert img.data[0, 0].tolist() == [1.0, 1.0, 1.0]
    assert img.data[0, 1].tolist() == [0.0, 0.0, 0.0]


def test_png_round_trip(tmp_path, rng):
    arr = np.round(rng.random((5, 7, 3)) * 255) / 255
    write_image(tmp_path / "x.png", srgb(arr))
    back = read_image(tmp_path / "x.png")
    np.testing.assert_array_equal(back.data, arr)
    assert decode_image(encode_image(srgb(arr))).data.tolist() == arr.tolist()


def test_raster_image_is_read_only():
    img = srgb(np.zeros((2, 2, 3)))
    with pytest.raises(ValueError):
        img.data[0, 0, 0] = 1.0


def test_zero_extent_rejected():
    with pytest.raises(ZeroDimension):
        RasterImage(np.zeros((0, 3, 3)))


# ---------------------------------------------------------------- grayscale and Lab

def test_grayscale_examples():
    assert np.all(to_grayscale(srgb(np.ones((2, 2, 3)))).plane() == 1.0)
    assert to_grayscale(srgb([[[1.0, 0.0, 0.0]]])).plane()[0, 0] == pytest.approx(0.299, abs=1e-15)
    # 0.299*0.2 + 0.587*0.4 + 0.114*0.6 = 0.0598 + 0.2348 + 0.0684 = 0.3630
    assert to_grayscale(srgb([[[0.2, 0.4, 0.6]]])).plane()[0, 0] == pytest.approx(0.3630, abs=1e-12)


def test_grayscale_needs_srgb():
    with pytest.raises(WrongColorspace):
        to_grayscale(gray(np.zeros((2, 2))))


def test_lab_white_and_black():
    white = srgb_to_lab(srgb(np.ones((1, 1, 3)))).data[0, 0]
    # the sRGB matrix's Y row sums to 1.0000001, so L lands a few 1e-6 above 100
    assert white[0] == pytest.approx(100.0, abs=1e-4)
    assert abs(white[1]) < 0.01 and abs(white[2]) < 0.01
    np.testing.assert_allclose(srgb_to_lab(srgb(np.zeros((1, 1, 3)))).data[0, 0], 0.0, atol=1e-12)


def test_lab_red_golden():
    assert oracles.srgb_to_lab_scalar(1, 0, 0) == pytest.approx(RED_LAB, abs=1e-12)
    got = srgb_to_lab(srgb([[[1.0, 0.0, 0.0]]])).data[0, 0]
    np.testing.assert_allclose(got, RED_LAB, atol=1e-9)


def test_lab_matches_scalar_oracle(rng):
    cols = rng.random((50, 3))
    got = srgb_to_lab(srgb(cols[None])).data[0]
    want = np.array([oracles.srgb_to_lab_scalar(*c) for c in cols])
    np.testing.assert_allclose(got, want, atol=1e-9)


def test_lab_round_trip_thousand_colours(rng):
    cols = rng.random((1, 1000, 3))
    back = lab_to_srgb(srgb_to_lab(srgb(cols))).data
    assert np.abs(back - cols).max() < 0.5 / 255


# ---------------------------------------------------------------- resampling

def test_resize_identity(rng):
    arr = rng.random((5, 6, 3))
    np.testing.assert_array_equal(resize_bilinear(srgb(arr), 6, 5).data, arr)


def test_resize_checkerboard_to_one_pixel():
    out = resize_bilinear(gray([[0.0, 1.0], [1.0, 0.0]]), 1, 1)
    assert out.plane()[0, 0] == pytest.approx(0.5, abs=1e-15)


def test_resize_ramp_golden():
    ramp = np.arange(16, dtype=float).reshape(4, 4) / 15
    np.testing.assert_allclose(oracles.naive_bilinear(ramp, 2, 2), RAMP_2X2, atol=1e-15)
    np.testing.assert_allclose(resize_bilinear(gray(ramp), 2, 2).plane(), RAMP_2X2, atol=1e-12)


def test_resize_matches_naive_resampler(rng):
    arr = rng.random((7, 9))
    for w, h in ((4, 3), (13, 11), (9, 2)):
        np.testing.assert_allclose(resize_bilinear(gray(arr), w, h).plane(), oracles.naive_bilinear(arr, w, h),
                                   atol=1e-12)


def test_resize_zero_target():
    with pytest.raises(ZeroDimension):
        resize_bilinear(gray(np.zeros((3, 3))), 0, 2)


# ---------------------------------------------------------------- blur

def test_blur_constant_is_exact():
    out = gaussian_blur(gray(np.full((9, 9), 0.37)), 1.7).plane()
    np.testing.assert_allclose(out, 0.37, atol=1e-15)


def test_blur_impulse_and_kernel_normalization():
    k = gaussian_kernel(1.5)
    assert len(k) == 2 * math.ceil(4.5) + 1
    assert abs(k.sum() - 1.0) < 1e-9
    imp = np.zeros((21, 21))
    imp[10, 10] = 1.0
    out = gaussian_blur(gray(imp), 1.5).plane()
    assert out[10, 10] == pytest.approx(k[len(k) // 2] ** 2, abs=1e-15)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)


def test_blur_noise_golden():
    x = np.random.default_rng(7).random((8, 8))
    ref = oracles.dense_blur(x, 1.0)
    assert ref.sum() == pytest.approx(BLUR8_SUM, abs=1e-12)
    assert ref[3, 4] == pytest.approx(BLUR8_AT_3_4, abs=1e-12)
    np.testing.assert_allclose(gaussian_blur(gray(x), 1.0).plane(), ref, atol=1e-6)


def test_blur_rgb_channels_independent(rng):
    x = rng.random((10, 12, 3))
    out = gaussian_blur(srgb(x), 1.2).data
    for c in range(3):
        np.testing.assert_allclose(out[:, :, c], oracles.dense_blur(x[:, :, c], 1.2), atol=1e-12)


def test_blur_preserves_mean_interior_dominated(rng):
    x = np.zeros((64, 64))
    x[16:48, 16:48] = rng.random((32, 32))
    assert abs(gaussian_blur(gray(x), 1.5).plane().mean() - x.mean()) < 1e-6


def test_blur_rejects_non_positive_sigma():
    with pytest.raises(NonPositiveSigma):
        gaussian_blur(gray(np.zeros((4, 4))), 0.0)


def test_blur_array_even_kernel_fallback(rng):
    x = rng.random((6, 6))
    k = np.array([0.25, 0.75])
    from scipy import ndimage
    want = ndimage.convolve1d(ndimage.convolve1d(x, k, axis=0, mode="nearest"), k, axis=1, mode="nearest")
    np.testing.assert_allclose(blur_array(x, k), want, atol=1e-15)


# ---------------------------------------------------------------- Fourier

def test_fft_constant():
    spec = fft2(gray(np.full((4, 6), 0.5)))
    assert spec[0, 0] == pytest.approx(0.5 * 24)
    spec[0, 0] = 0
    assert np.abs(spec).max() < 1e-12


def test_fft_round_trip(rng):
    x = rng.random((16, 16))
    assert np.abs(ifft2(fft2(gray(x))).plane() - x).max() < 1e-6


def test_fft_parseval(rng):
    x = rng.random((12, 10))
    spec = fft2(gray(x))
    assert np.sum(np.abs(spec) ** 2) / x.size == pytest.approx(np.sum(x * x), rel=1e-6)


def test_fft_matches_naive_dft(rng):
    x = rng.random((8, 8))
    assert np.abs(fft2(gray(x)) - oracles.naive_dft2(x)).max() < 1e-6
    y = rng.random((5, 7))
    assert np.abs(fft2(y) - oracles.naive_dft2(y)).max() < 1e-6


def test_bank_dc_zero_and_shape():
    bank = log_gabor_bank(20, 14, scales=3, orientations=5)
    assert bank.responses.shape == (5, 3, 14, 20)
    assert bank.shape == (14, 20)
    assert np.all(bank.responses[:, :, 0, 0] == 0.0)


def test_radial_peak_at_centre_frequency():
    f0 = 1 / 12
    f = np.linspace(0.01, 0.5, 2001)
    r = log_gabor_radial(f, f0, 0.55)
    assert log_gabor_radial(f0, f0, 0.55) == 1.0
    assert r.max() <= 1.0


def test_bank_matches_per_bin_oracle():
    got = log_gabor_bank(16, 16, 4, 4).responses
    want = oracles.log_gabor_bank_loops(16, 16, 4, 4)
    assert np.abs(got - want).max() < 1e-9


def test_bank_odd_size_matches_oracle():
    assert np.abs(log_gabor_bank(15, 17, 4, 4).responses - oracles.log_gabor_bank_loops(17, 15, 4, 4)).max() < 1e-9


@pytest.mark.parametrize("kw", [dict(scales=0), dict(orientations=0), dict(min_wavelength=1.5)])
def test_bank_rejects_bad_params(kw):
    with pytest.raises(InvalidBankParams):
        log_gabor_bank(16, 16, **kw)


def test_bank_cache_bit_identical():
    from taseval.fourier import _bank_cached
    a = log_gabor_bank(18, 18).responses.copy()
    _bank_cached.cache_clear()
    b = log_gabor_bank(18, 18).responses
    np.testing.assert_array_equal(a, b)
