import math

import numpy as np
import pytest

import oracles
from conftest import srgb
from taseval.colordiff import (
    Ciede2000Params,
    ciede2000,
    color_similarity,
    mean_image_ciede2000,
    similarity_from_delta_e,
)
from taseval.exceptions import EmptyMask, NonFiniteInput, ShapeMismatch, WrongColorspace
from taseval.image import Colorspace, RasterImage, lab_array_to_srgb

# golden: oracles.ciede2000_scalar((50, 2.6772, -79.7751), (50, 0, -82.7485))
BLUE_PAIR_DE = 2.0424596801565738

# published CIEDE2000 test data (Sharma, Wu and Dalal), four decimals
SHARMA = [
    ((50.0, 2.6772, -79.7751), (50.0, 0.0, -82.7485), 2.0425),
    ((50.0, 3.1571, -77.2803), (50.0, 0.0, -82.7485), 2.8615),
    ((50.0, 2.8361, -74.0200), (50.0, 0.0, -82.7485), 3.4412),
    ((50.0, 0.0, 0.0), (50.0, -1.0, 2.0), 2.3669),
    ((50.0, -1.0, 2.0), (50.0, 0.0, 0.0), 2.3669),
    ((50.0, 2.49, -0.001), (50.0, -2.49, 0.0009), 7.1792),
    ((50.0, 2.49, -0.001), (50.0, -2.49, 0.0010), 7.1792),
    ((50.0, 2.49, -0.001), (50.0, -2.49, 0.0011), 7.2195),
    ((50.0, 2.49, -0.001), (50.0, -2.49, 0.0012), 7.2195),
    ((50.0, 2.5, 0.0), (73.0, 25.0, -18.0), 27.1492),
    ((50.0, 2.5, 0.0), (61.0, -5.0, 29.0), 22.8977),
    ((50.0, 2.5, 0.0), (56.0, -27.0, -3.0), 31.9030),
    ((50.0, 2.5, 0.0), (58.0, 24.0, 15.0), 19.4535),
    ((50.0, 2.5, 0.0), (50.0, 3.1736, 0.5854), 1.0000),
    ((50.0, 2.5, 0.0), (50.0, 3.2972, 0.0), 1.0000),
    ((50.0, 2.5, 0.0), (50.0, 1.8634, 0.5757), 1.0000),
    ((50.0, 2.5, 0.0), (50.0, 3.2592, 0.3350), 1.0000),
    ((60.2574, -34.0099, 36.2677), (60.4626, -34.1751, 39.4387), 1.2644),
    ((63.0109, -31.0961, -5.8663), (62.8187, -29.7946, -4.0864), 1.2630),
    ((61.2901, 3.7196, -5.3901), (61.4292, 2.2480, -4.9620), 1.8731),
    ((35.0831, -44.1164, 3.7933), (35.0232, -40.0716, 1.5901), 1.8645),
    ((22.7233, 20.0904, -46.6940), (23.0331, 14.9730, -42.5619), 2.0373),
    ((36.4612, 47.8580, 18.3852), (36.2715, 50.5065, 21.2231), 1.4146),
    ((90.8027, -2.0831, 1.4410), (91.1528, -1.6435, 0.0447), 1.4441),
    ((90.9257, -0.5406, -0.9208), (88.6381, -0.8985, -0.7239), 1.5381),
    ((6.7747, -0.2908, -2.4247), (5.8714, -0.0985, -2.2286), 0.6377),
    ((2.0776, 0.0795, -1.1350), (0.9033, -0.0636, -0.5514), 0.9082),
]


def lab(data):
    return RasterImage(np.asarray(data, dtype=np.float64), Colorspace.LAB)


def test_identical_pixels():
    assert ciede2000((41.0, 12.0, -30.0), (41.0, 12.0, -30.0)) == 0.0


def test_blue_pair_golden():
    p, q = (50, 2.6772, -79.7751), (50, 0, -82.7485)
    assert oracles.ciede2000_scalar(p, q) == pytest.approx(BLUE_PAIR_DE, abs=1e-12)
    assert abs(ciede2000(p, q) - BLUE_PAIR_DE) < 1e-4


@pytest.mark.parametrize("p,q,want", SHARMA)
def test_published_vectors(p, q, want):
    assert oracles.ciede2000_scalar(p, q) == pytest.approx(want, abs=5e-5)
    assert ciede2000(p, q) == pytest.approx(want, abs=5e-5)


def test_matches_oracle_on_random_pairs(rng):
    for _ in range(300):
        p = (rng.uniform(0, 100), rng.uniform(-110, 110), rng.uniform(-110, 110))
        q = (rng.uniform(0, 100), rng.uniform(-110, 110), rng.uniform(-110, 110))
        assert abs(ciede2000(p, q) - oracles.ciede2000_scalar(p, q)) < 1e-9


def test_parametric_weights_match_oracle(rng):
    k = Ciede2000Params(2.0, 1.5, 0.7)
    p, q = (55.0, 10.0, -4.0), (48.0, 18.0, 3.0)
    assert ciede2000(p, q, k) == pytest.approx(oracles.ciede2000_scalar(p, q, 2.0, 1.5, 0.7), abs=1e-12)
    with pytest.raises(ValueError):
        Ciede2000Params(0.0, 1.0, 1.0)


def test_non_finite():
    with pytest.raises(NonFiniteInput):
        ciede2000((50, math.nan, 0), (50, 0, 0))


# ---------------------------------------------------------------- image mean

def test_mean_identical_is_zero(rng):
    a = lab(rng.uniform([0, -50, -50], [100, 50, 50], (6, 6, 3)))
    assert mean_image_ciede2000(a, a) == 0.0


def test_mean_half_and_mask():
    base = np.tile([50.0, 2.5, 0.0], (4, 4, 1))
    other = base.copy()
    other[:, 2:] = (73.0, 25.0, -18.0)
    d = oracles.ciede2000_scalar((50, 2.5, 0), (73, 25, -18))
    assert mean_image_ciede2000(lab(base), lab(other)) == pytest.approx(d / 2, abs=1e-12)
    mask = np.zeros((4, 4))
    mask[:, 2:] = 1
    assert mean_image_ciede2000(lab(base), lab(other), mask) == pytest.approx(d, abs=1e-12)
    with pytest.raises(EmptyMask):
        mean_image_ciede2000(lab(base), lab(other), np.zeros((4, 4)))
    with pytest.raises(ShapeMismatch):
        mean_image_ciede2000(lab(base), lab(other), np.zeros((3, 4)))
    with pytest.raises(WrongColorspace):
        mean_image_ciede2000(srgb(base / 100), lab(other))


# ---------------------------------------------------------------- s_clr

def test_similarity_identity(rng):
    x = srgb(rng.random((5, 5, 3)))
    assert color_similarity(x, x) == 1.0


def test_similarity_saturates():
    black, white = srgb(np.zeros((3, 3, 3))), srgb(np.ones((3, 3, 3)))
    assert color_similarity(black, white) == 0.0
    assert similarity_from_delta_e(50.0) == 0.0
    assert similarity_from_delta_e(80.0) == 0.0


def test_similarity_midpoint():
    assert similarity_from_delta_e(25.0) == 0.5


def test_similarity_matches_definition(rng):
    a, b = rng.random((4, 4, 3)), rng.random((4, 4, 3))
    de = np.mean([oracles.ciede2000_scalar(oracles.srgb_to_lab_scalar(*a[i, j]), oracles.srgb_to_lab_scalar(*b[i, j]))
                  for i in range(4) for j in range(4)])
    assert color_similarity(srgb(a), srgb(b)) == pytest.approx(1 - min(de / 50, 1), abs=1e-9)


def test_similarity_mask(rng):
    a, b = rng.random((4, 4, 3)), rng.random((4, 4, 3))
    m = np.zeros((4, 4), bool)
    m[1:3, :] = True
    de = np.mean([oracles.ciede2000_scalar(oracles.srgb_to_lab_scalar(*a[i, j]), oracles.srgb_to_lab_scalar(*b[i, j]))
                  for i in range(1, 3) for j in range(4)])
    assert color_similarity(srgb(a), srgb(b), m) == pytest.approx(1 - min(de / 50, 1), abs=1e-9)
    with pytest.raises(EmptyMask):
        color_similarity(srgb(a), srgb(b), np.zeros((4, 4)))
    with pytest.raises(ShapeMismatch):
        color_similarity(srgb(a), srgb(b[:3]))


def test_similarity_non_increasing_with_hue_rotation():
    base_lab = np.array([60.0, 40.0, 10.0])
    chroma = math.hypot(40.0, 10.0)
    h0 = math.atan2(10.0, 40.0)
    base = srgb(np.broadcast_to(lab_array_to_srgb(base_lab), (2, 2, 3)))
    prev = 1.0
    for deg in range(0, 61, 5):
        h = h0 + math.radians(deg)
        rot = lab_array_to_srgb(np.array([60.0, chroma * math.cos(h), chroma * math.sin(h)]))
        s = color_similarity(base, srgb(np.broadcast_to(rot, (2, 2, 3))))
        assert s <= prev + 1e-12
        prev = s
