"""Property checks for the invariants the metrics promise."""
import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import gray, render, side, srgb
from taseval.colordiff import ciede2000, color_similarity
from taseval.fourier import fft2, ifft2
from taseval.fsim import fsim
from taseval.image import lab_to_srgb, srgb_to_lab
from taseval.simmetrics import ms_ssim, mse, psnr, ssim
from taseval.stats import spearman
from taseval.style.glyphs import load_template
from taseval.tas import tas, tas_from_components
from taseval.textmetrics import ned

unit = st.floats(0.0, 1.0, allow_nan=False, width=64)
lab_l = st.floats(0.0, 100.0, allow_nan=False)
lab_ab = st.floats(-120.0, 120.0, allow_nan=False)
labs = st.tuples(lab_l, lab_ab, lab_ab)
seeds = st.integers(0, 2**32 - 1)
fast = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@given(labs, labs)
@settings(max_examples=300, deadline=None)
def test_ciede2000_symmetric_and_non_negative(p, q):
    d = ciede2000(p, q)
    assert d >= 0
    assert abs(d - ciede2000(q, p)) < 1e-9


@given(labs)
def test_ciede2000_zero_on_self(p):
    assert ciede2000(p, p) == 0.0


@given(arrays(np.float64, (1, 20, 3), elements=unit))
def test_lab_round_trip(rgb):
    back = lab_to_srgb(srgb_to_lab(srgb(rgb))).data
    assert np.abs(back - rgb).max() < 0.5 / 255


@given(seeds)
@fast
def test_colour_similarity_symmetric(seed):
    r = np.random.default_rng(seed)
    a, b = srgb(r.random((6, 6, 3))), srgb(r.random((6, 6, 3)))
    s = color_similarity(a, b)
    assert 0.0 <= s <= 1.0
    assert abs(s - color_similarity(b, a)) < 1e-12


@given(seeds, st.integers(4, 24), st.integers(4, 24))
@fast
def test_fft_inverse_and_linearity(seed, h, w):
    r = np.random.default_rng(seed)
    x, y = r.random((h, w)), r.random((h, w))
    assert np.abs(ifft2(fft2(gray(x))).plane() - x).max() < 1e-6
    assert np.abs(fft2(2.0 * x + y) - (2.0 * fft2(x) + fft2(y))).max() < 1e-9 * x.size


@given(seeds, st.floats(0.0, 0.3))
@fast
def test_pixel_metrics_symmetric_and_bounded(seed, sigma):
    r = np.random.default_rng(seed)
    a = r.random((24, 24))
    b = np.clip(a + sigma * r.standard_normal(a.shape), 0, 1)
    ga, gb = gray(a), gray(b)
    assert abs(ssim(ga, gb) - ssim(gb, ga)) < 1e-12
    assert -1.0 <= ssim(ga, gb) <= 1.0 + 1e-12
    assert mse(ga, gb) == mse(gb, ga) >= 0
    assert psnr(ga, gb) == psnr(gb, ga)


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_ms_ssim_symmetric(seed):
    r = np.random.default_rng(seed)
    a, b = r.random((48, 48)), r.random((48, 48))
    assert abs(ms_ssim(gray(a), gray(b)) - ms_ssim(gray(b), gray(a))) < 1e-9


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_fsim_symmetric_and_in_range(seed):
    r = np.random.default_rng(seed)
    a = r.random((32, 32))
    b = np.clip(a + 0.3 * r.standard_normal(a.shape), 0, 1)
    v = fsim(gray(a), gray(b))
    assert 0.0 <= v <= 1.0
    assert abs(v - fsim(gray(b), gray(a))) < 1e-9


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=30, unique=True), seeds)
@settings(max_examples=100, deadline=None)
def test_spearman_invariant_under_increasing_maps(x, seed):
    x = np.asarray(x)
    y = np.random.default_rng(seed).permutation(len(x)).astype(float)
    base = spearman(x, y)
    assert -1.0 <= base <= 1.0
    for f in (np.exp, lambda v: v**3 + 2.0, np.arctan):
        fy = f(y / len(y))
        assert abs(spearman(x, fy) - base) < 1e-12


@given(unit, unit, unit)
def test_tas_is_component_mean(c, f, b):
    r = tas_from_components(c, f, b)
    assert abs(r.tas - (c + f + b) / 3) < 1e-12
    assert 0.0 <= r.tas <= 1.0


@given(st.text(max_size=12), st.text(max_size=12))
def test_ned_bounded_and_symmetric(a, b):
    v = ned(a, b)
    assert 0.0 <= v <= 1.0
    assert v == ned(b, a)


@given(seeds, st.sampled_from(["sans", "serif-bold", "mono", "sans-oblique"]),
       st.sampled_from(["solid", "gradient", "noise"]))
@settings(max_examples=10, deadline=None)
def test_tas_symmetric_for_shared_text(seed, font, family):
    r = np.random.default_rng(seed)
    a, _ = render(side("PROP", fill=tuple(0.4 * r.random(3)), bg_seed=1))
    b, _ = render(side("PROP", font=font, fill=tuple(0.4 * r.random(3)), bg_family=family, bg_seed=seed % 100))
    tpl = load_template("sans")
    ab, ba = tas(a, b, "PROP", tpl), tas(b, a, "PROP", tpl)
    for v in (ab.s_clr, ab.s_fnt, ab.s_bg, ab.tas):
        assert 0.0 <= v <= 1.0
    assert abs(ab.tas - ba.tas) < 1e-6
