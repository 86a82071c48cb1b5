import numpy as np
import pytest

from taseval.corpus.synth import SideSpec, render_pair_side
from taseval.image import Colorspace, RasterImage


def srgb(data):
    return RasterImage(np.asarray(data, dtype=np.float64), Colorspace.SRGB)


def gray(data):
    return RasterImage(np.asarray(data, dtype=np.float64), Colorspace.GRAY)


def side(text="HELLO", font="sans", fill=(0.1, 0.1, 0.1), bg_family="solid", bg_color=(0.95, 0.95, 0.95),
         bg_seed=0):
    return SideSpec(text, font, tuple(fill), bg_family, tuple(bg_color), bg_seed)


def render(spec, canvas=(192, 96)):
    """Generator image plus its ground-truth coverage."""
    return render_pair_side(spec, canvas)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
