import functools
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

REAL_IMAGE_NAMES = ["astronaut", "camera", "chelsea", "coffee", "coins",
                    "brick", "grass", "gravel", "moon", "rocket"]
RGB_IMAGE_NAMES = ["astronaut", "chelsea", "coffee", "rocket"]


def _to_256(img):
    from skimage.transform import resize

    img = np.asarray(img, dtype=np.float64)
    if img.max() > 1.0:
        img = img / 255.0
    return np.clip(resize(img, (256, 256) + img.shape[2:], anti_aliasing=True), 0.0, 1.0)


@functools.lru_cache(maxsize=None)
def real_gray_images():
    from skimage import color, data

    out = []
    for name in REAL_IMAGE_NAMES:
        img = getattr(data, name)()
        if img.ndim == 3:
            img = color.rgb2gray(img[..., :3])
        out.append(_to_256(img))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def real_rgb_images():
    from skimage import data

    return tuple(_to_256(getattr(data, n)()[..., :3]) for n in RGB_IMAGE_NAMES)


@functools.lru_cache(maxsize=None)
def face_corpus(n=50):
    from skimage import data

    return tuple(np.asarray(f, dtype=np.float64) for f in data.lfw_subset()[:n])


def two_tone(n=1024, f_hi=32, f_lo=4):
    t = np.arange(n) / n
    hi = np.sin(2 * np.pi * f_hi * t)
    lo = np.sin(2 * np.pi * f_lo * t)
    return hi + lo, hi, lo


def two_tone_2d(n=256, f_hi=32, f_lo=4):
    y, x = np.mgrid[:n, :n] / n
    hi = np.sin(2 * np.pi * f_hi * x) * np.sin(2 * np.pi * f_hi * y)
    lo = np.sin(2 * np.pi * f_lo * x) * np.sin(2 * np.pi * f_lo * y)
    return hi + lo, hi, lo


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
