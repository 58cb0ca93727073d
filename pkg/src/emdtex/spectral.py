"""Average Fourier spectra of image sets and the spectral-difference gap."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_same_shape
from .exceptions import EmptySet, ShapeMismatch

__all__ = [
    "LUMA_WEIGHTS",
    "SpectrumStats",
    "color_to_scalar",
    "mean_spectrum",
    "spectral_difference",
]

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass
class SpectrumStats:
    mean_spectrum: np.ndarray
    magnitude: np.ndarray
    n_images: int

    @property
    def shape(self):
        return self.magnitude.shape


def color_to_scalar(image):
    """Rec.601 luma of an (H, W, 3) image; 2D input passes through."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got shape {img.shape}")
    r, g, b = LUMA_WEIGHTS
    return r * img[..., 0] + g * img[..., 1] + b * img[..., 2]


def _pairwise_sum(items):
    # tree reduction keeps rounding error O(log n) and independent of batching
    items = list(items)
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def mean_spectrum(images, dims=None):
    """Mean of the unnormalised 2D DFTs of a set of images, and its modulus.

    Parameters
    ----------
    images : iterable of array-like
        Each (H, W), or (H, W, 3) which is converted to luma first.
    dims : (H, W), optional
        Required size; defaults to the size of the first image.

    Returns
    -------
    SpectrumStats

    Raises
    ------
    EmptySet
        No images were given.
    ShapeMismatch
        Images differ in size (or from ``dims``).
    """
    fields = [color_to_scalar(im) for im in images]
    if not fields:
        raise EmptySet("cannot average the spectrum of an empty image set")
    dims = tuple(dims) if dims is not None else fields[0].shape
    for i, f in enumerate(fields):
        if f.shape != dims:
            raise ShapeMismatch(f"image {i} has shape {f.shape}, expected {dims}")
        if not np.all(np.isfinite(f)):
            raise ValueError(f"image {i} contains NaN or Inf")
    spectra = (np.fft.fft2(f) for f in fields)
    mean = _pairwise_sum(spectra) / len(fields)
    return SpectrumStats(mean_spectrum=mean, magnitude=np.abs(mean), n_images=len(fields))


def spectral_difference(gen, real):
    """Mean squared difference between the two magnitude spectra.

    Accepts :class:`SpectrumStats` or bare magnitude arrays.
    """
    a = gen.magnitude if isinstance(gen, SpectrumStats) else np.asarray(gen, dtype=np.float64)
    b = real.magnitude if isinstance(real, SpectrumStats) else np.asarray(real, dtype=np.float64)
    check_same_shape(a, b, ("gen", "real"))
    return float(np.mean((a - b) ** 2))
