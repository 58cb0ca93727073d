"""Separable sliding-window max/min and mean filters with edge replication.

The max/min filters use the van Herk / Gil-Werman block decomposition: per
axis, one forward and one backward running extreme inside blocks of length
``w``, combined with a single elementwise op. That costs three comparisons per
sample regardless of ``w`` and vectorises over every other axis.
"""

import numpy as np
from scipy import ndimage

from .exceptions import BadWindow

__all__ = ["check_window", "sliding_max", "sliding_min", "mean_filter"]


def check_window(w):
    w_int = int(w)
    if w_int != w or w_int < 3 or w_int % 2 == 0:
        raise BadWindow(f"window must be an odd integer >= 3, got {w!r}")
    return w_int


def _sliding_extreme_1d(a, w, axis, op):
    a = np.moveaxis(a, axis, -1)
    n = a.shape[-1]
    r = w // 2
    # edge-replicate the half window, then extend to a whole number of blocks
    n_pad = n + 2 * r
    n_blocks = -(-n_pad // w)
    tail = n_blocks * w - n_pad
    padded = np.pad(a, [(0, 0)] * (a.ndim - 1) + [(r, r + tail)], mode="edge")

    blocks = padded.reshape(padded.shape[:-1] + (n_blocks, w))
    fwd = op.accumulate(blocks, axis=-1).reshape(padded.shape)
    bwd = op.accumulate(blocks[..., ::-1], axis=-1)[..., ::-1].reshape(padded.shape)
    out = op(bwd[..., :n], fwd[..., w - 1 : w - 1 + n])
    return np.moveaxis(out, -1, axis)


def _sliding_extreme(f, w, op):
    w = check_window(w)
    out = np.asarray(f, dtype=np.float64)
    for axis in range(out.ndim):
        out = _sliding_extreme_1d(out, w, axis, op)
    return np.ascontiguousarray(out)


def sliding_max(f, w):
    """Maximum over a ``w`` x ``w`` (x ...) window centred on each sample."""
    return _sliding_extreme(f, w, np.maximum)


def sliding_min(f, w):
    """Minimum over a ``w`` x ``w`` (x ...) window centred on each sample."""
    return _sliding_extreme(f, w, np.minimum)


def mean_filter(f, w):
    """Arithmetic mean over a ``w`` x ``w`` window, edge-replicated."""
    w = check_window(w)
    return ndimage.uniform_filter(np.asarray(f, dtype=np.float64), size=w, mode="nearest")
