"""Classical one-dimensional Empirical Mode Decomposition.

The decomposition follows the usual recipe: locate local extrema, fit natural
cubic spline envelopes through maxima and minima, subtract the envelope mean
(sifting) until the Cauchy SD criterion is met, then peel the resulting IMF off
the signal and repeat on what is left.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_signal
from .exceptions import TooFewExtrema

__all__ = [
    "SiftConfig",
    "Decomposition1D",
    "find_extrema_1d",
    "envelope_1d",
    "sift_1d",
    "decompose_1d",
    "zero_crossings",
    "EMD1D",
]


@dataclass(frozen=True)
class SiftConfig:
    """Stopping parameters for sifting and decomposition.

    None of these values come from a face-aging reference; they are the
    classical EMD defaults and can be overridden freely.
    """

    sd_threshold: float = 0.2
    max_sift_iterations: int = 50
    max_imfs: Optional[int] = None

    def __post_init__(self):
        if not self.sd_threshold > 0:
            raise ValueError(f"sd_threshold must be > 0, got {self.sd_threshold}")
        if int(self.max_sift_iterations) < 1:
            raise ValueError(f"max_sift_iterations must be >= 1, got {self.max_sift_iterations}")
        if self.max_imfs is not None and int(self.max_imfs) < 1:
            raise ValueError(f"max_imfs must be a positive integer or None, got {self.max_imfs}")


@dataclass
class Decomposition1D:
    """IMFs ordered from highest to lowest frequency plus the residue."""

    imfs: List[np.ndarray]
    residue: np.ndarray
    sift_iterations: List[int] = field(default_factory=list)
    hit_max_imfs: bool = False

    @property
    def n_imfs(self):
        return len(self.imfs)

    def components(self):
        """Stack IMFs and residue into an array of shape (n_imfs + 1, n)."""
        return np.vstack(self.imfs + [self.residue])

    def reconstruct(self):
        out = self.residue.copy()
        for imf in self.imfs:
            out = out + imf
        return out


def find_extrema_1d(s):
    """Indices of strict local maxima and minima.

    A plateau (run of equal samples) bordered on both sides by strictly
    smaller values counts as one maximum located at the centre of the run,
    rounding left; minima likewise. The first and last samples are never
    extrema.

    Parameters
    ----------
    s : array-like of shape (n,)

    Returns
    -------
    maxima, minima : ndarray of int
        Strictly increasing index arrays.
    """
    s = check_signal(s)
    n = s.shape[0]
    if n < 3:
        return np.empty(0, dtype=np.intp), np.empty(0, dtype=np.intp)

    # collapse plateaus into runs
    change = np.flatnonzero(np.diff(s) != 0) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change - 1, [n - 1]))
    vals = s[starts]
    if vals.shape[0] < 3:
        return np.empty(0, dtype=np.intp), np.empty(0, dtype=np.intp)

    mid = vals[1:-1]
    is_max = (mid > vals[:-2]) & (mid > vals[2:])
    is_min = (mid < vals[:-2]) & (mid < vals[2:])
    centres = (starts[1:-1] + ends[1:-1]) // 2
    return centres[is_max].astype(np.intp), centres[is_min].astype(np.intp)


def _mirror_knots(idx, n):
    """Reflect the two extrema nearest each boundary across that boundary."""
    left = -idx[:2][::-1]
    right = 2 * (n - 1) - idx[-2:][::-1]
    src_left = idx[:2][::-1]
    src_right = idx[-2:][::-1]
    keep_l = left < 0
    keep_r = right > n - 1
    knots = np.concatenate((left[keep_l], idx, right[keep_r]))
    sources = np.concatenate((src_left[keep_l], idx, src_right[keep_r]))
    return knots, sources


def envelope_1d(s, extrema=None, kind="upper", mirror=True):
    """Natural cubic spline envelope through the given extrema.

    Parameters
    ----------
    s : array-like of shape (n,)
    extrema : array-like of int, optional
        Knot positions. When omitted, the maxima (``kind="upper"``) or minima
        (``kind="lower"``) of ``s`` are used.
    kind : {"upper", "lower"}
    mirror : bool, default=True
        Reflect the two knots nearest each end across that end before fitting,
        which tames the spline's swing past the outermost extrema.

    Returns
    -------
    ndarray of shape (n,)
        Spline evaluated at every sample index.
    """
    if kind not in ("upper", "lower"):
        raise ValueError(f"kind must be 'upper' or 'lower', got {kind!r}")
    s = check_signal(s)
    if extrema is None:
        maxima, minima = find_extrema_1d(s)
        extrema = maxima if kind == "upper" else minima
    idx = np.unique(np.asarray(extrema, dtype=np.intp))
    if idx.shape[0] < 2:
        raise TooFewExtrema(f"need at least 2 knots for an envelope, got {idx.shape[0]}")
    n = s.shape[0]
    if idx[0] < 0 or idx[-1] >= n:
        raise IndexError("extrema indices fall outside the signal")

    if mirror:
        knots, sources = _mirror_knots(idx, n)
    else:
        knots, sources = idx, idx
    spline = CubicSpline(knots.astype(np.float64), s[sources], bc_type="natural")
    return spline(np.arange(n, dtype=np.float64))


def _has_enough_extrema(h):
    maxima, minima = find_extrema_1d(h)
    return maxima.shape[0] >= 2 and minima.shape[0] >= 2


def sift_1d(s, cfg=None, return_n_iter=False):
    """Extract one IMF candidate by repeated envelope-mean subtraction.

    Sifting stops when ``sum((h_prev - h)**2) / sum(h_prev**2)`` drops below
    ``cfg.sd_threshold``, after ``cfg.max_sift_iterations`` subtractions, or
    when the candidate runs out of extrema.

    Parameters
    ----------
    s : array-like of shape (n,)
    cfg : SiftConfig, optional
    return_n_iter : bool, default=False
        Also return the number of subtractions performed.

    Returns
    -------
    h : ndarray of shape (n,)
    n_iter : int
        Only when ``return_n_iter`` is True.
    """
    cfg = cfg or SiftConfig()
    h = check_signal(s).copy()
    maxima, minima = find_extrema_1d(h)
    if maxima.shape[0] < 2 or minima.shape[0] < 2:
        raise TooFewExtrema(
            f"sifting needs >= 2 maxima and >= 2 minima, got {maxima.shape[0]} and {minima.shape[0]}"
        )

    n_iter = 0
    while n_iter < cfg.max_sift_iterations:
        upper = envelope_1d(h, maxima, "upper")
        lower = envelope_1d(h, minima, "lower")
        h_prev = h
        h = h - 0.5 * (upper + lower)
        n_iter += 1

        denom = np.sum(h_prev * h_prev)
        sd = np.sum((h_prev - h) ** 2) / denom if denom > 0 else 0.0
        if sd < cfg.sd_threshold:
            break
        maxima, minima = find_extrema_1d(h)
        if maxima.shape[0] < 2 or minima.shape[0] < 2:
            break

    if return_n_iter:
        return h, n_iter
    return h


def decompose_1d(s, cfg=None):
    """Decompose a signal into IMFs and a residue.

    IMFs are extracted until the residue has fewer than two maxima or fewer
    than two minima, or ``cfg.max_imfs`` IMFs exist. The residue is built by
    subtraction so that ``sum(imfs) + residue`` reproduces the input up to
    rounding.

    Raises
    ------
    SignalTooShort
        If the signal has fewer than 4 samples.
    """
    cfg = cfg or SiftConfig()
    residue = check_signal(s, min_length=4).copy()
    imfs, iters = [], []
    hit_max = False
    while True:
        if cfg.max_imfs is not None and len(imfs) >= cfg.max_imfs:
            hit_max = _has_enough_extrema(residue)
            break
        if not _has_enough_extrema(residue):
            break
        imf, n_iter = sift_1d(residue, cfg, return_n_iter=True)
        imfs.append(imf)
        iters.append(n_iter)
        residue = residue - imf
    return Decomposition1D(imfs=imfs, residue=residue, sift_iterations=iters, hit_max_imfs=hit_max)


def zero_crossings(x):
    """Number of sign changes, ignoring exact zeros."""
    x = np.asarray(x, dtype=np.float64)
    signs = np.sign(x[x != 0])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


class EMD1D(TransformerMixin, BaseEstimator):
    """Scikit-learn style wrapper around :func:`decompose_1d`.

    ``transform`` maps a signal of length n to an array of shape
    ``(n_imfs + 1, n)`` whose last row is the residue; ``inverse_transform``
    sums the rows back together.

    Parameters
    ----------
    sd_threshold : float, default=0.2
    max_sift_iterations : int, default=50
    max_imfs : int or None, default=None

    Attributes
    ----------
    decomposition_ : Decomposition1D
        Decomposition of the signal passed to ``fit``.
    n_imfs_ : int
    """

    def __init__(self, sd_threshold=0.2, max_sift_iterations=50, max_imfs=None):
        self.sd_threshold = sd_threshold
        self.max_sift_iterations = max_sift_iterations
        self.max_imfs = max_imfs

    def _config(self):
        return SiftConfig(self.sd_threshold, self.max_sift_iterations, self.max_imfs)

    def fit(self, X, y=None):
        self.decomposition_ = decompose_1d(X, self._config())
        self.n_imfs_ = self.decomposition_.n_imfs
        return self

    def transform(self, X):
        check_is_fitted(self, "decomposition_")
        return decompose_1d(X, self._config()).components()

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).decomposition_.components()

    def inverse_transform(self, components):
        return np.asarray(components, dtype=np.float64).sum(axis=0)
