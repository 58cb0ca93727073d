"""Input validation helpers used by the public functions and estimators."""

import numpy as np

from .exceptions import FieldTooSmall, ShapeMismatch, SignalTooShort


def check_signal(s, min_length=0):
    """Return ``s`` as a finite 1D float64 array."""
    arr = np.asarray(s, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1D signal, got shape {arr.shape}")
    if arr.shape[0] < min_length:
        raise SignalTooShort(f"signal has {arr.shape[0]} samples, need at least {min_length}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal contains NaN or Inf")
    return arr


def check_field(f, min_size=1, name="field"):
    """Return ``f`` as a finite 2D float64 array of at least ``min_size`` per side."""
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2D (H, W), got shape {arr.shape}")
    if min(arr.shape) < min_size:
        raise FieldTooSmall(f"{name} is {arr.shape[0]}x{arr.shape[1]}, need at least {min_size}x{min_size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_multichannel(f, channels=None, name="image"):
    """Return ``f`` as a finite (H, W, C) float64 array."""
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"{name} must be 3D (H, W, C), got shape {arr.shape}")
    if channels is not None and arr.shape[2] != channels:
        raise ValueError(f"{name} must have {channels} channels, got {arr.shape[2]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_same_shape(a, b, names=("a", "b")):
    if np.shape(a) != np.shape(b):
        raise ShapeMismatch(f"{names[0]} has shape {np.shape(a)} but {names[1]} has shape {np.shape(b)}")
