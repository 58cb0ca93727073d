"""UV-space position and texture maps, texture sampling, and IMF/residue fusion."""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ._validation import check_multichannel, check_same_shape
from .exceptions import OutOfBounds

__all__ = [
    "UVPositionMap",
    "TextureMap",
    "FusionInput",
    "Violation",
    "to_symmetric_unit",
    "from_symmetric_unit",
    "identity_position_map",
    "validate_position_map",
    "extract_texture",
    "fuse",
]


def to_symmetric_unit(t):
    """Map storage range [0, 1] affinely onto [-1, 1]."""
    return 2.0 * np.asarray(t, dtype=np.float64) - 1.0


def from_symmetric_unit(x):
    """Inverse of :func:`to_symmetric_unit`."""
    return (np.asarray(x, dtype=np.float64) + 1.0) / 2.0


@dataclass
class UVPositionMap:
    """Per-texel image-space coordinates.

    ``grid[..., 0]`` and ``grid[..., 1]`` hold x (column) and y (row) in source
    image pixels, ``grid[..., 2]`` relative depth. Texels outside the face
    model have ``mask == False`` and are ignored everywhere.
    """

    grid: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.grid.ndim != 3 or self.grid.shape[2] != 3:
            raise ValueError(f"position grid must be (H, W, 3), got {self.grid.shape}")
        if self.mask.shape != self.grid.shape[:2]:
            raise ValueError(f"mask shape {self.mask.shape} does not match grid {self.grid.shape[:2]}")

    @property
    def shape(self):
        return self.grid.shape[:2]


@dataclass
class TextureMap:
    """RGB texels in storage range [0, 1]; masked-out texels hold 0."""

    grid: np.ndarray
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        self.grid = check_multichannel(self.grid, name="texture grid")
        if self.mask is None:
            self.mask = np.ones(self.grid.shape[:2], dtype=bool)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.grid.shape[:2]:
            raise ValueError(f"mask shape {self.mask.shape} does not match grid {self.grid.shape[:2]}")


@dataclass(frozen=True)
class Violation:
    texel: Optional[Tuple[int, int]]
    reason: str


def identity_position_map(uv_shape, image_shape, depth=0.0):
    """Position map sending the UV grid linearly onto the whole image.

    Texel (v, u) maps to ``x = u * (W - 1) / (W_uv - 1)`` and likewise for y,
    so with equal shapes every texel lands exactly on a pixel centre.
    """
    h_uv, w_uv = uv_shape
    h, w = image_shape[:2]
    xs = np.arange(w_uv) * ((w - 1) / max(w_uv - 1, 1))
    ys = np.arange(h_uv) * ((h - 1) / max(h_uv - 1, 1))
    xx, yy = np.meshgrid(xs, ys)
    grid = np.stack([xx, yy, np.full_like(xx, depth)], axis=-1)
    return UVPositionMap(grid=grid, mask=np.ones((h_uv, w_uv), dtype=bool))


def validate_position_map(p, image_dims) -> List[Violation]:
    """List every bound or finiteness violation among valid texels.

    Parameters
    ----------
    p : UVPositionMap
    image_dims : (height, width)
        Size of the image the map points into.

    Returns
    -------
    list of Violation
        Empty iff the map is usable for :func:`extract_texture`.
    """
    height, width = image_dims[:2]
    out = []
    grid, mask = p.grid, p.mask
    finite = np.all(np.isfinite(grid), axis=-1)
    for r, c in zip(*np.nonzero(mask & ~finite)):
        out.append(Violation((int(r), int(c)), "non-finite coordinate"))

    x = np.where(finite, grid[..., 0], 0.0)
    y = np.where(finite, grid[..., 1], 0.0)
    bad_x = mask & finite & ((x < 0) | (x >= width))
    bad_y = mask & finite & ((y < 0) | (y >= height))
    for r, c in zip(*np.nonzero(bad_x | bad_y)):
        xv, yv = grid[r, c, 0], grid[r, c, 1]
        out.append(
            Violation((int(r), int(c)), f"(x={xv:g}, y={yv:g}) outside image {width}x{height}")
        )
    out.sort(key=lambda v: v.texel)
    return out


def _bilinear(image, x, y):
    h, w = image.shape[:2]
    x0 = np.clip(np.floor(x), 0, w - 1).astype(np.intp)
    y0 = np.clip(np.floor(y), 0, h - 1).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = np.clip(x - x0, 0.0, 1.0)[:, None]
    fy = np.clip(y - y0, 0.0, 1.0)[:, None]
    top = image[y0, x0] * (1 - fx) + image[y0, x1] * fx
    bottom = image[y1, x0] * (1 - fx) + image[y1, x1] * fx
    return top * (1 - fy) + bottom * fy


def extract_texture(image, p):
    """Sample ``image`` at every valid texel of ``p``.

    Parameters
    ----------
    image : array-like of shape (H, W, C) or (H, W)
    p : UVPositionMap

    Returns
    -------
    TextureMap
        Same channel count as ``image``; masked-out texels are 0.

    Raises
    ------
    OutOfBounds
        If any valid texel points outside the image or is non-finite.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        img = img[..., None]
    img = check_multichannel(img)
    violations = validate_position_map(p, img.shape[:2])
    if violations:
        raise OutOfBounds(f"{len(violations)} invalid texel(s), first: {violations[0]}")

    out = np.zeros(p.shape + (img.shape[2],), dtype=np.float64)
    rows, cols = np.nonzero(p.mask)
    xs = p.grid[rows, cols, 0]
    ys = p.grid[rows, cols, 1]
    out[rows, cols] = _bilinear(img, xs, ys)
    return TextureMap(grid=out, mask=p.mask.copy())


def fuse(sigma_c, residue, alpha=1.0):
    """Recombine high-frequency content and trend: ``alpha * sigma_c + residue``."""
    sigma_c = np.asarray(sigma_c, dtype=np.float64)
    residue = np.asarray(residue, dtype=np.float64)
    check_same_shape(sigma_c, residue, ("sigma_c", "residue"))
    if not np.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha}")
    return alpha * sigma_c + residue


@dataclass
class FusionInput:
    sigma_c: np.ndarray
    residue: np.ndarray
    alpha: float = 1.0

    def __post_init__(self):
        check_same_shape(self.sigma_c, self.residue, ("sigma_c", "residue"))

    def fuse(self):
        return fuse(self.sigma_c, self.residue, self.alpha)
