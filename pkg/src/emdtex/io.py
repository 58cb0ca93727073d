"""PNG images, planar float32 files and self-describing bundle directories.

A bundle is a directory holding ``meta.json`` plus raw planes: ``.f32`` files
are row-major little-endian float32, ``.u8`` files one byte per texel. The
manifest lists every plane with its SHA-256 and byte length, and bundles are
written to a temporary sibling directory that is renamed into place only once
complete.
"""

import contextlib
import hashlib
import json
import os
import shutil
import tempfile
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import png

from .exceptions import BundleError, FormatError

__all__ = [
    "SCHEMA_VERSION",
    "channel_names",
    "read_png",
    "write_png",
    "atomic_write_bytes",
    "atomic_directory",
    "Bundle",
    "write_bundle",
    "read_bundle",
    "decomposition_bundle",
    "bundle_sigma_residue",
    "write_position_map",
    "read_position_map",
    "planes_bundle",
    "read_planes",
    "spectrum_bundle",
]

SCHEMA_VERSION = 1
_F32 = np.dtype("<f4")


def channel_names(n):
    if n == 1:
        return ["gray"]
    if n == 3:
        return ["r", "g", "b"]
    return [f"c{i}" for i in range(n)]


def read_png(path):
    """Read a PNG as floats in [0, 1].

    Alpha is dropped and palettes are expanded.

    Returns
    -------
    image : ndarray of shape (H, W, C)
        C is 1 for greyscale and 3 for colour.
    bitdepth : int
    """
    try:
        width, height, rows, info = png.Reader(filename=str(path)).asDirect()
        arr = np.vstack([np.asarray(r, dtype=np.float64) for r in rows])
    except (png.Error, OSError, EOFError, zlib.error, ValueError) as exc:
        raise FormatError(f"cannot read PNG {path}: {exc}") from exc
    planes = info["planes"]
    if arr.shape != (height, width * planes):
        raise FormatError(f"PNG {path} decoded to unexpected shape {arr.shape}")
    arr = arr.reshape(height, width, planes)
    if info.get("alpha"):
        arr = arr[..., :-1]
    return arr / float(2 ** info["bitdepth"] - 1), int(info["bitdepth"])


def atomic_write_bytes(path, data):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_png(path, image, bitdepth=8):
    """Write an image with values in [0, 1] (clamped) as an 8- or 16-bit PNG."""
    if bitdepth not in (8, 16):
        raise ValueError(f"bitdepth must be 8 or 16, got {bitdepth}")
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        img = img[..., None]
    if img.shape[2] not in (1, 3):
        raise ValueError(f"PNG output needs 1 or 3 channels, got {img.shape[2]}")
    maxv = 2**bitdepth - 1
    q = np.rint(np.clip(img, 0.0, 1.0) * maxv).astype(np.uint16 if bitdepth == 16 else np.uint8)
    h, w, c = q.shape
    writer = png.Writer(width=w, height=h, greyscale=(c == 1), bitdepth=bitdepth)
    buf = _BytesSink()
    writer.write(buf, q.reshape(h, w * c))
    atomic_write_bytes(path, buf.getvalue())


class _BytesSink:
    def __init__(self):
        self._parts = []

    def write(self, b):
        self._parts.append(bytes(b))

    def getvalue(self):
        return b"".join(self._parts)


@contextlib.contextmanager
def atomic_directory(target):
    """Yield a scratch directory that replaces ``target`` on clean exit.

    An existing ``target`` is only replaced if it is empty or is itself a
    bundle (contains ``meta.json``).
    """
    target = Path(target)
    if target.exists():
        if not target.is_dir():
            raise BundleError(f"{target} exists and is not a directory")
        if any(target.iterdir()) and not (target / "meta.json").exists():
            raise BundleError(f"refusing to overwrite non-bundle directory {target}")
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp"))
    try:
        yield tmp
        if target.exists():
            shutil.rmtree(target)
        os.rename(tmp, target)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def _plane_bytes(name, arr):
    if name.endswith(".f32"):
        return np.ascontiguousarray(arr, dtype=_F32).tobytes()
    if name.endswith(".u8"):
        return np.ascontiguousarray(arr, dtype=np.uint8).tobytes()
    raise ValueError(f"unsupported plane extension: {name}")


@dataclass
class Bundle:
    meta: dict
    planes: dict

    @property
    def shape(self):
        return int(self.meta["height"]), int(self.meta["width"])


def _dump_json(obj):
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


def write_bundle(directory, meta, planes):
    """Write ``planes`` (name -> (H, W) array) and a manifest atomically.

    ``meta`` must carry ``kind``, ``height`` and ``width``; ``files`` and
    ``schema_version`` are filled in here.
    """
    h, w = int(meta["height"]), int(meta["width"])
    blobs = {}
    for name in sorted(planes):
        arr = np.asarray(planes[name])
        if arr.shape != (h, w):
            raise BundleError(f"plane {name} has shape {arr.shape}, bundle is {h}x{w}")
        blobs[name] = _plane_bytes(name, arr)
    manifest = dict(meta)
    manifest["schema_version"] = SCHEMA_VERSION
    manifest["files"] = {
        name: {"sha256": hashlib.sha256(b).hexdigest(), "bytes": len(b)} for name, b in blobs.items()
    }
    with atomic_directory(directory) as tmp:
        for name, b in blobs.items():
            (tmp / name).write_bytes(b)
        (tmp / "meta.json").write_bytes(_dump_json(manifest))
    return Path(directory)


def read_bundle(directory, kind=None):
    """Load and verify a bundle.

    Raises
    ------
    BundleError
        Missing manifest or plane, wrong kind, wrong size, or digest mismatch.
    """
    directory = Path(directory)
    meta_path = directory / "meta.json"
    try:
        meta = json.loads(meta_path.read_text())
    except FileNotFoundError as exc:
        raise BundleError(f"{directory} has no meta.json") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleError(f"cannot parse {meta_path}: {exc}") from exc
    for key in ("kind", "height", "width", "files"):
        if key not in meta:
            raise BundleError(f"{meta_path} lacks '{key}'")
    if kind is not None and meta["kind"] != kind:
        raise BundleError(f"{directory} is a {meta['kind']!r} bundle, expected {kind!r}")
    h, w = int(meta["height"]), int(meta["width"])
    planes = {}
    for name, entry in sorted(meta["files"].items()):
        path = directory / name
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise BundleError(f"cannot read {path}: {exc}") from exc
        itemsize = 4 if name.endswith(".f32") else 1
        if len(data) != h * w * itemsize or len(data) != entry.get("bytes"):
            raise BundleError(f"{path} has {len(data)} bytes, expected {h * w * itemsize}")
        if hashlib.sha256(data).hexdigest() != entry.get("sha256"):
            raise BundleError(f"{path} fails its SHA-256 check")
        dtype = _F32 if itemsize == 4 else np.uint8
        planes[name] = np.frombuffer(data, dtype=dtype).reshape(h, w)
    return Bundle(meta=meta, planes=planes)


def decomposition_bundle(dec, cfg, source=None):
    """Manifest and planes for a :class:`~emdtex.bemd.TextureDecomposition`."""
    h, w, c = dec.residue.shape
    names = channel_names(c)
    planes, per_channel = {}, {}
    for name, ch in zip(names, dec.channels):
        for k, bimf in enumerate(ch.bimfs, start=1):
            planes[f"bimf_{k}_{name}.f32"] = bimf
        planes[f"residue_{name}.f32"] = ch.residue
        per_channel[name] = {
            "n_bimfs": ch.n_bimfs,
            "window_sizes": list(ch.meta.window_sizes),
            "extrema_counts": list(ch.meta.extrema_counts),
        }
    meta = {
        "kind": "decomposition",
        "height": h,
        "width": w,
        "channels": names,
        "n_bimfs_requested": int(cfg.n_bimfs),
        "per_channel": per_channel,
        "normalization": dec.normalization,
        "source_hash": dec.source_hash,
        "config": cfg.to_dict(),
        "source": dict(source or {}),
    }
    return meta, planes


def bundle_sigma_residue(bundle):
    """(H, W, C) sum of BIMFs and residue from a decomposition bundle."""
    meta = bundle.meta
    if meta["kind"] != "decomposition":
        raise BundleError(f"expected a decomposition bundle, got {meta['kind']!r}")
    h, w = bundle.shape
    names = meta["channels"]
    sigma = np.zeros((h, w, len(names)))
    residue = np.zeros((h, w, len(names)))
    for i, name in enumerate(names):
        n = int(meta["per_channel"][name]["n_bimfs"])
        for k in range(1, n + 1):
            sigma[..., i] += bundle.planes[f"bimf_{k}_{name}.f32"]
        residue[..., i] = bundle.planes[f"residue_{name}.f32"]
    return sigma, residue


def write_position_map(directory, p, image_size=None):
    """Store a :class:`~emdtex.texture_uv.UVPositionMap` as a bundle."""
    h, w = p.shape
    meta = {"kind": "position_map", "height": h, "width": w}
    if image_size is not None:
        meta["image_height"], meta["image_width"] = int(image_size[0]), int(image_size[1])
    grid = np.where(p.mask[..., None], p.grid, 0.0)
    planes = {
        "position_x.f32": grid[..., 0],
        "position_y.f32": grid[..., 1],
        "position_z.f32": grid[..., 2],
        "mask.u8": p.mask.astype(np.uint8),
    }
    return write_bundle(directory, meta, planes)


def read_position_map(directory):
    from .texture_uv import UVPositionMap

    b = read_bundle(directory, kind="position_map")
    try:
        grid = np.stack([b.planes[f"position_{a}.f32"] for a in "xyz"], axis=-1).astype(np.float64)
        mask = b.planes["mask.u8"] != 0
    except KeyError as exc:
        raise BundleError(f"position map bundle {directory} lacks {exc}") from exc
    return UVPositionMap(grid=grid, mask=mask)


def planes_bundle(image, names=None, extra=None):
    """Manifest and planes for a plain (H, W, C) float image."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        img = img[..., None]
    names = names or channel_names(img.shape[2])
    meta = {"kind": "planes", "height": img.shape[0], "width": img.shape[1], "channels": list(names)}
    meta.update(extra or {})
    return meta, {f"{n}.f32": img[..., i] for i, n in enumerate(names)}


def read_planes(directory):
    b = read_bundle(directory, kind="planes")
    try:
        return np.stack([b.planes[f"{n}.f32"] for n in b.meta["channels"]], axis=-1).astype(np.float64)
    except KeyError as exc:
        raise BundleError(f"planes bundle {directory} lacks {exc}") from exc


def spectrum_bundle(stats):
    h, w = stats.shape
    meta = {"kind": "spectrum", "height": h, "width": w, "n_images": int(stats.n_images)}
    planes = {
        "mean_spectrum_real.f32": stats.mean_spectrum.real,
        "mean_spectrum_imag.f32": stats.mean_spectrum.imag,
        "magnitude.f32": stats.magnitude,
    }
    return meta, planes
