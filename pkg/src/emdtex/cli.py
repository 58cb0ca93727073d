"""Command-line entry point: ``emdtex <subcommand> ...``.

Exit codes: 0 success, 1 validation or invariant failure, 2 I/O or format
error.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as eio
from .bemd import BemdConfig, decompose_texture
from .exceptions import BundleError, EmdtexError, EmptySet, FormatError
from .losses import (
    LossWeights,
    age_code,
    age_loss,
    build_loss_report,
    cycle_loss,
    identity_loss,
    reconstruction_loss,
)
from .signal_emd import SiftConfig, decompose_1d
from .spectral import color_to_scalar, mean_spectrum, spectral_difference
from .texture_uv import extract_texture, from_symmetric_unit, fuse

CONFIG_ENV = "EMDTEX_CONFIG"

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


@dataclass
class CliConfig:
    """Defaults for every subcommand; overridden by a config file, then flags."""

    n_bimfs: int = 3
    window_rule: str = "min"
    smoothing: bool = True
    sd_threshold: float = 0.2
    max_sift_iterations: int = 50
    max_imfs: Optional[int] = None
    alpha: float = 1.0
    jobs: int = 1
    seed: int = 0
    # None uses every file in the directory
    sample_size: Optional[int] = None
    weights: LossWeights = field(default_factory=LossWeights)

    @classmethod
    def from_file(cls, path):
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config key(s) in {path}: {sorted(unknown)}")
        if "weights" in raw:
            raw["weights"] = LossWeights.from_dict(raw["weights"])
        return cls(**raw)

    def bemd(self):
        return BemdConfig(n_bimfs=self.n_bimfs, window_rule=self.window_rule, smoothing=self.smoothing)

    def sift(self):
        return SiftConfig(self.sd_threshold, self.max_sift_iterations, self.max_imfs)

    def validate(self):
        self.bemd()
        self.sift()
        if self.jobs < 1:
            raise ValueError(f"--jobs must be >= 1, got {self.jobs}")
        if not np.isfinite(self.alpha):
            raise ValueError("--alpha must be finite")
        if self.sample_size is not None and self.sample_size < 1:
            raise ValueError("--sample-size must be >= 1")
        return self


def _load_weights(path):
    try:
        return LossWeights.from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read weights file {path}: {exc}") from exc


def resolve_config(args):
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    cfg = CliConfig.from_file(path) if path else CliConfig()
    overrides = {}
    for name in ("n_bimfs", "window_rule", "sd_threshold", "max_sift_iterations", "max_imfs",
                 "alpha", "jobs", "seed", "sample_size"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "no_smoothing", False):
        overrides["smoothing"] = False
    if getattr(args, "weights", None):
        overrides["weights"] = _load_weights(args.weights)
    return replace(cfg, **overrides).validate()


def _read_image(path):
    """PNG file or planes bundle -> (image (H, W, C), source info, normalise?)."""
    path = Path(path)
    if path.is_dir():
        return eio.read_planes(path), {"format": "planes"}, False
    img, depth = eio.read_png(path)
    return img, {"format": "png", "bitdepth": depth}, True


def cmd_decompose(args, cfg):
    image, source, normalize = _read_image(args.input)
    bcfg = cfg.bemd()
    dec = decompose_texture(image, bcfg, jobs=cfg.jobs, normalize=normalize)
    meta, planes = eio.decomposition_bundle(dec, bcfg, source)
    eio.write_bundle(args.output, meta, planes)
    for name, ch in zip(meta["channels"], dec.channels):
        print(
            f"{name}: {ch.n_bimfs} BIMFs, window sizes {ch.meta.window_sizes}, "
            f"extrema counts {ch.meta.extrema_counts}"
        )
        if ch.n_bimfs == 0:
            print(f"warning: channel {name} has too few extrema; residue only", file=sys.stderr)
    return EXIT_OK


def fused_image(bundle, alpha):
    """Fused image in storage units, exactly as ``fuse`` computes it."""
    sigma, residue = eio.bundle_sigma_residue(bundle)
    out = fuse(sigma, residue, alpha)
    if bundle.meta.get("normalization") == "symmetric_unit":
        out = from_symmetric_unit(out)
    return out


def cmd_fuse(args, cfg):
    bundle = eio.read_bundle(args.bundle, kind="decomposition")
    out = fused_image(bundle, cfg.alpha)
    if args.float_out:
        meta, planes = eio.planes_bundle(out, bundle.meta["channels"], {"alpha": cfg.alpha})
        eio.write_bundle(args.output, meta, planes)
    else:
        depth = args.bitdepth or bundle.meta.get("source", {}).get("bitdepth", 8)
        eio.write_png(args.output, out, bitdepth=depth)
    return EXIT_OK


def _list_images(directory):
    directory = Path(directory)
    if not directory.is_dir():
        raise FormatError(f"{directory} is not a directory")
    return sorted(p for p in directory.iterdir() if p.suffix.lower() == ".png")


def load_luma(path):
    img = eio.read_png(path)[0]
    return img[..., 0] if img.shape[2] == 1 else color_to_scalar(img)


def _load_all_luma(paths, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(load_luma, paths))
    return [load_luma(p) for p in paths]


def sample_paths(paths, sample_size, seed):
    if sample_size is None or sample_size >= len(paths):
        return list(paths)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(paths), size=sample_size, replace=False))
    return [paths[i] for i in idx]


def cmd_spectral_diff(args, cfg):
    stats = []
    for d in (args.dir_a, args.dir_b):
        paths = sample_paths(_list_images(d), cfg.sample_size, cfg.seed)
        if not paths:
            raise EmptySet(f"no PNG images in {d}")
        stats.append(mean_spectrum(_load_all_luma(paths, cfg.jobs)))
    value = spectral_difference(stats[0], stats[1])
    print(repr(value))
    if args.heatmap:
        diff = np.fft.fftshift(np.abs(stats[0].magnitude - stats[1].magnitude))
        heat = np.log1p(diff)
        peak = heat.max()
        eio.write_png(args.heatmap, heat / peak if peak > 0 else heat)
    return EXIT_OK


def cmd_uv_extract(args, cfg):
    image, _, _ = _read_image(args.image)
    pmap = eio.read_position_map(args.position)
    tex = extract_texture(image, pmap)
    out = Path(args.output)
    if args.float_out:
        meta, planes = eio.planes_bundle(tex.grid)
        planes["mask.u8"] = tex.mask.astype(np.uint8)
        eio.write_bundle(out, meta, planes)
    else:
        eio.write_png(out, tex.grid)
        eio.write_png(out.with_name(out.stem + "_mask.png"), tex.mask.astype(np.float64))
    return EXIT_OK


def load_array(path):
    """Load a map or vector from .npy, .png, .json, .csv/.txt, or a bundle dir."""
    path = Path(path)
    if path.is_dir():
        meta = eio.read_bundle(path).meta
        if meta["kind"] == "position_map":
            return eio.read_position_map(path).grid
        return eio.read_planes(path)
    suffix = path.suffix.lower()
    try:
        if suffix == ".npy":
            return np.load(path, allow_pickle=False).astype(np.float64)
        if suffix == ".png":
            return eio.read_png(path)[0]
        if suffix == ".json":
            return np.asarray(json.loads(path.read_text()), dtype=np.float64)
        if suffix in (".csv", ".txt"):
            return np.loadtxt(path, delimiter="," if suffix == ".csv" else None, ndmin=1)
    except (OSError, ValueError) as exc:
        raise FormatError(f"cannot load {path}: {exc}") from exc
    raise FormatError(f"unsupported file type for {path}")


def _load_mask(section, base):
    if "mask" in section:
        mask = load_array(base / section["mask"])
        return mask[..., 0] > 0.5 if mask.ndim == 3 else mask > 0.5
    x = base / section["x"]
    if x.is_dir() and eio.read_bundle(x).meta["kind"] == "position_map":
        return eio.read_position_map(x).mask
    return None


def evaluate_manifest(manifest, base, cfg):
    """Compute a LossReport from a parsed loss-eval manifest."""
    weights = LossWeights.from_dict(manifest["weights"]) if "weights" in manifest else cfg.weights
    terms = {}

    def maps(section, prefix):
        mask = _load_mask(section, base)
        x = load_array(base / section["x"])
        if "y_src" in section:
            terms[f"rec_{prefix}"] = reconstruction_loss(load_array(base / section["y_src"]), x, mask)
        if "y_cyc" in section:
            terms[f"cyc_{prefix}"] = cycle_loss(load_array(base / section["y_cyc"]), x, mask)
        terms[f"adv_{prefix}"] = float(section.get("adv", 0.0))
        return x, mask

    if "shape" in manifest:
        maps(manifest["shape"], "s")
    if "texture" in manifest:
        tex = manifest["texture"]
        x_t, mask = maps(tex, "t")
        if "imf" in tex:
            imf = tex["imf"]
            if "x" in imf:
                sigma_x = load_array(base / imf["x"])
            else:
                sigma_x = decompose_texture(x_t, cfg.bemd(), jobs=cfg.jobs).sigma_c
            if "y_src" in imf:
                terms["rec_imf"] = reconstruction_loss(load_array(base / imf["y_src"]), sigma_x, mask)
            if "y_cyc" in imf:
                terms["cyc_imf"] = cycle_loss(load_array(base / imf["y_cyc"]), sigma_x, mask)
            terms["adv_imf"] = float(imf.get("adv", 0.0))
    if "identity" in manifest:
        ident = manifest["identity"]
        terms["id"] = identity_loss(load_array(base / ident["x"]), load_array(base / ident["y"]))
    if "age" in manifest:
        age = manifest["age"]
        n = int(age.get("n_groups", 6))
        terms["age"] = age_loss(
            load_array(base / age["e_gen"]),
            age_code(int(age["tgt_group"]), n),
            load_array(base / age["e_real"]),
            age_code(int(age["src_group"]), n),
        )
    return build_loss_report(weights=weights, **terms)


def cmd_loss_eval(args, cfg):
    path = Path(args.manifest)
    try:
        manifest = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read manifest {path}: {exc}") from exc
    report = evaluate_manifest(manifest, path.parent, cfg)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if args.output:
        eio.atomic_write_bytes(args.output, text.encode())
    else:
        sys.stdout.write(text)
    return EXIT_OK


def read_signal_csv(path, column=None):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path} is empty")
    header = None
    try:
        float(rows[0][0])
    except ValueError:
        header, rows = rows[0], rows[1:]
    if column is None:
        col = 0
    elif header is not None and column in header:
        col = header.index(column)
    else:
        try:
            col = int(column)
        except ValueError:
            raise FormatError(f"column {column!r} not found in {path}") from None
    try:
        return np.array([float(r[col]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise FormatError(f"bad numeric data in {path}: {exc}") from exc


def cmd_emd1d(args, cfg):
    signal = read_signal_csv(args.input, args.column)
    dec = decompose_1d(signal, cfg.sift())
    names = [f"imf_{k}" for k in range(1, dec.n_imfs + 1)] + ["residue"]
    comps = dec.components()
    lines = [",".join(names)]
    lines += [",".join(repr(float(v)) for v in comps[:, i]) for i in range(comps.shape[1])]
    text = "\n".join(lines) + "\n"
    if args.output:
        eio.atomic_write_bytes(args.output, text.encode())
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_info(args, cfg):
    bundle = eio.read_bundle(args.bundle)
    meta = bundle.meta
    h, w = bundle.shape
    print(f"kind: {meta['kind']}")
    print(f"dimensions: {h}x{w}")
    print(f"planes: {len(bundle.planes)} (digests verified)")
    if meta["kind"] == "decomposition":
        print(f"normalization: {meta.get('normalization')}")
        for name in meta["channels"]:
            ch = meta["per_channel"][name]
            print(f"{name}: {ch['n_bimfs']} BIMFs, window sizes {ch['window_sizes']}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="emdtex", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    def bemd_flags(p):
        p.add_argument("--n-bimfs", type=int)
        p.add_argument("--window-rule", choices=["min", "max"])
        p.add_argument("--no-smoothing", action="store_true")
        p.add_argument("--jobs", type=int)

    p = sub.add_parser("decompose", help="FABEMD of a PNG or planes bundle into a bundle directory")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    bemd_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("fuse", help="recombine a bundle as alpha * sum(BIMFs) + residue")
    p.add_argument("bundle")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--float-out", action="store_true", help="write a float32 planes bundle")
    p.add_argument("--bitdepth", type=int, choices=[8, 16])
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("spectral-diff", help="spectral difference between two PNG directories")
    p.add_argument("dir_a")
    p.add_argument("dir_b")
    p.add_argument("--sample-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--heatmap", help="write |magnitude difference| as a PNG")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_spectral_diff)

    p = sub.add_parser("uv-extract", help="sample a texture map through a position map")
    p.add_argument("image")
    p.add_argument("position", help="position-map bundle directory")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--float-out", action="store_true")
    p.set_defaults(func=cmd_uv_extract)

    p = sub.add_parser("loss-eval", help="evaluate losses from a JSON manifest")
    p.add_argument("manifest")
    p.add_argument("-o", "--output")
    p.add_argument("--weights", help="JSON file of lambda weights")
    bemd_flags(p)
    p.set_defaults(func=cmd_loss_eval)

    p = sub.add_parser("emd1d", help="1D EMD of a CSV column")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--column")
    p.add_argument("--sd-threshold", type=float)
    p.add_argument("--max-sift-iterations", type=int)
    p.add_argument("--max-imfs", type=int)
    p.set_defaults(func=cmd_emd1d)

    p = sub.add_parser("info", help="describe and verify a bundle")
    p.add_argument("bundle")
    p.set_defaults(func=cmd_info)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except (FormatError, BundleError, EmptySet, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (EmdtexError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
