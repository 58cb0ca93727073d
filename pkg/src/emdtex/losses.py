"""Loss terms for the shape and texture branches and their weighted totals.

Networks are out of scope, so every term is computed from arrays the caller
already has: generated and target maps, encoder outputs, and adversarial
scalars produced by whatever discriminator is in use.
"""

from dataclasses import asdict, dataclass, fields

import numpy as np

from ._validation import check_same_shape
from .exceptions import GroupOutOfRange

__all__ = [
    "AGE_BLOCK",
    "LossWeights",
    "AgeCode",
    "LossReport",
    "l1_mean",
    "reconstruction_loss",
    "cycle_loss",
    "identity_loss",
    "age_loss",
    "age_code",
    "refactor_with_imf",
    "shape_branch_loss",
    "texture_branch_loss",
    "total_loss",
    "build_loss_report",
]

AGE_BLOCK = 50


@dataclass(frozen=True)
class LossWeights:
    """Loss weights; defaults are the reference training values."""

    lambda_rec: float = 10.0
    lambda_cyc: float = 10.0
    lambda_id: float = 1.0
    lambda_age: float = 1.0
    lambda_emd: float = 0.3
    lambda_s: float = 0.3

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{f.name} must be a finite value >= 0, got {v}")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown loss weight(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class AgeCode:
    vector: np.ndarray
    group: int
    n_groups: int


def age_code(group, n_groups=6):
    """Block one-hot age code of length ``50 * n_groups``.

    Group ``g`` (1-based) owns entries ``50*(g-1)`` to ``50*g - 1``, which are
    set to 1; every other entry is 0.
    """
    if n_groups < 1:
        raise ValueError(f"n_groups must be >= 1, got {n_groups}")
    if not 1 <= group <= n_groups:
        raise GroupOutOfRange(f"group must be in 1..{n_groups}, got {group}")
    vec = np.zeros(AGE_BLOCK * n_groups)
    vec[AGE_BLOCK * (group - 1) : AGE_BLOCK * group] = 1.0
    return AgeCode(vector=vec, group=int(group), n_groups=int(n_groups))


def l1_mean(a, b, mask=None):
    """Mean absolute difference.

    Parameters
    ----------
    a, b : array-like of equal shape
    mask : array-like of bool, optional
        Validity mask over the leading axes of ``a`` (e.g. (H, W) for an
        (H, W, 3) texture). Only valid entries are averaged.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_shape(a, b)
    diff = np.abs(a - b)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != a.shape[: mask.ndim]:
            raise ValueError(f"mask shape {mask.shape} does not lead array shape {a.shape}")
        diff = diff[mask]
    if diff.size == 0:
        return 0.0
    return float(diff.mean())


def reconstruction_loss(y_src, x, mask=None):
    """Output conditioned on the source group against the input."""
    return l1_mean(y_src, x, mask)


def cycle_loss(y_cyc, x, mask=None):
    """Output translated to the target group and back, against the input."""
    return l1_mean(y_cyc, x, mask)


def identity_loss(f_x, f_y):
    """Identity-encoder features of input and translated output."""
    return l1_mean(f_x, f_y)


def _code_vector(z):
    return z.vector if isinstance(z, AgeCode) else np.asarray(z, dtype=np.float64)


def age_loss(e_gen, z_tgt, e_real, z_src):
    """Age-encoder output against the age code, for generated and real images."""
    return l1_mean(e_gen, _code_vector(z_tgt)) + l1_mean(e_real, _code_vector(z_src))


def refactor_with_imf(base, imf_term, w=None):
    """Add the IMF counterpart of a texture loss: ``base + lambda_emd * imf_term``."""
    w = w or LossWeights()
    return base + w.lambda_emd * imf_term


def shape_branch_loss(rec, cyc, adv, w=None):
    w = w or LossWeights()
    return w.lambda_rec * rec + w.lambda_cyc * cyc + adv


def texture_branch_loss(rec, cyc, adv, age, id_, w=None):
    """Texture-branch loss; ``rec``, ``cyc``, ``adv`` should already carry
    their IMF terms via :func:`refactor_with_imf`."""
    w = w or LossWeights()
    return w.lambda_rec * rec + w.lambda_cyc * cyc + adv + w.lambda_age * age + w.lambda_id * id_


def total_loss(l_s, l_t, w=None):
    w = w or LossWeights()
    return w.lambda_s * l_s + l_t


@dataclass(frozen=True)
class LossReport:
    """Itemised loss terms, branch subtotals and the weighted total."""

    rec_s: float
    cyc_s: float
    adv_s: float
    rec_t: float
    cyc_t: float
    adv_t: float
    rec_imf: float
    cyc_imf: float
    adv_imf: float
    age: float
    id: float
    rec_t_refactored: float
    cyc_t_refactored: float
    adv_t_refactored: float
    shape_total: float
    texture_total: float
    total: float
    weights: LossWeights

    def check(self):
        """Re-derive subtotals and total from the items; raise if they disagree."""
        w = self.weights
        expected = {
            "rec_t_refactored": refactor_with_imf(self.rec_t, self.rec_imf, w),
            "cyc_t_refactored": refactor_with_imf(self.cyc_t, self.cyc_imf, w),
            "adv_t_refactored": refactor_with_imf(self.adv_t, self.adv_imf, w),
            "shape_total": shape_branch_loss(self.rec_s, self.cyc_s, self.adv_s, w),
        }
        expected["texture_total"] = texture_branch_loss(
            expected["rec_t_refactored"],
            expected["cyc_t_refactored"],
            expected["adv_t_refactored"],
            self.age,
            self.id,
            w,
        )
        expected["total"] = total_loss(expected["shape_total"], expected["texture_total"], w)
        for name, value in expected.items():
            if getattr(self, name) != value:
                raise AssertionError(f"{name}={getattr(self, name)!r} but items give {value!r}")
        return self

    def to_dict(self):
        d = asdict(self)
        d["weights"] = self.weights.to_dict()
        return d


def build_loss_report(
    *,
    rec_s=0.0,
    cyc_s=0.0,
    adv_s=0.0,
    rec_t=0.0,
    cyc_t=0.0,
    adv_t=0.0,
    rec_imf=0.0,
    cyc_imf=0.0,
    adv_imf=0.0,
    age=0.0,
    id=0.0,
    weights=None,
):
    """Compose every term into a :class:`LossReport`.

    All arguments are already-reduced scalar terms (see :func:`l1_mean` and
    friends); adversarial scalars enter with unit weight.
    """
    w = weights or LossWeights()
    items = dict(
        rec_s=rec_s, cyc_s=cyc_s, adv_s=adv_s,
        rec_t=rec_t, cyc_t=cyc_t, adv_t=adv_t,
        rec_imf=rec_imf, cyc_imf=cyc_imf, adv_imf=adv_imf,
        age=age, id=id,
    )
    items = {k: float(v) for k, v in items.items()}
    rec_r = refactor_with_imf(items["rec_t"], items["rec_imf"], w)
    cyc_r = refactor_with_imf(items["cyc_t"], items["cyc_imf"], w)
    adv_r = refactor_with_imf(items["adv_t"], items["adv_imf"], w)
    l_s = shape_branch_loss(items["rec_s"], items["cyc_s"], items["adv_s"], w)
    l_t = texture_branch_loss(rec_r, cyc_r, adv_r, items["age"], items["id"], w)
    return LossReport(
        **items,
        rec_t_refactored=rec_r,
        cyc_t_refactored=cyc_r,
        adv_t_refactored=adv_r,
        shape_total=l_s,
        texture_total=l_t,
        total=total_loss(l_s, l_t, w),
        weights=w,
    ).check()
