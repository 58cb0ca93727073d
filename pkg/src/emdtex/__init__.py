"""Empirical mode decomposition of images and UV texture maps.

Includes 1D EMD, fast adaptive bidimensional EMD (FABEMD), IMF/residue
fusion, UV texture sampling, a spectral-gap metric between image sets, and
the weighted loss terms used to train EMD-aware texture generators.
"""

from .bemd import (
    FABEMD,
    BemdConfig,
    Decomposition2D,
    TextureDecomposition,
    decompose_2d,
    decompose_texture,
    extract_bimf,
    local_extrema_2d,
    os_filter_envelopes,
    window_size,
)
from .exceptions import (
    BadWindow,
    BundleError,
    EmdtexError,
    EmptySet,
    FieldTooSmall,
    FormatError,
    GroupOutOfRange,
    OutOfBounds,
    ShapeMismatch,
    SignalTooShort,
    TooFewExtrema,
)
from .losses import LossReport, LossWeights, age_code, build_loss_report, l1_mean
from .signal_emd import EMD1D, Decomposition1D, SiftConfig, decompose_1d, find_extrema_1d, sift_1d
from .spectral import SpectrumStats, color_to_scalar, mean_spectrum, spectral_difference
from .texture_uv import TextureMap, UVPositionMap, extract_texture, fuse, validate_position_map

__all__ = [
    "BadWindow",
    "BemdConfig",
    "BundleError",
    "Decomposition1D",
    "Decomposition2D",
    "EMD1D",
    "EmdtexError",
    "EmptySet",
    "FABEMD",
    "FieldTooSmall",
    "FormatError",
    "GroupOutOfRange",
    "LossReport",
    "LossWeights",
    "OutOfBounds",
    "ShapeMismatch",
    "SiftConfig",
    "SignalTooShort",
    "SpectrumStats",
    "TextureDecomposition",
    "TextureMap",
    "TooFewExtrema",
    "UVPositionMap",
    "age_code",
    "build_loss_report",
    "color_to_scalar",
    "decompose_1d",
    "decompose_2d",
    "decompose_texture",
    "extract_bimf",
    "extract_texture",
    "find_extrema_1d",
    "fuse",
    "l1_mean",
    "local_extrema_2d",
    "mean_spectrum",
    "os_filter_envelopes",
    "sift_1d",
    "spectral_difference",
    "validate_position_map",
    "window_size",
]

__version__ = "0.1.0"
