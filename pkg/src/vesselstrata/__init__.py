"""Thickness stratification of binary vessel masks, separable binary
morphology, a diameter oracle, loss evaluators, and segmentation metrics."""

from .geometry import (
    ErasureReport,
    TubeSpec,
    chebyshev,
    discrete_frechet,
    make_tube,
    verify_erasure,
)
from .losses import (
    LossWeights,
    cgan_loss,
    composite_objective,
    grad_loss_gen,
    l1_residual,
    loss_gen,
    loss_thin,
)
from .metrics import (
    ConfusionCounts,
    EvalReport,
    MetricSummary,
    RocCurve,
    aggregate,
    confusion,
    evaluate_image,
    roc_auc,
    summary,
    write_csv,
)
from .morphology import (
    KernelSpec,
    dilate,
    erode,
    max_filter_1d,
    min_filter_1d,
    opening,
)
from .raster import (
    PixelCoord,
    as_gray,
    as_mask,
    connected_components,
    load_image,
    mask_combine,
    save_gray,
    save_mask,
)
from .stratification import (
    StrataStack,
    ThresholdLadder,
    fuse,
    fuse_soft,
    semi_limited_mask,
    stack3,
    stratify,
)

__version__ = "0.1.0"

__all__ = [
    "ConfusionCounts",
    "ErasureReport",
    "EvalReport",
    "KernelSpec",
    "LossWeights",
    "MetricSummary",
    "PixelCoord",
    "RocCurve",
    "StrataStack",
    "ThresholdLadder",
    "TubeSpec",
    "aggregate",
    "as_gray",
    "as_mask",
    "cgan_loss",
    "chebyshev",
    "composite_objective",
    "confusion",
    "connected_components",
    "dilate",
    "discrete_frechet",
    "erode",
    "evaluate_image",
    "fuse",
    "fuse_soft",
    "grad_loss_gen",
    "l1_residual",
    "load_image",
    "loss_gen",
    "loss_thin",
    "make_tube",
    "mask_combine",
    "max_filter_1d",
    "min_filter_1d",
    "opening",
    "roc_auc",
    "save_gray",
    "save_mask",
    "semi_limited_mask",
    "stack3",
    "stratify",
    "summary",
    "verify_erasure",
    "write_csv",
]
