"""Segmentation evaluation: confusion counts, Acc/Sens/Spec, ROC and AUC.

The positive class is "vessel" (mask value 1). Reports can optionally be
restricted to a field-of-view mask. Across a dataset the ratio metrics pool
pixel counts, while AUC aggregates as the unweighted mean of per-image AUCs
(scores from different images are not assumed to share a calibration).

The ROC sweep walks all 257 integer thresholds from 255 down to -1 with
"predicted vessel" meaning value > threshold. The trapezoidal area is
accumulated over integer counts and divided once at the end, so it equals
the Mann-Whitney pair statistic (ties counted half) exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .raster import as_gray, as_mask


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel counts of one binary comparison; total = evaluated pixels."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            v = getattr(self, name)
            if int(v) != v or int(v) < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp,
            self.tn + other.tn,
            self.fp + other.fp,
            self.fn + other.fn,
        )


@dataclass(frozen=True)
class MetricSummary:
    """Accuracy, sensitivity, specificity; None marks an undefined ratio."""

    acc: float
    sens: float | None
    spec: float | None


@dataclass(frozen=True)
class RocCurve:
    """ROC points (fpr, tpr) from threshold 255 down to -1, plus the AUC."""

    points: np.ndarray
    auc: float


@dataclass(frozen=True)
class EvalReport:
    """Metrics for one image, or for a dataset aggregate.

    ``roc`` holds the per-image curve; an aggregate has none (its AUC is the
    mean of the per-image AUCs, which no single curve represents).
    """

    image: str
    counts: ConfusionCounts
    acc: float
    sens: float | None
    spec: float | None
    auc: float | None
    fov_mode: bool
    roc: RocCurve | None = None


def confusion(pred, truth, fov=None) -> ConfusionCounts:
    """Count tp/tn/fp/fn between two masks, optionally inside a FOV mask."""
    p = as_mask(pred)
    t = as_mask(truth)
    if p.shape != t.shape:
        raise ValueError(f"dimension mismatch: prediction {p.shape} vs truth {t.shape}")
    if fov is not None:
        f = as_mask(fov)
        if f.shape != t.shape:
            raise ValueError(f"dimension mismatch: fov {f.shape} vs truth {t.shape}")
        sel = f.astype(bool)
        p = p[sel]
        t = t[sel]
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & (t ^ 1)))
    fn = int(np.count_nonzero((p ^ 1) & t))
    tn = int(p.size - tp - fp - fn)
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def summary(counts: ConfusionCounts) -> MetricSummary:
    """Acc/Sens/Spec ratios; a zero-denominator ratio is None, not 0."""
    if counts.total == 0:
        raise ValueError("cannot summarize all-zero counts")
    acc = (counts.tp + counts.tn) / counts.total
    pos = counts.tp + counts.fn
    neg = counts.tn + counts.fp
    sens = counts.tp / pos if pos > 0 else None
    spec = counts.tn / neg if neg > 0 else None
    return MetricSummary(acc=acc, sens=sens, spec=spec)


def roc_auc(pred, truth, fov=None) -> RocCurve:
    """ROC curve and AUC of an 8-bit score map against a truth mask.

    Thresholds sweep 255 down to -1, each classifying value > t as vessel,
    so the curve starts at (0, 0) and ends at (1, 1) with both coordinates
    non-decreasing. Requires both classes present (inside the FOV).
    """
    scores = as_gray(pred)
    t = as_mask(truth)
    if scores.shape != t.shape:
        raise ValueError(f"dimension mismatch: prediction {scores.shape} vs truth {t.shape}")
    if fov is not None:
        f = as_mask(fov)
        if f.shape != t.shape:
            raise ValueError(f"dimension mismatch: fov {f.shape} vs truth {t.shape}")
        sel = f.astype(bool)
        scores = scores[sel]
        t = t[sel]
    positive = t.astype(bool)
    pos_hist = np.bincount(scores[positive].ravel(), minlength=256).astype(np.int64)
    neg_hist = np.bincount(scores[~positive].ravel(), minlength=256).astype(np.int64)
    n_pos = int(pos_hist.sum())
    n_neg = int(neg_hist.sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("truth must contain both classes to compute a ROC curve")
    # tp[i] / fp[i] = pixels classified positive at threshold t = 255 - i;
    # the final entry (t = -1) classifies everything positive.
    tp = np.concatenate([n_pos - np.cumsum(pos_hist)[::-1], [n_pos]])
    fp = np.concatenate([n_neg - np.cumsum(neg_hist)[::-1], [n_neg]])
    # Trapezoid over integer counts; one division keeps it exactly equal to
    # the tie-corrected pair-counting statistic.
    area2 = int(np.sum((fp[1:] - fp[:-1]) * (tp[1:] + tp[:-1])))
    auc = area2 / (2.0 * n_pos * n_neg)
    points = np.stack([fp / n_neg, tp / n_pos], axis=1)
    return RocCurve(points=points, auc=float(auc))


def evaluate_image(image_id: str, pred, truth, soft=None, fov=None,
                   fov_mode: bool | None = None) -> EvalReport:
    """Build a per-image report from a binary prediction and optional soft map."""
    counts = confusion(pred, truth, fov=fov)
    s = summary(counts)
    curve = roc_auc(soft, truth, fov=fov) if soft is not None else None
    mode = fov is not None if fov_mode is None else fov_mode
    return EvalReport(
        image=str(image_id),
        counts=counts,
        acc=s.acc,
        sens=s.sens,
        spec=s.spec,
        auc=curve.auc if curve is not None else None,
        fov_mode=mode,
        roc=curve,
    )


def aggregate(reports) -> EvalReport:
    """Pool confusion counts across images; AUC is the mean of per-image AUCs."""
    reports = list(reports)
    if not reports:
        raise ValueError("cannot aggregate an empty report list")
    modes = {r.fov_mode for r in reports}
    if len(modes) != 1:
        raise ValueError("cannot aggregate reports with mixed fov modes")
    counts = reports[0].counts
    for r in reports[1:]:
        counts = counts + r.counts
    s = summary(counts)
    aucs = [r.auc for r in reports if r.auc is not None]
    auc = sum(aucs) / len(aucs) if aucs else None
    return EvalReport(
        image="AGGREGATE",
        counts=counts,
        acc=s.acc,
        sens=s.sens,
        spec=s.spec,
        auc=auc,
        fov_mode=modes.pop(),
    )


CSV_COLUMNS = ("image", "tp", "tn", "fp", "fn", "acc", "sens", "spec", "auc", "fov_mode")


def _fmt_ratio(v: float | None) -> str:
    return "" if v is None else f"{v:.6f}"


def write_csv(reports, path, include_aggregate: bool = True) -> None:
    """Write per-image rows plus a final AGGREGATE row.

    The header comment records the canonical reporting order used in
    comparison tables (sens, spec, acc, auc); an undefined ratio is left as
    an empty field.
    """
    reports = list(reports)
    rows = reports + ([aggregate(reports)] if include_aggregate else [])
    with open(path, "w", newline="") as fh:
        fh.write("# canonical reporting order for comparison tables: sens, spec, acc, auc\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([
                r.image,
                r.counts.tp,
                r.counts.tn,
                r.counts.fp,
                r.counts.fn,
                _fmt_ratio(r.acc),
                _fmt_ratio(r.sens),
                _fmt_ratio(r.spec),
                _fmt_ratio(r.auc),
                "on" if r.fov_mode else "off",
            ])
