"""Loss evaluators for stratified segmentation training signals.

Pure numeric functions over prediction arrays, target strata, and
discriminator score batches. No network code lives here; everything takes
plain arrays and returns floats (or a gradient array):

* ``loss_gen``: sum over strata of w_c times the Frobenius norm of channel
  c's residual (the norms are unsquared), with ``grad_loss_gen`` as its
  analytic gradient;
* ``loss_thin``: single-channel Frobenius residual norm;
* ``cgan_loss``: mean log score on real pairs plus mean log(1 - score) on
  generated pairs, scores clamped away from 0 and 1;
* ``l1_residual``: sum of absolute residuals;
* ``composite_objective``: adversarial term plus lambda times the L1 term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stratification import StrataStack

SCORE_CLAMP_EPS = 1e-7


@dataclass(frozen=True)
class LossWeights:
    """Per-stratum weights plus the L1 regularization factor lambda."""

    w: tuple[float, ...] = (1.0, 1.0, 1.0)
    lam: float = 100.0

    def __post_init__(self):
        w = tuple(float(x) for x in self.w)
        if any(x < 0 for x in w):
            raise ValueError(f"stratum weights must be non-negative, got {self.w!r}")
        if float(self.lam) < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam!r}")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "lam", float(self.lam))


def _as_channels(x, name: str) -> np.ndarray:
    """Normalize a stack-like value to a float (channels, h, w) array."""
    if isinstance(x, StrataStack):
        return x.channels.astype(np.float64)
    if isinstance(x, np.ndarray) and x.ndim == 3:
        return x.astype(np.float64, copy=False)
    arrs = [np.asarray(c, dtype=np.float64) for c in x]
    if not arrs:
        raise ValueError(f"{name} must contain at least one channel")
    shape = arrs[0].shape
    for a in arrs:
        if a.ndim != 2 or a.shape != shape:
            raise ValueError(f"{name} channels must all share one 2-D shape")
    return np.stack(arrs)


def _matched_residual(pred, target, name: str = "prediction") -> np.ndarray:
    p = _as_channels(pred, name)
    t = _as_channels(target, "target")
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {name} {p.shape} vs target {t.shape}")
    return p - t


def loss_gen(pred, target, weights: LossWeights = LossWeights()) -> float:
    """Weighted sum of per-channel Frobenius residual norms."""
    residual = _matched_residual(pred, target)
    if len(weights.w) != residual.shape[0]:
        raise ValueError(
            f"{len(weights.w)} weights for {residual.shape[0]} channels"
        )
    norms = np.sqrt(np.sum(residual * residual, axis=(1, 2)))
    return float(np.dot(np.asarray(weights.w), norms))


def grad_loss_gen(pred, target, weights: LossWeights = LossWeights()) -> np.ndarray:
    """Gradient of ``loss_gen`` with respect to the prediction stack.

    Channel c's gradient is w_c * residual_c / ||residual_c||; a channel
    whose residual is identically zero gets a zero gradient (the chosen
    subgradient at the kink).
    """
    residual = _matched_residual(pred, target)
    if len(weights.w) != residual.shape[0]:
        raise ValueError(f"{len(weights.w)} weights for {residual.shape[0]} channels")
    norms = np.sqrt(np.sum(residual * residual, axis=(1, 2)))
    grad = np.zeros_like(residual)
    for c, (norm, w) in enumerate(zip(norms, weights.w)):
        if norm > 0.0:
            grad[c] = (w / norm) * residual[c]
    return grad


def loss_thin(pred, target) -> float:
    """Frobenius norm of a single-channel residual."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: prediction {p.shape} vs target {t.shape}")
    r = p - t
    return float(np.sqrt(np.sum(r * r)))


def cgan_loss(d_real, d_fake) -> float:
    """Adversarial value: mean log D on real pairs + mean log(1-D) on fakes.

    Scores must lie in [0, 1] and are clamped to
    [SCORE_CLAMP_EPS, 1 - SCORE_CLAMP_EPS] before the logs, so the value is
    finite and always <= 0 (natural logarithm, expectations realized as
    arithmetic means over the supplied batches).
    """
    real = np.asarray(d_real, dtype=np.float64).ravel()
    fake = np.asarray(d_fake, dtype=np.float64).ravel()
    if real.size == 0 or fake.size == 0:
        raise ValueError("score batches must be non-empty")
    for name, scores in (("real", real), ("fake", fake)):
        if np.min(scores) < 0.0 or np.max(scores) > 1.0:
            raise ValueError(f"{name} scores must lie in [0, 1]")
    real = np.clip(real, SCORE_CLAMP_EPS, 1.0 - SCORE_CLAMP_EPS)
    fake = np.clip(fake, SCORE_CLAMP_EPS, 1.0 - SCORE_CLAMP_EPS)
    return float(np.mean(np.log(real)) + np.mean(np.log1p(-fake)))


def l1_residual(pred, target) -> float:
    """Sum of absolute residuals over all elements (single map or stack)."""
    p = pred.channels.astype(np.float64) if isinstance(pred, StrataStack) \
        else np.asarray(pred, dtype=np.float64)
    t = target.channels.astype(np.float64) if isinstance(target, StrataStack) \
        else np.asarray(target, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: prediction {p.shape} vs target {t.shape}")
    return float(np.abs(p - t).sum())


def composite_objective(cgan: float, l1: float, weights: LossWeights = LossWeights()) -> float:
    """Adversarial value plus lambda times the L1 refinement term."""
    return float(cgan) + weights.lam * float(l1)
