"""Thickness stratification of binary vessel masks, and map fusion.

Opening a mask with a (d+1) x (d+1) square erases every structure thinner
than d+1 pixels and restores the rest intact, so a ladder of increasing
diameter thresholds d_1 < d_2 < ... turns one binary mask into disjoint
thickness strata: stratum c keeps exactly the pixels that survive the d_c
opening but not the d_{c+1} opening. Boundary shells shaved off thick
vessels land in the thinnest stratum by construction.

``stack3`` builds the three-channel thin/stem/raw stack used as a training
target; ``fuse``/``fuse_soft`` merge several prediction maps back into a
single result (binarize at a threshold, then pixel-wise OR; the soft variant
takes the pixel-wise maximum so that thresholding commutes with fusion).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .morphology import opening
from .raster import as_gray, as_mask


@dataclass(frozen=True)
class ThresholdLadder:
    """Strictly increasing diameter thresholds, each >= 1."""

    thresholds: tuple[int, ...]

    def __post_init__(self):
        if len(self.thresholds) == 0:
            raise ValueError("threshold ladder must not be empty")
        cleaned = []
        for t in self.thresholds:
            if int(t) != t or int(t) < 1:
                raise ValueError(f"diameter thresholds must be integers >= 1, got {t!r}")
            cleaned.append(int(t))
        for a, b in zip(cleaned, cleaned[1:]):
            if b <= a:
                raise ValueError(f"thresholds must be strictly increasing, got {tuple(self.thresholds)}")
        object.__setattr__(self, "thresholds", tuple(cleaned))

    @property
    def strata_count(self) -> int:
        return len(self.thresholds) + 1

    @classmethod
    def parse(cls, text: str) -> "ThresholdLadder":
        """Parse a comma-separated ladder such as ``"1,3,6"``."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            values = tuple(int(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"bad threshold ladder {text!r}: {exc}") from exc
        return cls(values)


@dataclass(frozen=True)
class StrataStack:
    """Ordered stack of masks derived from one source mask.

    ``kind="partition"``: the strata are pairwise disjoint and their union
    is the source (one stratum per thickness band).
    ``kind="training"``: the last channel is the source itself and the
    earlier channels partition it (the thin/stem/raw layout).
    """

    strata: tuple[np.ndarray, ...]
    source: np.ndarray
    ladder: ThresholdLadder
    kind: str = field(default="partition")

    def __post_init__(self):
        strata = tuple(as_mask(s) for s in self.strata)
        source = as_mask(self.source)
        for s in strata:
            if s.shape != source.shape:
                raise ValueError(f"stratum shape {s.shape} != source shape {source.shape}")
        total = np.sum(np.stack(strata[:-1] if self.kind == "training" else strata),
                       axis=0, dtype=np.int64)
        if self.kind == "partition":
            if len(strata) != self.ladder.strata_count:
                raise ValueError(
                    f"expected {self.ladder.strata_count} strata for this ladder, got {len(strata)}"
                )
            if not np.array_equal(total, source):
                raise ValueError("strata must be disjoint and union to the source mask")
        elif self.kind == "training":
            if len(strata) < 2:
                raise ValueError("training stack needs at least two channels")
            if not np.array_equal(strata[-1], source):
                raise ValueError("last training channel must equal the source mask")
            if not np.array_equal(total, strata[-1]):
                raise ValueError("leading channels must partition the last channel")
        else:
            raise ValueError(f"unknown stack kind {self.kind!r}")
        object.__setattr__(self, "strata", strata)
        object.__setattr__(self, "source", source)

    def __len__(self) -> int:
        return len(self.strata)

    @property
    def channels(self) -> np.ndarray:
        """The strata stacked into one (channels, h, w) array."""
        return np.stack(self.strata)


def semi_limited_mask(y, d: int, mode: str = "separable") -> np.ndarray:
    """Keep only the vessels thicker than ``d`` pixels.

    d = 0 returns the mask unchanged; d >= 1 applies the (d+1) x (d+1)
    opening. The result is always a subset of the input.
    """
    y = as_mask(y)
    if int(d) != d or int(d) < 0:
        raise ValueError(f"diameter threshold must be an integer >= 0, got {d!r}")
    d = int(d)
    if d == 0:
        return y.copy()
    return opening(y, d + 1, mode=mode)


def stratify(y, ladder, mode: str = "separable") -> StrataStack:
    """Split a mask into disjoint thickness strata along a threshold ladder.

    Stratum c holds the pixels surviving the d_c opening but not the
    d_{c+1} opening (with d_0 meaning "no opening" and d_n meaning
    "nothing survives"), so the strata partition the input exactly.
    """
    y = as_mask(y)
    if not isinstance(ladder, ThresholdLadder):
        ladder = ThresholdLadder(tuple(ladder))
    chain = [y]
    for d in ladder.thresholds:
        chain.append(semi_limited_mask(y, d, mode=mode))
    chain.append(np.zeros_like(y))
    strata = tuple(chain[c] & (chain[c + 1] ^ 1) for c in range(len(chain) - 1))
    return StrataStack(strata, y, ladder, kind="partition")


def stack3(y, d1: int = 2, mode: str = "separable") -> StrataStack:
    """Build the three-channel training stack (thin, stem, raw).

    Channel 0 is everything the (d1+1) opening removes (thin vessels plus
    boundary shells), channel 1 is what survives it (stems), channel 2 is
    the untouched source; channels 0 and 1 partition channel 2.
    """
    y = as_mask(y)
    if int(d1) != d1 or int(d1) < 1:
        raise ValueError(f"d1 must be an integer >= 1, got {d1!r}")
    stem = semi_limited_mask(y, int(d1), mode=mode)
    thin = y & (stem ^ 1)
    return StrataStack((thin, stem, y), y, ThresholdLadder((int(d1),)), kind="training")


def _check_maps(maps) -> list[np.ndarray]:
    arrs = [as_gray(m) for m in maps]
    if not arrs:
        raise ValueError("need at least one map to fuse")
    shape = arrs[0].shape
    for a in arrs[1:]:
        if a.shape != shape:
            raise ValueError(f"map dimension mismatch: {a.shape} vs {shape}")
    return arrs


def fuse(maps, threshold: int = 127) -> np.ndarray:
    """Binarize each map at ``value > threshold`` and OR the results."""
    arrs = _check_maps(maps)
    if int(threshold) != threshold or not 0 <= int(threshold) <= 255:
        raise ValueError(f"threshold must be an integer in [0, 255], got {threshold!r}")
    t = int(threshold)
    out = np.zeros(arrs[0].shape, dtype=np.uint8)
    for a in arrs:
        out |= a > t
    return out


def fuse_soft(maps) -> np.ndarray:
    """Pixel-wise maximum of the maps.

    Thresholding the result at t equals ``fuse(maps, t)`` for every t, so a
    single soft map can stand in for the fused ensemble in ROC sweeps.
    """
    arrs = _check_maps(maps)
    if len(arrs) == 1:
        return arrs[0].copy()
    return np.maximum.reduce(arrs)
