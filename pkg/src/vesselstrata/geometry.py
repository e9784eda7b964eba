"""Vessel diameter semantics: Chebyshev metric, discrete Frechet distance,
and synthetic tubes with analytically known border curves.

The thickness targeted by the opening-based stratification is formalized as
the discrete Frechet distance, under the Chebyshev point metric, between a
vessel's two border curves. Synthetic tubes make that testable: an
axis-aligned tube of pixel width w has border distance w - 1 and is erased
by a k x k opening iff w < k (and survives intact iff w >= k, with nothing
in between). ``verify_erasure`` reports the measured numbers for one tube.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .morphology import opening
from .raster import PixelCoord, as_mask

ORIENTATIONS = ("horizontal", "vertical", "diagonal-45")


def as_curve(points) -> np.ndarray:
    """Normalize a point sequence to an (n, 2) int array of (row, col) pairs."""
    arr = np.asarray(points, dtype=np.int64)
    if arr.ndim == 1 and arr.shape == (2,):
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise ValueError(f"curve must be a non-empty sequence of (row, col) pairs, got shape {arr.shape}")
    if arr.min() < 0:
        raise ValueError("curve coordinates must be non-negative")
    return arr


def chebyshev(p, q) -> int:
    """max(|row difference|, |col difference|) between two pixels."""
    return int(max(abs(int(p[0]) - int(q[0])), abs(int(p[1]) - int(q[1]))))


def discrete_frechet(a, b) -> int:
    """Discrete Frechet distance between two pixel curves, Chebyshev metric.

    Standard coupling dynamic program: the (i, j) cell holds the best
    achievable maximum gap over monotone couplings of the first i+1 and j+1
    points, so the last cell is the distance. O(|a|*|b|) time.
    """
    A = as_curve(a)
    B = as_curve(b)
    d = np.maximum(
        np.abs(A[:, 0, None] - B[None, :, 0]),
        np.abs(A[:, 1, None] - B[None, :, 1]),
    )
    n, m = d.shape
    ca = np.empty((n, m), dtype=np.int64)
    ca[0, 0] = d[0, 0]
    for i in range(1, n):
        ca[i, 0] = max(ca[i - 1, 0], d[i, 0])
    for j in range(1, m):
        ca[0, j] = max(ca[0, j - 1], d[0, j])
    for i in range(1, n):
        ca_prev = ca[i - 1]
        ca_row = ca[i]
        d_row = d[i]
        for j in range(1, m):
            ca_row[j] = max(d_row[j], min(ca_prev[j], ca_prev[j - 1], ca_row[j - 1]))
    return int(ca[n - 1, m - 1])


@dataclass(frozen=True)
class TubeSpec:
    """A straight synthetic vessel: orientation, pixel width, length.

    ``origin`` is the tube's top-left pixel; ``canvas`` is the (height,
    width) of the enclosing image and defaults to the tight bounding box.
    """

    orientation: str
    width: int
    length: int
    origin: PixelCoord = PixelCoord(0, 0)
    canvas: tuple[int, int] | None = None

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}")
        if int(self.width) != self.width or int(self.width) < 1:
            raise ValueError(f"width must be an integer >= 1, got {self.width!r}")
        if int(self.length) != self.length or int(self.length) < self.width:
            raise ValueError(f"length must be an integer >= width, got {self.length!r}")
        origin = PixelCoord(int(self.origin[0]), int(self.origin[1]))
        if origin.row < 0 or origin.col < 0:
            raise ValueError(f"origin must be non-negative, got {origin}")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "length", int(self.length))
        object.__setattr__(self, "origin", origin)
        rows, cols = self._extent()
        canvas = self.canvas if self.canvas is not None else (rows, cols)
        canvas = (int(canvas[0]), int(canvas[1]))
        if canvas[0] < rows or canvas[1] < cols:
            raise ValueError(
                f"tube does not fit canvas: needs at least {(rows, cols)}, canvas is {canvas}"
            )
        object.__setattr__(self, "canvas", canvas)

    def _extent(self) -> tuple[int, int]:
        r0, c0 = self.origin
        if self.orientation == "vertical":
            return r0 + self.length, c0 + self.width
        if self.orientation == "horizontal":
            return r0 + self.width, c0 + self.length
        return r0 + self.length, c0 + self.length - 1 + self.width


def make_tube(spec: TubeSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rasterize a tube and return (mask, border_a, border_b).

    The borders are the two opposing outermost foreground lines (columns,
    rows, or 45-degree diagonals), both ordered tip to tip the same way; for
    width 1 they coincide.
    """
    h, w = spec.canvas
    mask = np.zeros((h, w), dtype=np.uint8)
    r0, c0 = spec.origin
    t = np.arange(spec.length)
    if spec.orientation == "vertical":
        mask[r0:r0 + spec.length, c0:c0 + spec.width] = 1
        border_a = np.stack([r0 + t, np.full_like(t, c0)], axis=1)
        border_b = np.stack([r0 + t, np.full_like(t, c0 + spec.width - 1)], axis=1)
    elif spec.orientation == "horizontal":
        mask[r0:r0 + spec.width, c0:c0 + spec.length] = 1
        border_a = np.stack([np.full_like(t, r0), c0 + t], axis=1)
        border_b = np.stack([np.full_like(t, r0 + spec.width - 1), c0 + t], axis=1)
    else:
        for s in range(spec.width):
            mask[r0 + t, c0 + t + s] = 1
        border_a = np.stack([r0 + t, c0 + t], axis=1)
        border_b = np.stack([r0 + t, c0 + t + spec.width - 1], axis=1)
    return mask, border_a, border_b


@dataclass(frozen=True)
class ErasureReport:
    """Outcome of opening one synthetic tube with a (d+1) x (d+1) kernel."""

    diameter: int
    erased: bool
    survived_intact: bool


def verify_erasure(spec: TubeSpec, d: int, mode: str = "separable") -> ErasureReport:
    """Open a tube with the (d+1) x (d+1) kernel and report what happened.

    ``diameter`` is the discrete Frechet distance between the generated
    border curves; ``erased`` means nothing survived; ``survived_intact``
    means the opening returned the tube unchanged. The numbers are reported
    raw, with no assumption about how diameter relates to erasure.
    """
    if int(d) != d or int(d) < 1:
        raise ValueError(f"d must be an integer >= 1, got {d!r}")
    mask, border_a, border_b = make_tube(spec)
    diameter = discrete_frechet(border_a, border_b)
    opened = opening(as_mask(mask), int(d) + 1, mode=mode)
    return ErasureReport(
        diameter=diameter,
        erased=not bool(opened.any()),
        survived_intact=bool(np.array_equal(opened, mask)),
    )
