"""Binary morphology with k x k square structuring elements.

Erosion, dilation, and opening over {0,1} masks, each available through two
interchangeable engines:

* ``mode="naive"``: direct scan of every window position, the reference
  definition, O(k^2) work per pixel;
* ``mode="separable"``: two 1-D sliding-extremum passes (rows, then
  columns). Min and max are idempotent, so a length-k window extremum is
  the combination of two overlapping power-of-two windows, computed by
  doubling: O(log k) vectorized sweeps per pass instead of O(k) per pixel.

Everything outside the image is background: erosion zeroes any pixel whose
window leaves the image, dilation gains nothing from the border. Window
placement uses split anchors, erosion at floor((k-1)/2) and dilation at
ceil((k-1)/2), so the two operators form an adjoint pair for even k too and
opening stays anti-extensive and idempotent for every kernel size.

``min_filter_1d``/``max_filter_1d`` are the scalar monotonic-deque version
of the sliding pass for plain sequences; the 2-D engines vectorize the same
window semantics.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .raster import as_mask

_MODES = ("naive", "separable")


@dataclass(frozen=True)
class KernelSpec:
    """Square structuring element of side ``k`` (k >= 1)."""

    k: int

    def __post_init__(self):
        if int(self.k) != self.k or int(self.k) < 1:
            raise ValueError(f"kernel side must be an integer >= 1, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def erosion_anchor(self) -> int:
        return (self.k - 1) // 2

    @property
    def dilation_anchor(self) -> int:
        # erosion_anchor + dilation_anchor == k - 1: the adjoint pairing that
        # makes opening a true opening for even k as well.
        return self.k - 1 - (self.k - 1) // 2


def _as_kernel(kernel) -> KernelSpec:
    if isinstance(kernel, KernelSpec):
        return kernel
    return KernelSpec(kernel)


def _check_mode(mode: str) -> str:
    if mode not in _MODES:
        raise ValueError(f"unknown mode {mode!r} (expected one of {_MODES})")
    return mode


def erode(mask, kernel, mode: str = "separable") -> np.ndarray:
    """Erode: pixel stays 1 iff its whole k x k window is inside and all 1."""
    m = as_mask(mask)
    spec = _as_kernel(kernel)
    _check_mode(mode)
    if spec.k == 1:
        return m.copy()
    if mode == "naive":
        return _morph_naive(m, spec.k, spec.erosion_anchor, minimum=True)
    return _morph_separable(m, spec.k, spec.erosion_anchor, minimum=True)


def dilate(mask, kernel, mode: str = "separable") -> np.ndarray:
    """Dilate: pixel becomes 1 iff any pixel of its k x k window is 1."""
    m = as_mask(mask)
    spec = _as_kernel(kernel)
    _check_mode(mode)
    if spec.k == 1:
        return m.copy()
    if mode == "naive":
        return _morph_naive(m, spec.k, spec.dilation_anchor, minimum=False)
    return _morph_separable(m, spec.k, spec.dilation_anchor, minimum=False)


def opening(mask, kernel, mode: str = "separable") -> np.ndarray:
    """Erosion followed by dilation with the same kernel.

    Keeps exactly the pixels covered by some k x k square fully contained in
    the mask: anti-extensive, idempotent, and shrinking in k.
    """
    spec = _as_kernel(kernel)
    return dilate(erode(mask, spec, mode), spec, mode)


def _morph_naive(m: np.ndarray, k: int, anchor: int, minimum: bool) -> np.ndarray:
    h, w = m.shape
    padded = np.zeros((h + k - 1, w + k - 1), dtype=np.uint8)
    padded[anchor:anchor + h, anchor:anchor + w] = m
    op = np.minimum if minimum else np.maximum
    out = padded[0:h, 0:w].copy()
    for i in range(k):
        for j in range(k):
            if i == 0 and j == 0:
                continue
            op(out, padded[i:i + h, j:j + w], out=out)
    return out


def _morph_separable(m: np.ndarray, k: int, anchor: int, minimum: bool) -> np.ndarray:
    rows = _sliding_extreme(m, k, anchor, minimum, axis=1)
    return _sliding_extreme(rows, k, anchor, minimum, axis=0)


def _sliding_extreme(arr: np.ndarray, k: int, anchor: int, minimum: bool, axis: int) -> np.ndarray:
    """Length-k sliding min/max along ``axis``; out-of-range positions read 0.

    Zero-pads to length n+k-1 so every output window is fully materialized,
    then doubles power-of-two window extrema (min/max are idempotent, so the
    final window is two overlapping power-of-two windows).
    """
    h, w = arr.shape
    n = arr.shape[axis]
    if axis == 0:
        buf = np.zeros((n + k - 1, w), dtype=np.uint8)
        buf[anchor:anchor + n, :] = arr
    else:
        buf = np.zeros((h, n + k - 1), dtype=np.uint8)
        buf[:, anchor:anchor + w] = arr
    op = np.minimum if minimum else np.maximum

    def shifted(a: np.ndarray, s: int) -> np.ndarray:
        return a[s:, :] if axis == 0 else a[:, s:]

    def head(a: np.ndarray, stop: int) -> np.ndarray:
        return a[:stop, :] if axis == 0 else a[:, :stop]

    cur = buf  # cur[i] currently covers window [i, i+length-1]
    length = 1
    while length * 2 <= k:
        cur = op(head(cur, cur.shape[axis] - length), shifted(cur, length))
        length *= 2
    if length < k:
        shift = k - length  # <= length, so the two windows overlap and cover [i, i+k-1]
        cur = op(head(cur, cur.shape[axis] - shift), shifted(cur, shift))
    return np.ascontiguousarray(head(cur, n))


def min_filter_1d(values, window: int, anchor: int | None = None) -> np.ndarray:
    """Sliding-window minimum of a 1-D sequence in O(n) total time.

    Positions outside the sequence read as 0, matching the morphology border
    rule. ``anchor`` is the offset of the output position inside its window;
    it defaults to the erosion anchor floor((window-1)/2).
    """
    return _extreme_filter_1d(values, window, anchor, minimum=True)


def max_filter_1d(values, window: int, anchor: int | None = None) -> np.ndarray:
    """Sliding-window maximum; out-of-range positions read as 0.

    Defaults to the dilation anchor ceil((window-1)/2).
    """
    return _extreme_filter_1d(values, window, anchor, minimum=False)


def _extreme_filter_1d(values, window: int, anchor: int | None, minimum: bool) -> np.ndarray:
    if int(window) != window or int(window) < 1:
        raise ValueError(f"window must be an integer >= 1, got {window!r}")
    window = int(window)
    if anchor is None:
        spec = KernelSpec(window)
        anchor = spec.erosion_anchor if minimum else spec.dilation_anchor
    if not 0 <= anchor < window:
        raise ValueError(f"anchor must lie in [0, {window - 1}], got {anchor}")
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D sequence, got shape {arr.shape}")
    n = arr.shape[0]
    out = np.zeros(n, dtype=arr.dtype)
    if n == 0:
        return out
    if window == 1:
        return arr.copy()

    def at(p: int):
        return arr[p] if 0 <= p < n else 0

    # Monotonic deque of virtual positions; front always holds the extremum
    # of the current window [i - anchor, i - anchor + window - 1].
    better = (lambda a, b: a <= b) if minimum else (lambda a, b: a >= b)
    dq: deque[int] = deque()
    for p in range(-anchor, -anchor + window):
        while dq and better(at(p), at(dq[-1])):
            dq.pop()
        dq.append(p)
    out[0] = at(dq[0])
    for i in range(1, n):
        new_p = i - anchor + window - 1
        if dq[0] == i - 1 - anchor:
            dq.popleft()
        while dq and better(at(new_p), at(dq[-1])):
            dq.pop()
        dq.append(new_p)
        out[i] = at(dq[0])
    return out
