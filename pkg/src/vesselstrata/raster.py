"""Raster primitives: binary masks, 8-bit gray images, lossless I/O, labeling.

Conventions used across the package:

* a *mask* is a 2-D uint8 array whose elements are exactly 0 or 1,
* a *gray image* is a 2-D uint8 array with values 0..255,
* pixel coordinates are (row, col) pairs, row 0 at the top.

Masks are stored on disk as 8-bit grayscale PNG with 1 encoded as 255.
Readable formats are PNG and PNM (P2/P5 PGM, P3/P6 PPM); anything else,
including 16-bit PNG, is rejected so load/save round trips stay bit-exact.
"""

from __future__ import annotations

import contextlib
import os
import tempfile
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError

MASK_FOREGROUND = 255

_SUPPORTED_FORMATS = ("PNG", "PPM")  # Pillow reports the whole PNM family as PPM


class PixelCoord(NamedTuple):
    """(row, col) pixel position."""

    row: int
    col: int


def as_mask(data) -> np.ndarray:
    """Validate ``data`` as a {0,1} mask and return it as a 2-D uint8 array."""
    arr = np.asarray(data)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"mask must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype == np.bool_:
        return arr.astype(np.uint8)
    if arr.dtype.kind not in "iu":
        raise ValueError(f"mask must be boolean or integer valued, got dtype {arr.dtype}")
    if int(arr.min()) < 0 or int(arr.max()) > 1:
        raise ValueError("mask values must be exactly 0 or 1")
    return arr.astype(np.uint8, copy=False)


def as_gray(data) -> np.ndarray:
    """Validate ``data`` as an 8-bit gray image and return a 2-D uint8 array."""
    arr = np.asarray(data)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"gray image must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr
    if arr.dtype.kind not in "iu":
        raise ValueError(f"gray image must be integer valued, got dtype {arr.dtype}")
    if int(arr.min()) < 0 or int(arr.max()) > 255:
        raise ValueError("gray values must lie in [0, 255]")
    return arr.astype(np.uint8)


def load_image(path, binary: bool = False) -> np.ndarray:
    """Load an 8-bit PNG or PNM file as a gray image (or as a mask).

    With ``binary=True`` every nonzero pixel maps to 1 (dataset masks encode
    vessels as 255). Color files are accepted only when all three channels
    are identical; anything not 8 bits deep is rejected.
    """
    path = os.fspath(path)
    try:
        with Image.open(path) as im:
            if im.format not in _SUPPORTED_FORMATS:
                raise ValueError(
                    f"{path}: unsupported format {im.format!r} (expected PNG or PNM)"
                )
            arr = _decode_single_channel(im, path)
    except UnidentifiedImageError as exc:
        raise ValueError(f"{path}: cannot decode image: {exc}") from exc
    except OSError as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise OSError(f"{path}: corrupt or truncated image: {exc}") from exc
    if binary:
        return (arr != 0).astype(np.uint8)
    return arr


def _decode_single_channel(im: Image.Image, path: str) -> np.ndarray:
    if im.mode == "L":
        return np.asarray(im, dtype=np.uint8)
    if im.mode == "RGB":
        arr = np.asarray(im, dtype=np.uint8)
        if (arr[..., 0] == arr[..., 1]).all() and (arr[..., 1] == arr[..., 2]).all():
            return np.ascontiguousarray(arr[..., 0])
        raise ValueError(f"{path}: true-color image; convert to 8-bit grayscale first")
    if im.mode in ("I", "I;16", "I;16B", "I;16L", "I;16N", "F", "1"):
        raise ValueError(f"{path}: unsupported bit depth (mode {im.mode!r}, expected 8-bit)")
    raise ValueError(f"{path}: unsupported color mode {im.mode!r} (expected 8-bit grayscale)")


def save_mask(mask, path) -> None:
    """Write a mask as 8-bit grayscale PNG, encoding 1 as 255.

    The write is atomic (temp file then rename), and
    ``load_image(path, binary=True)`` reproduces the mask bit-exactly.
    """
    m = as_mask(mask)
    _atomic_write_png(m * np.uint8(MASK_FOREGROUND), path)


def save_gray(image, path) -> None:
    """Write a gray image as 8-bit grayscale PNG (atomic, bit-exact round trip)."""
    _atomic_write_png(as_gray(image), path)


def _atomic_write_png(arr: np.ndarray, path) -> None:
    path = os.fspath(path)
    dirname = os.path.dirname(path) or "."
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(suffix=".png.tmp", dir=dirname)
        with os.fdopen(fd, "wb") as fh:
            Image.fromarray(arr, mode="L").save(fh, format="PNG")
        os.replace(tmp, path)
        tmp = None
    except OSError as exc:
        raise OSError(f"{path}: write failed: {exc}") from exc
    finally:
        if tmp is not None:
            with contextlib.suppress(OSError):
                os.unlink(tmp)


def mask_combine(op: str, a, b) -> np.ndarray:
    """Pixel-wise boolean combination of two same-sized masks.

    ``op`` is one of ``"and"``, ``"or"``, ``"subtract"``; subtract keeps the
    pixels of ``a`` that are not in ``b``.
    """
    a = as_mask(a)
    b = as_mask(b)
    if a.shape != b.shape:
        raise ValueError(f"mask dimension mismatch: {a.shape} vs {b.shape}")
    key = op.lower()
    if key == "and":
        return a & b
    if key == "or":
        return a | b
    if key == "subtract":
        return a & (b ^ 1)
    raise ValueError(f"unknown mask operation {op!r} (expected and/or/subtract)")


def connected_components(mask) -> np.ndarray:
    """Label 8-connected foreground components of a mask.

    Returns an int32 array where background stays 0 and components are
    numbered 1..C by the raster-scan position of each component's first
    pixel, so the labeling is deterministic. Two-pass union-find.
    """
    m = as_mask(mask)
    h, w = m.shape
    rows = m.tolist()
    labels = [[0] * w for _ in range(h)]
    parent = [0]

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r in range(h):
        mrow = rows[r]
        lrow = labels[r]
        above = labels[r - 1] if r > 0 else None
        for c in range(w):
            if not mrow[c]:
                continue
            neighbors = []
            if c > 0 and lrow[c - 1]:
                neighbors.append(lrow[c - 1])
            if above is not None:
                if c > 0 and above[c - 1]:
                    neighbors.append(above[c - 1])
                if above[c]:
                    neighbors.append(above[c])
                if c + 1 < w and above[c + 1]:
                    neighbors.append(above[c + 1])
            if not neighbors:
                lab = len(parent)
                parent.append(lab)
                lrow[c] = lab
            else:
                roots = sorted({find(n) for n in neighbors})
                root = roots[0]
                lrow[c] = root
                for other in roots[1:]:
                    parent[other] = root

    # Provisional labels were created in raster order and unions keep the
    # smaller root, so renumbering roots in increasing order yields ids in
    # first-pixel raster order.
    remap: dict[int, int] = {}
    out = np.zeros((h, w), dtype=np.int32)
    for r in range(h):
        lrow = labels[r]
        orow = out[r]
        for c in range(w):
            lab = lrow[c]
            if not lab:
                continue
            root = find(lab)
            final = remap.get(root)
            if final is None:
                final = len(remap) + 1
                remap[root] = final
            orow[c] = final
    return out
