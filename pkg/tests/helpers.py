"""Shared fixtures and independent oracles for the test suite.

Everything here is deliberately dumb and separate from the library code
paths it checks: flood fill instead of union-find, quadratic window scans,
exhaustive coupling enumeration, per-pixel counting loops.
"""

import numpy as np


def random_mask(rng, h, w, p=0.4):
    return (rng.random((h, w)) < p).astype(np.uint8)


def random_gray(rng, h, w):
    return rng.integers(0, 256, size=(h, w), dtype=np.uint8)


def two_strip_mask(h=24, w=24, thin_width=2, wide_width=5, gap=6):
    """Two full-height vertical strips separated by background."""
    m = np.zeros((h, w), dtype=np.uint8)
    m[:, 1:1 + thin_width] = 1
    start = 1 + thin_width + gap
    m[:, start:start + wide_width] = 1
    thin = np.zeros_like(m)
    thin[:, 1:1 + thin_width] = 1
    wide = np.zeros_like(m)
    wide[:, start:start + wide_width] = 1
    return m, thin, wide


def flood_component_count(mask):
    """8-connected component count by stack-based flood fill."""
    m = np.asarray(mask)
    h, w = m.shape
    seen = np.zeros((h, w), dtype=bool)
    count = 0
    for r in range(h):
        for c in range(w):
            if not m[r, c] or seen[r, c]:
                continue
            count += 1
            stack = [(r, c)]
            seen[r, c] = True
            while stack:
                cr, cc = stack.pop()
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        nr, nc = cr + dr, cc + dc
                        if 0 <= nr < h and 0 <= nc < w and m[nr, nc] and not seen[nr, nc]:
                            seen[nr, nc] = True
                            stack.append((nr, nc))
    return count


def brute_window_extreme(values, window, anchor, minimum=True):
    """Quadratic sliding-window min/max; out-of-range positions read 0."""
    n = len(values)
    out = []
    for i in range(n):
        cells = [values[p] if 0 <= p < n else 0
                 for p in range(i - anchor, i - anchor + window)]
        out.append(min(cells) if minimum else max(cells))
    return out


def brute_frechet(a, b):
    """Minimum over all monotone couplings of the max Chebyshev gap.

    Plain exhaustive recursion over coupling steps, no memoization; only
    usable for short curves.
    """
    a = [tuple(p) for p in a]
    b = [tuple(p) for p in b]
    n, m = len(a), len(b)
    best = [None]

    def cheb(p, q):
        return max(abs(p[0] - q[0]), abs(p[1] - q[1]))

    def walk(i, j, cur):
        cur = max(cur, cheb(a[i], b[j]))
        if i == n - 1 and j == m - 1:
            if best[0] is None or cur < best[0]:
                best[0] = cur
            return
        if i + 1 < n:
            walk(i + 1, j, cur)
        if j + 1 < m:
            walk(i, j + 1, cur)
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, cur)

    walk(0, 0, 0)
    return best[0]


def loop_confusion(pred, truth, fov=None):
    """Per-pixel counting loop returning (tp, tn, fp, fn)."""
    h, w = np.asarray(truth).shape
    tp = tn = fp = fn = 0
    for r in range(h):
        for c in range(w):
            if fov is not None and not fov[r, c]:
                continue
            p, t = pred[r, c], truth[r, c]
            if p and t:
                tp += 1
            elif p and not t:
                fp += 1
            elif not p and t:
                fn += 1
            else:
                tn += 1
    return tp, tn, fp, fn


def pair_count_auc(pos_scores, neg_scores):
    """Mann-Whitney statistic with ties counted half, by direct pair counting."""
    pos = np.asarray(pos_scores, dtype=np.int64).ravel()
    neg = np.asarray(neg_scores, dtype=np.int64).ravel()
    greater = 0
    ties = 0
    for v in pos:
        greater += int(np.count_nonzero(neg < v))
        ties += int(np.count_nonzero(neg == v))
    return (greater + 0.5 * ties) / (pos.size * neg.size)


def random_curve(rng, max_len=8, span=16):
    n = int(rng.integers(1, max_len + 1))
    return rng.integers(0, span, size=(n, 2))
