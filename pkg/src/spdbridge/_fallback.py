"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``."""
from __future__ import annotations

import numpy as np

_BATCH = 256


def bfs_multi(indptr: np.ndarray, indices: np.ndarray, sources: np.ndarray) -> np.ndarray:
    """Hop distances from each source, shape ``(n, len(sources))``, -1 if unreachable.

    Level-synchronous BFS over a batch of sources at once: the frontier is an
    ``(n, batch)`` boolean matrix and one level is an OR-reduction over each
    node's neighbor rows.
    """
    n = len(indptr) - 1
    sources = np.asarray(sources, dtype=np.int64)
    if np.any((sources < 0) | (sources >= n)):
        raise IndexError(f"source out of range for n={n}")
    out = np.full((n, len(sources)), -1, dtype=np.int32)
    deg = np.diff(indptr)
    has_nb = deg > 0
    starts = indptr[:-1][has_nb]
    for lo in range(0, len(sources), _BATCH):
        batch = sources[lo:lo + _BATCH]
        cols = np.arange(len(batch))
        frontier = np.zeros((n, len(batch)), dtype=bool)
        frontier[batch, cols] = True
        visited = frontier.copy()
        block = out[:, lo:lo + len(batch)]
        block[batch, cols] = 0
        level = 0
        while frontier.any():
            level += 1
            reached = np.zeros_like(frontier)
            if len(indices):
                reached[has_nb] = np.logical_or.reduceat(frontier[indices], starts, axis=0)
            frontier = reached & ~visited
            visited |= frontier
            block[frontier] = level
        out[:, lo:lo + len(batch)] = block
    return out


def pava(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted L2 isotonic (nondecreasing) fit of ``y`` in the given order."""
    vals: list[float] = []
    wts: list[float] = []
    cnts: list[int] = []
    for yi, wi in zip(np.asarray(y, dtype=float), np.asarray(w, dtype=float)):
        vals.append(float(yi))
        wts.append(float(wi))
        cnts.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            ww = wts[-2] + wts[-1]
            v = (wts[-2] * vals[-2] + wts[-1] * vals[-1]) / ww
            c = cnts[-2] + cnts[-1]
            del vals[-1], wts[-1], cnts[-1]
            vals[-1], wts[-1], cnts[-1] = v, ww, c
    return np.repeat(np.asarray(vals, dtype=float), cnts)


def min_update_argmax(mindist: np.ndarray, dist: np.ndarray) -> int:
    """In place ``mindist = min(mindist, dist)``; return the first argmax afterwards."""
    reach = dist >= 0
    np.minimum(mindist, dist, out=mindist, where=reach)
    return int(np.argmax(mindist))
