"""Monotone link between hop distance and diffusion distance.

The link is fitted by weighted pool-adjacent-violators on per-hop averages
and evaluated by linear interpolation with clamping at both ends.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import _backend
from .graph import Graph, all_pairs_distances, node_anchor_distances
from .spectral import DiffusionEmbedding, pairwise_distances

STRICT_SLOPE = 1e-9


@dataclass(frozen=True, eq=False)
class MonotoneLink:
    """Nondecreasing piecewise-linear map ``psi`` from hop distance to distance."""

    breakpoints: np.ndarray
    values: np.ndarray
    radius: float

    def __call__(self, d):
        out = np.interp(np.asarray(d, dtype=float), self.breakpoints, self.values)
        return float(out) if np.ndim(out) == 0 else out

    def max_on(self, R: float) -> float:
        """``max psi(d)`` over ``0 <= d <= R``, which is ``psi(R)`` for a nondecreasing link."""
        return float(self(R))

    def strictly_increasing(self, slope: float = STRICT_SLOPE) -> "MonotoneLink":
        """Copy with ``slope * (d - d_0)`` added, which breaks every flat step."""
        vals = self.values + slope * (self.breakpoints - self.breakpoints[0])
        return MonotoneLink(self.breakpoints, vals, self.radius)


@dataclass(frozen=True)
class LinkageReport:
    delta_hat: float
    residual_rms: float
    pair_count: int
    R: float

    def to_record(self, **meta) -> dict:
        return {**meta, **asdict(self)}


def link_samples(spd: np.ndarray, dist: np.ndarray, R: float,
                 upper_only: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """(hop, distance) pairs with ``0 < hop <= R`` taken entrywise from two matrices."""
    mask = (spd > 0) & (spd <= R)
    if upper_only:
        mask &= np.triu(np.ones(spd.shape, dtype=bool), k=1)
    return spd[mask].astype(float), dist[mask]


def collect_link_pairs(g: Graph, emb: DiffusionEmbedding, R: float, anchors=None,
                       spd: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Samples ``(SPD(u, v), d_t^(m)(u, v))`` for pairs within ``R`` hops.

    ``anchors=None`` uses every unordered pair once; otherwise node-anchor pairs.
    ``spd`` may carry precomputed hop distances of the matching shape.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    if anchors is None:
        spd = all_pairs_distances(g) if spd is None else spd
        dist = pairwise_distances(emb.coords)
        hops, targets = link_samples(spd, dist, R, upper_only=True)
    else:
        a = np.asarray(anchors)
        spd = node_anchor_distances(g, a) if spd is None else spd
        dist = pairwise_distances(emb.coords, emb.coords[a])
        hops, targets = link_samples(spd, dist, R)
    if hops.size == 0:
        raise ValueError(f"no pairs within radius {R}")
    return hops, targets


def fit_isotonic(hops, targets, weights=None, pin_zero: bool = True,
                 radius: float | None = None) -> MonotoneLink:
    """Least-squares nondecreasing fit of ``targets`` on ``hops``.

    Samples sharing a hop value are pooled into one weighted mean before PAVA.
    With ``pin_zero`` a breakpoint ``psi(0) = 0`` is added when no hop-0 sample
    exists (a node is at diffusion distance zero from itself). The fitted values
    are nonnegative for nonnegative targets, so the pin never binds.
    """
    x = np.asarray(hops, dtype=float).ravel()
    y = np.asarray(targets, dtype=float).ravel()
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float).ravel()
    if x.size == 0 or x.shape != y.shape or x.shape != w.shape:
        raise ValueError("hops, targets and weights must be nonempty and equal length")
    levels, inv = np.unique(x, return_inverse=True)
    wsum = np.bincount(inv, weights=w)
    ymean = np.bincount(inv, weights=w * y) / wsum
    fitted = _backend.pava(np.ascontiguousarray(ymean), np.ascontiguousarray(wsum))
    if pin_zero and levels[0] > 0:
        levels = np.concatenate([[0.0], levels])
        fitted = np.concatenate([[0.0], fitted])
    R = float(levels[-1]) if radius is None else float(radius)
    return MonotoneLink(levels, fitted, R)


def evaluate_link(link: MonotoneLink, d):
    if np.any(np.asarray(d) < 0):
        raise ValueError("hop distance must be >= 0")
    return link(d)


def linkage_error(link: MonotoneLink, hops, targets, R: float | None = None) -> LinkageReport:
    """Max and RMS absolute residual of the link over the samples."""
    x = np.asarray(hops, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.size == 0:
        raise ValueError("no samples")
    res = np.abs(y - link(x))
    return LinkageReport(float(res.max()), float(np.sqrt(np.mean(res ** 2))), int(x.size),
                         float(link.radius if R is None else R))


RADIAL_KINDS = ("identity", "exp_neg", "log1p")


def radial_transform(d, kind: str = "identity", median_scale: float = 1.0):
    """Rescale by ``median_scale`` then apply ``d``, ``exp(-d)`` or ``log(1 + d)``."""
    if median_scale <= 0:
        raise ValueError("median_scale must be > 0")
    x = np.asarray(d, dtype=float) / median_scale
    if np.any(x < 0):
        raise ValueError("distances must be >= 0")
    if kind == "identity":
        out = x
    elif kind == "exp_neg":
        out = np.exp(-x)
    elif kind == "log1p":
        out = np.log1p(x)
    else:
        raise ValueError(f"unknown radial transform {kind!r}; expected one of {RADIAL_KINDS}")
    return float(out) if np.ndim(out) == 0 else out
