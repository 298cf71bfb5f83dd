"""Anchor-based Nystrom approximation of the diffusion kernel and its diagnostics.

The reference kernel is the graph heat kernel ``K = K_{2t}``, whose
polarization ``K_uu + K_vv - 2 K_uv`` is the squared diffusion distance
``d_t(u, v)^2``. The approximation is ``C (K_AA + lambda I)^+ C^T``. The cross
block ``C`` is either the exact kernel columns at the anchors or, in
distance-driven mode, entries rebuilt from the fitted link on hop distances.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .graph import Graph, node_anchor_distances, all_pairs_distances, default_radius, \
    farthest_point_sampling, require_connected
from .linkage import MonotoneLink, fit_isotonic, link_samples
from .spectral import EigenSystem, graph_eigensystem, heat_kernel, truncated_embedding
from .trilateration import build_system, select_anchors

PINV_RTOL = 1e-12
CROSS_MODES = ("distance_driven", "exact_columns")


class SingularBlockError(np.linalg.LinAlgError):
    """Unregularized anchor block is rank deficient."""


class RankDeficientError(np.linalg.LinAlgError):
    """Approximate kernel has too few positive eigenvalues for the embedding."""

    def __init__(self, msg: str, rank: int):
        super().__init__(msg)
        self.rank = rank


@dataclass(frozen=True)
class NystromConfig:
    k: int = 32
    t: float = 1.0
    m: int = 8
    lambda_reg: float | None = None
    cross_mode: str = "distance_driven"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.lambda_reg is not None and self.lambda_reg < 0:
            raise ValueError("lambda_reg must be >= 0")
        if self.cross_mode not in CROSS_MODES:
            raise ValueError(f"cross_mode must be one of {CROSS_MODES}")


@dataclass
class ApproxReport:
    graph_id: str
    n: int
    k: int
    lam: float
    mode: str
    rel_kernel_frob: float
    coord_mse: float
    dist_pearson: float
    log10_cond_KAA: float
    log10_cond_A_tri: float
    rank_k_floor: float = field(default=float("nan"))

    def to_row(self) -> dict:
        return asdict(self)


def default_lambda(K_AA: np.ndarray) -> float:
    return 1e-6 * float(np.trace(K_AA)) / K_AA.shape[0]


def distance_driven_columns(kdiag: np.ndarray, anchors: np.ndarray, spd_anchor: np.ndarray,
                            link: MonotoneLink) -> np.ndarray:
    """Cross block from ``k(v, a) = (k(v, v) + k(a, a) - psi(SPD(v, a))^2) / 2``."""
    r = link(spd_anchor)
    return 0.5 * (kdiag[:, None] + kdiag[anchors][None, :] - r * r)


def nystrom_kernel(eig: EigenSystem, cfg: NystromConfig, anchors, link: MonotoneLink | None = None,
                   spd_anchor: np.ndarray | None = None, g: Graph | None = None) -> np.ndarray:
    """Nystrom approximation of ``K_{2t}`` from the anchor block and a cross block.

    Distance-driven mode needs ``link`` and either ``spd_anchor`` or ``g``.
    """
    a = np.asarray(anchors, dtype=np.int64)
    if len(np.unique(a)) != len(a):
        raise ValueError("anchors must be distinct")
    K = heat_kernel(eig, 2 * cfg.t)
    K_AA = K[np.ix_(a, a)]
    if cfg.cross_mode == "exact_columns":
        C = K[:, a]
    else:
        if link is None:
            raise ValueError("distance_driven mode needs a fitted link")
        if spd_anchor is None:
            if g is None:
                raise ValueError("distance_driven mode needs hop distances or the graph")
            spd_anchor = node_anchor_distances(g, a)
        C = distance_driven_columns(np.diag(K), a, spd_anchor, link)
    lam = default_lambda(K_AA) if cfg.lambda_reg is None else cfg.lambda_reg
    W = K_AA + lam * np.eye(len(a))
    U, s, Vt = np.linalg.svd(W)
    keep = s > PINV_RTOL * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    if lam == 0 and not keep.all():
        raise SingularBlockError(f"anchor block has rank {int(keep.sum())} < {len(a)} "
                                 "with lambda = 0")
    W_pinv = (Vt[keep].T / s[keep]) @ U[:, keep].T
    Kh = C @ W_pinv @ C.T
    return 0.5 * (Kh + Kh.T)


def nystrom_embedding(K_hat: np.ndarray, m: int, strict: bool = True) -> np.ndarray:
    """Diffusion-map coordinates from eigenpairs ``2..m+1`` of ``K_hat``.

    Each eigenvector is scaled by the square root of its eigenvalue, so that the
    exact ``K_{2t}`` returns ``exp(-t lam) phi``. Missing positive eigenvalues
    raise :class:`RankDeficientError` unless ``strict`` is off, in which case the
    missing columns are zero.
    """
    w, V = np.linalg.eigh(K_hat)
    if w[0] < -1e-10 * max(1.0, abs(w[-1])):
        raise ValueError(f"K_hat is not positive semidefinite (min eigenvalue {w[0]:.3g})")
    order = np.argsort(w)[::-1][:m + 1]
    w, V = w[order], V[:, order]
    positive = w > PINV_RTOL * w[0] if w[0] > 0 else np.zeros_like(w, dtype=bool)
    rank = int(positive.sum())
    if rank < m + 1 and strict:
        raise RankDeficientError(f"K_hat has {rank} positive eigenvalues, need {m + 1}", rank)
    return V[:, 1:] * np.sqrt(np.where(positive[1:], w[1:], 0.0))


class ProcrustesResult(NamedTuple):
    aligned: np.ndarray
    mse: float
    rotation: np.ndarray


def procrustes_align(X: np.ndarray, Y: np.ndarray, scale: bool = False) -> ProcrustesResult:
    """Orthogonal map (rotation or reflection) taking centered ``X`` closest to centered ``Y``.

    ``Q = U V^T`` from the SVD ``X^T Y = U S V^T``. ``scale`` additionally fits
    an isotropic factor.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch {X.shape} vs {Y.shape}")
    Xc = X - X.mean(axis=0)
    Yc = Y - Y.mean(axis=0)
    if not Xc.any() or not Yc.any():
        Q = np.eye(X.shape[1])
        return ProcrustesResult(Xc, float(np.mean((Xc - Yc) ** 2)), Q)
    U, s, Vt = np.linalg.svd(Xc.T @ Yc)
    Q = U @ Vt
    aligned = Xc @ Q
    if scale:
        aligned *= s.sum() / np.sum(Xc * Xc)
    return ProcrustesResult(aligned, float(np.mean((aligned - Yc) ** 2)), Q)


def kernel_distances(K: np.ndarray) -> np.ndarray:
    """Distances induced by a kernel: ``sqrt(K_uu + K_vv - 2 K_uv)``."""
    d = np.diag(K)
    sq = d[:, None] + d[None, :] - 2 * K
    np.fill_diagonal(sq, 0.0)
    return np.sqrt(np.maximum(sq, 0.0))


def distance_correlation(approx, exact) -> float:
    """Pearson correlation of two equally long distance lists."""
    a = np.asarray(approx, dtype=float).ravel()
    b = np.asarray(exact, dtype=float).ravel()
    if a.shape != b.shape or a.size < 2:
        raise ValueError("need two equally long lists with >= 2 entries")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise ValueError("zero-variance input")
    a = a - a.mean()
    b = b - b.mean()
    return float(np.dot(a, b) / np.sqrt(np.dot(a, a) * np.dot(b, b)))


def log10_cond(M: np.ndarray) -> float:
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s[-1] == 0 or s[0] == 0:
        return float("inf")
    return float(np.log10(s[0] / s[-1]))


def conditioning_diagnostics(K_AA: np.ndarray, A_tri: np.ndarray | None = None) -> dict:
    """Base-10 log spectral condition numbers; ``inf`` when exactly singular."""
    out = {"log10_cond_KAA": log10_cond(K_AA)}
    if A_tri is not None:
        out["log10_cond_A_tri"] = log10_cond(A_tri)
    return out


def ccdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Sorted values and the fraction of samples >= each value."""
    v = np.sort(np.asarray(values, dtype=float))
    return v, 1.0 - np.arange(len(v)) / len(v)


def rank_k_floor(eig: EigenSystem, t: float, k: int) -> float:
    """Smallest relative Frobenius error any rank-``k`` matrix can reach on ``K_{2t}``."""
    w = np.sort(eig.decay(2 * t))[::-1]
    return float(np.sqrt(np.sum(w[k:] ** 2) / np.sum(w ** 2)))


def approximate_graph(g: Graph, cfg: NystromConfig, graph_id: str = "",
                      R: int | None = None, eig: EigenSystem | None = None) -> ApproxReport:
    """Full per-graph pipeline: FPS anchors, kernel, embedding, metrics.

    In distance-driven mode the link maps hop distance to the full diffusion
    distance ``d_t`` and is fitted on all pairs within ``R`` (default
    ``ceil(ln n)``).
    """
    require_connected(g)
    n = g.n
    k = min(cfg.k, n)
    eig = graph_eigensystem(g) if eig is None else eig
    anchors = farthest_point_sampling(g, k)
    K = heat_kernel(eig, 2 * cfg.t)
    link = spd_anchor = None
    if cfg.cross_mode == "distance_driven":
        spd = all_pairs_distances(g)
        R = default_radius(n) if R is None else R
        link = fit_isotonic(*link_samples(spd, kernel_distances(K), R, upper_only=True),
                            radius=R)
        spd_anchor = spd[:, anchors]
    K_hat = nystrom_kernel(eig, cfg, anchors, link=link, spd_anchor=spd_anchor)
    rel = float(np.linalg.norm(K_hat - K) / np.linalg.norm(K))
    exact = truncated_embedding(eig, cfg.t, cfg.m).coords
    approx = nystrom_embedding(K_hat, cfg.m, strict=False)
    mse = procrustes_align(approx, exact).mse
    iu = np.triu_indices(n, 1)
    pear = distance_correlation(kernel_distances(K_hat)[iu], kernel_distances(K)[iu])
    K_AA = K[np.ix_(anchors, anchors)]
    lam = default_lambda(K_AA) if cfg.lambda_reg is None else cfg.lambda_reg
    A_tri = None
    if cfg.m + 1 <= n:
        tri = select_anchors(g, truncated_embedding(eig, cfg.t, cfg.m), cfg.m + 1, strategy="fps")
        A_tri = build_system(tri, check=False).A
    diag = conditioning_diagnostics(K_AA, A_tri)
    return ApproxReport(graph_id, n, k, lam, cfg.cross_mode, rel, mse, pear,
                        diag["log10_cond_KAA"], diag.get("log10_cond_A_tri", float("nan")),
                        rank_k_floor(eig, cfg.t, k))
