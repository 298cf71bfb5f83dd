"""Trilateration of truncated diffusion coordinates from anchor distances.

With anchor positions ``p_1..p_{m+1}`` in R^m, subtracting the last squared
distance equation from the others leaves the linear system ``A z = b(r)`` with
``A = 2 [p_i - p_{m+1}]^T`` and
``b_i = |p_i|^2 - |p_{m+1}|^2 + r_{m+1}^2 - r_i^2``.
Radii come from a monotone link applied to hop distances.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, farthest_point_sampling, UNREACHABLE
from .linkage import MonotoneLink
from .spectral import DiffusionEmbedding, pairwise_distances

SINGULAR_RTOL = 1e-12


class DegenerateAnchorsError(np.linalg.LinAlgError):
    """Anchor positions are (numerically) affinely dependent."""


class BoundHypothesisError(ValueError):
    """The supplied error level is below the measured link residual."""


@dataclass(frozen=True, eq=False)
class AnchorSet:
    indices: np.ndarray
    positions: np.ndarray
    strategy: str = "explicit"
    jitter_eps: float = 0.0

    @property
    def m(self) -> int:
        return self.positions.shape[1]


@dataclass(frozen=True, eq=False)
class TrilaterationSystem:
    A: np.ndarray
    U: np.ndarray
    s: np.ndarray
    Vt: np.ndarray
    cond: float
    det_M_nonzero: bool

    @property
    def inv_op_norm(self) -> float:
        """``||A^{-1}||_op``, infinite when singular."""
        return float(1.0 / self.s[-1]) if self.s[-1] > 0 else float("inf")

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve ``A x = b`` for ``b`` of shape ``(m,)`` or ``(N, m)``."""
        if not self.det_M_nonzero:
            raise DegenerateAnchorsError("trilateration matrix is singular")
        return ((np.asarray(b) @ self.U) / self.s) @ self.Vt


def select_anchors(g: Graph, emb: DiffusionEmbedding, count: int, strategy: str = "uniform",
                   seed: int | None = None, jitter_eps: float = 0.0,
                   start: int | None = None, indices=None) -> AnchorSet:
    """Choose anchors and read their embedding rows.

    ``uniform`` samples without replacement, ``fps`` runs farthest-point
    sampling on hop distance, ``explicit`` takes ``indices``. With
    ``jitter_eps > 0`` the positions get ``jitter_eps``-scaled Gaussian noise.
    """
    if count > g.n:
        raise ValueError(f"count {count} exceeds n={g.n}")
    rng = np.random.default_rng(seed)
    if strategy == "uniform":
        idx = rng.choice(g.n, size=count, replace=False)
    elif strategy == "fps":
        idx = farthest_point_sampling(g, count, start=start)
    elif strategy == "explicit":
        idx = np.asarray(indices, dtype=np.int64)
        if len(idx) != count or len(np.unique(idx)) != count:
            raise ValueError("explicit anchors must be `count` distinct ids")
    else:
        raise ValueError(f"unknown anchor strategy {strategy!r}")
    idx = np.asarray(idx, dtype=np.int64)
    pos = emb.coords[idx].copy()
    if jitter_eps > 0:
        pos += jitter_eps * rng.standard_normal(pos.shape)
    return AnchorSet(idx, pos, strategy, float(jitter_eps))


def anchor_difference_matrix(positions: np.ndarray) -> np.ndarray:
    """``M = [p_1 - p_{m+1}, ..., p_m - p_{m+1}]`` (differences as columns)."""
    p = np.asarray(positions, dtype=float)
    return (p[:-1] - p[-1]).T


def _is_generic(sv: np.ndarray) -> bool:
    return bool(sv[0] > 0 and sv[-1] > SINGULAR_RTOL * sv[0])


def build_system(anchors: AnchorSet | np.ndarray, check: bool = True) -> TrilaterationSystem:
    """Assemble and factor ``A = 2 M^T``.

    With ``check`` a numerically singular ``A`` raises
    :class:`DegenerateAnchorsError`; otherwise the flag is just recorded.
    """
    p = anchors.positions if isinstance(anchors, AnchorSet) else np.asarray(anchors, float)
    if p.ndim != 2 or p.shape[0] != p.shape[1] + 1:
        raise ValueError(f"need (m+1, m) anchor positions, got {p.shape}")
    A = 2.0 * anchor_difference_matrix(p).T
    U, s, Vt = np.linalg.svd(A)
    generic = _is_generic(s)
    cond = float(s[0] / s[-1]) if generic else float("inf")
    if check and not generic:
        raise DegenerateAnchorsError(
            f"anchors are affinely dependent (singular values {s[0]:.3g} .. {s[-1]:.3g})")
    return TrilaterationSystem(A, U, s, Vt, cond, generic)


def rhs(anchors: AnchorSet | np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Right-hand side ``b(r)``; ``radii`` is ``(m+1,)`` or ``(N, m+1)``."""
    p = anchors.positions if isinstance(anchors, AnchorSet) else np.asarray(anchors, float)
    r = np.asarray(radii, dtype=float)
    sq = np.sum(p * p, axis=1)
    r2 = r * r
    return (sq[:-1] - sq[-1]) + r2[..., -1:] - r2[..., :-1]


def solve_radii(system: TrilaterationSystem, anchors: AnchorSet, radii: np.ndarray) -> np.ndarray:
    return system.solve(rhs(anchors, radii))


def reconstruct(system: TrilaterationSystem, anchors: AnchorSet, link: MonotoneLink,
                spd_row) -> np.ndarray:
    """``T(v) = A^{-1} b(psi(SPD(a_i, v)))``; accepts one row or a stack of rows."""
    d = np.asarray(spd_row)
    if np.any(d == UNREACHABLE) or np.any(d < 0):
        raise ValueError("hop distances must be finite (connected graph)")
    return solve_radii(system, anchors, link(d))


def frobenius_gap(D_diff: np.ndarray, D_spd: np.ndarray, link: MonotoneLink,
                  mask: np.ndarray | None = None) -> tuple[float, float]:
    """``||D_diff - psi(D_spd)||_F`` and that value divided by ``sqrt(n (m+1))``.

    ``mask`` restricts the sum to selected entries (the normalization is unchanged).
    """
    if D_diff.shape != D_spd.shape:
        raise ValueError(f"shape mismatch {D_diff.shape} vs {D_spd.shape}")
    r = D_diff - link(D_spd)
    if mask is not None:
        r = np.where(mask, r, 0.0)
    raw = float(np.linalg.norm(r))
    return raw, raw / np.sqrt(D_diff.size)


@dataclass(eq=False)
class ReconstructionReport:
    errors: np.ndarray
    bound_rhs: float
    in_radius: np.ndarray
    violations: np.ndarray
    cond: float
    inv_op_norm: float
    rho_R: float
    delta: float
    R: float

    @property
    def median_error(self) -> float:
        return float(np.median(self.errors))

    @property
    def n_violations(self) -> int:
        return int(self.violations.sum())

    def summary(self) -> dict:
        return {
            "median_error": self.median_error,
            "max_error": float(self.errors.max()),
            "cond_A": self.cond,
            "inv_op_norm": self.inv_op_norm,
            "rho_R": self.rho_R,
            "delta": self.delta,
            "R": self.R,
            "bound_rhs": self.bound_rhs,
            "violations": self.n_violations,
            "in_radius_nodes": int(self.in_radius.sum()),
        }

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_id", "error", "bound_rhs", "in_radius"])
            for v, (e, inr) in enumerate(zip(self.errors, self.in_radius)):
                w.writerow([v, repr(float(e)), repr(self.bound_rhs), int(inr)])


def pointwise_bound(inv_op_norm: float, m: int, rho_R: float, delta: float) -> float:
    """``||A^{-1}||_op sqrt(m) (4 rho_R delta + 2 delta^2)``."""
    return inv_op_norm * np.sqrt(m) * (4.0 * rho_R * delta + 2.0 * delta * delta)


def node_anchor_residual(emb: DiffusionEmbedding, anchors: AnchorSet, link: MonotoneLink,
                         spd_anchor: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Max ``|d_t^(m)(v, a_i) - psi(SPD(v, a_i))|`` over node-anchor entries."""
    d_diff = pairwise_distances(emb.coords, emb.coords[anchors.indices])
    r = np.abs(d_diff - link(spd_anchor))
    if mask is not None:
        r = r[mask]
    return float(r.max()) if r.size else 0.0


def check_pointwise_bound(system: TrilaterationSystem, anchors: AnchorSet,
                          emb: DiffusionEmbedding, link: MonotoneLink,
                          spd_anchor: np.ndarray, delta: float, R: float) -> ReconstructionReport:
    """Evaluate the reconstruction error of every node against the perturbation bound.

    ``delta`` must dominate the link residual on all node-anchor entries (that is
    the bound's hypothesis); a smaller value raises :class:`BoundHypothesisError`.
    Nodes beyond ``R`` from some anchor use the clamped link and are still
    covered because every radius stays below ``psi(R)``.
    """
    measured = node_anchor_residual(emb, anchors, link, spd_anchor)
    if delta < measured * (1 - 1e-12):
        raise BoundHypothesisError(f"delta={delta:.6g} is below the measured "
                                   f"node-anchor residual {measured:.6g}")
    T = reconstruct(system, anchors, link, spd_anchor)
    errors = np.linalg.norm(emb.coords - T, axis=1)
    rho = link.max_on(R) + delta
    bound = pointwise_bound(system.inv_op_norm, anchors.m, rho, delta)
    # round-off allowance for the solve itself
    slack = 1e-9 * system.cond * np.maximum(1.0, np.linalg.norm(T, axis=1))
    in_radius = np.all(spd_anchor <= R, axis=1)
    return ReconstructionReport(errors, float(bound), in_radius, errors > bound + slack,
                                system.cond, system.inv_op_norm, float(rho), float(delta),
                                float(R))


def degeneracy_probe(coords: np.ndarray | DiffusionEmbedding, trials: int,
                     seed: int | None = None, jitter_eps: float = 0.0) -> float:
    """Monte Carlo estimate of ``P(det M = 0)`` for i.i.d. uniform anchor draws.

    Draws are with replacement. Singularity uses the same relative
    singular-value threshold as :func:`build_system`.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x = coords.coords if isinstance(coords, DiffusionEmbedding) else np.asarray(coords, float)
    n, m = x.shape
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, n, size=(trials, m + 1))
    p = x[draws]
    if jitter_eps > 0:
        p = p + jitter_eps * rng.standard_normal(p.shape)
    M = np.swapaxes(p[:, :-1, :] - p[:, -1:, :], 1, 2)
    sv = np.linalg.svd(M, compute_uv=False)
    singular = ~((sv[:, 0] > 0) & (sv[:, -1] > SINGULAR_RTOL * sv[:, 0]))
    return float(singular.mean())
