"""Normalized Laplacians, dense eigendecomposition, heat kernels and diffusion distances.

Conventions: eigenpairs ``(lam[j], phi[:, j])`` are ascending; index 0 is the
trivial mode (``lam = 0``) and is never part of a truncated embedding.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph

TIE_TOL = 1e-9
SYMMETRY_TOL = 1e-12


class SpectralError(RuntimeError):
    """Eigendecomposition failed or its input was invalid."""


class EigenspaceSplitWarning(UserWarning):
    """A truncation boundary cuts through a (numerically) repeated eigenvalue."""


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    laplacian_mode: str = "regular"

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def decay(self, t: float) -> np.ndarray:
        """``exp(-t * lam)`` with round-off negatives clamped to zero first."""
        return np.exp(-t * np.maximum(self.eigenvalues, 0.0))


@dataclass(frozen=True, eq=False)
class DiffusionEmbedding:
    """Truncated diffusion coordinates: ``coords[v, j] = exp(-t lam_{j+1}) phi_{j+1}(v)``."""

    t: float
    m: int
    coords: np.ndarray

    @property
    def n(self) -> int:
        return self.coords.shape[0]


def laplacian(g: Graph, mode: str = "regular") -> np.ndarray:
    """Dense normalized Laplacian.

    ``regular``: ``I - A/r`` (requires ``g.degree_regular``).
    ``general``: ``I - D^{-1/2} A D^{-1/2}`` (requires min degree >= 1).
    """
    a = g.adjacency()
    if mode == "regular":
        if g.degree_regular is None:
            raise ValueError("regular-mode Laplacian needs an r-regular graph")
        return np.eye(g.n) - a / g.degree_regular
    if mode == "general":
        deg = g.degrees.astype(float)
        if np.any(deg == 0):
            raise ValueError("general-mode Laplacian undefined with isolated nodes")
        s = 1.0 / np.sqrt(deg)
        return np.eye(g.n) - s[:, None] * a * s[None, :]
    raise ValueError(f"unknown Laplacian mode {mode!r}")


def auto_mode(g: Graph) -> str:
    return "regular" if g.degree_regular is not None else "general"


def eigendecompose(L: np.ndarray, mode: str = "regular") -> EigenSystem:
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError("Laplacian must be square")
    asym = np.max(np.abs(L - L.T)) if L.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValueError(f"matrix not symmetric (max |L - L^T| = {asym:.3g})")
    try:
        lam, phi = np.linalg.eigh(L)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigensolver did not converge: {exc}") from exc
    return EigenSystem(lam, phi, mode)


def graph_eigensystem(g: Graph, mode: str | None = None) -> EigenSystem:
    mode = mode or auto_mode(g)
    return eigendecompose(laplacian(g, mode), mode)


def heat_kernel(eig: EigenSystem, t: float) -> np.ndarray:
    """``K_t = sum_j exp(-t lam_j) phi_j phi_j^T``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    phi = eig.eigenvectors
    k = (phi * eig.decay(t)) @ phi.T
    return 0.5 * (k + k.T)


def diffusion_distance(eig: EigenSystem, t: float, u: int, v: int,
                       method: str = "spectral_sum") -> float:
    """Diffusion distance ``d_t(u, v)`` by the spectral sum or the kernel identity."""
    if t <= 0:
        raise ValueError("t must be > 0")
    for x in (u, v):
        if not 0 <= x < eig.n:
            raise IndexError(f"node {x} out of range for n={eig.n}")
    phi = eig.eigenvectors
    if method == "spectral_sum":
        diff = phi[u] - phi[v]
        return float(np.sqrt(np.sum(eig.decay(2 * t) * diff * diff)))
    if method == "kernel_identity":
        w = eig.decay(2 * t)
        kuu = np.sum(w * phi[u] ** 2)
        kvv = np.sum(w * phi[v] ** 2)
        kuv = np.sum(w * phi[u] * phi[v])
        return float(np.sqrt(max(kuu + kvv - 2 * kuv, 0.0)))
    raise ValueError(f"unknown method {method!r}")


def diffusion_distance_matrix(eig: EigenSystem, t: float) -> np.ndarray:
    """All-pairs ``d_t`` from the kernel identity on ``K_{2t}``."""
    k = heat_kernel(eig, 2 * t)
    d = np.diag(k)
    sq = d[:, None] + d[None, :] - 2 * k
    np.fill_diagonal(sq, 0.0)
    return np.sqrt(np.maximum(sq, 0.0))


def truncated_embedding(eig: EigenSystem, t: float, m: int) -> DiffusionEmbedding:
    """Embedding from eigenpairs ``2..m+1`` (1-based), skipping the trivial one.

    Warns with :class:`EigenspaceSplitWarning` when ``lam_{m+1}`` and
    ``lam_{m+2}`` are tied, since the coordinates then depend on the basis
    chosen inside that eigenspace.
    """
    n = eig.n
    if not 1 <= m <= n - 1:
        raise ValueError(f"m must lie in [1, {n - 1}], got {m}")
    lam = eig.eigenvalues
    if m + 1 < n and abs(lam[m + 1] - lam[m]) < TIE_TOL:
        warnings.warn(f"truncation at m={m} splits a repeated eigenvalue "
                      f"({lam[m]:.12g})", EigenspaceSplitWarning, stacklevel=2)
    coords = eig.eigenvectors[:, 1:m + 1] * eig.decay(t)[1:m + 1]
    return DiffusionEmbedding(float(t), int(m), coords)


def pairwise_distances(x: np.ndarray, y: np.ndarray | None = None,
                       block: int = 256) -> np.ndarray:
    """Euclidean distances between rows of ``x`` and rows of ``y``.

    Computed from explicit differences (not the Gram expansion) so that small
    distances keep full relative precision.
    """
    y = x if y is None else y
    out = np.empty((x.shape[0], y.shape[0]))
    for lo in range(0, x.shape[0], block):
        d = x[lo:lo + block, None, :] - y[None, :, :]
        out[lo:lo + block] = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    return out


def truncated_distance(emb: DiffusionEmbedding, u: int, v: int) -> float:
    return float(np.linalg.norm(emb.coords[u] - emb.coords[v]))


def tail(eig: EigenSystem, t: float, m: int, u: int, v: int) -> float:
    """Spectral energy of modes ``m+2..n`` (1-based) between ``u`` and ``v``."""
    if not 1 <= m <= eig.n - 1:
        raise ValueError(f"m must lie in [1, {eig.n - 1}], got {m}")
    phi = eig.eigenvectors
    diff = phi[u, m + 1:] - phi[v, m + 1:]
    return float(np.sqrt(np.sum(eig.decay(2 * t)[m + 1:] * diff * diff)))


def write_embedding_csv(emb: DiffusionEmbedding, path: str | Path,
                        labels: dict[int, str] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        head = ["node_id"] + [f"phi_{j}" for j in range(emb.m)]
        if labels:
            head.insert(1, "label")
        fh.write(",".join(head) + "\n")
        for v, row in enumerate(emb.coords):
            cells = [str(v)]
            if labels:
                cells.append(labels.get(v, ""))
            cells.extend(repr(float(x)) for x in row)
            fh.write(",".join(cells) + "\n")
