"""Per-node positional features: DE, LapPE, RWSE and HKS."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, node_anchor_distances, UNREACHABLE
from .linkage import radial_transform
from .spectral import EigenSystem

RWSE_STEPS = (1, 2, 4, 8, 16)
HKS_TIMES = (0.1, 0.5, 1.0, 2.0, 5.0)
HKS_TRUNC = 32


@dataclass(eq=False)
class FeatureTable:
    kind: str
    values: np.ndarray
    params: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.kind} features contain non-finite entries")

    @property
    def columns(self) -> list[str]:
        return [f"{self.kind}_{j}" for j in range(self.values.shape[1])]

    def write(self, path: str | Path, provenance: dict | None = None) -> Path:
        """Write ``<path>`` as CSV and ``<path>.json`` as the parameter sidecar."""
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_id"] + self.columns)
            for v, row in enumerate(self.values):
                w.writerow([v] + [repr(float(x)) for x in row])
        side = {"kind": self.kind, "params": self.params, "metadata": self.metadata,
                "provenance": provenance or {}}
        path.with_suffix(path.suffix + ".json").write_text(
            json.dumps(side, indent=2, sort_keys=True, default=_jsonable), encoding="utf-8")
        return path


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x))


@dataclass(frozen=True)
class DEStats:
    """Standardization statistics for transformed distances, pooled over a training set."""

    mean: float
    std: float


def de_raw(g: Graph, anchors, kind: str = "exp_neg") -> np.ndarray:
    """Transformed distances before standardization.

    Hops are divided by the median nonzero node-anchor hop of this graph, then
    mapped by ``kind``. Unreachable pairs are treated as ``n`` hops.
    """
    d = node_anchor_distances(g, anchors).astype(float)
    d[d == UNREACHABLE] = g.n
    nz = d[d > 0]
    if nz.size == 0:
        raise ValueError("all node-anchor distances are zero")
    return radial_transform(d, kind, float(np.median(nz)))


def fit_de_stats(tables) -> DEStats:
    """Pooled mean/std over the entries of several raw DE matrices."""
    x = np.concatenate([np.asarray(t, dtype=float).ravel() for t in tables])
    sd = float(x.std())
    return DEStats(float(x.mean()), sd if sd > 0 else 1.0)


def emit_de(g: Graph, anchors, kind: str = "exp_neg", stats: DEStats | None = None) -> FeatureTable:
    a = np.asarray(anchors, dtype=np.int64)
    vals = de_raw(g, a, kind)
    if stats is not None:
        vals = (vals - stats.mean) / stats.std
    params = {"anchors": a.tolist(), "k": len(a), "psi": kind,
              "stats": None if stats is None else {"mean": stats.mean, "std": stats.std}}
    return FeatureTable("DE", vals, params)


def emit_lappe(eig: EigenSystem, m: int, noise_std: float = 0.0,
               seed: int | None = None) -> FeatureTable:
    """First ``m`` nontrivial eigenvectors, each standardized within the graph.

    Eigenvector signs (and bases of repeated eigenvalues) are arbitrary, so
    consumers must be sign-robust. ``noise_std`` adds Gaussian noise after
    standardization, as an optional training-time augmentation.
    """
    n = eig.n
    if not 1 <= m <= n - 1:
        raise ValueError(f"m must lie in [1, {n - 1}]")
    x = eig.eigenvectors[:, 1:m + 1]
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    flat = sd < 1e-12
    if flat.any():
        raise ValueError(f"zero-variance eigenvector column(s) {np.flatnonzero(flat).tolist()}")
    vals = (x - mu) / sd
    if noise_std > 0:
        vals = vals + noise_std * np.random.default_rng(seed).standard_normal(vals.shape)
    meta = {"sign_ambiguous": True,
            "eigenvalues": eig.eigenvalues[1:m + 1].tolist()}
    return FeatureTable("LapPE", vals, {"m": m, "noise_std": noise_std}, meta)


def walk_matrix(g: Graph) -> np.ndarray:
    """Row-stochastic ``P = D^{-1} A``."""
    deg = g.degrees.astype(float)
    if np.any(deg == 0):
        raise ValueError("random walk undefined at isolated nodes")
    return g.adjacency() / deg[:, None]


def emit_rwse(g: Graph, steps=RWSE_STEPS) -> FeatureTable:
    """Return probabilities ``(P^s)_{vv}`` for each step ``s``."""
    steps = sorted(int(s) for s in steps)
    if not steps or steps[0] < 1:
        raise ValueError("steps must be positive integers")
    P = walk_matrix(g)
    cols = []
    Pk, k = np.eye(g.n), 0
    for s in steps:
        while k < s:
            Pk = Pk @ P
            k += 1
        cols.append(np.diag(Pk).copy())
    return FeatureTable("RWSE", np.column_stack(cols), {"steps": steps})


def emit_hks(eig: EigenSystem, times=HKS_TIMES, trunc_k: int = HKS_TRUNC) -> FeatureTable:
    """Heat kernel signature ``sum_{j<=trunc_k} exp(-t lam_j) phi_j(v)^2``."""
    if not 1 <= trunc_k <= eig.n:
        raise ValueError(f"trunc_k must lie in [1, {eig.n}]")
    lam = np.maximum(eig.eigenvalues[:trunc_k], 0.0)
    phi2 = eig.eigenvectors[:, :trunc_k] ** 2
    t = np.asarray(times, dtype=float)
    vals = phi2 @ np.exp(-np.outer(lam, t))
    return FeatureTable("HKS", vals, {"times": t.tolist(), "trunc_k": trunc_k})
