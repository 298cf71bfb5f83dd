"""Experiment pipelines behind the CLI subcommands.

Every cell gets its own seed derived from the root seed and the cell key, so
results do not depend on execution order or worker count.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import platform
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _backend, __version__
from .encodings import (HKS_TIMES, HKS_TRUNC, RWSE_STEPS, de_raw, emit_de, emit_hks,
                        emit_lappe, emit_rwse, fit_de_stats)
from .graph import (Graph, all_pairs_distances, default_radius, farthest_point_sampling,
                    generate_molecule_like, generate_random_regular, is_connected,
                    load_edge_list, write_edge_list)
from .linkage import RADIAL_KINDS, fit_isotonic, link_samples, linkage_error
from .nystrom import NystromConfig, approximate_graph
from .spectral import (EigenspaceSplitWarning, graph_eigensystem, pairwise_distances,
                       truncated_embedding)
from .trilateration import (build_system, check_pointwise_bound, frobenius_gap,
                            node_anchor_residual, select_anchors)

log = logging.getLogger(__name__)

DEFAULT_NS = (256, 512, 1024, 2048)


def derive_seed(root: int, *key) -> int:
    """64-bit seed from ``root`` and a cell key, stable across processes and platforms."""
    h = hashlib.sha256(repr((int(root),) + tuple(key)).encode()).digest()
    return int.from_bytes(h[:8], "little")


# ---------------------------------------------------------------------------
# random regular validation

RRG_COLUMNS = [
    "n", "r", "t", "m", "R", "seed_index", "graph_seed", "scope",
    "delta_hat", "residual_rms", "pair_count",
    "delta_anchor", "delta_anchor_in_radius",
    "frob_gap_raw", "frob_gap", "frob_gap_in_radius", "frob_bound", "frob_violation",
    "tri_median_error", "tri_max_error", "cond_A", "inv_op_norm", "rho_R", "bound_rhs",
    "pointwise_violations", "eig_gap_at_m", "anchors", "error",
]


@dataclass(frozen=True)
class RRGCell:
    n: int
    seed_index: int
    root_seed: int = 0
    r: int = 6
    t: float = 1.0
    m: int = 8
    R: int | None = None
    log_base: float = math.e
    scope: str = "all_pairs"


def run_rrg_cell(cell: RRGCell) -> dict:
    """One (n, seed) cell of the random-regular validation."""
    row = {c: "" for c in RRG_COLUMNS}
    R = cell.R if cell.R is not None else default_radius(cell.n, cell.log_base)
    gseed = derive_seed(cell.root_seed, "rrg", cell.n, cell.r, cell.seed_index)
    row.update(n=cell.n, r=cell.r, t=cell.t, m=cell.m, R=R, seed_index=cell.seed_index,
               graph_seed=gseed, scope=cell.scope)
    try:
        row.update(_rrg_metrics(cell, R, gseed))
    except Exception as exc:  # per-cell isolation: record and move on
        log.error("rrg cell n=%d seed=%d failed: %s", cell.n, cell.seed_index, exc)
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _rrg_metrics(cell: RRGCell, R: int, gseed: int) -> dict:
    g = generate_random_regular(cell.n, cell.r, seed=gseed)
    eig = graph_eigensystem(g, "regular")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EigenspaceSplitWarning)
        emb = truncated_embedding(eig, cell.t, cell.m)
    spd = all_pairs_distances(g)
    dist = pairwise_distances(emb.coords)
    anchors = select_anchors(g, emb, cell.m + 1, "uniform",
                             seed=derive_seed(cell.root_seed, "anchors", gseed))
    spd_a = spd[:, anchors.indices]
    d_a = dist[:, anchors.indices]

    if cell.scope == "all_pairs":
        hops, targets = link_samples(spd, dist, R, upper_only=True)
    elif cell.scope == "node_anchor":
        hops, targets = link_samples(spd_a, d_a, R)
    else:
        raise ValueError(f"unknown scope {cell.scope!r}")
    link = fit_isotonic(hops, targets, radius=R)
    rep = linkage_error(link, hops, targets, R)

    strict = link.strictly_increasing()
    in_r = spd_a <= R
    delta = node_anchor_residual(emb, anchors, strict, spd_a)
    raw, norm = frobenius_gap(d_a, spd_a, strict)
    _, norm_in = frobenius_gap(d_a, spd_a, strict, mask=in_r)
    frob_bound = delta * math.sqrt(d_a.size)

    system = build_system(anchors)
    report = check_pointwise_bound(system, anchors, emb, strict, spd_a, delta, R)
    lam = eig.eigenvalues
    return {
        "delta_hat": rep.delta_hat, "residual_rms": rep.residual_rms,
        "pair_count": rep.pair_count,
        "delta_anchor": delta,
        "delta_anchor_in_radius": node_anchor_residual(emb, anchors, strict, spd_a, in_r),
        "frob_gap_raw": raw, "frob_gap": norm, "frob_gap_in_radius": norm_in,
        "frob_bound": frob_bound, "frob_violation": int(raw > frob_bound * (1 + 1e-12)),
        "tri_median_error": report.median_error, "tri_max_error": float(report.errors.max()),
        "cond_A": system.cond, "inv_op_norm": system.inv_op_norm, "rho_R": report.rho_R,
        "bound_rhs": report.bound_rhs, "pointwise_violations": report.n_violations,
        "eig_gap_at_m": float(lam[cell.m + 1] - lam[cell.m]),
        "anchors": " ".join(str(int(a)) for a in anchors.indices),
    }


def rrg_validate(ns: Sequence[int] = DEFAULT_NS, seeds: int = 3, root_seed: int = 0,
                 r: int = 6, t: float = 1.0, m: int = 8, R: int | None = None,
                 log_base: float = math.e, scope: str = "all_pairs",
                 jobs: int = 1) -> list[dict]:
    if not ns or seeds < 1:
        raise ValueError("empty parameter grid")
    cells = [RRGCell(int(n), s, root_seed, r, t, m, R, log_base, scope)
             for n in ns for s in range(seeds)]
    return run_cells(run_rrg_cell, cells, jobs)


def summarize_rrg(rows: Iterable[dict]) -> list[dict]:
    """Per-n aggregates over seeds."""
    by_n: dict[int, list[dict]] = {}
    for row in rows:
        if not row["error"]:
            by_n.setdefault(int(row["n"]), []).append(row)
    out = []
    for n in sorted(by_n):
        rs = by_n[n]
        col = lambda k: np.array([float(x[k]) for x in rs])  # noqa: E731
        out.append({
            "n": n, "R": rs[0]["R"], "seeds": len(rs),
            "delta_hat_mean": col("delta_hat").mean(), "delta_hat_std": col("delta_hat").std(),
            "frob_gap_mean": col("frob_gap").mean(), "frob_gap_std": col("frob_gap").std(),
            "tri_error_median": float(np.median(col("tri_median_error"))),
            "cond_A_median": float(np.median(col("cond_A"))),
            "pointwise_violations": int(col("pointwise_violations").sum()),
            "frob_violations": int(col("frob_violation").sum()),
        })
    return out


# ---------------------------------------------------------------------------
# corpus-level diffusion approximation

APPROX_COLUMNS = ["graph_id", "n", "k", "lam", "mode", "rel_kernel_frob", "coord_mse",
                  "dist_pearson", "log10_cond_KAA", "log10_cond_A_tri", "rank_k_floor"]


def _approx_one(args) -> dict | None:
    path, cfg, R = args
    g = load_edge_list(path)
    if not is_connected(g):
        log.warning("%s: disconnected, skipped", path)
        return None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EigenspaceSplitWarning)
        return approximate_graph(g, cfg, graph_id=Path(path).stem, R=R).to_row()


def diffusion_approx(paths: Sequence[str | Path], cfg: NystromConfig, R: int | None = None,
                     jobs: int = 1) -> tuple[list[dict], list[str]]:
    """Per-graph Nystrom diagnostics; returns rows and the skipped (disconnected) paths."""
    paths = sorted(str(p) for p in paths)
    if not paths:
        raise ValueError("no input graphs")
    results = run_cells(_approx_one, [(p, cfg, R) for p in paths], jobs)
    rows = [r for r in results if r is not None]
    skipped = [p for p, r in zip(paths, results) if r is None]
    return rows, skipped


def synth_corpus(outdir: str | Path, count: int = 20, n_min: int = 50, n_max: int = 200,
                 root_seed: int = 0) -> list[Path]:
    """Write ``count`` molecule-like edge lists with sizes in ``[n_min, n_max]``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    out = []
    for i in range(count):
        seed = derive_seed(root_seed, "corpus", i)
        n = int(np.random.default_rng(seed).integers(n_min, n_max + 1))
        p = outdir / f"graph_{i:03d}.txt"
        write_edge_list(generate_molecule_like(n, seed=seed), p)
        out.append(p)
    return out


# ---------------------------------------------------------------------------
# ablation over radial maps and anchor counts

ABLATION_COLUMNS = ["axis", "psi", "k", "graphs", "feat_mean", "feat_std",
                    "median_abs_pearson_psi_diffusion", "median_rel_kernel_frob_exact",
                    "median_rel_kernel_frob_distance_driven"]


def ablation_sweep(paths: Sequence[str | Path], psi_kinds: Sequence[str] = RADIAL_KINDS,
                   ks: Sequence[int] = (4, 8, 16, 32), fixed_k: int = 16,
                   fixed_psi: str = "exp_neg", t: float = 1.0, m: int = 8,
                   root_seed: int = 0) -> list[dict]:
    """Feature statistics and Nystrom diagnostics over the radial-map and anchor grids.

    The radial-map rows use ``fixed_k`` uniformly sampled anchors; the anchor
    rows use ``fixed_psi`` and FPS anchors. No downstream model is trained.
    """
    if not psi_kinds and not ks:
        raise ValueError("empty ablation grid")
    graphs = []
    for p in sorted(str(x) for x in paths):
        g = load_edge_list(p)
        if is_connected(g):
            graphs.append((Path(p).stem, g))
    if not graphs:
        raise ValueError("no connected input graphs")
    eigs = {gid: graph_eigensystem(g) for gid, g in graphs}
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EigenspaceSplitWarning)
        for psi in psi_kinds:
            feats, corrs = [], []
            for gid, g in graphs:
                k = min(fixed_k, g.n)
                a = np.random.default_rng(derive_seed(root_seed, "ablation", gid)) \
                    .choice(g.n, k, replace=False)
                x = de_raw(g, a, psi)
                emb = truncated_embedding(eigs[gid], t, min(m, g.n - 1))
                dd = pairwise_distances(emb.coords, emb.coords[a])
                feats.append(x)
                if np.ptp(x) > 0 and np.ptp(dd) > 0:
                    corrs.append(abs(np.corrcoef(x.ravel(), dd.ravel())[0, 1]))
            st = fit_de_stats(feats)
            rows.append({"axis": "psi", "psi": psi, "k": fixed_k, "graphs": len(graphs),
                         "feat_mean": st.mean, "feat_std": st.std,
                         "median_abs_pearson_psi_diffusion": float(np.median(corrs)),
                         "median_rel_kernel_frob_exact": "",
                         "median_rel_kernel_frob_distance_driven": ""})
        for k in ks:
            rel = {mode: [] for mode in ("exact_columns", "distance_driven")}
            feats = []
            for gid, g in graphs:
                for mode in rel:
                    cfg = NystromConfig(k=k, t=t, m=min(m, g.n - 1), cross_mode=mode)
                    rel[mode].append(approximate_graph(g, cfg, gid, eig=eigs[gid]).rel_kernel_frob)
                a = np.random.default_rng(derive_seed(root_seed, "ablation", gid)) \
                    .choice(g.n, min(k, g.n), replace=False)
                feats.append(de_raw(g, a, fixed_psi))
            st = fit_de_stats(feats)
            rows.append({"axis": "k", "psi": fixed_psi, "k": k, "graphs": len(graphs),
                         "feat_mean": st.mean, "feat_std": st.std,
                         "median_abs_pearson_psi_diffusion": "",
                         "median_rel_kernel_frob_exact": float(np.median(rel["exact_columns"])),
                         "median_rel_kernel_frob_distance_driven":
                             float(np.median(rel["distance_driven"]))})
    return rows


# ---------------------------------------------------------------------------
# feature emission

FEATURE_KINDS = ("DE", "LapPE", "RWSE", "HKS")


def emit_features(paths: Sequence[str | Path], kind: str, outdir: str | Path, *,
                  k: int = 16, psi: str = "exp_neg", anchor_strategy: str = "uniform",
                  stats_paths: Sequence[str | Path] | None = None, m: int = 8,
                  steps: Sequence[int] = RWSE_STEPS, times: Sequence[float] = HKS_TIMES,
                  trunc_k: int = HKS_TRUNC, root_seed: int = 0) -> list[Path]:
    """One feature CSV plus JSON sidecar per input graph.

    DE standardization statistics are pooled over ``stats_paths`` (the training
    files), defaulting to the inputs themselves.
    """
    if kind not in FEATURE_KINDS:
        raise ValueError(f"kind must be one of {FEATURE_KINDS}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = sorted(str(p) for p in paths)
    if not paths:
        raise ValueError("no input graphs")

    def de_anchors(gid: str, g: Graph) -> np.ndarray:
        kk = min(k, g.n)
        if anchor_strategy == "fps":
            return farthest_point_sampling(g, kk)
        return np.random.default_rng(derive_seed(root_seed, "de", gid)).choice(g.n, kk, replace=False)

    stats = None
    if kind == "DE":
        sp = sorted(str(p) for p in (stats_paths or paths))
        raws = []
        for p in sp:
            g = load_edge_list(p)
            raws.append(de_raw(g, de_anchors(Path(p).stem, g), psi))
        stats = fit_de_stats(raws)

    written = []
    for p in paths:
        gid = Path(p).stem
        g = load_edge_list(p)
        if kind == "DE":
            table = emit_de(g, de_anchors(gid, g), psi, stats)
        elif kind == "RWSE":
            table = emit_rwse(g, steps)
        else:
            eig = graph_eigensystem(g)
            if kind == "LapPE":
                table = emit_lappe(eig, min(m, g.n - 1))
            else:
                table = emit_hks(eig, times, min(trunc_k, g.n))
        prov = {"source": p, "root_seed": root_seed, "package_version": __version__}
        written.append(table.write(outdir / f"{gid}.{kind}.csv", prov))
    return written


# ---------------------------------------------------------------------------
# shared plumbing


def run_cells(fn: Callable, cells: list, jobs: int = 1) -> list:
    """Map ``fn`` over ``cells``; results come back in input order."""
    if jobs <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, cells))


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def write_csv(path: str | Path, rows: Sequence[dict], columns: Sequence[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c, "")) for c in columns])


def write_sidecar(path: str | Path, config: dict, **extra) -> None:
    """JSON sidecar with the full run configuration; the only place a timestamp goes."""
    payload = {"config": config, "backend": _backend.BACKEND, "package_version": __version__,
               "numpy": np.__version__, "python": platform.python_version(),
               "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"), **extra}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=str),
                          encoding="utf-8")
