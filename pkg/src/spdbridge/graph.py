"""Undirected simple graphs in CSR form, BFS distances and graph generators."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from . import _backend

log = logging.getLogger(__name__)

#: Hop distance stored for unreachable pairs.
UNREACHABLE = -1

DEFAULT_MAX_RESTARTS = 200_000


class EdgeListError(ValueError):
    """Malformed or empty edge-list input."""


class GenerationError(RuntimeError):
    """Random graph generation exhausted its restart budget."""


class DisconnectedGraphError(ValueError):
    """An operation that needs a connected graph received a disconnected one."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``.

    Neighbors of ``u`` are ``indices[indptr[u]:indptr[u+1]]``, sorted ascending.
    """

    indptr: np.ndarray
    indices: np.ndarray
    degree_regular: int | None = None
    labels: dict[int, str] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        if self.degree_regular is not None and np.any(self.degrees != self.degree_regular):
            raise ValueError(f"graph is not {self.degree_regular}-regular")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]] | np.ndarray,
                   degree_regular: int | None = None,
                   labels: dict[int, str] | None = None) -> "Graph":
        """Build from an edge array; the edges must already be simple."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loop in edge list")
        lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
        if len(np.unique(lo * n + hi)) != len(e):
            raise ValueError("duplicate edge in edge list")
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(indptr, dst.astype(np.int32), degree_regular, labels)

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def edges(self) -> np.ndarray:
        """Edges as an ``(E, 2)`` array with ``u < v``, lexicographically sorted."""
        src = np.repeat(np.arange(self.n), self.degrees)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep]])

    def adjacency(self) -> np.ndarray:
        """Dense 0/1 adjacency matrix."""
        a = np.zeros((self.n, self.n))
        a[np.repeat(np.arange(self.n), self.degrees), self.indices] = 1.0
        return a

    def relabel(self, perm: np.ndarray) -> "Graph":
        """Graph with node ``u`` renamed to ``perm[u]``."""
        perm = np.asarray(perm)
        return Graph.from_edges(self.n, perm[self.edges()], self.degree_regular)


class LoadStats(NamedTuple):
    edges: int
    duplicates_dropped: int
    loops_dropped: int


def parse_edge_list(lines: Iterable[str]) -> tuple[Graph, LoadStats]:
    """Parse ``u v`` lines (``#`` comments, blank lines ignored)."""
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"line {lineno}: expected two node ids, got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"line {lineno}: non-integer node id in {line!r}") from None
        if u < 0 or v < 0:
            raise EdgeListError(f"line {lineno}: negative node id in {line!r}")
        pairs.append((u, v))
    if not pairs:
        raise EdgeListError("edge list contains no edges")
    e = np.asarray(pairs, dtype=np.int64)
    n = int(e.max()) + 1
    loops = e[:, 0] == e[:, 1]
    e = e[~loops]
    lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
    keys, first = np.unique(lo * n + hi, return_index=True)
    dups = len(e) - len(keys)
    e = np.column_stack([lo[np.sort(first)], hi[np.sort(first)]])
    stats = LoadStats(len(e), int(dups), int(loops.sum()))
    return Graph.from_edges(n, e), stats


def load_edge_list(path: str | Path, labels_path: str | Path | None = None) -> Graph:
    """Read an edge-list file; duplicates and self-loops are dropped with a warning.

    ``labels_path`` optionally names a sidecar with ``id label`` lines; labels are
    carried for output only.
    """
    with open(path, encoding="utf-8") as fh:
        g, stats = parse_edge_list(fh)
    if stats.duplicates_dropped or stats.loops_dropped:
        log.warning("%s: dropped %d duplicate edge(s) and %d self-loop(s)",
                    path, stats.duplicates_dropped, stats.loops_dropped)
    if labels_path is not None:
        labels = {}
        with open(labels_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip() and not line.startswith("#"):
                    k, _, v = line.strip().partition(" ")
                    labels[int(k)] = v.strip()
        g = Graph(g.indptr, g.indices, labels=labels)
    return g


def write_edge_list(g: Graph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def generate_random_regular(n: int, r: int, seed: int | None = None,
                            max_restarts: int = DEFAULT_MAX_RESTARTS) -> Graph:
    """Uniform random simple ``r``-regular graph by configuration-model rejection.

    Half-edges are matched by a uniform random permutation; any self-loop or
    multi-edge rejects the whole matching and restarts.
    """
    if r < 3:
        raise ValueError("degree r must be >= 3")
    if r >= n:
        raise ValueError("need r < n")
    if (n * r) % 2:
        raise ValueError(f"n*r = {n * r} is odd: no {r}-regular graph on {n} nodes")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), r)
    for _ in range(max_restarts):
        perm = rng.permutation(stubs)
        u, v = perm[0::2], perm[1::2]
        if np.any(u == v):
            continue
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        if len(np.unique(lo * n + hi)) != len(lo):
            continue
        return Graph.from_edges(n, np.column_stack([lo, hi]), degree_regular=r)
    raise GenerationError(f"no simple {r}-regular graph on {n} nodes after {max_restarts} restarts")


def generate_molecule_like(n: int, seed: int | None = None, max_degree: int = 4,
                           ring_fraction: float = 0.1) -> Graph:
    """Connected sparse graph resembling a molecular skeleton.

    A random recursive tree with degree cap ``max_degree`` plus about
    ``ring_fraction * n`` ring closures between nodes 4 or 5 hops apart.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    deg = np.zeros(n, dtype=np.int64)
    edges: list[tuple[int, int]] = []
    for v in range(1, n):
        open_nodes = np.flatnonzero(deg[:v] < max_degree)
        u = int(rng.choice(open_nodes))
        edges.append((u, v))
        deg[u] += 1
        deg[v] += 1
    g = Graph.from_edges(n, edges)
    spd = all_pairs_distances(g)
    existing = {(u, v) for u, v in edges}
    rings = max(1, int(round(ring_fraction * n)))
    for _ in range(50 * rings):
        if rings == 0:
            break
        u, v = (int(x) for x in rng.integers(0, n, 2))
        a, b = min(u, v), max(u, v)
        if (a != b and deg[a] < max_degree and deg[b] < max_degree
                and spd[a, b] in (4, 5) and (a, b) not in existing):
            existing.add((a, b))
            deg[a] += 1
            deg[b] += 1
            rings -= 1
    return Graph.from_edges(n, sorted(existing))


def _check_node(g: Graph, u: int) -> None:
    if not 0 <= u < g.n:
        raise IndexError(f"node {u} out of range for n={g.n}")


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes hold :data:`UNREACHABLE`."""
    _check_node(g, source)
    return _backend.bfs_multi(g.indptr, g.indices, np.array([source], dtype=np.int64))[:, 0]


def node_anchor_distances(g: Graph, anchors) -> np.ndarray:
    """``(n, k)`` int32 matrix whose column ``i`` is the BFS distance from ``anchors[i]``."""
    a = np.asarray(anchors, dtype=np.int64).ravel()
    if a.size == 0:
        raise ValueError("anchor list is empty")
    for u in a:
        _check_node(g, int(u))
    return _backend.bfs_multi(g.indptr, g.indices, a)


def all_pairs_distances(g: Graph) -> np.ndarray:
    return node_anchor_distances(g, np.arange(g.n))


def ball(g: Graph, u: int, R: int) -> np.ndarray:
    """Sorted ids of nodes within ``R`` hops of ``u``."""
    if R < 0:
        raise ValueError("radius must be >= 0")
    d = bfs_distances(g, u)
    return np.flatnonzero((d >= 0) & (d <= R))


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        raise ValueError("empty graph")
    return bool(np.all(bfs_distances(g, 0) >= 0))


def require_connected(g: Graph) -> None:
    if not is_connected(g):
        raise DisconnectedGraphError("graph is not connected")


def double_bfs_start(g: Graph) -> int:
    """Peripheral node estimate: farthest node from the farthest node of node 0."""
    d0 = bfs_distances(g, 0)
    far = int(np.argmax(d0))
    d1 = bfs_distances(g, far)
    return int(np.argmax(d1))


def farthest_point_sampling(g: Graph, count: int, start: int | None = None) -> np.ndarray:
    """Greedy anchors maximizing the minimum hop distance to those already chosen.

    Ties go to the smallest node id. ``start`` defaults to :func:`double_bfs_start`.
    """
    if count > g.n:
        raise ValueError(f"count {count} exceeds n={g.n}")
    if count < 1:
        raise ValueError("count must be >= 1")
    require_connected(g)
    s = double_bfs_start(g) if start is None else int(start)
    _check_node(g, s)
    chosen = [s]
    mindist = np.full(g.n, np.iinfo(np.int64).max, dtype=np.int64)
    nxt = _backend.min_update_argmax(mindist, bfs_distances(g, s))
    while len(chosen) < count:
        # mindist[nxt] > 0 here, since count <= n and chosen nodes sit at 0
        chosen.append(int(nxt))
        nxt = _backend.min_update_argmax(mindist, bfs_distances(g, int(nxt)))
    return np.asarray(chosen, dtype=np.int64)


def default_radius(n: int, base: float = math.e) -> int:
    """Locality radius ``ceil(log n)``; natural log unless ``base`` is given."""
    return max(1, math.ceil(math.log(n) / math.log(base)))
