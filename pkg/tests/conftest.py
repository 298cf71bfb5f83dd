import itertools

import numpy as np
import pytest
from hypothesis import assume, strategies as st

from spdbridge.graph import Graph, generate_random_regular, is_connected


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n, regular=True):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], 2 if regular else None)


def complete_graph(n, regular=True):
    return Graph.from_edges(n, list(itertools.combinations(range(n), 2)),
                            n - 1 if regular else None)


def star_graph(leaves):
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def random_connected(n, extra, seed):
    """Random spanning tree plus up to ``extra`` random chords."""
    rng = np.random.default_rng(seed)
    edges = {(int(rng.integers(0, v)), v) for v in range(1, n)}
    for _ in range(extra):
        u, v = sorted(int(x) for x in rng.integers(0, n, 2))
        if u != v:
            edges.add((u, v))
    perm = rng.permutation(n)
    return Graph.from_edges(n, [(int(perm[u]), int(perm[v])) for u, v in sorted(edges)])


@st.composite
def connected_graphs(draw, min_n=3, max_n=40):
    n = draw(st.integers(min_n, max_n))
    extra = draw(st.integers(0, 2 * n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_connected(n, extra, seed)


@st.composite
def regular_graphs(draw, min_n=6, max_n=40):
    r = draw(st.integers(3, 5))
    n = draw(st.integers(max(min_n, r + 1), max_n).filter(lambda k: k * r % 2 == 0))
    g = generate_random_regular(n, r, seed=draw(st.integers(0, 2**32 - 1)))
    assume(is_connected(g))
    return g


def bfs_oracle(g, s):
    """Plain queue BFS over Python lists."""
    adj = [list(g.neighbors(u)) for u in range(g.n)]
    dist = [-1] * g.n
    dist[s] = 0
    queue = [s]
    for u in queue:
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return np.array(dist)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
