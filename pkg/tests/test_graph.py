import itertools
import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spdbridge.graph import (UNREACHABLE, DisconnectedGraphError, EdgeListError, Graph,
                             GenerationError, all_pairs_distances, ball, bfs_distances,
                             default_radius, double_bfs_start, farthest_point_sampling,
                             generate_molecule_like, generate_random_regular, is_connected,
                             load_edge_list, node_anchor_distances, parse_edge_list,
                             write_edge_list)

from conftest import bfs_oracle, complete_graph, connected_graphs, cycle_graph, path_graph


class TestEdgeList:
    def test_path(self):
        g, stats = parse_edge_list(["0 1", "1 2"])
        assert g.n == 3 and g.num_edges == 2
        assert stats == (2, 0, 0)

    def test_duplicates_and_loops_dropped(self):
        g, stats = parse_edge_list(["0 1", "1 0", "0 0"])
        assert g.n == 2
        assert g.edges().tolist() == [[0, 1]]
        assert stats.duplicates_dropped == 1 and stats.loops_dropped == 1

    def test_max_id_sets_node_count(self):
        g, _ = parse_edge_list(["0 3"])
        assert g.n == 4
        assert g.degrees.tolist() == [1, 0, 0, 1]

    def test_comments_and_blanks(self):
        g, _ = parse_edge_list(["# header", "", "0 1  ", "  1 2"])
        assert g.num_edges == 2

    @pytest.mark.parametrize("bad", [["0 1 2"], ["0 x"], ["-1 2"], ["# only a comment"]])
    def test_malformed(self, bad):
        with pytest.raises(EdgeListError):
            parse_edge_list(bad)

    def test_error_reports_line(self):
        with pytest.raises(EdgeListError, match="line 2"):
            parse_edge_list(["0 1", "oops"])

    def test_roundtrip(self, tmp_path, caplog):
        p = tmp_path / "g.txt"
        p.write_text("0 1\n1 0\n2 2\n1 2\n")
        with caplog.at_level(logging.WARNING):
            g = load_edge_list(p)
        assert "1 duplicate" in caplog.text
        q = tmp_path / "h.txt"
        write_edge_list(g, q)
        assert load_edge_list(q).edges().tolist() == g.edges().tolist()

    def test_labels_sidecar(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("0 1\n")
        lab = tmp_path / "labels.txt"
        lab.write_text("0 carbon\n1 oxygen\n")
        assert load_edge_list(p, lab).labels == {0: "carbon", 1: "oxygen"}


class TestGraph:
    def test_csr_sorted_and_readonly(self):
        g = Graph.from_edges(4, [(3, 0), (0, 1), (2, 0)])
        assert g.neighbors(0).tolist() == [1, 2, 3]
        with pytest.raises(ValueError):
            g.indices[0] = 5

    def test_rejects_loops_and_duplicates(self):
        with pytest.raises(ValueError):
            Graph.from_edges(3, [(1, 1)])
        with pytest.raises(ValueError):
            Graph.from_edges(3, [(0, 1), (1, 0)])

    def test_regular_flag_checked(self):
        with pytest.raises(ValueError):
            Graph.from_edges(3, [(0, 1), (1, 2)], degree_regular=2)

    def test_relabel(self):
        g = path_graph(3)
        h = g.relabel(np.array([2, 0, 1]))
        assert sorted(map(tuple, h.edges().tolist())) == [(0, 1), (0, 2)]


class TestGenerator:
    def test_k4(self):
        g = generate_random_regular(4, 3, seed=7)
        assert g.edges().tolist() == [list(e) for e in itertools.combinations(range(4), 2)]

    def test_deterministic(self):
        a = generate_random_regular(256, 6, seed=11)
        b = generate_random_regular(256, 6, seed=11)
        assert np.array_equal(a.edges(), b.edges())

    def test_parity(self):
        with pytest.raises(ValueError, match="odd"):
            generate_random_regular(257, 3, seed=0)

    @pytest.mark.parametrize("n,r", [(10, 2), (5, 5)])
    def test_bad_degree(self, n, r):
        with pytest.raises(ValueError):
            generate_random_regular(n, r)

    def test_budget_exhaustion(self):
        with pytest.raises(GenerationError):
            generate_random_regular(20, 9, seed=3, max_restarts=1)

    @pytest.mark.parametrize("n", [16, 64])
    def test_regular_simple_over_seeds(self, n):
        for seed in range(100):
            g = generate_random_regular(n, 3, seed=seed)
            assert np.all(g.degrees == 3)
            e = g.edges()
            assert len({tuple(x) for x in e.tolist()}) == len(e) == 3 * n // 2

    def test_molecule_like(self):
        g = generate_molecule_like(120, seed=5)
        assert is_connected(g)
        assert g.degrees.max() <= 4
        assert g.num_edges > g.n - 1


class TestBFS:
    def test_examples(self):
        assert bfs_distances(path_graph(3), 0).tolist() == [0, 1, 2]
        assert bfs_distances(complete_graph(4), 0).tolist() == [0, 1, 1, 1]
        two = Graph.from_edges(4, [(0, 1), (2, 3)])
        assert bfs_distances(two, 0).tolist() == [0, 1, UNREACHABLE, UNREACHABLE]

    def test_node_anchor(self):
        assert node_anchor_distances(path_graph(3), [0, 2]).tolist() == [[0, 2], [1, 1], [2, 0]]
        assert node_anchor_distances(cycle_graph(4), [0])[:, 0].tolist() == [0, 1, 2, 1]
        with pytest.raises(ValueError):
            node_anchor_distances(path_graph(3), [])
        with pytest.raises(IndexError):
            node_anchor_distances(path_graph(3), [3])

    @settings(max_examples=60, deadline=None)
    @given(connected_graphs())
    def test_matches_oracle_and_triangle(self, g):
        D = all_pairs_distances(g)
        for s in range(0, g.n, max(1, g.n // 5)):
            assert np.array_equal(D[s], bfs_oracle(g, s))
        assert np.array_equal(D, D.T)
        assert np.all(np.diag(D) == 0)
        # triangle inequality: no detour through w is shorter, and w = v attains it
        via = (D[:, :, None] + D[None, :, :]).min(axis=1)
        assert np.array_equal(via, D)

    def test_ball(self):
        assert ball(path_graph(3), 1, 1).tolist() == [0, 1, 2]
        assert ball(path_graph(5), 3, 0).tolist() == [3]
        assert ball(cycle_graph(6), 0, 2).tolist() == [0, 1, 2, 4, 5]
        with pytest.raises(ValueError):
            ball(path_graph(3), 0, -1)

    def test_connectivity(self):
        assert is_connected(path_graph(3))
        assert is_connected(complete_graph(4))
        assert not is_connected(Graph.from_edges(4, [(0, 1), (2, 3)]))


class TestAnchors:
    def test_fps_path(self):
        assert farthest_point_sampling(path_graph(10), 2, start=0).tolist() == [0, 9]

    def test_fps_all(self):
        g = cycle_graph(7)
        assert sorted(farthest_point_sampling(g, 7).tolist()) == list(range(7))

    def test_fps_disconnected(self):
        with pytest.raises(DisconnectedGraphError):
            farthest_point_sampling(Graph.from_edges(4, [(0, 1), (2, 3)]), 2)

    @settings(max_examples=40, deadline=None)
    @given(connected_graphs(min_n=4), st.integers(1, 4))
    def test_fps_greedy_property(self, g, count):
        """Each pick maximizes the min distance to earlier picks (smallest id on ties)."""
        count = min(count, g.n)
        picks = farthest_point_sampling(g, count)
        assert picks[0] == double_bfs_start(g)
        D = all_pairs_distances(g)
        for i in range(1, count):
            md = D[:, picks[:i]].min(axis=1)
            assert picks[i] == int(np.argmax(md))

    def test_default_radius(self):
        assert [default_radius(n) for n in (256, 512, 1024, 2048)] == [6, 7, 7, 8]
        assert default_radius(1024, base=2) == 10
