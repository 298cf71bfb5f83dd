import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spdbridge.graph import all_pairs_distances, farthest_point_sampling, generate_molecule_like
from spdbridge.linkage import fit_isotonic, link_samples
from spdbridge.nystrom import (NystromConfig, RankDeficientError, SingularBlockError,
                               approximate_graph, ccdf, conditioning_diagnostics,
                               distance_correlation, kernel_distances, log10_cond,
                               nystrom_embedding, nystrom_kernel, procrustes_align, rank_k_floor)
from spdbridge.spectral import graph_eigensystem, heat_kernel, truncated_embedding

from conftest import connected_graphs, cycle_graph, random_connected


def random_orthogonal(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestKernel:
    @settings(max_examples=20, deadline=None)
    @given(connected_graphs(min_n=3, max_n=128), st.floats(0.2, 2.0))
    def test_full_rank_exact(self, g, t):
        eig = graph_eigensystem(g)
        cfg = NystromConfig(k=g.n, t=t, lambda_reg=0.0, cross_mode="exact_columns")
        K_hat = nystrom_kernel(eig, cfg, np.arange(g.n))
        assert rel(K_hat, heat_kernel(eig, 2 * t)) <= 1e-8

    def test_single_anchor(self):
        g = cycle_graph(9)
        eig = graph_eigensystem(g)
        cfg = NystromConfig(k=1, lambda_reg=0.01, cross_mode="exact_columns")
        K = heat_kernel(eig, 2.0)
        want = np.outer(K[:, 4], K[:, 4]) / (K[4, 4] + 0.01)
        assert np.allclose(nystrom_kernel(eig, cfg, [4]), want, atol=1e-14)

    @settings(max_examples=15, deadline=None)
    @given(connected_graphs(min_n=10, max_n=60), st.sampled_from(["exact_columns",
                                                                  "distance_driven"]))
    def test_symmetric(self, g, mode):
        eig = graph_eigensystem(g)
        a = farthest_point_sampling(g, 5)
        K = heat_kernel(eig, 2.0)
        spd = all_pairs_distances(g)
        link = fit_isotonic(*link_samples(spd, kernel_distances(K), 3, upper_only=True))
        K_hat = nystrom_kernel(eig, NystromConfig(k=5, cross_mode=mode), a, link=link, g=g)
        assert np.abs(K_hat - K_hat.T).max() <= 1e-10

    @pytest.mark.parametrize("n", [8, 11])
    def test_perfect_link_matches_exact(self, n):
        g = cycle_graph(n)
        eig = graph_eigensystem(g)
        K = heat_kernel(eig, 2.0)
        spd = all_pairs_distances(g)
        link = fit_isotonic(*link_samples(spd, kernel_distances(K), n // 2, upper_only=True))
        a = farthest_point_sampling(g, 3)
        exact = nystrom_kernel(eig, NystromConfig(k=3, cross_mode="exact_columns"), a)
        dd = nystrom_kernel(eig, NystromConfig(k=3), a, link=link, g=g)
        assert rel(dd, exact) <= 1e-8

    def test_singular_unregularized(self):
        g = cycle_graph(12)
        eig = graph_eigensystem(g)
        cfg = NystromConfig(k=12, t=40.0, lambda_reg=0.0, cross_mode="exact_columns")
        with pytest.raises(SingularBlockError):
            nystrom_kernel(eig, cfg, np.arange(12))

    def test_errors(self):
        eig = graph_eigensystem(cycle_graph(6))
        with pytest.raises(ValueError):
            nystrom_kernel(eig, NystromConfig(k=2, cross_mode="exact_columns"), [1, 1])
        with pytest.raises(ValueError):
            nystrom_kernel(eig, NystromConfig(k=2), [1, 2])
        with pytest.raises(ValueError):
            NystromConfig(cross_mode="other")
        with pytest.raises(ValueError):
            NystromConfig(lambda_reg=-1)

    def test_monotone_in_k(self):
        """Median error over a random corpus does not grow as anchors are added."""
        meds = []
        graphs = [random_connected(int(n), int(n) // 4, seed)
                  for seed, n in enumerate(np.random.default_rng(0).integers(50, 201, 20))]
        eigs = [graph_eigensystem(g) for g in graphs]
        for k in (4, 8, 16, 32):
            errs = []
            for g, eig in zip(graphs, eigs):
                cfg = NystromConfig(k=k, cross_mode="exact_columns")
                K_hat = nystrom_kernel(eig, cfg, farthest_point_sampling(g, k))
                errs.append(rel(K_hat, heat_kernel(eig, 2.0)))
            meds.append(np.median(errs))
        assert all(b <= a for a, b in zip(meds, meds[1:]))


class TestEmbedding:
    @settings(max_examples=20, deadline=None)
    @given(connected_graphs(min_n=6, max_n=50), st.integers(1, 4))
    def test_exact_kernel_recovers_coords(self, g, m):
        eig = graph_eigensystem(g)
        m = min(m, g.n - 2)
        coords = nystrom_embedding(heat_kernel(eig, 2.0), m)
        exact = truncated_embedding(eig, 1.0, m).coords
        assert procrustes_align(coords, exact).mse <= 1e-12 or \
            abs(eig.eigenvalues[m + 1] - eig.eigenvalues[m]) < 1e-8

    def test_rank_one(self):
        v = np.arange(1.0, 6.0)
        K_hat = np.outer(v, v)
        with pytest.raises(RankDeficientError) as exc:
            nystrom_embedding(K_hat, 1)
        assert exc.value.rank == 1
        out = nystrom_embedding(K_hat, 1, strict=False)
        assert out.shape == (5, 1) and np.all(out == 0)

    def test_not_psd(self):
        with pytest.raises(ValueError):
            nystrom_embedding(np.diag([1.0, -1.0, 2.0]), 1)


class TestProcrustes:
    def test_rotation_recovered(self, rng):
        X = rng.standard_normal((30, 4))
        res = procrustes_align(X, X @ random_orthogonal(rng, 4))
        assert res.mse <= 1e-12

    def test_identity(self, rng):
        X = rng.standard_normal((10, 3))
        res = procrustes_align(X, X)
        assert res.mse == pytest.approx(0, abs=1e-28)
        assert np.allclose(res.rotation, np.eye(3))

    def test_reflection(self, rng):
        X = rng.standard_normal((10, 3))
        assert procrustes_align(-X, X).mse <= 1e-28

    def test_scale_flag(self, rng):
        X = rng.standard_normal((10, 3))
        assert procrustes_align(X, 3 * X, scale=True).mse <= 1e-24
        assert procrustes_align(X, 3 * X).mse > 0.1

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 5))
    def test_beats_random_orthogonal(self, seed, d):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((25, d))
        Y = rng.standard_normal((25, d))
        res = procrustes_align(X, Y)
        Xc, Yc = X - X.mean(0), Y - Y.mean(0)
        for _ in range(100):
            Q = random_orthogonal(rng, d)
            assert res.mse <= np.mean((Xc @ Q - Yc) ** 2) + 1e-12


class TestDiagnostics:
    def test_correlation(self):
        d = np.array([0.1, 0.5, 0.2, 0.9])
        assert distance_correlation(d, d) == pytest.approx(1.0)
        assert distance_correlation([1.0, 2.0], [5.0, 3.0]) == pytest.approx(-1.0)
        with pytest.raises(ValueError):
            distance_correlation([1.0, 1.0], [1.0, 2.0])

    def test_log10_cond(self):
        assert log10_cond(np.eye(3)) == 0
        assert log10_cond(np.diag([1.0, 1e-4])) == pytest.approx(4)
        assert log10_cond(np.zeros((2, 2))) == float("inf")
        out = conditioning_diagnostics(np.eye(2), np.diag([10.0, 1.0]))
        assert out == {"log10_cond_KAA": 0.0, "log10_cond_A_tri": pytest.approx(1.0)}

    def test_ccdf(self):
        v, p = ccdf([3, 1, 2])
        assert v.tolist() == [1, 2, 3]
        assert np.allclose(p, [1, 2 / 3, 1 / 3])

    def test_rank_floor_bounds_error(self):
        g = generate_molecule_like(80, seed=1)
        eig = graph_eigensystem(g)
        K = heat_kernel(eig, 2.0)
        w, V = np.linalg.eigh(K)
        best = (V[:, -8:] * w[-8:]) @ V[:, -8:].T
        assert rel(best, K) == pytest.approx(rank_k_floor(eig, 1.0, 8), rel=1e-8)
        cfg = NystromConfig(k=8, cross_mode="exact_columns")
        K_hat = nystrom_kernel(eig, cfg, farthest_point_sampling(g, 8))
        assert rel(K_hat, K) >= rank_k_floor(eig, 1.0, 8) - 1e-12

    @pytest.mark.parametrize("mode", ["distance_driven", "exact_columns"])
    def test_approximate_graph(self, mode):
        g = generate_molecule_like(60, seed=4)
        rep = approximate_graph(g, NystromConfig(k=16, cross_mode=mode), "mol")
        row = rep.to_row()
        assert row["graph_id"] == "mol" and row["n"] == 60 and row["k"] == 16
        for key in ("rel_kernel_frob", "coord_mse", "dist_pearson", "log10_cond_KAA",
                    "log10_cond_A_tri", "rank_k_floor", "lam"):
            assert np.isfinite(row[key])
        assert rep.rel_kernel_frob >= rep.rank_k_floor - 1e-12
