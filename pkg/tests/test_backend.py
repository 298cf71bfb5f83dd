import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spdbridge import _backend, _fallback
from spdbridge.graph import all_pairs_distances, generate_random_regular

from conftest import connected_graphs

try:
    from spdbridge import _kernels
except ImportError:  # pure-Python install
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled kernels not built")


def test_backend_name():
    assert _backend.BACKEND in ("cython", "python")
    if _kernels is not None:
        assert _backend.BACKEND == "cython"


def test_fallback_bfs_with_isolated_nodes():
    indptr = np.array([0, 1, 2, 2], dtype=np.int64)
    indices = np.array([1, 0], dtype=np.int32)
    out = _fallback.bfs_multi(indptr, indices, np.array([0, 2], dtype=np.int64))
    assert out.tolist() == [[0, -1], [1, -1], [-1, 0]]


@needs_ext
@settings(max_examples=40, deadline=None)
@given(connected_graphs(max_n=80))
def test_bfs_agree(g):
    src = np.arange(g.n, dtype=np.int64)
    a = _kernels.bfs_multi(g.indptr, g.indices, src)
    b = _fallback.bfs_multi(g.indptr, g.indices, src)
    assert a.dtype == b.dtype == np.int32
    assert np.array_equal(a, b)


@needs_ext
def test_bfs_agree_large():
    g = generate_random_regular(600, 4, seed=3)
    src = np.arange(0, 600, 7, dtype=np.int64)
    assert np.array_equal(_kernels.bfs_multi(g.indptr, g.indices, src),
                          _fallback.bfs_multi(g.indptr, g.indices, src))


@needs_ext
@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-1, 20), min_size=1, max_size=50), st.data())
def test_min_update_agree(dist, data):
    base = data.draw(st.lists(st.integers(0, 30), min_size=len(dist), max_size=len(dist)))
    m1 = np.array(base, dtype=np.int64)
    m2 = m1.copy()
    d = np.array(dist, dtype=np.int32)
    i1 = _kernels.min_update_argmax(m1, d)
    i2 = _fallback.min_update_argmax(m2, d)
    assert i1 == i2
    assert np.array_equal(m1, m2)


def test_all_pairs_symmetric():
    g = generate_random_regular(50, 3, seed=0)
    D = all_pairs_distances(g)
    assert np.array_equal(D, D.T)
