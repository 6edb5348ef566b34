import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridlocal.grid import (
    DimensionError,
    Edge,
    GridGraph,
    GridSpec,
    build_grid,
    edge_count,
    grid_2d_edges,
    grid_3d_edges,
    isqrt_ceil,
    manhattan_distance,
)


def brute_edges(dims):
    verts = list(itertools.product(*(range(d) for d in dims)))
    vs = set(verts)
    count = 0
    for v in verts:
        for axis in range(3):
            w = list(v)
            w[axis] += 1
            count += tuple(w) in vs
    return count


@pytest.mark.parametrize("dims", [(1, 1, 1), (2, 1, 1), (3, 3, 1), (2, 2, 8), (3, 4, 5)])
def test_edge_count_matches_enumeration(dims):
    g = build_grid(GridSpec(dims))
    assert len(g.edges) == edge_count(dims) == brute_edges(dims)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_closed_form_edge_counts(n):
    assert grid_2d_edges(n) == brute_edges((n, n, 1))
    s = isqrt_ceil(n)
    assert grid_3d_edges(n) == brute_edges((s, s, 4 * s))


@given(st.integers(0, 10_000))
def test_isqrt_ceil(n):
    r = isqrt_ceil(n)
    assert r * r >= n and (r == 0 or (r - 1) ** 2 < n)


@settings(max_examples=50, deadline=None)
@given(st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4)), st.data())
def test_bfs_equals_manhattan(dims, data):
    g = GridGraph(GridSpec(dims))
    pick = st.tuples(*(st.integers(0, d - 1) for d in dims))
    a, b = data.draw(pick), data.draw(pick)
    assert g.bfs_distance(a, b) == manhattan_distance(a, b)


def test_edges_are_canonical_and_indexed():
    g = GridGraph(GridSpec((3, 2, 2)))
    for k, e in enumerate(g.edges):
        assert e.u < e.v
        assert g.edge_index[(e.u, e.v)] == k
        assert manhattan_distance(e.u, e.v) == 1
    assert g.edge((1, 0, 0), (0, 0, 0)) == Edge.between((0, 0, 0), (1, 0, 0))


def test_neighbors_and_connectivity():
    g = GridGraph(GridSpec((2, 2, 1)))
    assert sorted(g.neighbors((0, 0, 0))) == [(0, 1, 0), (1, 0, 0)]
    assert g.is_connected()


def test_errors():
    with pytest.raises(ValueError):
        GridSpec((0, 1, 1))
    with pytest.raises(ValueError):
        Edge.between((0, 0, 0), (1, 1, 0))
    with pytest.raises(DimensionError):
        manhattan_distance((0, 0), (0, 0, 0))
