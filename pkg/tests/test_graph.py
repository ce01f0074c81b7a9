from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from cosetexpanders import (
    EmptyGraphWarning,
    WeightedGraph,
    connectivity,
    read_edge_list,
    write_edge_list,
)


@pytest.fixture
def triangle() -> WeightedGraph:
    return WeightedGraph.from_edges(
        3,
        [(0, 1), (1, 2), (2, 0)],
        [Fraction(1, 2), Fraction(1, 3), 1],
        labels=["a", "b", "c"],
        graph_id="triangle",
    )


def test_rational_weights_share_a_scale(triangle: WeightedGraph) -> None:
    assert triangle.scale == Fraction(1, 6)
    assert_array_equal(triangle.weights, [3, 6, 2])
    assert triangle.edge_weight(0) == Fraction(1, 2)
    assert triangle.edge_weight(2) == Fraction(1, 3)


def test_vertex_weights_sum_incident_edges(triangle: WeightedGraph) -> None:
    assert_array_equal(triangle.vertex_weights(), [9, 5, 8])


def test_parallel_edges_merge() -> None:
    g = WeightedGraph.from_edges(2, [(0, 1), (1, 0)], [1, 2])
    assert g.n_edges == 1
    assert g.edge_weight(0) == 3


def test_weight_matrix_is_symmetric(triangle: WeightedGraph) -> None:
    W = triangle.weight_matrix().toarray()
    assert_array_equal(W, W.T)
    assert W[0, 2] == 6


@pytest.mark.parametrize(
    "edges, error",
    [
        ([(0, 0)], "self-loops"),
        ([(0, 5)], "outside"),
    ],
)
def test_invalid_edges(edges, error: str) -> None:
    with pytest.raises(ValueError, match=error):
        WeightedGraph.from_edges(3, edges)


def test_non_positive_weight_rejected() -> None:
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(2, [(0, 1)], [0])


def test_labels_must_cover_vertices() -> None:
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 1)], labels=["a"])


def test_neighbors_and_index(triangle: WeightedGraph) -> None:
    assert_array_equal(triangle.neighbors(1), [0, 2])
    assert triangle.index("c") == 2


def test_bipartiteness() -> None:
    odd = WeightedGraph.from_edges(5, [(k, (k + 1) % 5) for k in range(5)])
    even = WeightedGraph.from_edges(6, [(k, (k + 1) % 6) for k in range(6)])
    assert not odd.is_bipartite()
    coloring = even.two_coloring()
    assert coloring is not None
    assert_array_equal(coloring, [0, 1, 0, 1, 0, 1])


def test_relabel(triangle: WeightedGraph) -> None:
    moved = triangle.relabel({"a": 1, "b": 2, "c": 3})
    assert moved.edge_set() == {frozenset((1, 2)), frozenset((2, 3)), frozenset((1, 3))}
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(2, [(0, 1)]).relabel({})


def test_connectivity() -> None:
    path = WeightedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert connectivity(path)
    isolated = WeightedGraph.from_edges(3, [(0, 1)])
    assert not connectivity(isolated)


def test_empty_graph_warns() -> None:
    with pytest.warns(EmptyGraphWarning):
        assert not connectivity(WeightedGraph.from_edges(0, []))


def test_edge_list_export(triangle: WeightedGraph, tmp_path: Path) -> None:
    path = write_edge_list(triangle, tmp_path / "triangle.edges")
    header = path.read_text().splitlines()[0]
    assert header == "vertices=3 weighted=true"
    loaded = read_edge_list(path)
    assert loaded.graph_id == "triangle"
    assert loaded.labels == ("a", "b", "c")
    assert loaded.edge_set() == triangle.edge_set()
    assert [loaded.edge_weight(k) for k in range(3)] == [
        triangle.edge_weight(k) for k in range(3)
    ]


def test_unweighted_export(tmp_path: Path) -> None:
    square = WeightedGraph.from_edges(
        4, [(0, 1), (1, 2), (2, 3), (0, 3)], labels=[(1, 0), (2, 0), (1, 1), (2, 1)]
    )
    path = write_edge_list(square, tmp_path / "square.edges")
    lines = path.read_text().splitlines()
    assert lines[0] == "vertices=4 weighted=false"
    assert lines[1] == "0 1"
    assert read_edge_list(path).labels == square.labels


def test_empty_graph_export_refused(tmp_path: Path) -> None:
    with pytest.raises(ValueError):
        write_edge_list(WeightedGraph.from_edges(0, []), tmp_path / "empty.edges")


def test_edges_are_stored_sorted() -> None:
    g = WeightedGraph.from_edges(3, [(2, 1), (1, 0)])
    assert_array_equal(g.edges, np.array([[0, 1], [1, 2]]))
