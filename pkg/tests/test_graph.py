"""
test_graph.py

Tests for CSR graphs, the GCN normalization and sparse propagation
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal


def test_from_edges(path_graph):
    assert_array_equal(path_graph.csr_offsets, [0, 1, 2])
    assert_array_equal(path_graph.csr_cols, [1, 0])
    assert path_graph.n_edges == 1


def test_from_edges_cleans_input():
    from graphdistill.graph import Graph

    graph = Graph.from_edges(3, [(0, 1), (1, 0), (0, 1), (2, 2)])
    assert graph.n_edges == 1
    assert_array_equal(graph.degrees, [1, 1, 0])
    assert_array_equal(graph.edges(), [[0, 1]])


def test_edgeless_graph():
    from graphdistill.graph import Graph

    graph = Graph.from_edges(3, [])
    assert graph.n_edges == 0
    assert_array_equal(graph.csr_offsets, [0, 0, 0, 0])


@pytest.mark.parametrize(
    "offsets, cols",
    [
        # asymmetric
        ([0, 1, 1], [1]),
        # self-loop
        ([0, 1], [0]),
        # out of range
        ([0, 1, 2], [1, 2]),
        # duplicate neighbor
        ([0, 2, 4], [1, 1, 0, 0]),
    ],
    ids=["asymmetric", "self_loop", "out_of_range", "duplicate"],
)
def test_graph_validation(offsets, cols):
    from graphdistill.errors import ValidationError
    from graphdistill.graph import Graph

    with pytest.raises(ValidationError):
        Graph(len(offsets) - 1, offsets, cols)


def test_normalize_isolated_node():
    from graphdistill.graph import Graph, normalize_adjacency

    adjacency = normalize_adjacency(Graph.from_edges(1, []))
    assert_allclose(adjacency.to_dense(), [[1.0]])


def test_normalize_path(path_graph):
    from graphdistill.graph import normalize_adjacency

    adjacency = normalize_adjacency(path_graph)
    assert_allclose(adjacency.to_dense(), np.full((2, 2), 0.5))


def test_normalize_triangle(triangle):
    from graphdistill.graph import normalize_adjacency

    adjacency = normalize_adjacency(triangle)
    assert_allclose(adjacency.to_dense(), np.full((3, 3), 1 / 3))
    assert adjacency.value(0, 2) == pytest.approx(1 / 3)


def test_normalized_adjacency_is_symmetric():
    from graphdistill.graph import Graph, normalize_adjacency

    graph = Graph.from_edges(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
    dense = normalize_adjacency(graph).to_dense()
    assert_array_equal(dense, dense.T)
    assert_allclose(np.diag(dense), 1.0 / (graph.degrees + 1))


def test_spmm_path(path_graph):
    from graphdistill.graph import normalize_adjacency, spmm

    test = spmm(normalize_adjacency(path_graph), [[2.0], [4.0]])
    assert_allclose(test.data, [[3.0], [3.0]])


def test_spmm_isolated_nodes_is_identity():
    from graphdistill.graph import Graph, normalize_adjacency, spmm

    h = np.arange(6.0).reshape(3, 2)
    test = spmm(normalize_adjacency(Graph.from_edges(3, [])), h)
    assert_array_equal(test.data, h)


def test_spmm_row_mismatch(path_graph):
    from graphdistill.errors import DimensionError
    from graphdistill.graph import normalize_adjacency, spmm

    with pytest.raises(DimensionError):
        spmm(normalize_adjacency(path_graph), np.ones((3, 1)))


def test_spmm_gradient_matches_dense():
    from graphdistill.graph import Graph, normalize_adjacency, spmm
    from graphdistill.numerics import (
        ComputeTape,
        Parameter,
        backward,
        make_rng,
        matmul,
        reduce_sum,
        square,
    )

    graph = Graph.from_edges(5, [(0, 1), (0, 2), (2, 3), (3, 4), (1, 4)])
    adjacency = normalize_adjacency(graph)
    values = make_rng(0, "init").standard_normal((5, 3))

    sparse_h = Parameter("h", values)
    tape = ComputeTape()
    sparse_grads = backward(tape, reduce_sum(square(spmm(adjacency, tape.watch(sparse_h)))))

    dense_h = Parameter("h", values)
    tape = ComputeTape()
    dense = matmul(adjacency.to_dense(), tape.watch(dense_h))
    dense_grads = backward(tape, reduce_sum(square(dense)))

    assert_allclose(sparse_grads["h"], dense_grads["h"], atol=1e-10)


def test_induced_subgraph():
    from graphdistill.graph import Graph, induced_subgraph

    graph = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    subgraph, nodes = induced_subgraph(graph, [3, 1, 2])
    assert_array_equal(nodes, [1, 2, 3])
    assert_array_equal(subgraph.edges(), [[0, 1], [1, 2]])
    subgraph.validate()
