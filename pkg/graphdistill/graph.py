"""
graph.py

Immutable CSR graphs, the symmetric GCN normalization with self-loops and
the differentiable sparse-dense product built on it
"""
import numpy as np
from scipy import sparse

from graphdistill.errors import DimensionError, ValidationError
from graphdistill.log_utils import get_logger
from graphdistill.numerics import as_tensor, record

logger = get_logger(__file__)


class Graph:
    """Undirected, unweighted graph in CSR form without self-loops

    Parameters
    ----------
    n : int
        Number of nodes
    csr_offsets : array of int, length n + 1
    csr_cols : array of int
        Neighbor ids, sorted within each row
    validate : bool
        Check every structural invariant (symmetry, no duplicates, no
        self-loops, ids in range)
    """

    def __init__(self, n, csr_offsets, csr_cols, validate=True):
        self.n = int(n)
        self.csr_offsets = np.asarray(csr_offsets, dtype=np.int64)
        self.csr_cols = np.asarray(csr_cols, dtype=np.int64)
        self.csr_offsets.setflags(write=False)
        self.csr_cols.setflags(write=False)
        if validate:
            self.validate()

    @classmethod
    def from_edges(cls, n, edges):
        """Symmetrize, deduplicate and drop self-loops from an edge list"""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise ValidationError(f"Edge endpoint out of range for {n} nodes")
        self_loops = edges[:, 0] == edges[:, 1]
        if self_loops.any():
            logger.debug(f"Dropping {int(self_loops.sum())} self-loops")
        edges = edges[~self_loops]
        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        adjacency = sparse.csr_matrix(
            (np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n, n)
        )
        # Duplicates were summed by the constructor; keep the pattern only
        adjacency.sum_duplicates()
        adjacency.sort_indices()
        return cls(n, adjacency.indptr, adjacency.indices, validate=False)

    def validate(self):
        offsets, cols, n = self.csr_offsets, self.csr_cols, self.n
        if offsets.shape != (n + 1,) or offsets[0] != 0:
            raise ValidationError("CSR offsets must have n + 1 entries starting at 0")
        if np.any(np.diff(offsets) < 0):
            raise ValidationError("CSR offsets must be nondecreasing")
        if offsets[-1] != cols.size:
            raise ValidationError("Last CSR offset must equal the number of columns")
        if cols.size and (cols.min() < 0 or cols.max() >= n):
            raise ValidationError(f"Neighbor index out of range for {n} nodes")
        rows = np.repeat(np.arange(n), np.diff(offsets))
        if np.any(rows == cols):
            raise ValidationError("Self-loops must not be stored in a Graph")
        keys = rows * n + cols
        if np.unique(keys).size != keys.size:
            raise ValidationError("Duplicate neighbor within a row")
        adjacency = self.to_scipy()
        if (adjacency != adjacency.T).nnz != 0:
            raise ValidationError("Adjacency must be symmetric")

    @property
    def degrees(self):
        return np.diff(self.csr_offsets)

    @property
    def n_edges(self):
        """Number of undirected edges"""
        return int(self.csr_cols.size // 2)

    def neighbors(self, node):
        return self.csr_cols[self.csr_offsets[node] : self.csr_offsets[node + 1]]

    def to_scipy(self):
        return sparse.csr_matrix(
            (np.ones(self.csr_cols.size), self.csr_cols, self.csr_offsets),
            shape=(self.n, self.n),
        )

    def edges(self):
        """Each undirected edge once, as (src, dst) with src < dst"""
        rows = np.repeat(np.arange(self.n), self.degrees)
        upper = rows < self.csr_cols
        return np.column_stack([rows[upper], self.csr_cols[upper]])

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.n_edges})"


class NormalizedAdjacency:
    """D̃^-1/2 (A + I) D̃^-1/2 stored as a scipy CSR matrix"""

    def __init__(self, matrix):
        self.matrix = matrix

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def csr_offsets(self):
        return self.matrix.indptr

    @property
    def csr_cols(self):
        return self.matrix.indices

    @property
    def values(self):
        return self.matrix.data

    def value(self, i, j):
        return float(self.matrix[i, j])

    def to_dense(self):
        return self.matrix.toarray()

    def __repr__(self):
        return f"NormalizedAdjacency(n={self.n}, nnz={self.matrix.nnz})"


def normalize_adjacency(graph):
    """Symmetric normalization with self-loops

    Entry (i, j) is 1 / sqrt((d_i + 1)(d_j + 1)) where d is the degree in the
    original graph, computed per entry so the result is exactly symmetric.
    """
    n = graph.n
    with_loops = graph.to_scipy() + sparse.identity(n, format="csr")
    with_loops = sparse.csr_matrix(with_loops)
    with_loops.sort_indices()
    degrees_plus_one = graph.degrees.astype(np.float64) + 1.0
    rows = np.repeat(np.arange(n), np.diff(with_loops.indptr))
    values = 1.0 / np.sqrt(degrees_plus_one[rows] * degrees_plus_one[with_loops.indices])
    matrix = sparse.csr_matrix(
        (values, with_loops.indices.copy(), with_loops.indptr.copy()), shape=(n, n)
    )
    return NormalizedAdjacency(matrix)


def spmm(adjacency, h):
    """Sparse-dense product ÂH; differentiable in H, Â is constant"""
    h = as_tensor(h)
    if h.data.ndim != 2 or h.shape[0] != adjacency.n:
        raise DimensionError(
            f"spmm: adjacency has {adjacency.n} rows, features have shape {h.shape}"
        )
    matrix = adjacency.matrix
    data = np.asarray(matrix @ h.data)

    def backward(grad, needs):
        return (np.asarray(matrix.T @ grad),)

    return record("spmm", (h,), data, backward)


def induced_subgraph(graph, nodes):
    """Subgraph on ``nodes`` with ids remapped to 0..len(nodes)-1 in sorted order

    Returns
    -------
    subgraph : Graph
    nodes : numpy.ndarray
        The sorted node ids; position k holds the original id of new node k
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    if nodes.size and (nodes[0] < 0 or nodes[-1] >= graph.n):
        raise IndexError(f"induced_subgraph: node id out of range for {graph.n} nodes")
    adjacency = graph.to_scipy()[nodes][:, nodes].tocsr()
    adjacency.sort_indices()
    subgraph = Graph(nodes.size, adjacency.indptr, adjacency.indices, validate=False)
    return subgraph, nodes
