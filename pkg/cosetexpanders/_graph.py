from __future__ import annotations
import json
import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import Any, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from ._exceptions import EmptyGraphWarning

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """An undirected graph with positive rational edge weights.

    Weights are held as positive integers together with a common rational
    `scale`, so that ``w(u, v) = weights[e] * scale`` exactly. Vertex weights
    follow the convention w(u) = sum over v of w(u, v).

    Parameters
    ----------
    n : int
        Number of vertices, labelled 0 .. n-1.
    edges : NDArray[np.int64]
        Shape (m, 2), each row (u, v) with u < v, no repeats.
    weights : NDArray[np.int64]
        Shape (m,), positive.
    scale : Fraction, default=1
        Common factor of all edge weights.
    labels : Sequence[Hashable], optional
        One label per vertex, used by exports and lookups.
    graph_id : str, default=""
        Identifier carried into spectral reports.

    Examples
    --------
    >>> from cosetexpanders import WeightedGraph
    >>> square = WeightedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    >>> square.degrees().tolist()
    [2, 2, 2, 2]
    >>> square.is_bipartite()
    True
    """

    n: int
    edges: NDArray[np.int64]
    weights: NDArray[np.int64]
    scale: Fraction = Fraction(1)
    labels: Optional[Tuple[Hashable, ...]] = None
    graph_id: str = ""
    _index: Dict[Hashable, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=np.int64).reshape(-1)
        if len(edges) != len(weights):
            raise ValueError("one weight per edge is required")
        if len(edges) and (edges.min() < 0 or edges.max() >= self.n):
            raise ValueError(f"edge endpoint outside 0..{self.n - 1}")
        if (edges[:, 0] == edges[:, 1]).any():
            raise ValueError("self-loops are not allowed")
        if (weights <= 0).any() or self.scale <= 0:
            raise ValueError("edge weights must be positive")
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError("one label per vertex is required")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            object.__setattr__(
                self, "_index", {label: k for k, label in enumerate(self.labels)}
            )

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Sequence[Tuple[int, int]],
        weights: Optional[Sequence[Union[int, Fraction]]] = None,
        *,
        labels: Optional[Sequence[Hashable]] = None,
        graph_id: str = "",
    ) -> WeightedGraph:
        """Build a graph from an edge list, merging parallel edges.

        Rational weights are brought to a common denominator.
        """
        pairs = np.sort(np.asarray(edges, dtype=np.int64).reshape(-1, 2), axis=1)
        if weights is None:
            fracs = [Fraction(1)] * len(pairs)
        else:
            fracs = [Fraction(w) for w in weights]
        denominator = lcm(*(f.denominator for f in fracs)) if fracs else 1
        numerators = np.array(
            [int(f * denominator) for f in fracs], dtype=np.int64
        ).reshape(-1)
        if len(pairs):
            unique, inverse = np.unique(pairs, axis=0, return_inverse=True)
            merged = np.zeros(len(unique), dtype=np.int64)
            np.add.at(merged, inverse.reshape(-1), numerators)
        else:
            unique, merged = pairs, numerators
        return cls(
            n,
            unique,
            merged,
            Fraction(1, denominator),
            labels=None if labels is None else tuple(labels),
            graph_id=graph_id,
        )

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def is_empty(self) -> bool:
        return self.n == 0

    def index(self, label: Hashable) -> int:
        return self._index[label]

    def edge_weight(self, k: int) -> Fraction:
        return int(self.weights[k]) * self.scale

    def vertex_weights(self) -> NDArray[np.int64]:
        """Integer vertex weights (in units of `scale`), sum of incident edges."""
        out = np.zeros(self.n, dtype=np.int64)
        np.add.at(out, self.edges[:, 0], self.weights)
        np.add.at(out, self.edges[:, 1], self.weights)
        return out

    def degrees(self) -> NDArray[np.int64]:
        return np.bincount(self.edges.reshape(-1), minlength=self.n)

    def weight_matrix(self) -> csr_matrix:
        """Symmetric sparse matrix of integer edge weights."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        data = np.concatenate([self.weights, self.weights]).astype(np.float64)
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        return coo_matrix((data, (rows, cols)), shape=(self.n, self.n)).tocsr()

    def neighbors(self, u: int) -> NDArray[np.int64]:
        mask = (self.edges == u).any(axis=1)
        pairs = self.edges[mask]
        return np.sort(np.where(pairs[:, 0] == u, pairs[:, 1], pairs[:, 0]))

    def edge_set(self) -> set:
        """Edges as a set of frozensets of labels (indices if unlabelled)."""
        names = self.labels if self.labels is not None else range(self.n)
        return {frozenset((names[u], names[v])) for u, v in self.edges.tolist()}

    def two_coloring(self) -> Optional[NDArray[np.int64]]:
        """A proper 2-colouring if the graph is bipartite, else None."""
        adjacency = self.weight_matrix()
        color = np.full(self.n, -1, dtype=np.int64)
        for start in range(self.n):
            if color[start] >= 0:
                continue
            order, predecessors = breadth_first_order(
                adjacency, start, directed=False, return_predecessors=True
            )
            color[start] = 0
            for node in order[1:]:
                color[node] = 1 - color[predecessors[node]]
        u, v = self.edges[:, 0], self.edges[:, 1]
        if (color[u] == color[v]).any():
            return None
        return color

    def is_bipartite(self) -> bool:
        return self.two_coloring() is not None

    def relabel(self, mapping: Mapping[Hashable, Hashable]) -> WeightedGraph:
        if self.labels is None:
            raise ValueError("graph has no labels to map")
        labels = tuple(mapping[label] for label in self.labels)
        return WeightedGraph(
            self.n, self.edges, self.weights, self.scale, labels, self.graph_id
        )


def connectivity(g: WeightedGraph) -> bool:
    """Whether breadth-first search from vertex 0 reaches every vertex.

    An empty graph is reported as disconnected and additionally signals
    `EmptyGraphWarning`.

    Examples
    --------
    >>> from cosetexpanders import WeightedGraph, connectivity
    >>> connectivity(WeightedGraph.from_edges(1, []))
    True
    >>> connectivity(WeightedGraph.from_edges(4, [(0, 1), (2, 3)]))
    False
    """
    if g.is_empty:
        warnings.warn(f"graph {g.graph_id!r} has no vertices", EmptyGraphWarning)
        return False
    reached = breadth_first_order(
        g.weight_matrix(), 0, directed=False, return_predecessors=False
    )
    return bool(len(reached) == g.n)


# ---------------------------------------------------------------------------
# Edge-list export


def _label_to_json(label: Hashable) -> Any:
    if isinstance(label, tuple):
        return [_label_to_json(part) for part in label]
    return label


def _label_from_json(value: Any) -> Hashable:
    if isinstance(value, list):
        return tuple(_label_from_json(part) for part in value)
    return value


def write_edge_list(
    g: WeightedGraph,
    path: Union[str, Path],
    metadata: Optional[List[Any]] = None,
) -> Path:
    """Write "u v" lines under a "vertices=N weighted=bool" header.

    Weighted graphs carry the exact weight as a third column. Labels, and
    any per-vertex `metadata`, go to a JSON sidecar next to `path`.
    """
    if g.is_empty:
        raise ValueError("refusing to export an empty graph")
    path = Path(path)
    weighted = bool(len(g.weights)) and (
        g.scale != 1 or bool((g.weights != g.weights[0]).any())
    )
    lines = [f"vertices={g.n} weighted={str(weighted).lower()}"]
    for k, (u, v) in enumerate(g.edges.tolist()):
        lines.append(f"{u} {v} {g.edge_weight(k)}" if weighted else f"{u} {v}")
    path.write_text("\n".join(lines) + "\n")
    sidecar: Dict[str, Any] = {"graph_id": g.graph_id}
    if g.labels is not None:
        sidecar["labels"] = [_label_to_json(label) for label in g.labels]
    if metadata is not None:
        sidecar["metadata"] = metadata
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return path


def read_edge_list(path: Union[str, Path]) -> WeightedGraph:
    """Re-import a graph written by `write_edge_list`."""
    path = Path(path)
    header, *rows = path.read_text().splitlines()
    fields = dict(item.split("=") for item in header.split())
    n = int(fields["vertices"])
    edges, weights = [], []
    for row in rows:
        parts = row.split()
        if not parts:
            continue
        edges.append((int(parts[0]), int(parts[1])))
        weights.append(Fraction(parts[2]) if len(parts) > 2 else Fraction(1))
    labels = None
    graph_id = ""
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        graph_id = meta.get("graph_id", "")
        if "labels" in meta:
            labels = [_label_from_json(label) for label in meta["labels"]]
    return WeightedGraph.from_edges(n, edges, weights, labels=labels, graph_id=graph_id)
