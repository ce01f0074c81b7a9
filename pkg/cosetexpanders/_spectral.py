from __future__ import annotations
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, Iterable, Optional, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.sparse import csr_matrix, diags
from sklearn.base import BaseEstimator  # type: ignore
from sklearn.utils.validation import check_is_fitted  # type: ignore
from typing_extensions import Self

from ._complex import WeightedComplex, link, one_skeleton
from ._graph import WeightedGraph, connectivity
from ._solvers import SpectrumEstimate, dense_solver, iterative_solver

logger = logging.getLogger(__name__)

BOUND_KINDS = ("onesided", "two-sided", "floor")


@dataclass(frozen=True, eq=False)
class AdjacencyOperator:
    """The normalized adjacency operator of a weighted graph.

    A_G f(u) = sum over v of w(u, v) / w(u) * f(v). It is self-adjoint for
    the inner product weighted by w, and similar to the symmetric matrix
    S = D^(-1/2) W D^(-1/2), which is what the solvers diagonalize. The
    top eigenvector of S is sqrt(w), normalized.

    Raises
    ------
    ValueError
        If the graph is empty or has a vertex of weight zero.
    """

    graph: WeightedGraph
    vertex_weights: NDArray[np.float64] = field(repr=False)

    @classmethod
    def from_graph(cls, graph: WeightedGraph) -> AdjacencyOperator:
        if graph.is_empty:
            raise ValueError(f"graph {graph.graph_id!r} has no vertices")
        weights = graph.vertex_weights().astype(np.float64)
        isolated = np.flatnonzero(weights <= 0)
        if len(isolated):
            raise ValueError(
                f"vertex {int(isolated[0])} of {graph.graph_id!r} has weight zero"
            )
        return cls(graph, weights)

    @property
    def sqrt_weights(self) -> NDArray[np.float64]:
        return np.sqrt(self.vertex_weights)

    @property
    def top_vector(self) -> NDArray[np.float64]:
        root = self.sqrt_weights
        return root / np.linalg.norm(root)

    def sparse(self) -> csr_matrix:
        scaling = diags(1.0 / self.sqrt_weights)
        return (scaling @ self.graph.weight_matrix() @ scaling).tocsr()

    def dense(self) -> NDArray[np.float64]:
        S = self.sparse().toarray()
        return (S + S.T) / 2

    def apply(self, f: NDArray[np.float64]) -> NDArray[np.float64]:
        """A_G f, column by column when `f` is two-dimensional."""
        Wf = self.graph.weight_matrix() @ f
        if np.ndim(f) == 1:
            return Wf / self.vertex_weights
        return Wf / self.vertex_weights[:, np.newaxis]


@dataclass(frozen=True)
class Bound:
    """A named numeric target for a spectral report.

    ``kind`` selects what is compared with `value`: "onesided" checks
    lambda_2, "two-sided" checks max(lambda_2, |lambda_min|), and "floor"
    checks that lambda_min is at least `value`.
    """

    name: str
    value: float
    kind: str = "onesided"

    def __post_init__(self) -> None:
        if self.kind not in BOUND_KINDS:
            raise ValueError(f"bound kind must be one of {BOUND_KINDS}")

    def measure(self, lambda_2: float, lambda_min: float) -> float:
        if self.kind == "onesided":
            return lambda_2
        if self.kind == "two-sided":
            return max(lambda_2, abs(lambda_min))
        return lambda_min

    def holds(self, lambda_2: float, lambda_min: float, tol: float) -> bool:
        measured = self.measure(lambda_2, lambda_min)
        if self.kind == "floor":
            return measured >= self.value - tol
        return measured <= self.value + tol


@dataclass(frozen=True)
class BoundCheck:
    name: str
    value: float
    kind: str
    measured: float
    satisfied: bool


@dataclass(frozen=True)
class SpectralReport:
    """Extreme eigenvalues of one graph together with its bound checks."""

    graph_id: str
    n: int
    lambda_2: float
    lambda_min: float
    lambda_max: float
    is_connected: bool
    bounds: Tuple[BoundCheck, ...]
    solver: str
    tol: float
    residual: float = 0.0

    @property
    def two_sided(self) -> float:
        return max(self.lambda_2, abs(self.lambda_min))

    @property
    def satisfied(self) -> bool:
        return all(check.satisfied for check in self.bounds)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "graph_id": self.graph_id,
            "n": self.n,
            "lambda2": self.lambda_2,
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "is_connected": self.is_connected,
            "bounds": [asdict(check) for check in self.bounds],
            "solver": self.solver,
            "tol": self.tol,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


class SpectralAnalyzer(BaseEstimator):  # type: ignore
    """
    Extreme eigenvalues of the normalized adjacency operator of a graph.

    Parameters
    ----------
    solver : {"auto", "dense", "iterative"}, default="auto"
        "auto" diagonalizes densely up to `dense_max_n` vertices and uses
        Lanczos iterations beyond.
    tol : float, default=1e-8
        Tolerance of bound checks and certified residual of the iterative
        solver.
    dense_max_n : int, default=6000
        Largest graph handed to the dense solver under "auto".
    dense_method : {"lapack", "jacobi"}, default="lapack"
        Dense eigensolver.
    jacobi_tol : float, default=1e-10
        Symmetry and off-diagonal tolerance of the dense solver.
    random_state : int or Generator, default=0
        Seed of the iterative solver's start vector.

    Attributes
    ----------
    graph_id_ : str
        Identifier of the fitted graph.
    n_vertices_ : int
        Number of vertices of the fitted graph.
    is_connected_ : bool
        Whether the graph is connected. A disconnected graph has lambda_2 = 1.
    solver_used_ : str
        "lapack", "jacobi" or "iterative".
    eigenvalues_ : NDArray[np.float64] or None
        Whole spectrum in descending order, dense solves only.
    lambda_2_ : float
        Second largest eigenvalue.
    lambda_min_ : float
        Smallest eigenvalue.
    lambda_max_ : float
        Largest eigenvalue, 1 up to rounding.
    residual_ : float
        Largest eigenpair residual measured by the solver.

    Examples
    --------
    The 4-cycle is bipartite, so its spectrum is symmetric.

    >>> from cosetexpanders import SpectralAnalyzer, WeightedGraph
    >>> square = WeightedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    >>> analyzer = SpectralAnalyzer().fit(square)
    >>> round(analyzer.lambda_2_, 10) + 0.0, round(analyzer.lambda_min_, 10)
    (0.0, -1.0)
    """

    def __init__(
        self,
        *,
        solver: str = "auto",
        tol: float = 1e-8,
        dense_max_n: int = 6000,
        dense_method: str = "lapack",
        jacobi_tol: float = 1e-10,
        random_state: Union[int, np.random.Generator, None] = 0,
    ) -> None:
        self.solver = solver
        self.tol = tol
        self.dense_max_n = dense_max_n
        self.dense_method = dense_method
        self.jacobi_tol = jacobi_tol
        self.random_state = random_state

    def _select_solver(self, n: int) -> Callable[[AdjacencyOperator], SpectrumEstimate]:
        if self.solver not in ("auto", "dense", "iterative"):
            raise ValueError(f"unknown solver {self.solver!r}")
        use_dense = self.solver == "dense" or (
            self.solver == "auto" and n <= self.dense_max_n
        )
        if use_dense or n <= 2:
            return dense_solver(self.dense_method, tol=self.jacobi_tol)
        return iterative_solver(self.tol, random_state=self.random_state)

    def fit(self, graph: WeightedGraph) -> Self:
        """Compute the extreme eigenvalues of `graph`."""
        if not isinstance(graph, WeightedGraph):
            raise TypeError(f"expected a WeightedGraph, got {type(graph).__name__}")
        op = AdjacencyOperator.from_graph(graph)
        solve = self._select_solver(graph.n)

        self.graph_id_ = graph.graph_id
        self.n_vertices_ = graph.n
        self.is_connected_ = connectivity(graph)
        estimate = solve(op)
        self.solver_used_ = estimate.method
        self.eigenvalues_ = estimate.eigenvalues
        self.lambda_max_ = estimate.lambda_max
        self.lambda_min_ = estimate.lambda_min
        self.residual_ = estimate.residual
        if self.is_connected_:
            self.lambda_2_ = estimate.lambda_2
        else:
            logger.warning("graph %r is disconnected", graph.graph_id)
            self.lambda_2_ = 1.0
        logger.debug(
            "%s n=%d lambda_2=%.6f lambda_min=%.6f (%s)",
            graph.graph_id or "graph",
            graph.n,
            self.lambda_2_,
            self.lambda_min_,
            self.solver_used_,
        )
        return self

    def report(self, bounds: Iterable[Bound] = ()) -> SpectralReport:
        """Summarize the fit and check it against `bounds`."""
        check_is_fitted(self, "lambda_2_")
        checks = tuple(
            BoundCheck(
                bound.name,
                float(bound.value),
                bound.kind,
                bound.measure(self.lambda_2_, self.lambda_min_),
                bound.holds(self.lambda_2_, self.lambda_min_, self.tol),
            )
            for bound in bounds
        )
        return SpectralReport(
            graph_id=self.graph_id_,
            n=self.n_vertices_,
            lambda_2=float(self.lambda_2_),
            lambda_min=float(self.lambda_min_),
            lambda_max=float(self.lambda_max_),
            is_connected=self.is_connected_,
            bounds=checks,
            solver=self.solver_used_,
            tol=self.tol,
            residual=float(self.residual_),
        )


def spectral_report(
    graph: WeightedGraph, bounds: Iterable[Bound] = (), **params: Any
) -> SpectralReport:
    """Fit a `SpectralAnalyzer` with `params` and return its report.

    Examples
    --------
    >>> from cosetexpanders import Bound, WeightedGraph, spectral_report
    >>> triangle = WeightedGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    >>> report = spectral_report(triangle, [Bound("floor", -0.5, "floor")])
    >>> round(report.lambda_2, 10), report.satisfied
    (-0.5, True)
    """
    return SpectralAnalyzer(**params).fit(graph).report(bounds)


# ---------------------------------------------------------------------------
# Inner-product identities


def weighted_inner(
    f: NDArray[np.float64], g: NDArray[np.float64], weights: NDArray[Any]
) -> NDArray[np.float64]:
    """<f, g> = sum of w(u) f(u) g(u), with w normalized to sum 1.

    Works column by column for two-dimensional `f` and `g`.
    """
    mu = np.asarray(weights, dtype=np.float64)
    mu = mu / mu.sum()
    if np.ndim(f) == 1:
        return np.asarray(np.sum(mu * f * g))
    return np.sum(mu[:, np.newaxis] * f * g, axis=0)


def adjacency_apply(
    graph: WeightedGraph, f: NDArray[np.float64]
) -> NDArray[np.float64]:
    return AdjacencyOperator.from_graph(graph).apply(f)


def _rng(random_state: Union[int, np.random.Generator, None]) -> np.random.Generator:
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


def self_adjointness_gap(
    graph: WeightedGraph,
    random_state: Union[int, np.random.Generator, None] = 0,
    trials: int = 100,
) -> float:
    """max |<Af, g> - <f, Ag>| over random pairs f, g."""
    rng = _rng(random_state)
    op = AdjacencyOperator.from_graph(graph)
    F = rng.standard_normal((graph.n, trials))
    G = rng.standard_normal((graph.n, trials))
    w = op.vertex_weights
    gap = weighted_inner(op.apply(F), G, w) - weighted_inner(F, op.apply(G), w)
    return float(np.max(np.abs(gap)))


def constant_eigenvector_gap(graph: WeightedGraph) -> float:
    """max |A1 - 1|, which vanishes for every graph without isolated vertices."""
    op = AdjacencyOperator.from_graph(graph)
    return float(np.max(np.abs(op.apply(np.ones(graph.n)) - 1.0)))


def local_decomposition_gap(
    X: WeightedComplex,
    random_state: Union[int, np.random.Generator, None] = 0,
    trials: int = 100,
) -> float:
    """Largest deviation from <Af, g> = E_v <A_v f_v, g_v> on random f, g.

    The expectation is over vertices v drawn by their level-0 weight, and
    A_v is the adjacency operator of the link of v, acting on restrictions.
    """
    if X.dim < 2:
        raise ValueError("vertex links need edges, so the complex must have dim >= 2")
    rng = _rng(random_state)
    graph = one_skeleton(X)
    F = rng.standard_normal((graph.n, trials))
    G = rng.standard_normal((graph.n, trials))
    whole = AdjacencyOperator.from_graph(graph)
    lhs = weighted_inner(whole.apply(F), G, whole.vertex_weights)

    rhs = np.zeros(trials)
    for vertex in X.vertices:
        local = link(X, [vertex]).one_skeleton()
        idx = np.array([graph.index(label) for label in local.labels], dtype=np.int64)
        op = AdjacencyOperator.from_graph(local)
        mu = float(X.weights[(vertex,)])
        rhs += mu * weighted_inner(op.apply(F[idx]), G[idx], op.vertex_weights)
    return float(np.max(np.abs(lhs - rhs)))
