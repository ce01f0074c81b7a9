import logging
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cosetexpanders import (
    Bound,
    CosetComplex,
    SolverConvergenceError,
    SpectralAnalyzer,
    WeightedComplex,
    WeightedGraph,
    eig_symmetric,
    link,
    local_decomposition_gap,
    one_skeleton,
    self_adjointness_gap,
    spectral_report,
)
from cosetexpanders._solvers import jacobi_eigenvalues
from cosetexpanders._spectral import (
    AdjacencyOperator,
    adjacency_apply,
    constant_eigenvector_gap,
    weighted_inner,
)


def cycle(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges(n, [(k, (k + 1) % n) for k in range(n)])


def complete(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges(n, [(u, v) for u in range(n) for v in range(u)])


@pytest.fixture
def petersen() -> WeightedGraph:
    outer = [(k, (k + 1) % 5) for k in range(5)]
    spokes = [(k, k + 5) for k in range(5)]
    inner = [(5 + k, 5 + (k + 2) % 5) for k in range(5)]
    return WeightedGraph.from_edges(10, outer + spokes + inner, graph_id="petersen")


@pytest.fixture
def weighted() -> WeightedGraph:
    rng = np.random.default_rng(7)
    edges = [(u, v) for u in range(9) for v in range(u) if rng.random() < 0.5]
    edges += [(k, k + 1) for k in range(8)]
    weights = rng.integers(1, 6, size=len(edges)).tolist()
    return WeightedGraph.from_edges(9, edges, weights)


class TestEigSymmetric:
    def test_jacobi_matches_lapack(self) -> None:
        rng = np.random.default_rng(0)
        A = rng.standard_normal((12, 12))
        M = (A + A.T) / 2
        assert_allclose(
            eig_symmetric(M, method="jacobi"), eig_symmetric(M), atol=1e-9
        )

    def test_descending_order(self) -> None:
        values = eig_symmetric(np.diag([0.5, -1.0, 2.0]))
        assert_allclose(values, [2.0, 0.5, -1.0])

    def test_rejects_non_square(self) -> None:
        with pytest.raises(ValueError):
            eig_symmetric(np.zeros((2, 3)))

    def test_rejects_non_symmetric(self) -> None:
        with pytest.raises(ValueError):
            eig_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_unknown_method(self) -> None:
        with pytest.raises(ValueError):
            eig_symmetric(np.eye(2), method="power")

    def test_jacobi_sweep_limit(self) -> None:
        rng = np.random.default_rng(1)
        A = rng.standard_normal((6, 6))
        with pytest.raises(SolverConvergenceError):
            jacobi_eigenvalues(A + A.T, tol=1e-300, max_sweeps=1)


class TestAdjacencyOperator:
    def test_rejects_empty_and_isolated(self) -> None:
        with pytest.raises(ValueError):
            AdjacencyOperator.from_graph(WeightedGraph.from_edges(0, []))
        with pytest.raises(ValueError, match="weight zero"):
            AdjacencyOperator.from_graph(WeightedGraph.from_edges(3, [(0, 1)]))

    def test_constants_are_fixed(self, weighted: WeightedGraph) -> None:
        assert constant_eigenvector_gap(weighted) < 1e-12

    def test_symmetrized_matrix(self, weighted: WeightedGraph) -> None:
        op = AdjacencyOperator.from_graph(weighted)
        S = op.dense()
        assert_allclose(S, S.T)
        assert_allclose(S @ op.top_vector, op.top_vector, atol=1e-12)

    def test_apply_matches_random_walk(self, weighted: WeightedGraph) -> None:
        W = weighted.weight_matrix().toarray()
        P = W / W.sum(axis=1, keepdims=True)
        f = np.arange(9.0)
        assert_allclose(adjacency_apply(weighted, f), P @ f)
        F = np.stack([f, f**2], axis=1)
        assert_allclose(adjacency_apply(weighted, F), P @ F)

    def test_self_adjoint(self, weighted: WeightedGraph) -> None:
        assert self_adjointness_gap(weighted) < 1e-12

    def test_weighted_inner_normalizes(self) -> None:
        f = np.array([1.0, 2.0])
        assert float(weighted_inner(f, f, np.array([1, 3]))) == pytest.approx(3.25)


class TestSpectralAnalyzer:
    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_complete_graph(self, n: int) -> None:
        analyzer = SpectralAnalyzer().fit(complete(n))
        assert analyzer.lambda_2_ == pytest.approx(-1 / (n - 1))
        assert analyzer.lambda_min_ == pytest.approx(-1 / (n - 1))
        assert analyzer.lambda_max_ == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [6, 8, 11])
    def test_cycle(self, n: int) -> None:
        analyzer = SpectralAnalyzer().fit(cycle(n))
        assert analyzer.lambda_2_ == pytest.approx(math.cos(2 * math.pi / n))
        expected_min = -1.0 if n % 2 == 0 else math.cos(math.pi * (n - 1) / n)
        assert analyzer.lambda_min_ == pytest.approx(expected_min)

    @pytest.mark.parametrize("solver", ["dense", "iterative"])
    def test_petersen(self, petersen: WeightedGraph, solver: str) -> None:
        analyzer = SpectralAnalyzer(solver=solver).fit(petersen)
        assert analyzer.lambda_2_ == pytest.approx(1 / 3, abs=1e-8)
        assert analyzer.lambda_min_ == pytest.approx(-2 / 3, abs=1e-8)
        assert analyzer.residual_ <= 1e-8

    def test_solvers_agree_on_weighted_graph(self, weighted: WeightedGraph) -> None:
        dense = SpectralAnalyzer(solver="dense").fit(weighted)
        iterative = SpectralAnalyzer(solver="iterative").fit(weighted)
        jacobi = SpectralAnalyzer(solver="dense", dense_method="jacobi").fit(weighted)
        assert iterative.solver_used_ == "iterative"
        assert jacobi.solver_used_ == "jacobi"
        assert iterative.lambda_2_ == pytest.approx(dense.lambda_2_, abs=1e-7)
        assert iterative.lambda_min_ == pytest.approx(dense.lambda_min_, abs=1e-7)
        assert jacobi.lambda_2_ == pytest.approx(dense.lambda_2_, abs=1e-9)

    def test_auto_switches_to_iterative(self, petersen: WeightedGraph) -> None:
        assert SpectralAnalyzer().fit(petersen).solver_used_ == "lapack"
        auto = SpectralAnalyzer(dense_max_n=5).fit(petersen)
        assert auto.solver_used_ == "iterative"
        assert auto.eigenvalues_ is None

    def test_tiny_graphs_stay_dense(self) -> None:
        edge = WeightedGraph.from_edges(2, [(0, 1)])
        analyzer = SpectralAnalyzer(solver="iterative").fit(edge)
        assert analyzer.solver_used_ == "lapack"
        assert analyzer.lambda_min_ == pytest.approx(-1.0)

    def test_disconnected_graph(self, caplog: pytest.LogCaptureFixture) -> None:
        two_edges = WeightedGraph.from_edges(4, [(0, 1), (2, 3)], graph_id="pair")
        with caplog.at_level(logging.WARNING):
            analyzer = SpectralAnalyzer().fit(two_edges)
        assert not analyzer.is_connected_
        assert analyzer.lambda_2_ == 1.0
        assert "disconnected" in caplog.text

    def test_invalid_inputs(self) -> None:
        with pytest.raises(ValueError):
            SpectralAnalyzer(solver="qr").fit(cycle(4))
        with pytest.raises(TypeError):
            SpectralAnalyzer().fit(np.eye(3))

    def test_report_needs_fit(self) -> None:
        with pytest.raises(NotFittedError):
            SpectralAnalyzer().report()

    def test_clone_keeps_parameters(self) -> None:
        analyzer = SpectralAnalyzer(solver="dense", tol=1e-6).fit(cycle(4))
        copy = clone(analyzer)
        assert copy.get_params() == analyzer.get_params()
        assert not hasattr(copy, "lambda_2_")

    def test_report(self, petersen: WeightedGraph) -> None:
        report = SpectralAnalyzer().fit(petersen).report(
            [
                Bound("half", 0.5),
                Bound("two-sided half", 0.5, "two-sided"),
                Bound("floor", -0.7, "floor"),
            ]
        )
        assert [c.satisfied for c in report.bounds] == [True, False, True]
        assert not report.satisfied
        assert report.two_sided == pytest.approx(2 / 3)
        data = report.to_dict()
        assert data["graph_id"] == "petersen"
        assert set(data) == {
            "graph_id",
            "n",
            "lambda2",
            "lambda_min",
            "lambda_max",
            "is_connected",
            "bounds",
            "solver",
            "tol",
        }
        assert '"lambda2"' in report.to_json()

    def test_bound_kind_validated(self) -> None:
        with pytest.raises(ValueError):
            Bound("x", 0.5, "upper")

    def test_spectral_report_helper(self) -> None:
        report = spectral_report(cycle(4), solver="dense")
        assert report.lambda_2 == pytest.approx(0.0, abs=1e-12)
        assert report.solver == "lapack"


class TestComplexSpectra:
    def test_vertex_link_is_an_eight_cycle(self, complex_213: CosetComplex) -> None:
        g = link(complex_213, [(1, 0)]).one_skeleton()
        analyzer = SpectralAnalyzer().fit(g)
        assert analyzer.lambda_2_ == pytest.approx(1 / math.sqrt(2))
        assert analyzer.lambda_min_ == pytest.approx(-1.0)

    def test_skeleton_floor(self, complex_213: CosetComplex) -> None:
        analyzer = SpectralAnalyzer().fit(one_skeleton(complex_213))
        assert analyzer.lambda_min_ == pytest.approx(-0.5, abs=1e-8)
        assert analyzer.is_connected_

    def test_skeleton_floor_over_f2_t2(self, complex_223: CosetComplex) -> None:
        analyzer = SpectralAnalyzer(solver="dense").fit(one_skeleton(complex_223))
        assert analyzer.eigenvalues_.shape == (2016,)
        assert analyzer.lambda_min_ == pytest.approx(-0.5, abs=1e-8)
        assert analyzer.is_connected_

    def test_solvers_agree_on_skeleton_over_f2_t2(
        self, complex_223: CosetComplex
    ) -> None:
        graph = one_skeleton(complex_223)
        dense = SpectralAnalyzer(solver="dense").fit(graph)
        iterative = SpectralAnalyzer(solver="iterative", random_state=5).fit(graph)
        assert iterative.solver_used_ == "iterative"
        assert iterative.lambda_2_ == pytest.approx(dense.lambda_2_, abs=1e-7)
        assert iterative.lambda_min_ == pytest.approx(dense.lambda_min_, abs=1e-7)

    def test_local_decomposition(self, complex_213: CosetComplex) -> None:
        assert local_decomposition_gap(complex_213) < 1e-10

    def test_local_decomposition_needs_triangles(self) -> None:
        X = WeightedComplex.from_top_faces([((1, 0), (2, 0))])
        with pytest.raises(ValueError):
            local_decomposition_gap(X)
