import math

import numpy as np
import pytest

from cosetexpanders import (
    LinkRepresentative,
    PointLinePair,
    TruncatedPoly,
    affine_expansion,
    bq_spectrum_check,
    build_A,
    build_bq,
    induced_eig_bound,
    induced_subgraph_check,
    link_bijection_check,
    m1_parameters,
    m2_parameters,
    measure_truncated_link,
)
from cosetexpanders._affine import bq_expected_spectrum, bq_walk_counts_check


class TestBq:
    def test_sizes(self) -> None:
        B = build_bq(8)
        assert B.n == 128
        assert B.n_edges == 512
        assert set(B.degrees().tolist()) == {8}
        assert B.is_bipartite()

    def test_walk_counts(self) -> None:
        assert bq_walk_counts_check(8)

    def test_expected_spectrum_shape(self) -> None:
        values = bq_expected_spectrum(8)
        assert len(values) == 128
        assert values[1] == pytest.approx(1 / math.sqrt(8))
        assert np.all(np.diff(values) <= 0)

    @pytest.mark.parametrize("q", [8, 27])
    def test_spectrum(self, q: int) -> None:
        verdict = bq_spectrum_check(q)
        assert verdict
        assert verdict.detail.startswith("lambda_2")

    @pytest.mark.parametrize("q", [9, 16, 25])
    def test_q_must_be_a_prime_cube(self, q: int) -> None:
        with pytest.raises(ValueError):
            build_bq(q)

    def test_dense_spectrum_is_limited(self) -> None:
        with pytest.raises(ValueError):
            bq_spectrum_check(125)


class TestA:
    def test_sizes(self) -> None:
        A = build_A(2)
        assert A.n == 64
        assert A.n_edges == 128
        assert set(A.degrees().tolist()) == {4}

    def test_labels(self) -> None:
        A = build_A(2)
        assert A.labels[0] == ("left", "0", "0")
        assert A.labels[32][0] == "right"

    def test_composite_p_rejected(self) -> None:
        with pytest.raises(ValueError):
            build_A(4)

    @pytest.mark.parametrize("p, n_edges", [(2, 128), (3, 2187)])
    def test_induced_subgraph_of_bq(self, p: int, n_edges: int) -> None:
        verdict = induced_subgraph_check(p)
        assert verdict, verdict.detail
        assert verdict.detail == f"{n_edges} edges agree"

    @pytest.mark.parametrize("p, n_edges", [(2, 128), (3, 2187)])
    def test_link_bijection(self, p: int, n_edges: int) -> None:
        verdict = link_bijection_check(p, 3)
        assert verdict, verdict.detail
        assert verdict.detail == f"{n_edges} edges agree"

    def test_link_bijection_needs_quadratics(self) -> None:
        with pytest.raises(ValueError):
            link_bijection_check(2, 2)


class TestLinkRepresentative:
    def test_m1_reads_entries(self) -> None:
        t = TruncatedPoly.variable(3, 3)
        one = TruncatedPoly.one(3, 3)
        rep = LinkRepresentative("M1", t + one, t * t)
        assert m1_parameters(rep.matrix()) == rep
        pair = rep.pair()
        assert (pair.side, pair.a, pair.b) == ("left", (1, 1), (0, 0, 1))

    def test_m2_negates_the_quadratic(self) -> None:
        t = TruncatedPoly.variable(3, 3)
        one = TruncatedPoly.one(3, 3)
        rep = LinkRepresentative("M2", t, one + t)
        assert m2_parameters(rep.matrix()) == rep
        pair = rep.pair()
        assert (pair.side, pair.a, pair.b) == ("right", (0, 1), (2, 2, 0))

    def test_invalid_representatives(self) -> None:
        t = TruncatedPoly.variable(2, 3)
        with pytest.raises(ValueError):
            LinkRepresentative("M3", t, t)
        with pytest.raises(ValueError):
            LinkRepresentative("M1", t * t, t)

    def test_point_line_pair(self) -> None:
        assert PointLinePair("left", (1, 0), (0, 1, 1), 2).is_capped
        assert not PointLinePair("right", (0, 0, 1), (0,), 2).is_capped
        with pytest.raises(ValueError):
            PointLinePair("top", (0,), (0,), 2)


class TestExpansion:
    def test_induced_bound(self) -> None:
        assert induced_eig_bound(4, 8, 1 / math.sqrt(8)) == pytest.approx(
            1 / math.sqrt(2)
        )
        with pytest.raises(ValueError):
            induced_eig_bound(9, 8, 0.5)
        with pytest.raises(ValueError):
            induced_eig_bound(0, 8, 0.5)

    def test_affine_expansion_over_f2(self) -> None:
        result = affine_expansion(2)
        assert result.lambda_Bq == pytest.approx(1 / math.sqrt(8), abs=1e-9)
        assert result.induced_bound == pytest.approx(1 / math.sqrt(2), abs=1e-9)
        assert result.lambda_A <= result.target + 1e-9
        assert result.holds
        assert result.A_report.n == 64

    @pytest.mark.slow
    def test_affine_expansion_over_f3(self) -> None:
        result = affine_expansion(3)
        assert result.lambda_Bq == pytest.approx(1 / math.sqrt(27), abs=1e-8)
        assert result.holds

    @pytest.mark.slow
    def test_affine_expansion_over_f5(self) -> None:
        result = affine_expansion(5)
        assert result.A_report.n == 2 * 5**5
        assert result.lambda_Bq == pytest.approx(1 / math.sqrt(125), abs=1e-8)
        assert result.lambda_A <= 1 / math.sqrt(5) + 1e-8
        assert result.holds

    def test_truncated_link_is_recorded(self) -> None:
        report = measure_truncated_link(2)
        assert report.n == 32
        assert len(report.bounds) == 1
