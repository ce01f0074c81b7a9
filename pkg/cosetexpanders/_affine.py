from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Set, Tuple

import numpy as np
from numpy.typing import NDArray
from sklearn.base import clone  # type: ignore

from ._algebra import ExtensionField, TruncatedPoly, is_prime, poly_mul_array
from ._complex import local_complex, local_link_graph, one_skeleton
from ._graph import WeightedGraph
from ._matrices import RingMatrix
from ._spectral import Bound, SpectralAnalyzer, SpectralReport
from ._typing import Verdict

logger = logging.getLogger(__name__)

SIDES = ("left", "right")


def _prime_cube_root(q: int) -> int:
    p = round(q ** (1 / 3))
    for candidate in (p - 1, p, p + 1):
        if candidate >= 2 and candidate**3 == q and is_prime(candidate):
            return candidate
    raise ValueError(f"q must be the cube of a prime, got {q}")


def _code(coeffs: NDArray[np.int64], p: int) -> NDArray[np.int64]:
    """Encode coefficient vectors (last axis, constant first) as integers."""
    return coeffs @ (p ** np.arange(coeffs.shape[-1]))


def _digits(codes: NDArray[np.int64], p: int, n_digits: int) -> NDArray[np.int64]:
    return (np.asarray(codes)[..., None] // p ** np.arange(n_digits)) % p


@dataclass(frozen=True)
class PointLinePair:
    """A vertex (a, b) on one side of B_q or of A.

    Coefficient tuples are polynomials in y over F_p, constant term first.
    Vertices of A have deg(a) <= 1 and deg(b) <= 2.
    """

    side: str
    a: Tuple[int, ...]
    b: Tuple[int, ...]
    p: int

    def __post_init__(self) -> None:
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")

    @property
    def is_capped(self) -> bool:
        return not any(self.a[2:]) and not any(self.b[3:])

    def label(self) -> Tuple[str, str, str]:
        """(side, a, b) with a and b in the TruncatedPoly textual form."""
        return (
            self.side,
            str(TruncatedPoly.from_coeffs(self.a, self.p, 3)),
            str(TruncatedPoly.from_coeffs(self.b, self.p, 3)),
        )


@dataclass(frozen=True)
class LinkRepresentative:
    """The representative M1(ell, Q) or M2(ell, Q) of a link coset.

    M1(ell, Q) has ell at (2, 3) and Q at (1, 3); it represents the cosets of
    <e_{1,2}>. M2(ell, Q) has ell at (1, 2) and Q at (1, 3); it represents
    the cosets of <e_{2,3}>.

    Examples
    --------
    >>> from cosetexpanders import LinkRepresentative, TruncatedPoly, m1_parameters
    >>> t = TruncatedPoly.variable(2, 3)
    >>> rep = LinkRepresentative("M1", t, t * t)
    >>> m1_parameters(rep.matrix()) == rep
    True
    >>> rep.pair().side
    'left'
    """

    kind: str
    ell: TruncatedPoly
    Q: TruncatedPoly

    def __post_init__(self) -> None:
        if self.kind not in ("M1", "M2"):
            raise ValueError(f"kind must be 'M1' or 'M2', got {self.kind!r}")
        if self.ell.degree > 1 or self.Q.degree > 2:
            raise ValueError("ell must be linear and Q quadratic")

    def matrix(self) -> RingMatrix:
        p, s = self.ell.p, self.ell.s
        zero, one = TruncatedPoly.zero(p, s), TruncatedPoly.one(p, s)
        if self.kind == "M1":
            rows = [[one, zero, self.Q], [zero, one, self.ell], [zero, zero, one]]
        else:
            rows = [[one, self.ell, self.Q], [zero, one, zero], [zero, zero, one]]
        return RingMatrix.from_entries(rows)

    def pair(self) -> PointLinePair:
        """M1(ell, Q) goes to (ell, Q) on the left, M2(ell, Q) to (ell, -Q)."""
        Q = self.Q if self.kind == "M1" else -self.Q
        side = "left" if self.kind == "M1" else "right"
        return PointLinePair(side, self.ell.coeffs[:2], Q.coeffs[:3], self.ell.p)


def m1_parameters(h: RingMatrix) -> LinkRepresentative:
    """(ell, Q) of the coset h<e_{1,2}>, read off as h[2,3] and h[1,3]."""
    return LinkRepresentative("M1", h.entry(2, 3), h.entry(1, 3))


def m2_parameters(h: RingMatrix) -> LinkRepresentative:
    """(ell, Q) of the coset h<e_{2,3}>: h[1,2] and h[1,3] - h[1,2] h[2,3]."""
    ell = h.entry(1, 2)
    return LinkRepresentative("M2", ell, h.entry(1, 3) - ell * h.entry(2, 3))


# ---------------------------------------------------------------------------
# The graphs B_q and A


def build_bq(q: int) -> WeightedGraph:
    """The bipartite graph on F_q^2 + F_q^2 with (a, b) ~ (c, d) iff ac = b + d.

    Left vertex (a, b) has index a*q + b and right vertex (c, d) index
    q^2 + c*q + d, with field elements in the `ExtensionField` encoding.

    Examples
    --------
    >>> from cosetexpanders import build_bq
    >>> B8 = build_bq(8)
    >>> B8.n, B8.n_edges, set(B8.degrees().tolist())
    (128, 512, {8})
    """
    p = _prime_cube_root(q)
    F = ExtensionField(p, 3)
    a, b, c = np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij")
    d = F.add[F.mul[a, c], F.neg[b]]
    left = (a * q + b).reshape(-1)
    right = (q * q + c * q + d).reshape(-1)
    labels = [("left", a_, b_) for a_ in range(q) for b_ in range(q)]
    labels += [("right", c_, d_) for c_ in range(q) for d_ in range(q)]
    logger.info("B_%d over modulus %s: %d edges", q, F.modulus, len(left))
    return WeightedGraph.from_edges(
        2 * q * q,
        np.column_stack([left, right]),
        labels=labels,
        graph_id=f"B_{q}",
    )


def _biadjacency(g: WeightedGraph, half: int) -> NDArray[np.int64]:
    B = np.zeros((half, half), dtype=np.int64)
    B[g.edges[:, 0], g.edges[:, 1] - half] = 1
    return B


def bq_walk_counts_check(q: int, graph: Optional[WeightedGraph] = None) -> Verdict:
    """Length-2 walks between left vertices equal q I + (J - I) (x) J."""
    g = build_bq(q) if graph is None else graph
    B = _biadjacency(g, q * q)
    walks = B @ B.T
    expected = q * np.eye(q * q, dtype=np.int64) + np.kron(
        np.ones((q, q), dtype=np.int64) - np.eye(q, dtype=np.int64),
        np.ones((q, q), dtype=np.int64),
    )
    bad = np.argwhere(walks != expected)
    if len(bad):
        u, v = bad[0]
        return Verdict(
            False,
            f"{g.labels[u]} -> {g.labels[v]}: {walks[u, v]} walks, "
            f"expected {expected[u, v]}",
        )
    return Verdict(True)


def bq_expected_spectrum(q: int) -> NDArray[np.float64]:
    """{1, 1/sqrt(q), 0, -1/sqrt(q), -1} with their multiplicities, descending."""
    root = 1 / math.sqrt(q)
    return np.concatenate(
        [
            [1.0],
            np.full(q * q - q, root),
            np.zeros(2 * (q - 1)),
            np.full(q * q - q, -root),
            [-1.0],
        ]
    )


def bq_spectrum_check(
    q: int, analyzer: Optional[SpectralAnalyzer] = None, tol: float = 1e-9
) -> Verdict:
    """Regularity, walk counts and the full spectrum of B_q.

    The spectrum needs a dense solve, so q is limited to 27 here.

    Examples
    --------
    >>> from cosetexpanders import bq_spectrum_check
    >>> bool(bq_spectrum_check(8))
    True
    """
    if q > 27:
        raise ValueError(f"the full spectrum is only computed for q <= 27, got {q}")
    g = build_bq(q)
    degrees = g.degrees()
    irregular = np.flatnonzero(degrees != q)
    if len(irregular):
        u = irregular[0]
        return Verdict(False, f"{g.labels[u]} has degree {degrees[u]}, not {q}")
    walks = bq_walk_counts_check(q, g)
    if not walks:
        return walks
    analyzer = SpectralAnalyzer(solver="dense") if analyzer is None else analyzer
    values = clone(analyzer).set_params(solver="dense").fit(g).eigenvalues_
    gap = np.abs(values - bq_expected_spectrum(q))
    worst = int(np.argmax(gap))
    if gap[worst] > tol:
        return Verdict(
            False,
            f"eigenvalue #{worst} is {values[worst]:.12f}, off by {gap[worst]:.2e}",
        )
    return Verdict(True, f"lambda_2 = {values[1]:.12f}")


def _a_pairs(p: int) -> Tuple[NDArray[np.int64], NDArray[np.int64]]:
    """All (ell, Q) coefficient vectors, in index order ell_code * p^3 + Q_code."""
    ell = _digits(np.repeat(np.arange(p**2), p**3), p, 2)
    Q = _digits(np.tile(np.arange(p**3), p**2), p, 3)
    return ell, Q


def _a_index(ell: NDArray[np.int64], Q: NDArray[np.int64], p: int) -> NDArray:
    return _code(ell, p) * p**3 + _code(Q, p)


def build_A(p: int) -> WeightedGraph:
    """Bipartite graph on pairs (ell, Q), linear times quadratic over F_p.

    (ell1, Q1) on the left is adjacent to (ell2, Q2) on the right iff
    ell1 * ell2 = Q1 + Q2 as polynomials; no reduction occurs since every
    degree is at most 2.

    Examples
    --------
    >>> from cosetexpanders import build_A
    >>> A = build_A(2)
    >>> A.n, set(A.degrees().tolist())
    (64, {4})
    """
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    half = p**5
    ell1, Q1 = _a_pairs(p)
    left = np.repeat(np.arange(half), p**2)
    ell1 = np.repeat(ell1, p**2, axis=0)
    Q1 = np.repeat(Q1, p**2, axis=0)
    ell2 = _digits(np.tile(np.arange(p**2), half), p, 2)
    product_ = poly_mul_array(
        np.pad(ell1, ((0, 0), (0, 1))), np.pad(ell2, ((0, 0), (0, 1))), p
    )
    Q2 = (product_ - Q1) % p
    right = half + _a_index(ell2, Q2, p)

    ell_all, Q_all = _a_pairs(p)
    labels = [
        PointLinePair(side, tuple(e), tuple(q_), p).label()
        for side in SIDES
        for e, q_ in zip(ell_all.tolist(), Q_all.tolist())
    ]
    return WeightedGraph.from_edges(
        2 * half, np.column_stack([left, right]), labels=labels, graph_id=f"A_{p}"
    )


def _edge_set(edges: NDArray[np.int64]) -> Set[Tuple[int, int]]:
    return set(map(tuple, np.sort(edges, axis=1).tolist()))


def _first_difference(
    found: Set[Tuple[int, int]], expected: Set[Tuple[int, int]], g: WeightedGraph
) -> str:
    extra, missing = sorted(found - expected), sorted(expected - found)
    if extra:
        u, v = extra[0]
        return f"unexpected edge {g.labels[u]} ~ {g.labels[v]}"
    u, v = missing[0]
    return f"missing edge {g.labels[u]} ~ {g.labels[v]}"


def induced_subgraph_check(p: int) -> Verdict:
    """B_{p^3} restricted to deg(a) <= 1 on both sides equals A.

    Field elements of degree at most 2 in y are read as polynomials in t.

    Examples
    --------
    >>> from cosetexpanders import induced_subgraph_check
    >>> bool(induced_subgraph_check(2))
    True
    """
    q = p**3
    B = build_bq(q)
    A = build_A(p)
    half_b, half_a = q * q, p**5
    u, v = B.edges[:, 0], B.edges[:, 1] - half_b
    # a (resp. c) is the leading base-q digit; the cap deg <= 1 is a < p^2
    keep = (u // q < p**2) & (v // q < p**2)
    induced = np.column_stack([u[keep], half_a + v[keep]])
    found, expected = _edge_set(induced), _edge_set(A.edges)
    if found != expected:
        return Verdict(False, _first_difference(found, expected, A))
    return Verdict(True, f"{len(found)} edges agree")


def link_bijection_check(p: int, s: int = 3) -> Verdict:
    """The consecutive-pair link of X(G, {K_1, K_2, K_3}) is the graph A.

    Cosets of <e_{1,2}> (type 2) map to (ell, Q) on the left through their
    M1 representative, cosets of <e_{2,3}> (type 1) to (ell, -Q) on the
    right through M2, and the two edge sets must coincide.

    Raises
    ------
    ValueError
        If s < 3, where quadratics do not embed in F_p[t]/<t^s>.

    Examples
    --------
    >>> from cosetexpanders import link_bijection_check
    >>> bool(link_bijection_check(2, 3))
    True
    """
    if s < 3:
        raise ValueError(f"quadratics need s >= 3, got s = {s}")
    model = local_complex(p, s, 3, {3})
    graph = local_link_graph(p, s, 3, 1)
    if graph.edge_set() != one_skeleton(model).edge_set():
        return Verdict(False, "link graph and its local model disagree")
    A = build_A(p)
    half = p**5

    elements = model.ambient.elements.astype(np.int64)
    x, y, z = elements[:, 0, 1], elements[:, 1, 2], elements[:, 0, 2]
    if x[:, 2:].any() or y[:, 2:].any() or z[:, 3:].any():
        return Verdict(False, "an element of K_3 has entries of too high degree")
    # type 2: h<e_{1,2}> -> (h[2,3], h[1,3]); type 1: h<e_{2,3}> -> (h[1,2], -Q)
    left_index = _a_index(y[:, :2], z[:, :3], p)
    q_m2 = (z - poly_mul_array(x, y, p)) % p
    right_index = half + _a_index(x[:, :2], (-q_m2[:, :3]) % p, p)

    vertex_map: Dict[Tuple[int, int], int] = {}
    for vertex_type, indices in ((2, left_index), (1, right_index)):
        labels = model.table_for(vertex_type).labels
        pairs = np.unique(np.column_stack([labels, indices]), axis=0)
        if len(pairs) != model.table_for(vertex_type).n_cosets:
            return Verdict(False, f"a type-{vertex_type} coset has two representatives")
        if len(np.unique(pairs[:, 1])) != len(pairs) or len(pairs) != half:
            return Verdict(False, f"type-{vertex_type} cosets do not biject onto A")
        vertex_map.update(
            ((vertex_type, int(c)), int(i)) for c, i in pairs.tolist()
        )

    mapped = np.array(
        [
            [vertex_map[graph.labels[u]], vertex_map[graph.labels[v]]]
            for u, v in graph.edges.tolist()
        ],
        dtype=np.int64,
    ).reshape(-1, 2)
    found, expected = _edge_set(mapped), _edge_set(A.edges)
    if found != expected:
        return Verdict(False, _first_difference(found, expected, A))
    return Verdict(True, f"{len(found)} edges agree")


# ---------------------------------------------------------------------------
# Expansion of A


def induced_eig_bound(d_sub: int, D_super: int, lambda_super: float) -> float:
    """D * lambda(Y) / d for a d-regular induced subgraph of a D-regular Y.

    Examples
    --------
    >>> from cosetexpanders import induced_eig_bound
    >>> round(induced_eig_bound(4, 8, 8 ** -0.5), 12) == round(2 ** -0.5, 12)
    True
    """
    if d_sub <= 0 or D_super <= 0:
        raise ValueError("degrees must be positive")
    if d_sub > D_super:
        raise ValueError(f"induced degree {d_sub} exceeds ambient degree {D_super}")
    return D_super * lambda_super / d_sub


@dataclass(frozen=True)
class AffineExpansion:
    p: int
    lambda_A: float
    lambda_Bq: float
    induced_bound: float
    target: float
    A_report: SpectralReport

    @property
    def holds(self) -> bool:
        tol = self.A_report.tol
        return self.lambda_A <= min(self.induced_bound, self.target) + tol


def affine_expansion(
    p: int,
    analyzer: Optional[SpectralAnalyzer] = None,
    bq_analyzer: Optional[SpectralAnalyzer] = None,
) -> AffineExpansion:
    """Measure lambda_2(A) against 1/sqrt(p) and the induced-subgraph bound.

    A is always diagonalized densely, whatever its size; B_q uses
    `bq_analyzer`, which picks its solver by size when omitted.
    """
    A = build_A(p)
    analyzer = SpectralAnalyzer(tol=1e-9) if analyzer is None else analyzer
    target = 1 / math.sqrt(p)
    A_report = (
        clone(analyzer)
        .set_params(solver="dense")
        .fit(A)
        .report([Bound("1/sqrt(p)", target, "onesided")])
    )
    bq_analyzer = SpectralAnalyzer(tol=1e-9) if bq_analyzer is None else bq_analyzer
    lambda_Bq = clone(bq_analyzer).fit(build_bq(p**3)).lambda_2_
    bound = induced_eig_bound(p**2, p**3, lambda_Bq)
    logger.info(
        "lambda_2(A_%d) = %.9f, induced bound %.9f", p, A_report.lambda_2, bound
    )
    return AffineExpansion(p, A_report.lambda_2, lambda_Bq, bound, target, A_report)


def measure_truncated_link(
    p: int, analyzer: Optional[SpectralAnalyzer] = None
) -> SpectralReport:
    """Spectrum of the consecutive-pair link at s = 2, for the record only.

    The comparison with 1/sqrt(p) is informational; no identification with
    A exists at this truncation.
    """
    graph = local_link_graph(p, 2, 3, 1)
    analyzer = SpectralAnalyzer() if analyzer is None else analyzer
    return clone(analyzer).fit(graph).report([Bound("1/sqrt(p)", 1 / math.sqrt(p))])
