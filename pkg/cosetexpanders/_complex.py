from __future__ import annotations
import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import (
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from ._cache import GroupCache
from ._graph import WeightedGraph, connectivity
from ._matrices import (
    DEFAULT_CAP,
    CosetTable,
    GeneratorSet,
    GroupEnumeration,
    RingMatrix,
    bfs_closure,
    enumerate_cosets,
    matmul_batch,
)
from ._typing import Face, Verdict, Vertex

logger = logging.getLogger(__name__)


def canonical_face(vertices: Iterable[Vertex]) -> Face:
    return tuple(sorted((int(t), int(c)) for t, c in vertices))


def sub_faces(face: Face) -> Iterator[Face]:
    """Faces obtained by dropping exactly one vertex."""
    for k in range(len(face)):
        yield face[:k] + face[k + 1 :]


def face_id(face: Face) -> str:
    if not face:
        return "skeleton"
    return "link[" + ",".join(f"{t}:{c}" for t, c in face) + "]"


@dataclass(frozen=True, eq=False)
class WeightedComplex:
    """A pure simplicial complex with balanced rational weights.

    ``levels[i + 1]`` holds X(i), the faces with i + 1 vertices, so that
    ``levels[0] == ((),)`` is the empty face. Faces are sorted tuples of
    (type, coset id) vertices.

    Parameters
    ----------
    levels : Tuple[Tuple[Face, ...], ...]
        Faces level by level, each level sorted.
    weights : Mapping[Face, Fraction]
        Weight of every face.
    params : Tuple[int, int, int], optional
        The (p, s, d) the complex was built from.

    Examples
    --------
    >>> from cosetexpanders import WeightedComplex
    >>> X = WeightedComplex.from_top_faces([((1, 0), (2, 0)), ((1, 0), (2, 1))])
    >>> X.dim
    1
    >>> X.weights[((1, 0),)]
    Fraction(1, 2)
    """

    levels: Tuple[Tuple[Face, ...], ...]
    weights: Mapping[Face, Fraction]
    params: Optional[Tuple[int, int, int]] = None

    @classmethod
    def from_top_faces(
        cls,
        top_faces: Iterable[Iterable[Vertex]],
        top_weights: Optional[Mapping[Face, Fraction]] = None,
        *,
        params: Optional[Tuple[int, int, int]] = None,
    ) -> WeightedComplex:
        """Down-close a set of top faces and induce balanced weights.

        Top faces get `top_weights` (uniform when omitted, always
        normalized to sum 1), and each lower face gets
        ``w(sigma) = 1/(i + 2) * sum of w(tau)`` over the faces tau one level
        up that contain it.
        """
        tops = sorted({canonical_face(f) for f in top_faces})
        if not tops:
            raise ValueError("a complex needs at least one top face")
        size = len(tops[0])
        if any(len(f) != size for f in tops):
            raise ValueError("all top faces must have the same number of vertices")
        if top_weights is None:
            current = {f: Fraction(1, len(tops)) for f in tops}
        else:
            given = {canonical_face(f): Fraction(w) for f, w in top_weights.items()}
            if set(given) != set(tops) or any(w <= 0 for w in given.values()):
                raise ValueError("top weights must be positive and cover the top faces")
            total = sum(given.values())
            current = {f: given[f] / total for f in tops}

        levels: List[Tuple[Face, ...]] = [tuple(tops)]
        weights: Dict[Face, Fraction] = dict(current)
        for level in range(size - 2, -2, -1):
            acc: Dict[Face, Fraction] = defaultdict(Fraction)
            for tau, w_tau in current.items():
                for sigma in sub_faces(tau):
                    acc[sigma] += w_tau
            factor = Fraction(1, level + 2)
            current = {sigma: total * factor for sigma, total in acc.items()}
            levels.append(tuple(sorted(current)))
            weights.update(current)
        levels.reverse()
        return cls(tuple(levels), weights, params)

    @property
    def dim(self) -> int:
        return len(self.levels) - 2

    def faces(self, level: int) -> Tuple[Face, ...]:
        if not -1 <= level <= self.dim:
            return ()
        return self.levels[level + 1]

    @property
    def vertices(self) -> Tuple[Vertex, ...]:
        return tuple(face[0] for face in self.faces(0))

    def __contains__(self, face: object) -> bool:
        return face in self.weights

    def counts(self) -> Dict[int, int]:
        return {level: len(self.faces(level)) for level in range(-1, self.dim + 1)}

    @cached_property
    def _top_index(self) -> Dict[Vertex, List[int]]:
        index: Dict[Vertex, List[int]] = defaultdict(list)
        for k, top in enumerate(self.levels[-1]):
            for vertex in top:
                index[vertex].append(k)
        return dict(index)

    def tops_containing(self, face: Face) -> List[Face]:
        tops = self.levels[-1]
        if not face:
            return list(tops)
        candidates = min((self._top_index.get(v, []) for v in face), key=len)
        members = set(face)
        return [tops[k] for k in candidates if members.issubset(tops[k])]


@dataclass(frozen=True, eq=False)
class LinkView:
    """The link X_f of a face, with balanced weights of its own.

    The link's weights are induced from its top faces weighted by
    w(T) / sum of w(T') over top faces T' containing f. On every level they
    are proportional to the raw restriction w(sigma + f) / w(f), which
    `restricted_weight` exposes.
    """

    base: Face
    parent: WeightedComplex
    complex: WeightedComplex

    @property
    def vertices(self) -> Tuple[Vertex, ...]:
        return self.complex.vertices

    @property
    def edges(self) -> Tuple[Face, ...]:
        return self.complex.faces(1)

    @property
    def triangles(self) -> Tuple[Face, ...]:
        return self.complex.faces(2)

    def restricted_weight(self, face: Face) -> Fraction:
        whole = canonical_face(face + self.base)
        return self.parent.weights[whole] / self.parent.weights[self.base]

    def one_skeleton(self) -> WeightedGraph:
        return one_skeleton(self.complex, graph_id=face_id(self.base))


def link(X: WeightedComplex, f: Iterable[Vertex]) -> LinkView:
    """The link {T - f : f subset of T in X}.

    Examples
    --------
    >>> from cosetexpanders import WeightedComplex, link
    >>> X = WeightedComplex.from_top_faces([((1, 0), (2, 0), (3, 0))])
    >>> link(X, [(1, 0)]).edges
    (((2, 0), (3, 0)),)
    """
    f = canonical_face(f)
    if f not in X:
        raise ValueError(f"{face_id(f)} is not a face of the complex")
    if not f:
        return LinkView(f, X, X)
    tops = X.tops_containing(f)
    members = set(f)
    top_weights = {
        tuple(v for v in top if v not in members): X.weights[top] for top in tops
    }
    complex_ = WeightedComplex.from_top_faces(
        top_weights.keys(), top_weights, params=X.params
    )
    return LinkView(f, X, complex_)


def one_skeleton(X: WeightedComplex, graph_id: str = "skeleton") -> WeightedGraph:
    """Vertices and edges of `X` with their balanced weights."""
    vertices = X.vertices
    index = {v: k for k, v in enumerate(vertices)}
    edge_faces = X.faces(1)
    edges = [(index[u], index[v]) for u, v in edge_faces]
    weights = [X.weights[e] for e in edge_faces]
    return WeightedGraph.from_edges(
        len(vertices), edges, weights, labels=vertices, graph_id=graph_id
    )


def skeleton(X: WeightedComplex, k: int) -> WeightedComplex:
    """All faces of dimension at most `k`."""
    levels = X.levels[: k + 2]
    weights = {f: X.weights[f] for level in levels for f in level}
    return WeightedComplex(levels, weights, X.params)


def verify_balanced(X: WeightedComplex) -> Verdict:
    """Check both balance conditions exactly.

    Every level sums to 1, and each face below the top has weight
    1/(i + 2) times the total weight of the faces one level up containing
    it. The first violated identity is reported.
    """
    for level in range(-1, X.dim + 1):
        total = sum((X.weights[f] for f in X.faces(level)), Fraction(0))
        if total != 1:
            return Verdict(False, f"level {level} weights sum to {total}, not 1")
    for level in range(X.dim - 1, -2, -1):
        acc: Dict[Face, Fraction] = defaultdict(Fraction)
        for tau in X.faces(level + 1):
            for sigma in sub_faces(tau):
                acc[sigma] += X.weights[tau]
        factor = Fraction(1, level + 2)
        for sigma in X.faces(level):
            expected = acc.get(sigma, Fraction(0)) * factor
            if X.weights[sigma] != expected:
                return Verdict(
                    False,
                    f"w{list(sigma)} = {X.weights[sigma]} but the faces above "
                    f"give {expected}",
                )
    return Verdict(True)


def check_purity(X: WeightedComplex) -> Verdict:
    """Downward closure, and every face extends one level up (hence to a top)."""
    for level in range(X.dim - 1, -2, -1):
        below = set(X.faces(level))
        covered = {sigma for tau in X.faces(level + 1) for sigma in sub_faces(tau)}
        missing = covered - below
        if missing:
            return Verdict(False, f"{sorted(missing)[0]} is not in the complex")
        maximal = below - covered
        if maximal:
            first = sorted(maximal)[0]
            return Verdict(False, f"{first} does not extend to a top face")
    return Verdict(True)


def check_partite(X: WeightedComplex) -> Verdict:
    for face in X.levels[-1]:
        types = [t for t, _ in face]
        if len(set(types)) != len(types):
            return Verdict(False, f"{face} holds two vertices of one type")
    return Verdict(True)


def write_faces(
    X: WeightedComplex,
    path: Union[str, Path],
    levels: Optional[Sequence[int]] = None,
) -> Path:
    """One face per line as "level;type-list;coset-id-list"."""
    selected = range(-1, X.dim + 1) if levels is None else levels
    lines = []
    for level in selected:
        for face in X.faces(level):
            types = ",".join(str(t) for t, _ in face)
            ids = ",".join(str(c) for _, c in face)
            lines.append(f"{level};{types};{ids}")
    if not lines:
        raise ValueError("no faces selected for export")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# Coset complexes


@dataclass(frozen=True, eq=False)
class CosetComplex(WeightedComplex):
    """The coset complex X(H, {H_j}) of an enumerated group H.

    Vertices of type j are the cosets of H_j; top faces are the tuples
    (h H_j)_j for h in H. Keeps the enumerations behind it so that cosets
    can be mapped back to matrices.
    """

    ambient: Optional[GroupEnumeration] = None
    tables: Tuple[CosetTable, ...] = ()
    types: Tuple[int, ...] = ()

    def table_for(self, vertex_type: int) -> CosetTable:
        return self.tables[self.types.index(vertex_type)]

    def vertex_representative(self, vertex: Vertex) -> RingMatrix:
        vertex_type, coset_id = vertex
        return self.table_for(vertex_type).representative(coset_id)

    def translate(self, g: RingMatrix, face: Iterable[Vertex]) -> Face:
        """Image of a face under left multiplication by g."""
        image = []
        for vertex_type, coset_id in face:
            table = self.table_for(vertex_type)
            moved = g @ table.representative(coset_id)
            image.append((vertex_type, table.coset_of(moved)))
        return canonical_face(image)

    def translated_link_check(self, g: RingMatrix, vertex_type: int) -> Verdict:
        """Check that g^-1 carries link(g K_i) onto link(K_i).

        Every face of the link of the type-i vertex containing g must be
        sent to a face of the link of the identity coset with the same
        weight, and the two links must have the same number of faces.
        """
        table = self.table_for(vertex_type)
        home = (vertex_type, table.coset_of(RingMatrix.identity(*g.params)))
        moved = (vertex_type, table.coset_of(g))
        source = link(self, [moved]).complex
        target = link(self, [home]).complex
        if source.counts() != target.counts():
            return Verdict(False, f"{face_id((moved,))} and {face_id((home,))} differ")
        g_inv = g.inverse()
        for level in range(source.dim + 1):
            for face in source.faces(level):
                image = self.translate(g_inv, face)
                if target.weights.get(image) != source.weights[face]:
                    return Verdict(
                        False, f"{face_id(face)} is not carried onto a matching face"
                    )
        return Verdict(
            True, f"link of {face_id((moved,))} maps onto link of {face_id((home,))}"
        )

    def link_coset_bijection(
        self, vertex: Vertex, local: CosetComplex
    ) -> Dict[Vertex, Vertex]:
        """Label map from link(X, gK_i) onto the local complex of K_i.

        A link vertex h K_j with h = g k, k in K_i, goes to the coset
        k (K_i cap K_j) of the local complex, where g is the representative
        of `vertex`.

        Raises
        ------
        ValueError
            If the assignment is not a well-defined bijection.
        """
        assert self.ambient is not None and local.ambient is not None
        vertex_type, _ = vertex
        table = self.table_for(vertex_type)
        subgroup = table.subgroup
        if not subgroup.same_elements(local.ambient):
            raise ValueError("local complex is not built over the vertex's subgroup")
        g = self.vertex_representative(vertex)
        p = self.ambient.p
        k_elements = subgroup.elements
        global_idx = self.ambient.index_of(matmul_batch(g.coeffs, k_elements, p))
        local_idx = local.ambient.index_of(k_elements)
        mapping: Dict[Vertex, Vertex] = {}
        for other in self.types:
            if other == vertex_type:
                continue
            global_ids = self.table_for(other).labels[global_idx]
            local_ids = local.table_for(other).labels[local_idx]
            for gid, lid in set(zip(global_ids.tolist(), local_ids.tolist())):
                key, value = (other, gid), (other, lid)
                if mapping.setdefault(key, value) != value:
                    raise ValueError(f"{key} is sent to two local cosets")
        if len(set(mapping.values())) != len(mapping):
            raise ValueError("two link vertices share a local coset")
        return mapping


def coset_complex(
    ambient: GroupEnumeration,
    subgroups: Sequence[GroupEnumeration],
    types: Sequence[int],
    params: Optional[Tuple[int, int, int]] = None,
) -> CosetComplex:
    """Build X(H, {H_j}) with weights induced by the uniform top distribution.

    Top faces come from iterating h over H and deduplicating the tuple of
    coset ids; no intersection tests are needed.
    """
    if len(subgroups) != len(types):
        raise ValueError("one type per subgroup is required")
    tables = tuple(enumerate_cosets(ambient, K) for K in subgroups)
    columns = np.column_stack([table.labels for table in tables])
    rows = np.unique(columns, axis=0)
    tops = [tuple(zip(types, map(int, row))) for row in rows]
    base = WeightedComplex.from_top_faces(tops, params=params)
    logger.info(
        "coset complex over %s: %s faces per level",
        ambient.label,
        base.counts(),
    )
    return CosetComplex(
        base.levels,
        base.weights,
        params,
        ambient=ambient,
        tables=tables,
        types=tuple(types),
    )


def local_complex(
    p: int,
    s: int,
    d: int,
    S: Iterable[int],
    cap: int = DEFAULT_CAP,
    *,
    allow_large: bool = False,
    cache: Optional[GroupCache] = None,
) -> CosetComplex:
    """X(K_S, {K_S cap K_j : j not in S}), the model of a type-S link.

    ``K_S cap K_j`` is enumerated as K_{S + j}. With S empty this is the
    whole complex X(G, {K_1, ..., K_d}). Enumerations are read from and
    written to `cache` when one is given.
    """
    S = frozenset(S)

    def enumerate_subgroup(T: frozenset) -> GroupEnumeration:
        gens = GeneratorSet.for_subgroup(p, s, d, T)
        if cache is None:
            return bfs_closure(gens, cap, allow_large=allow_large)
        return cache.get_or_build(
            gens.label,
            p,
            s,
            d,
            lambda: bfs_closure(gens, cap, allow_large=allow_large),
        )

    ambient = enumerate_subgroup(S)
    others = [j for j in range(1, d + 1) if j not in S]
    subgroups = [enumerate_subgroup(S | {j}) for j in others]
    return coset_complex(ambient, subgroups, others, params=(p, s, d))


def build_complex(
    p: int,
    s: int,
    d: int,
    cap: int = DEFAULT_CAP,
    *,
    allow_large: bool = False,
    cache: Optional[GroupCache] = None,
) -> CosetComplex:
    """The coset complex X(G, {K_1, ..., K_d}) with uniform top weights.

    Examples
    --------
    >>> from cosetexpanders import build_complex
    >>> X = build_complex(2, 1, 3)
    >>> len(X.faces(2)), len(X.faces(0))
    (168, 63)
    """
    return local_complex(p, s, d, (), cap, allow_large=allow_large, cache=cache)


def omitted_pair_face_type(d: int, pair: Tuple[int, int]) -> frozenset:
    a, b = ((pair[0] - 1) % d) + 1, ((pair[1] - 1) % d) + 1
    if a == b:
        raise ValueError("the omitted pair needs two distinct indices")
    return frozenset(range(1, d + 1)) - {a, b}


def link_type(d: int, pair: Tuple[int, int]) -> str:
    """Classify an omitted pair as "consecutive" or "non-consecutive"."""
    omitted_pair_face_type(d, pair)
    gap = (pair[1] - pair[0]) % d
    return "consecutive" if gap in (1, d - 1) else "non-consecutive"


def coset_link_graph(
    p: int, s: int, d: int, pair: Tuple[int, int], cap: int = DEFAULT_CAP
) -> WeightedGraph:
    """1-skeleton of the local model of a link of a face of cotype `pair`."""
    S = omitted_pair_face_type(d, pair)
    model = local_complex(p, s, d, S, cap)
    return one_skeleton(model, graph_id=f"local(p={p},s={s},d={d},omit={pair})")


def local_link_graph(
    p: int, s: int, d: int, i: int, cap: int = DEFAULT_CAP
) -> WeightedGraph:
    """Bipartite link of a type-S face, S = [d] - {i, i+1}, built from K_S alone.

    Examples
    --------
    >>> from cosetexpanders import local_link_graph
    >>> g = local_link_graph(2, 3, 3, 1)
    >>> g.n, set(g.degrees().tolist())
    (64, {4})
    """
    i = ((i - 1) % d) + 1
    return coset_link_graph(p, s, d, (i, i % d + 1), cap)


def connectivity_criterion(X: CosetComplex) -> Verdict:
    """The 1-skeleton is connected iff the subgroups generate the ambient group."""
    assert X.ambient is not None
    generated = bfs_closure(
        GeneratorSet.from_elements("<K_j>", [t.subgroup for t in X.tables]),
        max(X.ambient.order, 1),
    )
    is_generated = generated.same_elements(X.ambient)
    connected = connectivity(one_skeleton(X))
    if connected != is_generated:
        return Verdict(False, f"connected={connected} but generated={is_generated}")
    return Verdict(True, f"connected={connected}")
