from __future__ import annotations
import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from pathlib import Path
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from ._algebra import TruncatedPoly, _check_prime, poly_mul_array, truncated_convolution
from ._exceptions import (
    InfeasibleParametersError,
    ParameterMismatchError,
    SingularMatrixError,
)
from ._np_utils import groupby_array, pack_rows, sorted_membership, unpack_keys
from ._typing import MatrixBatch, Verdict

logger = logging.getLogger(__name__)

DEFAULT_CAP = 2**25
BRUTEFORCE_GUARD = 2**30
_CHUNK = 1 << 15


# ---------------------------------------------------------------------------
# Batched arithmetic on arrays of shape (..., d, d, s)


def identity_batch(d: int, s: int) -> MatrixBatch:
    eye = np.zeros((d, d, s), dtype=np.int64)
    eye[np.arange(d), np.arange(d), 0] = 1
    return eye


def matmul_batch(A: MatrixBatch, B: MatrixBatch, p: int) -> MatrixBatch:
    """Products of matrices over R, broadcasting over leading axes.

    Examples
    --------
    >>> import numpy as np
    >>> from cosetexpanders._matrices import identity_batch, matmul_batch
    >>> eye = identity_batch(3, 2)
    >>> bool((matmul_batch(eye, eye, 2) == eye).all())
    True
    """
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    conv = truncated_convolution(A.shape[-1])
    A, B = np.broadcast_arrays(A, B)
    return np.einsum("...ima,...mjb,abk->...ijk", A, B, conv, optimize=True) % p


def _permutation_sign(perm: Sequence[int]) -> int:
    n = len(perm)
    inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
    return -1 if inversions % 2 else 1


def det_batch(A: MatrixBatch, p: int) -> NDArray[np.int64]:
    """Determinants over R by the Leibniz expansion; shape (..., s)."""
    A = np.asarray(A, dtype=np.int64)
    d = A.shape[-3]
    total = np.zeros(A.shape[:-3] + A.shape[-1:], dtype=np.int64)
    for perm in permutations(range(d)):
        term = A[..., 0, perm[0], :]
        for row in range(1, d):
            term = poly_mul_array(term, A[..., row, perm[row], :], p)
        total = (total + _permutation_sign(perm) * term) % p
    return total


def adjugate_batch(A: MatrixBatch, p: int) -> MatrixBatch:
    A = np.asarray(A, dtype=np.int64)
    d = A.shape[-3]
    adj = np.zeros_like(A)
    if d == 1:
        adj[..., 0, 0, 0] = 1
        return adj
    for i, j in product(range(d), repeat=2):
        minor = np.delete(np.delete(A, i, axis=-3), j, axis=-2)
        sign = -1 if (i + j) % 2 else 1
        adj[..., j, i, :] = (sign * det_batch(minor, p)) % p
    return adj


@lru_cache(maxsize=None)
def unit_inverses(p: int, s: int) -> Tuple[NDArray[np.int64], NDArray[np.int64]]:
    """Inverse table of R found by exhaustive search.

    Returns
    -------
    table : NDArray[np.int64]
        ``table[code]`` is the code of the inverse, or -1 for non-units.
    elements : NDArray[np.int64]
        Coefficient vector of every code, shape (p**s, s).
    """
    elements = unpack_keys(np.arange(p**s), s, p)
    products = poly_mul_array(elements[:, None, :], elements[None, :, :], p)
    one = np.zeros(s, dtype=np.int64)
    one[0] = 1
    is_one = (products == one).all(axis=-1)
    table = np.where(is_one.any(axis=1), is_one.argmax(axis=1), -1)
    table.setflags(write=False)
    elements.setflags(write=False)
    return table, elements


def inverse_batch(A: MatrixBatch, p: int) -> MatrixBatch:
    """Inverses by adjugate over determinant."""
    A = np.asarray(A, dtype=np.int64)
    s = A.shape[-1]
    det = det_batch(A, p)
    table, elements = unit_inverses(p, s)
    codes = table[pack_rows(det, p)]
    if (codes < 0).any():
        raise SingularMatrixError("determinant is not a unit of R")
    det_inv = elements[codes]
    return poly_mul_array(adjugate_batch(A, p), det_inv[..., None, None, :], p)


def _storage_dtype(p: int) -> type:
    return np.uint8 if p < 256 else np.int64


def _keys(batch: MatrixBatch, p: int) -> NDArray:
    batch = np.asarray(batch)
    return pack_rows(batch.reshape(len(batch), -1), p)


# ---------------------------------------------------------------------------
# Single matrices


class RingMatrix:
    """A d x d matrix over R = F_p[t]/<t^s>.

    Entries are stored as an immutable (d, d, s) coefficient array; the
    serialization key is the row-major tuple of coefficient tuples, packed
    into one integer. Indices in the public API are 1-based.

    Examples
    --------
    >>> from cosetexpanders import RingMatrix, TruncatedPoly, elementary
    >>> t = TruncatedPoly.variable(2, 2)
    >>> A = elementary(1, 2, t, 3)
    >>> print(A.entry(1, 2))
    1*t
    >>> A @ A == RingMatrix.identity(2, 2, 3)
    True
    """

    __slots__ = ("coeffs", "p", "s")

    def __init__(self, coeffs: NDArray[np.int64], p: int, s: int) -> None:
        arr = np.array(coeffs, dtype=np.int64) % p
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != s:
            raise ValueError(f"expected a (d, d, {s}) array, got {arr.shape}")
        arr.setflags(write=False)
        self.coeffs = arr
        self.p = p
        self.s = s

    @classmethod
    def identity(cls, p: int, s: int, d: int) -> RingMatrix:
        return cls(identity_batch(d, s), p, s)

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[TruncatedPoly]]) -> RingMatrix:
        first = rows[0][0]
        if any(e.p != first.p or e.s != first.s for row in rows for e in row):
            raise ParameterMismatchError("entries over different rings")
        coeffs = np.array([[e.coeffs for e in row] for row in rows], dtype=np.int64)
        return cls(coeffs, first.p, first.s)

    @classmethod
    def from_text(cls, text: str, p: int, s: int, d: int) -> RingMatrix:
        """Parse one line of a group dump."""
        fields = text.strip().split("|")
        if len(fields) != d * d:
            raise ValueError(f"expected {d * d} fields, got {len(fields)}")
        polys = [TruncatedPoly.from_string(f, p, s) for f in fields]
        return cls.from_entries([polys[r * d : (r + 1) * d] for r in range(d)])

    @property
    def d(self) -> int:
        return self.coeffs.shape[0]

    @property
    def params(self) -> Tuple[int, int, int]:
        return self.p, self.s, self.d

    @property
    def key(self) -> int:
        return int(_keys(self.coeffs[None], self.p)[0])

    def entry(self, i: int, j: int) -> TruncatedPoly:
        coeffs = tuple(int(c) for c in self.coeffs[i - 1, j - 1])
        return TruncatedPoly(coeffs, self.p, self.s)

    def to_text(self) -> str:
        return "|".join(
            str(self.entry(i + 1, j + 1)) for i, j in product(range(self.d), repeat=2)
        )

    def inverse(self) -> RingMatrix:
        return mat_inv(self)

    def __matmul__(self, other: RingMatrix) -> RingMatrix:
        return mat_mul(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RingMatrix):
            return NotImplemented
        return self.params == other.params and bool((self.coeffs == other.coeffs).all())

    def __hash__(self) -> int:
        return hash((self.params, self.key))

    def __repr__(self) -> str:
        return f"RingMatrix(p={self.p}, s={self.s}, d={self.d}, [{self.to_text()}])"


def _same_params(A: RingMatrix, B: RingMatrix) -> None:
    if A.params != B.params:
        raise ParameterMismatchError(f"(p, s, d) = {A.params} and {B.params} mixed")


def elementary(i: int, j: int, r: TruncatedPoly, d: int) -> RingMatrix:
    """The elementary matrix e_{i,j}(r); indices wrap around modulo d.

    Examples
    --------
    >>> from cosetexpanders import TruncatedPoly, elementary
    >>> one = TruncatedPoly.one(2, 1)
    >>> print(elementary(3, 4, one, 3).entry(3, 1))
    1
    """
    i = (i - 1) % d + 1
    j = (j - 1) % d + 1
    if i == j:
        raise ValueError(f"e_{{i,j}} needs distinct indices modulo {d}")
    coeffs = identity_batch(d, r.s)
    coeffs[i - 1, j - 1] = r.coeffs
    return RingMatrix(coeffs, r.p, r.s)


def mat_mul(A: RingMatrix, B: RingMatrix) -> RingMatrix:
    _same_params(A, B)
    return RingMatrix(matmul_batch(A.coeffs, B.coeffs, A.p), A.p, A.s)


def mat_inv(A: RingMatrix) -> RingMatrix:
    """Inverse over R; raises `SingularMatrixError` for a non-unit determinant."""
    return RingMatrix(inverse_batch(A.coeffs, A.p), A.p, A.s)


def determinant(A: RingMatrix) -> TruncatedPoly:
    det = det_batch(A.coeffs, A.p)
    return TruncatedPoly(tuple(int(c) for c in det), A.p, A.s)


def commutator(A: RingMatrix, B: RingMatrix) -> RingMatrix:
    """[A, B] = A^-1 B^-1 A B."""
    _same_params(A, B)
    return mat_inv(A) @ mat_inv(B) @ A @ B


# ---------------------------------------------------------------------------
# Generators and enumerated groups


def subgroup_label(S: Iterable[int]) -> str:
    S = sorted(set(S))
    return "G" if not S else "K_{" + ",".join(map(str, S)) + "}"


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """Generators e_{j,j+1}(at+b), j outside `excluded`, of K_S (or of G).

    Parameters
    ----------
    label : str
        ``"G"`` for the full set, ``"K_{...}"`` otherwise.
    p, s, d : int
        Ring and matrix parameters.
    excluded : FrozenSet[int]
        The index set S.
    generators : MatrixBatch
        Generator coefficient arrays, shape (g, d, d, s).
    """

    label: str
    p: int
    s: int
    d: int
    excluded: FrozenSet[int]
    generators: MatrixBatch

    @classmethod
    def for_subgroup(
        cls, p: int, s: int, d: int, S: Iterable[int] = ()
    ) -> GeneratorSet:
        _check_prime(p)
        excluded = frozenset(S)
        if not excluded <= set(range(1, d + 1)):
            raise ValueError(f"S must be a subset of 1..{d}, got {sorted(excluded)}")
        gens: List[MatrixBatch] = []
        seen = set()
        for j in range(1, d + 1):
            if j in excluded:
                continue
            for a, b in product(range(p), repeat=2):
                r = TruncatedPoly.from_coeffs([b, a], p, s)
                if r.degree < 0:
                    continue
                g = elementary(j, j + 1, r, d)
                if g.key not in seen:
                    seen.add(g.key)
                    gens.append(g.coeffs)
        generators = (
            np.stack(gens) if gens else np.zeros((0, d, d, s), dtype=np.int64)
        )
        return cls(subgroup_label(excluded), p, s, d, excluded, generators)

    @classmethod
    def from_elements(
        cls, label: str, groups: Sequence[GroupEnumeration]
    ) -> GeneratorSet:
        """Use every element of some enumerated subgroups as generators."""
        p, s, d = groups[0].params
        if any(g.params != (p, s, d) for g in groups):
            raise ParameterMismatchError("subgroups over different (p, s, d)")
        generators = np.concatenate([g.elements.astype(np.int64) for g in groups])
        return cls(label, p, s, d, frozenset(), generators)

    def __len__(self) -> int:
        return len(self.generators)


@dataclass(frozen=True, eq=False)
class GroupEnumeration:
    """A finite matrix group given by all of its elements.

    Elements are stored sorted by their serialization key, so membership
    is a binary search.
    """

    label: str
    p: int
    s: int
    d: int
    elements: MatrixBatch
    keys: NDArray

    @classmethod
    def from_batch(
        cls, label: str, p: int, s: int, d: int, batch: MatrixBatch
    ) -> GroupEnumeration:
        batch = np.asarray(batch).reshape(-1, d, d, s)
        keys, first = np.unique(_keys(batch, p), return_index=True)
        elements = batch[first].astype(_storage_dtype(p))
        elements.setflags(write=False)
        keys.setflags(write=False)
        return cls(label, p, s, d, elements, keys)

    @property
    def params(self) -> Tuple[int, int, int]:
        return self.p, self.s, self.d

    @property
    def order(self) -> int:
        return len(self.keys)

    def __len__(self) -> int:
        return self.order

    def __contains__(self, matrix: RingMatrix) -> bool:
        if matrix.params != self.params:
            return False
        return bool(self.contains_batch(matrix.coeffs[None])[0])

    def __iter__(self) -> Iterator[RingMatrix]:
        for idx in range(self.order):
            yield self.matrix(idx)

    def matrix(self, idx: int) -> RingMatrix:
        return RingMatrix(self.elements[idx], self.p, self.s)

    def contains_batch(self, batch: MatrixBatch) -> NDArray[np.bool_]:
        return sorted_membership(self.keys, _keys(batch, self.p))[0]

    def index_of(self, batch: MatrixBatch) -> NDArray[np.intp]:
        """Positions of matrices in `elements`; all must be members."""
        return self.index_of_keys(_keys(batch, self.p))

    def index_of_keys(self, keys: NDArray) -> NDArray[np.intp]:
        found, positions = sorted_membership(self.keys, keys)
        if not found.all():
            raise ValueError(f"key is not an element of {self.label}")
        return positions

    def is_subset_of(self, other: GroupEnumeration) -> bool:
        return self.params == other.params and bool(
            sorted_membership(other.keys, self.keys)[0].all()
        )

    def same_elements(self, other: GroupEnumeration) -> bool:
        return (
            self.params == other.params
            and self.order == other.order
            and bool((self.keys == other.keys).all())
        )

    def verify(self) -> Verdict:
        """Identity membership and closure under inverses."""
        eye = identity_batch(self.d, self.s)[None]
        if not self.contains_batch(eye)[0]:
            return Verdict(False, f"{self.label} does not contain the identity")
        for start in range(0, self.order, _CHUNK):
            block = self.elements[start : start + _CHUNK]
            inside = self.contains_batch(inverse_batch(block, self.p))
            if not inside.all():
                bad = self.matrix(start + int(np.argmin(inside)))
                return Verdict(False, f"inverse of {bad.to_text()} is missing")
        return Verdict(True)


def bfs_closure(
    gens: GeneratorSet, cap: int = DEFAULT_CAP, *, allow_large: bool = False
) -> GroupEnumeration:
    """Enumerate the group generated by `gens`.

    Breadth-first closure of the identity under right multiplication by
    every generator. Generator sets of elementary matrices are closed
    under inverses, so right multiplication alone reaches the whole group.

    Parameters
    ----------
    gens : GeneratorSet
        Generators.
    cap : int, default=2**25
        Largest order that may be enumerated.
    allow_large : bool, default=False
        Must be set to use a cap above the default.

    Raises
    ------
    InfeasibleParametersError
        If the group order exceeds `cap`.

    Examples
    --------
    >>> from cosetexpanders import GeneratorSet, bfs_closure
    >>> bfs_closure(GeneratorSet.for_subgroup(2, 1, 3)).order
    168
    """
    if cap > DEFAULT_CAP and not allow_large:
        raise InfeasibleParametersError(
            f"cap {cap} is above the default of {DEFAULT_CAP} elements; "
            "pass allow_large to lift it"
        )
    p, s, d = gens.p, gens.s, gens.d
    frontier = identity_batch(d, s)[None]
    seen = _keys(frontier, p)
    batches = [frontier]
    key_batches = [seen]
    generators = gens.generators.astype(np.int64)
    step = max(1, _CHUNK // max(len(generators), 1))
    layer = 0
    while len(frontier) and len(generators):
        new_keys, new_elems = [], []
        for start in range(0, len(frontier), step):
            block = frontier[start : start + step].astype(np.int64)
            products = matmul_batch(block[:, None], generators[None], p)
            products = products.reshape(-1, d, d, s)
            keys, first = np.unique(_keys(products, p), return_index=True)
            fresh = ~sorted_membership(seen, keys)[0]
            new_keys.append(keys[fresh])
            new_elems.append(products[first[fresh]].astype(_storage_dtype(p)))
        keys, first = np.unique(np.concatenate(new_keys), return_index=True)
        frontier = np.concatenate(new_elems)[first]
        total = len(seen) + len(keys)
        if total > cap:
            raise InfeasibleParametersError(
                f"closure of {gens.label} over (p={p}, s={s}, d={d}) exceeds "
                f"the cap of {cap} elements"
            )
        seen = np.sort(np.concatenate([seen, keys]))
        batches.append(frontier)
        key_batches.append(keys)
        layer += 1
        logger.debug(
            "%s layer %d: %d new, %d total", gens.label, layer, len(keys), total
        )

    group = GroupEnumeration.from_batch(
        gens.label, p, s, d, np.concatenate([b.astype(np.int64) for b in batches])
    )
    logger.info(
        "enumerated %s over (p=%d, s=%d, d=%d): order %d",
        gens.label,
        p,
        s,
        d,
        group.order,
    )
    return group


def special_linear_bruteforce(p: int, s: int, d: int) -> GroupEnumeration:
    """All d x d matrices over R of determinant 1, by exhaustive scan.

    Examples
    --------
    >>> from cosetexpanders import special_linear_bruteforce
    >>> special_linear_bruteforce(2, 1, 2).order
    6
    """
    n_digits = d * d * s
    total = p**n_digits
    if total > BRUTEFORCE_GUARD:
        raise InfeasibleParametersError(
            f"brute force needs p^(s*d^2) = {total} matrices, "
            f"above the guard of {BRUTEFORCE_GUARD}"
        )
    one = np.zeros(s, dtype=np.int64)
    one[0] = 1
    found = []
    chunk = 1 << 16
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        batch = unpack_keys(codes, n_digits, p).reshape(-1, d, d, s)
        mask = (det_batch(batch, p) == one).all(axis=-1)
        found.append(batch[mask])
    return GroupEnumeration.from_batch("SL", p, s, d, np.concatenate(found))


def _interval_meets(i: int, j: int, d: int, S: FrozenSet[int]) -> bool:
    """Whether the cyclic interval {i, ..., j-1} (0-based i, j) meets S (1-based)."""
    return any(((i + m) % d) + 1 in S for m in range((j - i) % d))


def ks_mask(S: Iterable[int], batch: MatrixBatch, p: int) -> NDArray[np.bool_]:
    """Vectorised `ks_membership` over a batch of coefficient arrays."""
    S = frozenset(S)
    batch = np.asarray(batch)
    d, s = batch.shape[-3], batch.shape[-1]
    ok = np.ones(batch.shape[0], dtype=bool)
    one = np.zeros(s, dtype=np.int64)
    one[0] = 1
    for i in range(d):
        ok &= (batch[:, i, i] == one).all(axis=-1)
    for i, j in product(range(d), repeat=2):
        if i == j:
            continue
        if _interval_meets(i, j, d, S):
            ok &= (batch[:, i, j] == 0).all(axis=-1)
        else:
            bound = min((j - i) % d, s - 1)
            ok &= (batch[:, i, j, bound + 1 :] == 0).all(axis=-1)
    return ok


def ks_membership(S: Iterable[int], A: RingMatrix) -> bool:
    """Membership in the explicit description of K_S.

    True iff `A` has ones on the diagonal, zeros at every (i, j) whose
    cyclic interval {i, ..., j-1} meets S, and elsewhere entries of degree
    at most min(cyclic distance from i to j, s - 1).

    Examples
    --------
    >>> from cosetexpanders import RingMatrix, ks_membership
    >>> ks_membership({3}, RingMatrix.identity(2, 3, 3))
    True
    """
    S = frozenset(S)
    if not S:
        raise ValueError("S must be nonempty")
    return bool(ks_mask(S, A.coeffs[None], A.p)[0])


def ks_enumeration(
    p: int, s: int, d: int, S: Iterable[int], cap: int = DEFAULT_CAP
) -> GroupEnumeration:
    """Every matrix satisfying `ks_membership`, built from its free coefficients."""
    S = frozenset(S)
    free: List[Tuple[int, int, int]] = []
    for i, j in product(range(d), repeat=2):
        if i != j and not _interval_meets(i, j, d, S):
            for k in range(min((j - i) % d, s - 1) + 1):
                free.append((i, j, k))
    count = p ** len(free)
    if count > cap:
        raise InfeasibleParametersError(
            f"explicit {subgroup_label(S)} has {count} elements, above the cap of {cap}"
        )
    digits = unpack_keys(np.arange(count, dtype=np.int64), len(free), p)
    batch = np.broadcast_to(identity_batch(d, s), (count, d, d, s)).copy()
    for col, (i, j, k) in enumerate(free):
        batch[:, i, j, k] = digits[:, col]
    return GroupEnumeration.from_batch("~" + subgroup_label(S), p, s, d, batch)


def intersect_groups(A: GroupEnumeration, B: GroupEnumeration) -> GroupEnumeration:
    if A.params != B.params:
        raise ParameterMismatchError(f"{A.label} and {B.label} differ in (p, s, d)")
    mask = sorted_membership(B.keys, A.keys)[0]
    return GroupEnumeration.from_batch(
        f"{A.label}&{B.label}", *A.params, A.elements[mask].astype(np.int64)
    )


# ---------------------------------------------------------------------------
# Cosets


@dataclass(frozen=True, eq=False)
class CosetTable:
    """Left cosets gK of a subgroup inside an enumerated ambient group.

    Coset ids are ranks of the representatives, which are the elements of
    smallest serialization key in each coset. ``labels[k]`` is the coset id
    of ``ambient.elements[k]``.
    """

    ambient: GroupEnumeration
    subgroup: GroupEnumeration
    representatives: MatrixBatch
    representative_keys: NDArray
    labels: NDArray[np.int64]

    @property
    def n_cosets(self) -> int:
        return len(self.representative_keys)

    def __len__(self) -> int:
        return self.n_cosets

    def representative(self, coset_id: int) -> RingMatrix:
        ambient = self.ambient
        return RingMatrix(self.representatives[coset_id], ambient.p, ambient.s)

    def coset_of_batch(self, batch: MatrixBatch) -> NDArray[np.int64]:
        return self.labels[self.ambient.index_of(batch)]

    def coset_of(self, matrix: RingMatrix) -> int:
        return int(self.coset_of_batch(matrix.coeffs[None])[0])

    def members(self, coset_id: int) -> NDArray[np.intp]:
        """Indices into ``ambient.elements`` of one coset."""
        return np.flatnonzero(self.labels == coset_id)

    def partition(self) -> Iterator[NDArray[np.intp]]:
        """Member indices of every coset, in coset-id order."""
        indices = np.arange(self.ambient.order)
        for (members,) in groupby_array(indices, by=self.labels):
            yield members


def enumerate_cosets(G: GroupEnumeration, K: GroupEnumeration) -> CosetTable:
    """Partition `G` into left cosets of `K`.

    Examples
    --------
    >>> from cosetexpanders import GeneratorSet, bfs_closure, enumerate_cosets
    >>> G = bfs_closure(GeneratorSet.for_subgroup(2, 1, 3))
    >>> K = bfs_closure(GeneratorSet.for_subgroup(2, 1, 3, {1}))
    >>> len(enumerate_cosets(G, K))
    21
    """
    if not K.is_subset_of(G):
        raise ValueError(f"{K.label} is not contained in {G.label}")
    p = G.p
    min_keys: Optional[NDArray] = None
    for k in K.elements.astype(np.int64):
        keys = np.concatenate(
            [
                _keys(matmul_batch(G.elements[start : start + _CHUNK], k, p), p)
                for start in range(0, G.order, _CHUNK)
            ]
        )
        min_keys = keys if min_keys is None else np.minimum(min_keys, keys)
    assert min_keys is not None
    rep_keys, labels = np.unique(min_keys, return_inverse=True)
    if len(rep_keys) * K.order != G.order:
        raise ValueError(f"cosets of {K.label} do not partition {G.label}")
    representatives = G.elements[G.index_of_keys(rep_keys)]
    logger.info("%d cosets of %s in %s", len(rep_keys), K.label, G.label)
    return CosetTable(G, K, representatives, rep_keys, labels.astype(np.int64))


def coset_intersects(
    g1: RingMatrix, K1: GroupEnumeration, g2: RingMatrix, K2: GroupEnumeration
) -> bool:
    """Whether g1 K1 and g2 K2 share an element, i.e. g1^-1 g2 lies in K1 K2.

    Scans k1^-1 (g1^-1 g2) over k1 in K1; since K1 is a group this is the
    scan of k (g1^-1 g2) over k in K1.
    """
    _same_params(g1, g2)
    x = (mat_inv(g1) @ g2).coeffs
    for start in range(0, K1.order, _CHUNK):
        block = K1.elements[start : start + _CHUNK]
        if K2.contains_batch(matmul_batch(block, x, g1.p)).any():
            return True
    return False


# ---------------------------------------------------------------------------
# Commutator laws


def _ring_codes(p: int, s: int, linear_only: bool) -> NDArray[np.int64]:
    elements = unit_inverses(p, s)[1]
    if linear_only:
        return elements[(elements[:, 2:] == 0).all(axis=1)]
    return elements


def _elementary_batch(
    i: int, j: int, values: NDArray[np.int64], d: int
) -> MatrixBatch:
    s = values.shape[-1]
    batch = np.broadcast_to(identity_batch(d, s), values.shape[:-1] + (d, d, s)).copy()
    batch[..., (i - 1) % d, (j - 1) % d, :] = values
    return batch


def _commutator_batch(A: MatrixBatch, B: MatrixBatch, p: int) -> MatrixBatch:
    left = matmul_batch(inverse_batch(A, p), inverse_batch(B, p), p)
    return matmul_batch(matmul_batch(left, A, p), B, p)


def sum_rule_holds(p: int, s: int, d: int) -> Verdict:
    """e_{ij}(r1) e_{ij}(r2) = e_{ij}(r1 + r2) for all r1, r2 in R and i != j."""
    values = _ring_codes(p, s, linear_only=False)
    sums = (values[:, None, :] + values[None, :, :]) % p
    for i, j in product(range(1, d + 1), repeat=2):
        if i == j:
            continue
        E = _elementary_batch(i, j, values, d)
        got = matmul_batch(E[:, None], E[None, :], p)
        if not (got == _elementary_batch(i, j, sums, d)).all():
            return Verdict(False, f"sum rule fails at e_{i},{j}")
    return Verdict(True)


def product_rule_holds(p: int, s: int, d: int) -> Verdict:
    """Commutators of elementary matrices.

    [e_{ij}(r1), e_{jl}(r2)] = e_{il}(r1 r2) for distinct i, j, l, and
    [e_{ij}(r1), e_{kl}(r2)] = I when j != k and i != l. The pair
    e_{12}, e_{31} (i = l) does not commute and is not covered by the
    identity case.
    """
    values = _ring_codes(p, s, linear_only=False)
    prods = poly_mul_array(values[:, None, :], values[None, :, :], p)
    eye = identity_batch(d, s)
    pairs = [(i, j) for i, j in product(range(1, d + 1), repeat=2) if i != j]
    for (i, j), (k, l) in product(pairs, repeat=2):
        A = _elementary_batch(i, j, values, d)[:, None]
        B = _elementary_batch(k, l, values, d)[None, :]
        got = _commutator_batch(*np.broadcast_arrays(A, B), p)
        if j == k and i != l:
            expected = _elementary_batch(i, l, prods, d)
        elif j != k and i != l:
            expected = np.broadcast_to(eye, got.shape)
        else:
            continue
        if not (got == expected).all():
            return Verdict(False, f"commutator of e_{i},{j} and e_{k},{l} is wrong")
    return Verdict(True)


def chained_commutator(chain: Sequence[RingMatrix]) -> RingMatrix:
    """Left-nested commutator [[[A1, A2], A3], ...]."""
    result = chain[0]
    for nxt in chain[1:]:
        result = commutator(result, nxt)
    return result


def chain_rule_holds(p: int, s: int, d: int, length: int) -> Verdict:
    """Nested commutators of e_{i1,i2}(r1), ..., e_{il,il+1}(rl).

    The result must be e_{i1,il+1}(r1 ... rl).

    Checked for every chain of distinct indices and every choice of linear
    ring elements at + b.
    """
    if length + 1 > d:
        return Verdict(True, f"no chain of length {length} in dimension {d}")
    values = _ring_codes(p, s, linear_only=True)
    n = len(values)
    choice = unpack_keys(np.arange(n**length), length, n)
    for indices in permutations(range(1, d + 1), length + 1):
        factors = [
            _elementary_batch(indices[m], indices[m + 1], values[choice[:, m]], d)
            for m in range(length)
        ]
        got = factors[0]
        for nxt in factors[1:]:
            got = _commutator_batch(got, nxt, p)
        product_values = values[choice[:, 0]]
        for m in range(1, length):
            product_values = poly_mul_array(product_values, values[choice[:, m]], p)
        expected = _elementary_batch(indices[0], indices[-1], product_values, d)
        if not (got == expected).all():
            return Verdict(False, f"chain {indices} fails")
    return Verdict(True)


# ---------------------------------------------------------------------------
# Group dumps


def dump_group(group: GroupEnumeration, path: Union[str, Path]) -> Path:
    """One matrix per line, entries row-major, fields separated by "|"."""
    path = Path(path)
    if group.order == 0:
        raise ValueError("refusing to export an empty group")
    with path.open("w") as fh:
        for matrix in group:
            fh.write(matrix.to_text() + "\n")
    return path


def load_group_dump(
    path: Union[str, Path], p: int, s: int, d: int, label: str = "G"
) -> GroupEnumeration:
    lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    batch = np.stack([RingMatrix.from_text(line, p, s, d).coeffs for line in lines])
    return GroupEnumeration.from_batch(label, p, s, d, batch)
