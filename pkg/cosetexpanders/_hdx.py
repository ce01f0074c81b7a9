from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from joblib import Parallel, delayed  # type: ignore
from sklearn.base import clone  # type: ignore

from ._complex import WeightedComplex, canonical_face, face_id, link
from ._spectral import Bound, SpectralAnalyzer, SpectralReport
from ._typing import Face

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinkReport:
    face: Face
    level: int
    report: SpectralReport


@dataclass(frozen=True)
class HDXCertificate:
    """Spectral reports of every link of a face of dimension at most dim - 2.

    Examples
    --------
    >>> from cosetexpanders import WeightedComplex, hdx_certify
    >>> tetra = [((1, 0), (2, 0), (3, 0)), ((1, 0), (2, 0), (3, 1)),
    ...          ((1, 0), (2, 1), (3, 0)), ((1, 1), (2, 0), (3, 0))]
    >>> cert = hdx_certify(WeightedComplex.from_top_faces(tetra), lam=1.0)
    >>> cert.onesided, len(cert.reports)
    (True, 7)
    """

    lam: float
    tol: float
    reports: Tuple[LinkReport, ...]

    @property
    def disconnected(self) -> Tuple[Face, ...]:
        return tuple(r.face for r in self.reports if not r.report.is_connected)

    @property
    def onesided(self) -> bool:
        return all(
            r.report.is_connected and r.report.lambda_2 <= self.lam + self.tol
            for r in self.reports
        )

    @property
    def two_sided(self) -> bool:
        return self.onesided and all(
            abs(r.report.lambda_min) <= self.lam + self.tol for r in self.reports
        )

    def levels(self) -> List[int]:
        return sorted({r.level for r in self.reports})

    def worst(self, level: int) -> Tuple[float, float]:
        """(max lambda_2, min lambda_min) over the links of one level."""
        at_level = [r.report for r in self.reports if r.level == level]
        if not at_level:
            raise ValueError(f"no links recorded at level {level}")
        return (
            max(r.lambda_2 for r in at_level),
            min(r.lambda_min for r in at_level),
        )

    def by_face(self) -> Dict[Face, SpectralReport]:
        return {r.face: r.report for r in self.reports}

    def to_dict(self) -> Dict[str, Any]:
        summary = {}
        for level in self.levels():
            lambda_2, lambda_min = self.worst(level)
            count = sum(1 for r in self.reports if r.level == level)
            summary[str(level)] = {
                "links": count,
                "max_lambda2": lambda_2,
                "min_lambda_min": lambda_min,
            }
        return {
            "lambda": self.lam,
            "onesided": self.onesided,
            "two_sided": self.two_sided,
            "disconnected": [face_id(f) for f in self.disconnected],
            "levels": summary,
        }


def _face_report(
    X: WeightedComplex,
    face: Face,
    analyzer: SpectralAnalyzer,
    bounds: Tuple[Bound, ...],
) -> SpectralReport:
    graph = link(X, face).one_skeleton()
    return clone(analyzer).fit(graph).report(bounds)


def link_reports(
    X: WeightedComplex,
    faces: Iterable[Face],
    analyzer: Optional[SpectralAnalyzer] = None,
    bounds: Iterable[Bound] = (),
    *,
    n_jobs: int = 1,
) -> Dict[Face, SpectralReport]:
    """Spectral report of the 1-skeleton of link(X, f) for each face f.

    Each face gets a fresh clone of `analyzer`; with ``n_jobs != 1`` the
    links are analysed on a thread pool.
    """
    analyzer = SpectralAnalyzer() if analyzer is None else analyzer
    faces = [canonical_face(f) for f in faces]
    bounds = tuple(bounds)
    reports = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_face_report)(X, face, analyzer, bounds) for face in faces
    )
    return dict(zip(faces, reports))


def hdx_certify(
    X: WeightedComplex,
    lam: float,
    analyzer: Optional[SpectralAnalyzer] = None,
    *,
    n_jobs: int = 1,
) -> HDXCertificate:
    """Check that X is a one-sided (and possibly two-sided) lam-HDX.

    Every face f of dimension -1 .. dim - 2 contributes the report of its
    link's 1-skeleton. The one-sided verdict needs each such link to be
    connected with lambda_2 <= lam; the two-sided verdict additionally needs
    |lambda_min| <= lam. Disconnected links are listed rather than raised.
    """
    analyzer = SpectralAnalyzer() if analyzer is None else analyzer
    bounds = (Bound("lambda", lam, "onesided"), Bound("lambda", lam, "two-sided"))
    reports: List[LinkReport] = []
    for level in range(-1, X.dim - 1):
        faces = X.faces(level)
        found = link_reports(X, faces, analyzer, bounds, n_jobs=n_jobs)
        reports.extend(LinkReport(face, level, found[face]) for face in faces)
        logger.info("certified %d links at level %d", len(faces), level)
    return HDXCertificate(float(lam), analyzer.tol, tuple(reports))


# ---------------------------------------------------------------------------
# Descent from links to the whole complex


@dataclass(frozen=True)
class TrickleEntry:
    """One application of the descent step at a face.

    ``lam`` and ``eta`` are the worst lambda_2 and lambda_min over the links
    of the faces one vertex larger; ``gamma_plus`` and ``gamma_minus`` are
    the extremes of the face's own link. The checks are None when a link
    involved is disconnected.
    """

    face: Face
    level: int
    lam: float
    eta: float
    gamma_plus: float
    gamma_minus: float
    bound_plus: float
    bound_minus: float
    positive_holds: Optional[bool]
    negative_holds: Optional[bool]

    @property
    def hypothesis_met(self) -> bool:
        return self.positive_holds is not None


@dataclass(frozen=True)
class TrickleLedger:
    entries: Tuple[TrickleEntry, ...]

    @property
    def holds(self) -> bool:
        """No checked inequality failed."""
        return all(
            e.positive_holds is not False and e.negative_holds is not False
            for e in self.entries
        )

    @property
    def unmet(self) -> Tuple[Face, ...]:
        return tuple(e.face for e in self.entries if not e.hypothesis_met)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "entries": [
                {
                    "face": face_id(e.face),
                    "level": e.level,
                    "lambda": e.lam,
                    "eta": e.eta,
                    "gamma_plus": e.gamma_plus,
                    "gamma_minus": e.gamma_minus,
                    "bound_plus": None if math.isinf(e.bound_plus) else e.bound_plus,
                    "bound_minus": e.bound_minus,
                    "positive_holds": e.positive_holds,
                    "negative_holds": e.negative_holds,
                }
                for e in self.entries
            ],
        }


def _plus_bound(lam: float) -> float:
    return lam / (1.0 - lam) if lam < 1.0 else math.inf


def trickle_down_check(
    X: WeightedComplex,
    analyzer: Optional[SpectralAnalyzer] = None,
    tol: Optional[float] = None,
    *,
    known: Optional[Mapping[Face, SpectralReport]] = None,
    n_jobs: int = 1,
) -> TrickleLedger:
    """Verify the one-step descent inequalities level by level.

    For each face f whose link has dimension at least 2, starting from the
    highest such level and ending at the empty face, with lam and eta taken
    over the links of f + v:

        lambda_2(X_f) <= lam / (1 - lam)
        lambda_min(X_f) >= eta / (1 - eta)

    The link of v inside X_f has the same spectrum as the link of f + v in
    X, because their weights are proportional. Reports already computed
    (for instance by `hdx_certify`) can be passed in `known`.
    """
    analyzer = SpectralAnalyzer() if analyzer is None else analyzer
    tol = analyzer.tol if tol is None else tol
    cache: Dict[Face, SpectralReport] = dict(known or {})

    def fetch(faces: List[Face]) -> List[SpectralReport]:
        missing = [f for f in faces if f not in cache]
        if missing:
            cache.update(link_reports(X, missing, analyzer, n_jobs=n_jobs))
        return [cache[f] for f in faces]

    entries: List[TrickleEntry] = []
    for level in range(X.dim - 3, -2, -1):
        for face in X.faces(level):
            (outer,) = fetch([face])
            inner = fetch(
                [canonical_face(face + (v,)) for v in link(X, face).vertices]
            )
            lam = max(r.lambda_2 for r in inner)
            eta = min(r.lambda_min for r in inner)
            bound_plus, bound_minus = _plus_bound(lam), eta / (1.0 - eta)
            connected = outer.is_connected and all(r.is_connected for r in inner)
            entries.append(
                TrickleEntry(
                    face,
                    level,
                    lam,
                    eta,
                    outer.lambda_2,
                    outer.lambda_min,
                    bound_plus,
                    bound_minus,
                    outer.lambda_2 <= bound_plus + tol if connected else None,
                    outer.lambda_min >= bound_minus - tol if connected else None,
                )
            )
        logger.info("descent checked at level %d", level)
    return TrickleLedger(tuple(entries))


@dataclass(frozen=True)
class DescentBounds:
    """Global expansion implied by links that are lam-expanders.

    Attributes
    ----------
    onesided : float
        lam / (1 - (d - 2) lam), infinite when the denominator is not
        positive.
    two_sided : float
        max(onesided, 1 / (d - k)), the two-sided bound for the k-skeleton.
    eta_bound : float
        |eta / (1 - (d - 2) eta)|, the lower-tail bound from eta.
    refined_two_sided : float
        max(onesided, eta_bound), the two-sided bound for the 1-skeleton.
    hypothesis_met : bool
        Whether (d - 2) lam < 1.
    vacuous : bool
        Whether the one-sided bound is at least 1.
    """

    lam: float
    eta: float
    d: int
    k: int
    onesided: float
    two_sided: float
    eta_bound: float
    refined_two_sided: float
    hypothesis_met: bool
    vacuous: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            name: (None if isinstance(v, float) and math.isinf(v) else v)
            for name, v in self.__dict__.items()
        }


def _descent(value: float, d: int) -> float:
    denominator = 1.0 - (d - 2) * value
    if denominator <= 0:
        return math.inf
    return value / denominator


def descent_bounds(lam: float, eta: float, d: int, k: int = 1) -> DescentBounds:
    """Combine link expansion into global one- and two-sided bounds.

    Examples
    --------
    >>> from cosetexpanders import descent_bounds
    >>> bounds = descent_bounds(0.5, -1.0, 3)
    >>> bounds.onesided, bounds.two_sided, bounds.eta_bound
    (1.0, 1.0, 0.5)
    >>> bounds.vacuous
    True
    """
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    if not 1 <= k <= d - 1:
        raise ValueError(f"k must lie in 1..{d - 1}, got {k}")
    if lam < 0 or eta > 1:
        raise ValueError("lam must be non-negative and eta at most 1")
    onesided = _descent(lam, d)
    eta_bound = abs(_descent(eta, d))
    return DescentBounds(
        lam=float(lam),
        eta=float(eta),
        d=d,
        k=k,
        onesided=onesided,
        two_sided=max(onesided, 1.0 / (d - k)),
        eta_bound=eta_bound,
        refined_two_sided=max(onesided, eta_bound),
        hypothesis_met=(d - 2) * lam < 1,
        vacuous=onesided >= 1,
    )


def coset_complex_bounds(p: int, d: int, k: int = 1) -> DescentBounds:
    """Descent bounds from links with lambda_2 = 1/sqrt(p) and bipartite eta = -1.

    Examples
    --------
    >>> from cosetexpanders import coset_complex_bounds
    >>> round(coset_complex_bounds(5, 3).onesided, 3)
    0.809
    >>> coset_complex_bounds(2, 3).vacuous, coset_complex_bounds(3, 4).hypothesis_met
    (True, False)
    """
    if p < 2:
        raise ValueError(f"p must be at least 2, got {p}")
    return descent_bounds(1.0 / math.sqrt(p), -1.0, d, k)
