from __future__ import annotations
import argparse
import logging
import math
import sys
from dataclasses import asdict, dataclass
from functools import reduce
from itertools import combinations
from pathlib import Path
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    List,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from sklearn.base import clone  # type: ignore

from . import __version__
from ._affine import (
    affine_expansion,
    bq_spectrum_check,
    induced_subgraph_check,
    link_bijection_check,
    measure_truncated_link,
)
from ._algebra import is_prime
from ._cache import GroupCache
from ._certificate import Certificate, CheckResult, StageTimer
from ._complex import (
    CosetComplex,
    coset_complex,
    coset_link_graph,
    check_partite,
    check_purity,
    connectivity_criterion,
    face_id,
    link,
    local_complex,
    local_link_graph,
    one_skeleton,
    verify_balanced,
    write_faces,
)
from ._exceptions import InfeasibleParametersError, SolverConvergenceError
from ._graph import WeightedGraph, write_edge_list
from ._hdx import HDXCertificate, descent_bounds, hdx_certify, coset_complex_bounds
from ._hdx import trickle_down_check
from ._matrices import (
    BRUTEFORCE_GUARD,
    DEFAULT_CAP,
    GeneratorSet,
    GroupEnumeration,
    bfs_closure,
    chain_rule_holds,
    dump_group,
    intersect_groups,
    ks_enumeration,
    product_rule_holds,
    special_linear_bruteforce,
    subgroup_label,
    sum_rule_holds,
)
from ._spectral import (
    Bound,
    SpectralAnalyzer,
    local_decomposition_gap,
    self_adjointness_gap,
)

logger = logging.getLogger(__name__)

COMMANDS = (
    "build",
    "verify-groups",
    "verify-complex",
    "spectra",
    "affine",
    "trickle",
    "report-all",
    "export",
)
EXPORTS = ("complex", "graph", "group")
SOLVERS = ("auto", "dense", "iterative")

EXIT_PASS = 0
EXIT_FAILED = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4

IDENTITY_TOL = 1e-10
AGREEMENT_TOL = 1e-7


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one command.

    Raises
    ------
    ValueError
        If a parameter is out of range.
    InfeasibleParametersError
        If `cap` is above the default without `allow_large`.
    """

    command: str
    p: int = 2
    s: int = 2
    d: int = 3
    k: Optional[int] = None
    cap: int = DEFAULT_CAP
    tol: float = 1e-8
    solver: str = "auto"
    out: Path = Path("results")
    cache: Optional[Path] = None
    allow_large: bool = False
    what: str = "complex"

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if self.s < 1:
            raise ValueError(f"s must be at least 1, got {self.s}")
        if self.d < 2:
            raise ValueError(f"d must be at least 2, got {self.d}")
        if self.k is not None and not 1 <= self.k < self.d:
            raise ValueError(f"k must satisfy 1 <= k < d, got {self.k}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}")
        if self.what not in EXPORTS:
            raise ValueError(f"export target must be one of {EXPORTS}")
        if self.cap < 1:
            raise ValueError("cap must be positive")
        if self.cap > DEFAULT_CAP and not self.allow_large:
            raise InfeasibleParametersError(
                f"cap {self.cap} exceeds {DEFAULT_CAP} elements without --allow-large"
            )

    @property
    def stem(self) -> str:
        return f"{self.command}-p{self.p}-s{self.s}-d{self.d}"

    def echo(self) -> Dict[str, object]:
        """Parameters that determine results; output locations are left out."""
        params = asdict(self)
        for name in ("out", "cache"):
            params.pop(name)
        return params


class Run:
    """State shared by the stages of one command.

    Group enumerations and the complex are built once, on first use, and
    go through the on-disk cache when the config names one.
    """

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.certificate = Certificate(config.command, config.echo(), __version__)
        self.timer = StageTimer()
        self.cache = (
            None if config.cache is None else GroupCache(config.cache, __version__)
        )
        self.analyzer = SpectralAnalyzer(solver=config.solver, tol=config.tol)
        self.hdx: Optional[HDXCertificate] = None
        self._groups: Dict[FrozenSet[int], GroupEnumeration] = {}
        self._complex: Optional[CosetComplex] = None

    @property
    def params(self) -> Tuple[int, int, int]:
        return self.config.p, self.config.s, self.config.d

    def check(self, result: CheckResult) -> CheckResult:
        self.certificate.add(result)
        status = "info" if result.informational else result.passed
        logger.info("%s: %s %s", result.name, status, result.detail)
        return result

    def group(self, S: Iterable[int] = ()) -> GroupEnumeration:
        S = frozenset(S)
        if S not in self._groups:
            p, s, d = self.params
            gens = GeneratorSet.for_subgroup(p, s, d, S)
            cfg = self.config

            def build() -> GroupEnumeration:
                return bfs_closure(gens, cfg.cap, allow_large=cfg.allow_large)

            if self.cache is None:
                self._groups[S] = build()
            else:
                self._groups[S] = self.cache.get_or_build(gens.label, p, s, d, build)
        return self._groups[S]

    @property
    def complex(self) -> CosetComplex:
        if self._complex is None:
            d = self.config.d
            with self.timer.stage("complex"):
                types = list(range(1, d + 1))
                self._complex = coset_complex(
                    self.group(),
                    [self.group({j}) for j in types],
                    types,
                    params=self.params,
                )
        return self._complex


# ---------------------------------------------------------------------------
# Stages


def _build(run: Run) -> None:
    p, s, d = run.params
    with run.timer.stage("groups"):
        G = run.group()
        subgroups = [run.group({j}) for j in range(1, d + 1)]
    X = run.complex
    run.check(CheckResult.record("order(G)", G.order))
    for j, K in enumerate(subgroups, start=1):
        run.check(CheckResult.record(f"order(K_{j})", K.order))
    run.check(CheckResult.from_verdict("G closed under inverses", G.verify()))
    run.check(CheckResult.equals("top faces = |G|", G.order, len(X.faces(d - 1))))
    expected_vertices = sum(G.order // K.order for K in subgroups)
    run.check(CheckResult.equals("vertices", expected_vertices, len(X.faces(0))))
    for j, K in enumerate(subgroups, start=1):
        sizes = {len(members) for members in X.table_for(j).partition()}
        name = f"cosets of K_{j} have |K_{j}| elements"
        run.check(CheckResult.equals(name, [K.order], sorted(sizes)))
    run.check(CheckResult.record("faces per level", X.counts()))


def _verify_groups(run: Run) -> None:
    p, s, d = run.params
    cap = run.config.cap
    G = run.group()
    if p ** (s * d * d) <= BRUTEFORCE_GUARD:
        with run.timer.stage("bruteforce"):
            brute = special_linear_bruteforce(p, s, d)
        run.check(
            CheckResult.equals(
                "closure = determinant-1 scan", True, G.same_elements(brute)
            )
        )
    else:
        run.check(
            CheckResult.record(
                "closure = determinant-1 scan", None, "skipped: scan above the guard"
            )
        )

    with run.timer.stage("subgroups"):
        for size in range(1, d + 1):
            for S in combinations(range(1, d + 1), size):
                label = subgroup_label(S)
                K = run.group(S)
                explicit = ks_enumeration(p, s, d, S, cap)
                run.check(
                    CheckResult.equals(
                        f"{label} = explicit description",
                        True,
                        K.same_elements(explicit),
                    )
                )
                meet = reduce(intersect_groups, [run.group({i}) for i in S])
                run.check(
                    CheckResult.equals(
                        f"{label} = intersection of K_i", True, K.same_elements(meet)
                    )
                )
        for size in range(0, d - 1):
            for S in combinations(range(1, d + 1), size):
                K = run.group(S)
                parts = [run.group(set(S) | {i}) for i in range(1, d + 1) if i not in S]
                gens = GeneratorSet.from_elements(f"<{K.label} & K_i>", parts)
                generated = bfs_closure(gens, cap)
                run.check(
                    CheckResult.equals(
                        f"{K.label} generated by its intersections",
                        True,
                        generated.same_elements(K),
                    )
                )

    with run.timer.stage("commutators"):
        run.check(CheckResult.from_verdict("sum rule", sum_rule_holds(p, s, d)))
        run.check(CheckResult.from_verdict("product rule", product_rule_holds(p, s, d)))
        run.check(
            CheckResult.from_verdict(
                "chained commutator", chain_rule_holds(p, s, d, d - 1)
            )
        )


def _link_model_check(run: Run, vertex_type: int) -> CheckResult:
    p, s, d = run.params
    X = run.complex
    local = local_complex(
        p,
        s,
        d,
        {vertex_type},
        run.config.cap,
        allow_large=run.config.allow_large,
        cache=run.cache,
    )
    expected = one_skeleton(local).edge_set()
    vertices = [v for v in X.vertices if v[0] == vertex_type]
    mismatched = []
    for vertex in vertices:
        mapping = X.link_coset_bijection(vertex, local)
        image = link(X, [vertex]).one_skeleton().relabel(mapping).edge_set()
        if image != expected:
            mismatched.append(face_id((vertex,)))
    return CheckResult(
        f"links of type-{vertex_type} vertices = local model",
        not mismatched,
        len(vertices),
        len(vertices) - len(mismatched),
        detail=f"first mismatch: {mismatched[0]}" if mismatched else "",
    )


def _translation_check(run: Run, n_samples: int = 10, seed: int = 0) -> CheckResult:
    X = run.complex
    assert X.ambient is not None
    rng = np.random.default_rng(seed)
    picks = rng.choice(
        X.ambient.order, size=min(n_samples, X.ambient.order), replace=False
    )
    failures = []
    for idx in picks.tolist():
        g = X.ambient.matrix(idx)
        for vertex_type in X.types:
            verdict = X.translated_link_check(g, vertex_type)
            if not verdict:
                failures.append(verdict.detail)
    return CheckResult(
        f"g^-1 maps link(g K_i) onto link(K_i) for {n_samples} random g",
        not failures,
        detail=failures[0] if failures else "",
    )


def _verify_complex(run: Run) -> None:
    p, s, d = run.params
    tol = run.config.tol
    X = run.complex
    with run.timer.stage("structure"):
        run.check(CheckResult.from_verdict("balanced weights", verify_balanced(X)))
        run.check(CheckResult.from_verdict("purity", check_purity(X)))
        run.check(CheckResult.from_verdict("partite", check_partite(X)))
        run.check(
            CheckResult.from_verdict(
                "connectivity criterion", connectivity_criterion(X)
            )
        )
        run.check(_translation_check(run))
        for vertex_type in range(1, d + 1):
            run.check(_link_model_check(run, vertex_type))

    if X.dim < 2:
        run.check(CheckResult.record("link certification", None, "skipped: d < 3"))
        return
    target = 1 / math.sqrt(p)
    with run.timer.stage("certify"):
        run.hdx = hdx_certify(X, target, run.analyzer)
    cert = run.hdx
    run.check(
        CheckResult.equals(
            "all links connected", [], [face_id(f) for f in cert.disconnected]
        )
    )
    for level in cert.levels():
        lambda_2, lambda_min = cert.worst(level)
        run.check(CheckResult.record(f"max lambda_2 at level {level}", lambda_2))
        run.check(CheckResult.record(f"min lambda_min at level {level}", lambda_min))
    top_level = d - 3
    top_lambda, _ = cert.worst(top_level)
    name = f"level-{top_level} links lambda_2 <= 1/sqrt(p)"
    if s >= 3:
        run.check(CheckResult.at_most(name, target, top_lambda, tol))
    else:
        run.check(CheckResult.record(name, top_lambda, "informational at s < 3"))

    skeleton = cert.by_face()[()]
    run.check(
        CheckResult.close(
            "skeleton lambda_min = -1/(d-1)", -1 / (d - 1), skeleton.lambda_min, tol
        )
    )
    k = run.config.k or 1
    bound = coset_complex_bounds(p, d, k).two_sided
    run.check(
        CheckResult.at_most(
            f"skeleton two-sided <= k={k} bound", bound, skeleton.two_sided, tol
        )
    )
    if skeleton.n >= 3:
        with run.timer.stage("solver agreement"):
            for result in _solver_agreement(one_skeleton(X), tol, "skeleton"):
                run.check(result)

    with run.timer.stage("identities"):
        gaps = [
            self_adjointness_gap(link(X, face).one_skeleton())
            for face in X.faces(top_level)
        ]
        run.check(
            CheckResult.at_most(
                "self-adjointness on links", 0.0, max(gaps), IDENTITY_TOL
            )
        )
        run.check(
            CheckResult.at_most(
                "local decomposition", 0.0, local_decomposition_gap(X), IDENTITY_TOL
            )
        )


def _solver_agreement(
    graph: WeightedGraph, tol: float, what: str
) -> List[CheckResult]:
    dense = SpectralAnalyzer(solver="dense", tol=tol).fit(graph)
    iterative = SpectralAnalyzer(solver="iterative", tol=tol).fit(graph)
    return [
        CheckResult.close(
            f"{what}: dense and iterative {attr.rstrip('_')} agree",
            getattr(dense, attr),
            getattr(iterative, attr),
            AGREEMENT_TOL,
        )
        for attr in ("lambda_2_", "lambda_min_")
    ]


def _spectra(run: Run) -> None:
    p, s, d = run.params
    cfg = run.config
    tol = cfg.tol
    target = 1 / math.sqrt(p)
    with run.timer.stage("local links"):
        graph = local_link_graph(p, s, d, 1, cfg.cap)
        report = clone(run.analyzer).fit(graph).report([Bound("1/sqrt(p)", target)])
    name = "consecutive link lambda_2 <= 1/sqrt(p)"
    if s >= 3:
        run.check(CheckResult.at_most(name, target, report.lambda_2, tol))
    else:
        run.check(CheckResult.record(name, report.lambda_2, "informational at s < 3"))
    run.check(CheckResult.record("consecutive link lambda_min", report.lambda_min))
    if d >= 4:
        other = coset_link_graph(p, s, d, (1, 3), cfg.cap)
        far = clone(run.analyzer).fit(other).report()
        run.check(
            CheckResult.close(
                "non-consecutive link lambda_2 = 0", 0.0, far.lambda_2, tol
            )
        )

    if graph.n >= 3:
        with run.timer.stage("solver agreement"):
            for result in _solver_agreement(graph, tol, "link"):
                run.check(result)

    k = cfg.k or 1
    bounds = coset_complex_bounds(p, d, k)
    run.check(CheckResult.record("descent bounds", bounds.to_dict()))
    defined = p > (d - 2) ** 2
    run.check(
        CheckResult.equals(
            "bound defined iff p > (d-2)^2", defined, bounds.hypothesis_met
        )
    )
    if not defined:
        run.check(
            CheckResult.equals("undefined bound is vacuous", True, bounds.vacuous)
        )
    if bounds.hypothesis_met:
        run.check(
            CheckResult.close(
                "one-sided bound = 1/(sqrt(p)-(d-2))",
                1 / (math.sqrt(p) - (d - 2)),
                bounds.onesided,
                1e-12,
            )
        )
    measured = descent_bounds(max(report.lambda_2, 0.0), report.lambda_min, d, k)
    run.check(CheckResult.record("descent from measured link", measured.to_dict()))


def _affine(run: Run) -> None:
    p = run.config.p
    tol = run.config.tol
    q = p**3
    if q <= 27:
        with run.timer.stage("B_q"):
            run.check(CheckResult.from_verdict(f"B_{q} spectrum", bq_spectrum_check(q)))
    else:
        run.check(
            CheckResult.record(
                f"B_{q} spectrum", None, "skipped: dense path is q <= 27"
            )
        )
    with run.timer.stage("A"):
        run.check(
            CheckResult.from_verdict("A induced in B_q", induced_subgraph_check(p))
        )
        s_link = max(run.config.s, 3)
        run.check(
            CheckResult.from_verdict(
                f"link (s={s_link}) = A", link_bijection_check(p, s_link)
            )
        )
        expansion = affine_expansion(p, SpectralAnalyzer(tol=tol))
    run.check(
        CheckResult.at_most(
            "lambda_2(A) <= 1/sqrt(p)", expansion.target, expansion.lambda_A, 1e-9
        )
    )
    run.check(
        CheckResult.at_most(
            "lambda_2(A) <= induced-subgraph bound",
            expansion.induced_bound,
            expansion.lambda_A,
            1e-9,
        )
    )
    run.check(
        CheckResult.close(
            f"lambda_2(B_{q}) = 1/sqrt(q)", 1 / math.sqrt(q), expansion.lambda_Bq, 1e-9
        )
    )
    truncated = measure_truncated_link(p, run.analyzer)
    run.check(
        CheckResult.record(
            "s=2 consecutive link", truncated.to_dict(), "no claim at this truncation"
        )
    )


def _trickle(run: Run) -> None:
    p, s, d = run.params
    tol = run.config.tol
    X = run.complex
    if X.dim < 2:
        run.check(CheckResult.record("descent ledger", None, "skipped: d < 3"))
        return
    known = run.hdx.by_face() if run.hdx is not None else None
    with run.timer.stage("trickle"):
        ledger = trickle_down_check(X, run.analyzer, tol, known=known)
    for level in sorted({e.level for e in ledger.entries}, reverse=True):
        entries = [e for e in ledger.entries if e.level == level]
        checked = [e for e in entries if e.hypothesis_met]
        run.check(
            CheckResult.equals(
                f"level {level}: gamma+ <= lambda/(1-lambda)",
                True,
                all(e.positive_holds for e in checked),
            )
        )
        run.check(
            CheckResult.equals(
                f"level {level}: gamma- >= eta/(1-eta)",
                True,
                all(e.negative_holds for e in checked),
            )
        )
        if len(checked) < len(entries):
            run.check(
                CheckResult.record(
                    f"level {level}: faces with disconnected links",
                    [face_id(e.face) for e in entries if not e.hypothesis_met],
                )
            )
    root = ledger.entries[-1]
    run.check(CheckResult.record("skeleton descent", ledger.to_dict()["entries"][-1]))

    # level d-4 carries lambda and eta of the graph links of (d-3)-faces;
    # at d = 3 that is the root entry itself
    top = [e for e in ledger.entries if e.level == d - 4]
    lam = max(max(e.lam for e in top), 0.0)
    eta = min(e.eta for e in top)
    bounds = descent_bounds(lam, eta, d, run.config.k or 1)
    run.check(CheckResult.record("measured descent bounds", bounds.to_dict()))
    if bounds.hypothesis_met:
        run.check(
            CheckResult.at_most(
                "skeleton lambda_2 <= descent bound",
                bounds.onesided,
                root.gamma_plus,
                tol,
            )
        )


def _export(run: Run) -> None:
    cfg = run.config
    p, s, d = run.params
    if run.cache is None or run.cache.load("G", p, s, d) is None:
        raise FileNotFoundError(
            f"no cached group for (p={p}, s={s}, d={d}); run "
            f"`cosetexpanders build --p {p} --s {s} --d {d} --cache DIR` first"
        )
    cfg.out.mkdir(parents=True, exist_ok=True)
    stem = f"{cfg.what}-p{p}-s{s}-d{d}"
    if cfg.what == "group":
        path = dump_group(run.group(), cfg.out / f"{stem}.txt")
    elif cfg.what == "graph":
        path = write_edge_list(one_skeleton(run.complex), cfg.out / f"{stem}.edges")
    else:
        levels = None if cfg.k is None else [cfg.k]
        path = write_faces(run.complex, cfg.out / f"{stem}.faces", levels)
    run.check(CheckResult.record("exported", path.name))


STAGES: Dict[str, Callable[[Run], None]] = {
    "build": _build,
    "verify-groups": _verify_groups,
    "verify-complex": _verify_complex,
    "spectra": _spectra,
    "affine": _affine,
    "trickle": _trickle,
    "export": _export,
}
PIPELINES: Dict[str, Sequence[str]] = {
    name: (name,) for name in STAGES
}
PIPELINES["report-all"] = (
    "build",
    "verify-groups",
    "verify-complex",
    "spectra",
    "affine",
    "trickle",
)


def run(config: RunConfig) -> Tuple[Certificate, StageTimer]:
    """Execute the pipeline of `config.command` and return its records.

    A stage that raises ValueError is recorded as a failed check and ends
    the pipeline; the partial certificate is still returned. Infeasible
    parameters propagate.
    """
    state = Run(config)
    for name in PIPELINES[config.command]:
        logger.info("stage %s (p=%d, s=%d, d=%d)", name, *state.params)
        try:
            with state.timer.stage(name):
                STAGES[name](state)
        except InfeasibleParametersError:
            raise
        except ValueError as exc:
            logger.error("stage %s failed: %s", name, exc)
            state.check(CheckResult(f"stage {name}", False, detail=str(exc)))
            break
    return state.certificate, state.timer


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosetexpanders",
        description="Build and certify coset-complex high-dimensional expanders.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--p", type=int, default=2, help="prime characteristic")
    parser.add_argument("--s", type=int, default=2, help="truncation order")
    parser.add_argument("--d", type=int, default=3, help="matrix dimension")
    parser.add_argument("--k", type=int, default=None, help="skeleton level")
    parser.add_argument("--cap", type=int, default=DEFAULT_CAP, help="closure cap")
    parser.add_argument("--tol", type=float, default=1e-8, help="spectral tolerance")
    parser.add_argument("--solver", choices=SOLVERS, default="auto")
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--cache", type=Path, default=None)
    parser.add_argument("--allow-large", action="store_true")
    parser.add_argument("--what", choices=EXPORTS, default="complex")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _summarize(certificate: Certificate) -> None:
    for check in certificate.checks:
        status = "INFO" if check.informational else ("PASS" if check.passed else "FAIL")
        print(f"{status:<5} {check.name}")
    print("PASS" if certificate.passed else "FAIL")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)-8s %(message)s",
    )
    try:
        config = RunConfig(
            command=args.command,
            p=args.p,
            s=args.s,
            d=args.d,
            k=args.k,
            cap=args.cap,
            tol=args.tol,
            solver=args.solver,
            out=args.out,
            cache=args.cache,
            allow_large=args.allow_large,
            what=args.what,
        )
    except InfeasibleParametersError as exc:
        logger.error("infeasible parameters: %s", exc)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        parser.error(str(exc))

    try:
        certificate, timer = run(config)
    except InfeasibleParametersError as exc:
        logger.error("infeasible parameters: %s", exc)
        return EXIT_INFEASIBLE
    except SolverConvergenceError as exc:
        logger.error("eigensolver failed: %s", exc)
        return EXIT_SOLVER
    except FileNotFoundError as exc:
        logger.error("%s", exc)
        return EXIT_FAILED

    path = certificate.write(config.out / f"{config.stem}.json")
    timer.write(config.out / "timings.json")
    _summarize(certificate)
    logger.info("certificate written to %s", path)
    return EXIT_PASS if certificate.passed else EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
