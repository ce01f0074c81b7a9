"""
========================================
cosetexpanders (:mod:`cosetexpanders`)
========================================

.. currentmodule:: cosetexpanders

Bounded-degree high-dimensional expanders built as coset complexes.

The complexes come from the finite group G = SL_d(F_p[t]/<t^s>) and its
subgroups K_i generated by the elementary matrices e_{j,j+1}(at + b) for
j != i (indices taken cyclically). Everything is enumerated exactly:
the groups, their cosets, the faces of the complex and their balanced
weights. Links are then diagonalized to certify that the complex is a
high-dimensional expander, and the descent ("trickle-down") inequalities
are checked level by level.

The library also builds the affine point-line graph B_q over F_q and its
subgraph A that models the link of a triangle-free face, and compares
their spectra with the exact values.

Truncated Polynomials and Fields
================================

.. autosummary::
    :toctree: _autosummary

    TruncatedPoly
    PrimeFieldElement
    ExtensionField
    ExtFieldElement
    find_irreducible
    is_irreducible

Matrix Groups
=============

Matrices over F_p[t]/<t^s> are stored as integer arrays of shape
(d, d, s), or batches of them; groups are enumerated by breadth-first
closure.

.. autosummary::
    :toctree: _autosummary

    RingMatrix
    elementary
    commutator
    GeneratorSet
    GroupEnumeration
    bfs_closure
    special_linear_bruteforce
    ks_membership
    ks_enumeration
    intersect_groups
    CosetTable
    enumerate_cosets
    sum_rule_holds
    product_rule_holds
    chain_rule_holds
    GroupCache

Complexes and Graphs
====================

.. autosummary::
    :toctree: _autosummary

    WeightedGraph
    connectivity
    WeightedComplex
    CosetComplex
    link
    one_skeleton
    skeleton
    build_complex
    local_complex
    coset_link_graph
    local_link_graph
    link_type
    verify_balanced
    connectivity_criterion

Spectral Analysis
=================

`SpectralAnalyzer` is a scikit-learn style estimator: its parameters
choose the eigensolver and its ``fit`` method diagonalizes the normalized
random walk of one weighted graph.

.. autosummary::
    :toctree: _autosummary

    SpectralAnalyzer
    SpectralReport
    Bound
    spectral_report
    eig_symmetric
    dense_solver
    iterative_solver
    hdx_certify
    HDXCertificate
    trickle_down_check
    descent_bounds
    coset_complex_bounds

Affine Plane Graphs
===================

.. autosummary::
    :toctree: _autosummary

    build_bq
    build_A
    LinkRepresentative
    m1_parameters
    m2_parameters
    bq_spectrum_check
    induced_subgraph_check
    link_bijection_check
    induced_eig_bound
    affine_expansion

Certificates
============

.. autosummary::
    :toctree: _autosummary

    Certificate
    CheckResult

"""

__version__ = "0.1.0"

from ._exceptions import (
    EmptyGraphWarning,
    InfeasibleParametersError,
    ParameterMismatchError,
    SingularMatrixError,
    SolverConvergenceError,
)
from ._typing import Verdict
from ._algebra import (
    ExtensionField,
    ExtFieldElement,
    PrimeFieldElement,
    TruncatedPoly,
    ext_add,
    ext_inverse,
    ext_mul,
    find_irreducible,
    is_irreducible,
    is_prime,
)
from ._matrices import (
    CosetTable,
    GeneratorSet,
    GroupEnumeration,
    RingMatrix,
    bfs_closure,
    chain_rule_holds,
    chained_commutator,
    commutator,
    coset_intersects,
    determinant,
    dump_group,
    elementary,
    enumerate_cosets,
    intersect_groups,
    ks_enumeration,
    ks_membership,
    load_group_dump,
    mat_inv,
    mat_mul,
    product_rule_holds,
    special_linear_bruteforce,
    sum_rule_holds,
)
from ._cache import GroupCache
from ._graph import WeightedGraph, connectivity, read_edge_list, write_edge_list
from ._complex import (
    CosetComplex,
    LinkView,
    WeightedComplex,
    build_complex,
    connectivity_criterion,
    coset_complex,
    coset_link_graph,
    link,
    link_type,
    local_complex,
    local_link_graph,
    one_skeleton,
    skeleton,
    verify_balanced,
    write_faces,
)
from ._solvers import dense_solver, eig_symmetric, iterative_solver
from ._spectral import (
    Bound,
    SpectralAnalyzer,
    SpectralReport,
    local_decomposition_gap,
    self_adjointness_gap,
    spectral_report,
)
from ._hdx import (
    DescentBounds,
    HDXCertificate,
    TrickleLedger,
    coset_complex_bounds,
    descent_bounds,
    hdx_certify,
    trickle_down_check,
)
from ._affine import (
    AffineExpansion,
    LinkRepresentative,
    PointLinePair,
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
from ._certificate import Certificate, CheckResult
