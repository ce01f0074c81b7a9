from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh
from sklearn.utils.validation import check_array, check_symmetric  # type: ignore

from ._exceptions import SolverConvergenceError

if TYPE_CHECKING:  # pragma: no cover
    from ._spectral import AdjacencyOperator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectrumEstimate:
    """Extreme eigenvalues of a normalized adjacency operator."""

    lambda_max: float
    lambda_2: float
    lambda_min: float
    eigenvalues: Optional[NDArray[np.float64]]
    residual: float
    method: str


def jacobi_eigenvalues(
    M: ArrayLike, tol: float = 1e-10, max_sweeps: int = 100
) -> NDArray[np.float64]:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps visit the pairs (p, q), p < q, in row order, so the result is
    fully deterministic. Iteration stops once the off-diagonal Frobenius
    norm is at most `tol` times the Frobenius norm of `M`.

    Returns
    -------
    NDArray[np.float64]
        Eigenvalues in descending order.

    Examples
    --------
    >>> import numpy as np
    >>> from cosetexpanders._solvers import jacobi_eigenvalues
    >>> jacobi_eigenvalues(np.full((3, 3), 1 / 3)).round(12) + 0.0
    array([1., 0., 0.])
    """
    A = np.array(M, dtype=np.float64)
    n = A.shape[0]
    scale = max(np.linalg.norm(A), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= np.finfo(float).eps * tol * scale:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
    else:
        raise SolverConvergenceError(
            f"Jacobi rotations did not converge in {max_sweeps} sweeps"
        )
    return np.sort(np.diag(A))[::-1]


def eig_symmetric(
    M: ArrayLike, tol: float = 1e-10, method: str = "lapack"
) -> NDArray[np.float64]:
    """All eigenvalues of a symmetric matrix, in descending order.

    Parameters
    ----------
    M : ArrayLike
        Square matrix, symmetric to within `tol`.
    tol : float, default=1e-10
        Symmetry tolerance, and the relative off-diagonal tolerance of the
        Jacobi method.
    method : {"lapack", "jacobi"}, default="lapack"
        LAPACK's symmetric driver, or cyclic Jacobi rotations.

    Raises
    ------
    ValueError
        If `M` is not square or not symmetric within `tol`.

    Examples
    --------
    >>> import numpy as np
    >>> from cosetexpanders import eig_symmetric
    >>> cycle = np.array([[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]])
    >>> eig_symmetric(cycle / 2).round(12) + 0.0
    array([ 1.,  0.,  0., -1.])
    """
    A = check_array(M, dtype=np.float64)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    A = check_symmetric(A, tol=tol, raise_exception=True)
    if method == "lapack":
        return eigh(A, eigvals_only=True)[::-1].copy()
    if method == "jacobi":
        return jacobi_eigenvalues(A, tol=tol)
    raise ValueError(f"unknown method {method!r}")


def _residual(matvec: Callable, x: NDArray[np.float64], value: float) -> float:
    x = x / np.linalg.norm(x)
    return float(np.linalg.norm(matvec(x) - value * x))


def eig_extremes_iterative(
    op: AdjacencyOperator,
    tol: float = 1e-8,
    *,
    maxiter: Optional[int] = None,
    random_state: Union[int, np.random.Generator, None] = 0,
) -> SpectrumEstimate:
    """lambda_2 and lambda_min of a connected graph by Lanczos iterations.

    The top eigenvector sqrt(w) is deflated by moving its eigenvalue to -2,
    below the spectrum, so the largest remaining eigenvalue is lambda_2.
    Each returned value comes with an eigenvector whose residual
    ||Sx - lambda x|| must not exceed `tol`.

    Raises
    ------
    SolverConvergenceError
        If ARPACK stops early or a residual exceeds `tol`.
    """
    S = op.sparse()
    n = S.shape[0]
    if n < 3:
        raise ValueError("the iterative path needs at least three vertices")
    u = op.top_vector
    rng = np.random.default_rng(random_state)
    v0 = rng.standard_normal(n)

    def deflated_matvec(x: NDArray[np.float64]) -> NDArray[np.float64]:
        x = np.ravel(x)
        return S @ x - 3.0 * u * (u @ x)

    deflated = LinearOperator((n, n), matvec=deflated_matvec, dtype=np.float64)
    try:
        top, top_vec = eigsh(
            deflated, k=1, which="LA", tol=tol / 10, maxiter=maxiter, v0=v0
        )
        low, low_vec = eigsh(
            S, k=1, which="SA", tol=tol / 10, maxiter=maxiter, v0=v0
        )
    except ArpackNoConvergence as exc:
        raise SolverConvergenceError(
            f"ARPACK did not converge on {op.graph.graph_id or 'graph'}"
        ) from exc

    lambda_2, lambda_min = float(top[0]), float(low[0])
    residual = max(
        _residual(lambda x: S @ x, u, 1.0),
        _residual(deflated_matvec, top_vec[:, 0], lambda_2),
        _residual(lambda x: S @ x, low_vec[:, 0], lambda_min),
    )
    if residual > tol:
        raise SolverConvergenceError(
            f"residual {residual:.3e} exceeds {tol:.1e} on "
            f"{op.graph.graph_id or 'graph'}"
        )
    logger.debug("iterative solve n=%d residual %.2e", n, residual)
    return SpectrumEstimate(1.0, lambda_2, lambda_min, None, residual, "iterative")


def dense_solver(
    method: str = "lapack", *, tol: float = 1e-10
) -> Callable[[AdjacencyOperator], SpectrumEstimate]:
    """Creates a full-spectrum solver. To be used with `SpectralAnalyzer`.

    Parameters
    ----------
    method : {"lapack", "jacobi"}, default="lapack"
        Dense eigensolver, see `eig_symmetric`.
    tol : float, default=1e-10
        Symmetry and convergence tolerance.

    Returns
    -------
    Callable[[AdjacencyOperator], SpectrumEstimate]
        Closure computing the whole spectrum.
    """

    def _solve(op: AdjacencyOperator) -> SpectrumEstimate:
        """Diagonalize the symmetrized operator."""
        S = op.dense()
        values = eig_symmetric(S, tol=tol, method=method)
        lambda_2 = float(values[1]) if len(values) > 1 else float(values[0])
        residual = _residual(lambda x: S @ x, op.top_vector, 1.0)
        return SpectrumEstimate(
            float(values[0]), lambda_2, float(values[-1]), values, residual, method
        )

    return _solve


def iterative_solver(
    tol: float = 1e-8,
    *,
    maxiter: Optional[int] = None,
    random_state: Union[int, np.random.Generator, None] = 0,
) -> Callable[[AdjacencyOperator], SpectrumEstimate]:
    """Creates an extreme-eigenvalue solver. To be used with `SpectralAnalyzer`.

    Parameters
    ----------
    tol : float, default=1e-8
        Certified residual bound.
    maxiter : int, optional
        ARPACK iteration cap; ARPACK's default when omitted.
    random_state : int or Generator, default=0
        Seed of the Lanczos start vector.

    Returns
    -------
    Callable[[AdjacencyOperator], SpectrumEstimate]
        Closure returning lambda_2 and lambda_min.
    """

    def _solve(op: AdjacencyOperator) -> SpectrumEstimate:
        """Run `eig_extremes_iterative`."""
        return eig_extremes_iterative(
            op, tol, maxiter=maxiter, random_state=random_state
        )

    return _solve
