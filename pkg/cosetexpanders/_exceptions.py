from __future__ import annotations


class ParameterMismatchError(ValueError):
    """Operands were built over different rings, fields or dimensions."""


class SingularMatrixError(ValueError):
    """The determinant of a matrix is not a unit of the coefficient ring."""


class InfeasibleParametersError(ValueError):
    """A closure cap or an enumeration guard would be exceeded.

    The message always names the resource that ran out, so that callers
    (the command line in particular) can report it verbatim.
    """


class SolverConvergenceError(RuntimeError):
    """An iterative eigensolve did not converge or failed its residual check."""


class EmptyGraphWarning(UserWarning):
    """Raised through `warnings` when a graph without vertices is queried."""
