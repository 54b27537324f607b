"""Exception taxonomy.

Two families matter to callers: input problems (:class:`ValidationError`,
mapped to exit code 1 by the CLI) and numerical failures
(:class:`NumericalError` and subclasses, mapped to exit code 2). Every
numerical error carries a short machine-parsable ``code``.
"""

from __future__ import annotations


class TopampError(Exception):
    """Base class for all package errors."""

    code = "error"


class ValidationError(TopampError):
    """Bad input: shapes, symmetry, positivity, malformed configs."""

    code = "invalid-input"


class NumericalError(TopampError):
    """A computation could not be completed reliably."""

    code = "numerical"


class IllConditionedError(NumericalError):
    code = "ill-conditioned"

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class SingularFloorError(NumericalError):
    """Singular values below the double-precision floor in an exact route."""

    code = "singular-beyond-precision"


class NoEdgeModeError(NumericalError):
    """Rank-1 edge route requested without an isolated small singular value."""

    code = "no-edge-mode"


class ParityError(NumericalError):
    """Parity form requested for a model without the required symmetry."""

    code = "not-parity-symmetric"


class GaplessError(NumericalError):
    """Bloch curve passes through the origin; winding undefined."""

    code = "gapless"


class WindingIntegralityError(NumericalError):
    """Accumulated angle does not round cleanly to an integer."""

    code = "winding-not-integral"


class UnstableError(NumericalError):
    """Dynamics have no steady state (some Re eigenvalue >= 0)."""

    code = "unstable-no-steady-state"


class DivergenceError(NumericalError):
    """Time integration produced non-finite state."""

    code = "divergence"

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class EigenConvergenceError(NumericalError):
    code = "eigensolver-no-convergence"
