"""Exception hierarchy.

Two top-level families matter for exit codes: ``DomainError`` (bad inputs,
poles, out-of-range requests -> exit 2) and ``InconsistencyError`` (the
numerics contradict an identity that must hold -> exit 3, since it signals
an internal fault rather than a bad call).
"""


class TorusGreenError(Exception):
    """Base class for all library errors."""


class DomainError(TorusGreenError):
    """Input outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole."""


class RangeError(DomainError):
    """Requested value lies outside the image of the chosen branch."""


class ConvergenceError(TorusGreenError):
    """An iterative solver failed to reach its tolerance."""


class InconsistencyError(TorusGreenError):
    """Two routes that must agree disagree, or an invariant chain failed."""


class CensusIncompleteError(InconsistencyError):
    """Degree sum of a census did not reach -2 even after grid refinement."""


class CensusIncompleteWarning(UserWarning):
    """Degree sum of a record list differs from -2 (likely missed roots)."""
