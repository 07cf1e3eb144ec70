"""Exception hierarchy and warnings shared across the package."""

from __future__ import annotations


class JetSpaceError(Exception):
    """Base class for all package errors."""


class DomainError(JetSpaceError, ValueError):
    """An argument is outside the documented domain of an operation."""


class InvariantError(JetSpaceError):
    """A structural invariant failed (non-monotone samples, bad declared dim, ...)."""


class BracketError(JetSpaceError):
    """A monotone inversion could not bracket its target value.

    Carries the attempted bracket and the target so callers can report
    exactly what was tried.
    """

    def __init__(self, message: str, bracket: tuple[float, float], target: float):
        super().__init__(f"{message} (bracket={bracket!r}, target={target!r})")
        self.bracket = bracket
        self.target = target


class DegenerateChainError(JetSpaceError):
    """A chain has coincident endpoints but nonzero interior, so the
    contraction hypotheses have no meaningful baseline."""


class GenerationError(JetSpaceError):
    """The instance generator exhausted its resampling budget."""


class ModelingError(JetSpaceError):
    """An LP encoding reached a state the model promises cannot occur
    (for instance, infeasibility with certified-nonempty sets)."""


class SolverError(JetSpaceError):
    """Numerical failure inside the LP core; carries a condition report."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = dict(report or {})


class SelectionHypothesisError(JetSpaceError):
    """The selection hypothesis failed: some small subset is infeasible at
    the stated budget, or the intersection step could not be certified.

    ``certificate`` serializes what failed (the offending subset, or the
    full intersection system when every small subset passed).
    """

    def __init__(self, message: str, certificate: dict | None = None):
        super().__init__(message)
        self.certificate = dict(certificate or {})


class SchemaError(JetSpaceError, ValueError):
    """A JSON document does not match the documented input schema.

    ``path`` locates the offending element, e.g. ``$.sets[2].A[0]``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class CapProximityWarning(UserWarning):
    """A rescaling value landed within 1e-6 of a bounded modulus cap."""
