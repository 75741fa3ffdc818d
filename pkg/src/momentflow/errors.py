"""Exception types shared across the package.

Each class marks a distinct failure mode so callers and tests can tell a
malformed input apart from a numerical diagnostic.
"""


class StructuralError(ValueError):
    """Input violates a structural precondition (shapes, emptiness, tags)."""


class DomainError(ValueError):
    """Input is structurally fine but outside the mathematical domain."""


class DegenerateInputError(ValueError):
    """Input is too close to a removable singularity (e.g. |v| ~ 0)."""


class ContractViolationError(ValueError):
    """A documented calling contract was broken (e.g. path not at identity)."""


class DiagnosticError(RuntimeError):
    """A diagnostic routine cannot produce a meaningful answer."""


class InconsistencyError(RuntimeError):
    """A computed quantity contradicts a property the inputs guarantee."""


class NotAsymptoticError(RuntimeError):
    """A path stays bounded, so no asymptotic ray exists."""


class RayDivergenceError(RuntimeError):
    """Chord directions along an escaping path fail to settle.

    Carries the partial diagnostics on the ``diagnostics`` attribute.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
