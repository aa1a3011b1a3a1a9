"""Exception types shared across the package."""


class AtcError(Exception):
    """Base class for all package errors."""


class ConfigurationError(AtcError):
    """A state is physically unevaluable (e.g. a collapsed bond)."""


class IllPosedParametersError(AtcError, ValueError):
    """Mesh-optimization parameters make the target norm infinite."""


class UsageError(AtcError, ValueError):
    """Invalid parameters or inconsistent inputs supplied by the caller."""


class KktSolverError(AtcError):
    """The saddle-point linear solve failed or did not meet its residual bound."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class NonConvergenceError(AtcError):
    """Newton iteration exhausted its budget; carries the residual history."""

    def __init__(self, message, residual_history=None, diagnostics=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])
        self.diagnostics = diagnostics
