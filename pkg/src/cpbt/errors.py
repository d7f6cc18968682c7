class CpbtError(Exception):
    """Base class for library errors."""


class InconsistentCertificate(CpbtError):
    """A postcondition of the decomposition pipeline failed.

    Raised when the tolerance configuration contradicts itself on a
    borderline instance: a linear solve left a large residual, a root fell
    outside ``[0, 1]``, a weight came out negative, and so on. ``step`` names
    the failing stage.
    """

    def __init__(self, step: str, message: str):
        super().__init__(f"inconsistent certificate at {step}: {message}")
        self.step = step


class SolverError(CpbtError):
    """The conic solver did not converge; carries the best iterate found."""

    def __init__(self, message: str, best_iterate=None, residuals=None, iterations=0):
        super().__init__(message)
        self.best_iterate = best_iterate
        self.residuals = residuals or {}
        self.iterations = iterations
