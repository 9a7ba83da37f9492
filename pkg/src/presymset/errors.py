"""Exception hierarchy shared across the package."""


class PresymError(Exception):
    """Base class for all package errors."""


class SceneParseError(PresymError):
    """Scene file rejected; carries the offending line and field."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field '{field}'")
        super().__init__(f"{message}" + (f" ({', '.join(loc)})" if loc else ""))


class NoBranchesError(PresymError):
    """Zero set empty away from the diagonal/parallel-tangent exclusions."""


class ContactMismatchError(PresymError):
    """Scene contact types do not match what the operation requires."""


class UnsupportedDegeneracyError(PresymError):
    """Contact beyond the supported range (past A5)."""


class UmbilicPointError(PresymError):
    """Principal directions undefined: curvatures coincide at the point."""


class NotTangentError(PresymError):
    """Sphere fails the tangency precondition at the patch origin."""


class UnrealizableSpecError(PresymError):
    """Requested contact types cannot be realized with the given data."""


class NoConvergenceError(PresymError):
    """Newton iteration failed to converge within the budget."""


class SingularJacobianError(PresymError):
    """Newton system degenerate (violated A1 hypothesis or diagonal)."""


class TrivialBranchError(PresymError):
    """Only the diagonal solution of the one-patch system is reachable."""


class ExceptionalRidgeDirectionError(PresymError):
    """Ridge tangent in the other principal direction: series denominator zero."""


class SingularRidgeError(PresymError):
    """Transitional case with a singular ridge: quadratic-series denominator zero."""


class StationarityFailureError(PresymError):
    """Radius-curvature product not critical at the base point."""


class IllConditionedError(PresymError):
    """Least-squares jet fit too ill-conditioned to trust."""
