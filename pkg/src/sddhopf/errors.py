"""Exception types shared across the toolkit."""


class SddHopfError(Exception):
    """Base class for all numerical failures reported by this package."""


class NonFiniteJacobian(SddHopfError):
    """A Jacobian evaluation produced a NaN or infinite entry."""


class NoConvergence(SddHopfError):
    """An iteration exhausted its budget without meeting its tolerance."""


class SingularJacobian(SddHopfError):
    """A Newton step is undefined because the Jacobian is singular."""


class BoundaryZero(SddHopfError):
    """The characteristic determinant (nearly) vanishes on a contour boundary."""


class NoCriticalPoint(SddHopfError):
    """No parameter value produces a purely imaginary eigenvalue pair."""


class DisagreementError(SddHopfError):
    """A closed-form value and its independent numerical check disagree."""


class NoRootInWindow(SddHopfError):
    """The scalar delay equation has no root in the requested window."""


class AmbiguousRoot(SddHopfError):
    """The delay window contains several roots and the guess does not select one."""


class SingularImplicitDerivative(SddHopfError):
    """The implicit-differentiation denominator for the delay rate vanished."""


class InnerIterationDivergence(SddHopfError):
    """The per-step fixed-point iteration of the integrator failed to settle."""


class ModeOverflow(SddHopfError):
    """More Fourier modes requested than the sample grid can represent."""


class SingularAtStationary(SddHopfError):
    """det(d1f + d2f) is below the nonsingularity threshold at a stationary state."""


class ParseError(SddHopfError):
    """A configuration file could not be parsed."""


class SchemaError(SddHopfError):
    """A configuration violates the expected schema."""
