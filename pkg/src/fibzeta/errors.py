"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input violates a documented precondition (wrong region, bad integer)."""


class UnsupportedFieldError(ValueError):
    """The field Q(sqrt(D)) has a fundamental unit of norm +1.

    Everything downstream (closed forms, continuation formulas, pole grid)
    assumes N(eps) = -1, so such fields are rejected outright rather than
    served with silently wrong values.
    """


class PoleError(ArithmeticError):
    """A gamma-function argument sits on (or indistinguishably near) a pole."""


class NearPoleError(ArithmeticError):
    """Evaluation point too close to a pole of the target function.

    Raised by the zeta evaluators when the input is within the documented
    threshold of the pole lattice s = -2k + pi*i*m/log(eps).
    """


class NoConvergence(ArithmeticError):
    """A truncated series hit its term cap before reaching the tolerance."""
