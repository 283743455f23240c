"""Exception hierarchy shared by every module.

Each concrete class maps to exactly one CLI exit code (see ``cli.EXIT_CODES``).
"""


class BerezinError(Exception):
    """Base class for all toolkit errors."""


class ConstraintError(BerezinError, ValueError):
    """A parameter violates a quantization constraint (e.g. non-integer 1/hbar on the sphere)."""


class DomainError(BerezinError, ValueError):
    """A point lies outside the domain of a phase space."""


class FiniteNormError(ConstraintError):
    """A monomial degree exceeds the finite-norm cutoff."""

    def __init__(self, degree, cutoff, message=None):
        self.degree = degree
        self.cutoff = cutoff
        super().__init__(
            message or f"degree {degree} has infinite norm (finite-norm cutoff is {cutoff})"
        )


class MetricError(BerezinError, ArithmeticError):
    """The metric derived from a potential is not positive."""


class QuadratureError(BerezinError, ArithmeticError):
    """Quadrature failed: non-finite integrand or unreachable tolerance."""


class ToleranceUnreachable(QuadratureError):
    """Node budget exhausted before the requested tolerance was met."""


class DegenerateGramError(BerezinError, ArithmeticError):
    """Gram or refit matrix too ill-conditioned to factor."""


class SpecMismatchError(BerezinError, ValueError):
    """Two objects that must share an inner-product spec do not."""


class PoleProximityError(BerezinError, ArithmeticError):
    """Sample points fall on (or too close to) the pole of a Moebius map."""

    def __init__(self, points, pole):
        self.points = list(points)
        self.pole = pole
        shown = ", ".join(f"{complex(p):.6g}" for p in self.points[:8])
        more = "" if len(self.points) <= 8 else f" (+{len(self.points) - 8} more)"
        super().__init__(f"points too close to pole {pole:.6g}: {shown}{more}")
