"""Exception hierarchy shared by all modules."""


class PolypackError(Exception):
    """Base class for library errors."""


class NotUnimodularError(PolypackError, ValueError):
    """Matrix is not an automorphism of Z^n (|det| != 1)."""


class HypothesisError(PolypackError, ValueError):
    """The automorphism does not satisfy an operation's standing hypothesis."""


class CoincidentOrbitsError(PolypackError, ValueError):
    """Two orbits coincide, so their intersection is infinite."""


class AmbiguousOrbitError(PolypackError, ValueError):
    """A vector lies within tolerance of both E- and E+."""


class CertificationError(PolypackError, RuntimeError):
    """A finite certificate could not be produced within configured limits."""


class BudgetExceeded(PolypackError, RuntimeError):
    """BFS stopped at the element budget.

    ``last_radius`` is the last radius whose sphere was completed and
    ``partial`` holds the ball up to that radius.
    """

    def __init__(self, message, last_radius, partial=None):
        super().__init__(message)
        self.last_radius = last_radius
        self.partial = partial


class InvariantViolation(PolypackError, AssertionError):
    """A checked mathematical invariant failed."""
