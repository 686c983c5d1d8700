"""Exception types shared across the package."""


class MaxlatError(Exception):
    """Base class for all domain errors raised by this package."""


class ValidationError(MaxlatError):
    """A lattice invariant is violated (bad rest length, duplicate edge, ...)."""


class ParseError(MaxlatError):
    """A lattice or mode file does not conform to the JSON schema."""


class DegenerateGeometry(MaxlatError):
    """Requested geometry collapses (angle at the boundary of its range)."""


class Theta4Undefined(MaxlatError):
    """The closing angle of the two-periodic cell is not defined (arcsin out of range)."""


class NotAStandardKagome(MaxlatError):
    """Operation requires a standard-Kagome supercell with straight lattice lines."""


class RangeExceeded(MaxlatError):
    """Mechanism path evaluated outside its admissible parameter range."""


class InvalidSequence(MaxlatError):
    """Layer sequence violates the layering adjacency rule."""


class NotAGHMode(MaxlatError):
    """Input displacement is not in the kernel of the compatibility matrix."""


class ConsistencyFailed(MaxlatError):
    """Second-order strain requested for a mode that fails the consistency condition."""


class SOutOfRange(MaxlatError):
    """Wave index s outside 0..floor(N/2)."""


class ThetaAtSingularity(MaxlatError):
    """Corrector scan requested at the twist angle where the lattice is non-degenerate."""


class HypothesesUnmet(MaxlatError):
    """Continuation hypotheses fail (GH dimension != 1 or degenerate effective tensor)."""


class SingularSystem(MaxlatError):
    """The 3x3 second-order strain system is rank deficient."""


class NewtonDiverged(MaxlatError):
    """Path-following Newton iteration failed to converge."""
