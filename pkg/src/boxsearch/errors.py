"""Exception types raised across the package.

Every error derives from BoxSearchError so callers (and the CLI) can
distinguish bad input (InvalidGameError subclasses) from numerical
breakdown (NumericalError subclasses).
"""


class BoxSearchError(Exception):
    """Base class for all package errors."""


class InvalidGameError(BoxSearchError):
    """Base class for malformed game descriptions / strategies."""


class EmptyGame(InvalidGameError):
    pass


class NonPositiveTime(InvalidGameError):
    pass


class ProbabilityOutOfRange(InvalidGameError):
    pass


class InvalidHidingStrategy(InvalidGameError):
    pass


class InvalidMixture(InvalidGameError):
    """Searcher mixture weights malformed (negative or not summing to 1)."""


class CyclicInconsistent(InvalidGameError):
    """Declared cyclic structure disagrees with (1-alpha_i)^x_i = c."""


class NotCoprime(InvalidGameError):
    pass


class BaseOutOfRange(InvalidGameError):
    pass


class NotCyclic(InvalidGameError):
    """Operation requires a game with a cyclic structure."""


class CapExceeded(InvalidGameError):
    """Requested n! enumeration above the configured cap."""


class InsufficientPrefix(BoxSearchError):
    """Sequence prefix too short (and not extendable) for the request."""


class BoxNeverSearched(BoxSearchError):
    """Payoff requested for a box the sequence provably never visits."""


class PerfectDetectionUnsupported(InvalidGameError):
    """Operation undefined when some alpha_i = 1."""


class NumericalError(BoxSearchError):
    """Base class for numerical breakdowns."""


class DegenerateFloors(NumericalError):
    """Defensive check: probability floors sum to >= 1."""


class FloorUnderflow(NumericalError):
    """A hider-probability floor underflowed double precision."""


class NoCycleDetected(NumericalError):
    """Cycle detection exhausted its step budget."""


class Infeasible(NumericalError):
    pass


class NumericalFailure(NumericalError):
    """Simplex pivot breakdown, even under Bland's rule."""


class DualInconsistent(NumericalError):
    """Complementary-slackness residual above tolerance."""
