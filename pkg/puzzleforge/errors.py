"""
Exception hierarchy for puzzleforge.

Every error carries the process exit code the CLI maps it to: 2 for configuration problems,
3 for numerical failures and 4 for exhausted resource budgets. Outcomes that are part of an
operation's normal result (a piece that is not regular, a blocked itinerary, an inadmissible
product) are returned as values, not raised.
"""


class PuzzleforgeError(Exception):
    """Base class for all puzzleforge errors."""
    exit_code = 1


class ConfigError(PuzzleforgeError):
    """Invalid or inconsistent run configuration."""
    exit_code = 2


class NumericalError(PuzzleforgeError):
    """A computation could not produce a trustworthy result."""
    exit_code = 3


class ResourceLimit(PuzzleforgeError):
    """An enumeration or sample budget would be exceeded."""
    exit_code = 4


class NoRealFixedPoints(NumericalError):
    """1 - 4a < 0: the quadratic map has no real fixed points."""


class NotInvariant(NumericalError):
    """The interval [a, a**2 + a] is not forward invariant for this parameter."""


class Unrelated(NumericalError):
    """A puzzle piece has no unique parent or image piece one order down."""


class GapNotCentral(NumericalError):
    """The set left uncovered by simple intervals is not one interval around 0."""


class ReturnTimeNotFound(NumericalError):
    """The critical point does not return to A within the step budget."""


class CriticalHit(NumericalError):
    """An orbit landed exactly on the critical point 0."""


class BindingOverflow(NumericalError):
    """A bound orbit did not separate from the critical orbit within max_k steps."""


class Escaped(NumericalError):
    """A plane orbit left the configured bounding radius."""


class NoFixedPoints(NumericalError):
    """The plane map has no real fixed points for these parameters."""


class ArcFailure(NumericalError):
    """Stable-arc continuation lost the graph property."""


class PullbackFailure(NumericalError):
    """A box arc could not be pulled back along a piece's branch."""


class CountMismatch(NumericalError):
    """The number of simple pieces differs from 2M - 2."""
