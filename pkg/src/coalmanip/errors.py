"""Exception types shared across the package.

Validation problems (bad weights, malformed profiles, out-of-range
coalition labels) raise subclasses of :class:`ValidationError`; guards
against combinatorial blow-ups raise :class:`SizeLimitError`.  The CLI
maps the former to exit code 2 and the latter to exit code 3.
"""


class CoalmanipError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(CoalmanipError, ValueError):
    """Invalid input to a library entry point."""


class WeightOrderError(ValidationError):
    """Scoring weights are not non-increasing."""


class DegenerateRuleError(ValidationError):
    """All scoring weights are equal, so the rule ranks nothing."""


class UnknownRuleError(ValidationError):
    """Named rule lookup failed."""


class SameAlternativeError(ValidationError):
    """The coalition's candidate coincides with the sincere winner."""


class TiedArrangementError(ValidationError):
    """The sincere tally has ties, so no strict arrangement exists."""


class NotApplicableError(ValidationError):
    """The requested analysis is outside the theory's hypotheses."""


class SelectionBoundsError(ValidationError):
    """A bounded-coalition selection violates its mass constraints."""


class NotManipulableError(CoalmanipError):
    """Witness construction was requested for a non-manipulable outcome."""


class MassMismatchError(ValidationError):
    """Witness branch masses do not add up to the coalition mass."""


class InternalInvariantError(CoalmanipError):
    """A constructed object failed its own soundness re-check."""


class InfeasibleError(CoalmanipError):
    """The optimisation problem has an empty feasible region."""


class SizeLimitError(CoalmanipError):
    """The request exceeds a hard combinatorial size guard."""
