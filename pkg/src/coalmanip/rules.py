"""Positional scoring rules with exact rational weights.

A scoring rule on ``m`` alternatives is a non-increasing weight vector
``w = (w_1, ..., w_m)`` with ``w_1 > w_m``: a voter's ballot gives
``w_r`` points to the alternative ranked in position ``r``.  Weights are
stored as :class:`fractions.Fraction` so that every downstream verdict
is decided in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .errors import DegenerateRuleError, UnknownRuleError, ValidationError, WeightOrderError

NAMED_RULES = ("plurality", "borda", "antiplurality")


def as_fraction(x) -> Fraction:
    """Coerce ``x`` to an exact Fraction.

    Accepts integers, Fractions, decimal or fraction strings ("0.9",
    "2/9") and floats.  Floats are converted exactly (binary value), so
    prefer strings or Fractions wherever a decimal is meant literally.
    """
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse rational from {x!r}") from exc
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValidationError(f"non-finite value {x!r}")
        return Fraction(x)
    raise ValidationError(f"cannot interpret {type(x).__name__} as a rational")


@dataclass(frozen=True)
class ScoringRule:
    """Immutable scoring rule; the constructor enforces the invariants.

    Raises WeightOrderError if the weights increase anywhere,
    DegenerateRuleError if they are all equal, ValidationError for
    fewer than two weights or unparseable entries.
    """

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        ws = tuple(as_fraction(w) for w in self.weights)
        if len(ws) < 2:
            raise ValidationError("a scoring rule needs at least two weights")
        for a, b in zip(ws, ws[1:]):
            if a < b:
                raise WeightOrderError(f"weights must be non-increasing, got {a} < {b}")
        if ws[0] == ws[-1]:
            raise DegenerateRuleError("all weights equal: the rule cannot distinguish alternatives")
        object.__setattr__(self, "weights", ws)

    @property
    def m(self) -> int:
        return len(self.weights)

    def describe(self) -> str:
        return "(" + ", ".join(str(w) for w in self.weights) + ")"


def make_rule(weights) -> ScoringRule:
    """Coerce a weight sequence and wrap it as a :class:`ScoringRule`."""
    return ScoringRule(tuple(as_fraction(w) for w in weights))


def normalize(rule: ScoringRule) -> ScoringRule:
    """Rescale to first weight 1 and last weight 0.

    The map ``w -> (w - w_m) / (w_1 - w_m)`` preserves every tally
    comparison and every manipulability verdict.  Idempotent.
    """
    lo, span = rule.weights[-1], rule.weights[0] - rule.weights[-1]
    return ScoringRule(tuple((w - lo) / span for w in rule.weights))


def named_rule(name: str, m: int) -> ScoringRule:
    """Construct plurality, borda or antiplurality on ``m`` alternatives."""
    if m < 2:
        raise ValidationError("a scoring rule needs at least two weights")
    key = name.strip().lower()
    if key == "plurality":
        return ScoringRule((Fraction(1),) + (Fraction(0),) * (m - 1))
    if key == "borda":
        return ScoringRule(tuple(Fraction(m - 1 - i) for i in range(m)))
    if key == "antiplurality":
        return ScoringRule((Fraction(1),) * (m - 1) + (Fraction(0),))
    raise UnknownRuleError(f"unknown rule {name!r}; known: {', '.join(NAMED_RULES)}")
