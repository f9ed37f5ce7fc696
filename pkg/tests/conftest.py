"""Shared generators for randomized tests.

Everything here is seeded; no test depends on wall-clock entropy.
"""
from __future__ import annotations

import math
import random
from fractions import Fraction

from coalmanip import Profile, ScoringRule, named_rule


def random_rational_profile(rng: random.Random, m: int, denominator: int = 60) -> Profile:
    """Exact profile with shares j/denominator drawn by balls-in-bins."""
    fact = math.factorial(m)
    counts = [0] * fact
    for _ in range(denominator):
        counts[rng.randrange(fact)] += 1
    return Profile(m, tuple(Fraction(c, denominator) for c in counts))


def random_weights(rng: random.Random, m: int) -> ScoringRule:
    """Random non-increasing rational weight vector with w1 > wm."""
    while True:
        vals = sorted((Fraction(rng.randrange(0, 13), 12) for _ in range(m)), reverse=True)
        if vals[0] > vals[-1]:
            return ScoringRule(tuple(vals))


def rule_corpus(rng: random.Random, m: int) -> list[ScoringRule]:
    """The three named rules plus three seeded random weight vectors."""
    rules = [named_rule(n, m) for n in ("plurality", "borda", "antiplurality")]
    rules.extend(random_weights(rng, m) for _ in range(3))
    return rules
