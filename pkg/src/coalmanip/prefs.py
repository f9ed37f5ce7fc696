"""Preference profiles over the m! strict rankings.

Rankings are tuples of 0-based alternative indices, best first, and are
enumerated in lexicographic order.  That order is the package-wide
convention: index 0 is ``A1>A2>...>Am`` and index m!-1 is the full
reversal.  Human-facing labels are 1-based ("A2>A1>A3" is ranking
index 2 for m=3).

Two profile flavours exist: :class:`Profile` carries exact rational
shares summing to 1 (the continuum model), :class:`IntProfile` carries
integer ballot counts (a finite electorate).
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

from .errors import SizeLimitError, TiedArrangementError, ValidationError
from .rules import ScoringRule, as_fraction

MAX_ALTERNATIVES = 8


@lru_cache(maxsize=None)
def enumerate_rankings(m: int) -> tuple[tuple[int, ...], ...]:
    """All m! strict rankings in lexicographic order.

    Guarded to 2 <= m <= 8; the table has m! rows and larger m would
    silently allocate gigabytes downstream.
    """
    if m < 2:
        raise ValidationError("need at least two alternatives")
    if m > MAX_ALTERNATIVES:
        raise SizeLimitError(f"m={m} exceeds the ranking-table guard (m <= {MAX_ALTERNATIVES})")
    return tuple(permutations(range(m)))


@lru_cache(maxsize=None)
def _ranking_lookup(m: int) -> dict[tuple[int, ...], int]:
    return {r: j for j, r in enumerate(enumerate_rankings(m))}


def ranking_index(ranking) -> int:
    """Lexicographic index of a ranking given as a tuple of 0-based indices."""
    r = tuple(ranking)
    lookup = _ranking_lookup(len(r))
    try:
        return lookup[r]
    except KeyError:
        raise ValidationError(f"{ranking!r} is not a permutation of 0..{len(r) - 1}") from None


def ranking_label(ranking) -> str:
    """1-based display form, e.g. (1, 0, 2) -> 'A2>A1>A3'."""
    return ">".join(f"A{a + 1}" for a in ranking)


def parse_ranking_label(label: str, m: int) -> tuple[int, ...]:
    parts = [p.strip() for p in label.split(">")]
    out = []
    for p in parts:
        if not (p.startswith("A") and p[1:].isdigit()):
            raise ValidationError(f"bad alternative label {p!r} in {label!r}")
        out.append(int(p[1:]) - 1)
    r = tuple(out)
    if sorted(r) != list(range(m)):
        raise ValidationError(f"{label!r} is not a strict ranking of A1..A{m}")
    return r


@dataclass(frozen=True)
class Profile:
    """Continuum profile: exact rational share of each ranking type.

    ``shares[j]`` is the fraction of the electorate whose sincere
    ranking is ``enumerate_rankings(m)[j]``.  Shares must be
    non-negative and sum to exactly 1.
    """

    m: int
    shares: tuple[Fraction, ...]

    def __post_init__(self):
        n_expected = math.factorial(self.m)
        enumerate_rankings(self.m)  # range guard on m
        if len(self.shares) != n_expected:
            raise ValidationError(f"expected {n_expected} shares for m={self.m}, got {len(self.shares)}")
        total = Fraction(0)
        for s in self.shares:
            if not isinstance(s, Fraction):
                raise ValidationError("Profile shares must be Fractions; use Profile.make")
            if s < 0:
                raise ValidationError(f"negative share {s}")
            total += s
        if total != 1:
            raise ValidationError(f"shares sum to {total}, expected exactly 1")

    @classmethod
    def make(cls, m: int, shares) -> "Profile":
        """Build from a dense share sequence or a sparse mapping.

        Mapping keys may be ranking indices or labels like "A2>A1>A3";
        unmentioned rankings get share zero.
        """
        if isinstance(shares, Mapping):
            dense = [Fraction(0)] * math.factorial(m)
            for key, val in shares.items():
                if isinstance(key, str):
                    j = ranking_index(parse_ranking_label(key, m))
                else:
                    j = int(key)
                    if not 0 <= j < len(dense):
                        raise ValidationError(f"ranking index {key} out of range for m={m}")
                dense[j] = as_fraction(val)
            return cls(m, tuple(dense))
        return cls(m, tuple(as_fraction(s) for s in shares))

    @classmethod
    def from_floats(cls, m: int, shares) -> "Profile":
        """Exact rationalisation of a float vector, renormalised to total 1.

        Each float converts to its exact binary rational; the vector is
        then divided by its exact sum.  Verdicts are invariant under
        positive scaling of the profile, so the renormalisation never
        changes an outcome.
        """
        fr = [as_fraction(float(s)) for s in shares]
        total = sum(fr)
        if total <= 0:
            raise ValidationError("profile mass must be positive")
        return cls(m, tuple(s / total for s in fr))

    def to_dict(self, sparse: bool = False) -> dict:
        if sparse:
            rk = enumerate_rankings(self.m)
            body = {ranking_label(rk[j]): str(s) for j, s in enumerate(self.shares) if s != 0}
            return {"m": self.m, "sparse": body}
        return {"m": self.m, "shares": [str(s) for s in self.shares]}

    @classmethod
    def from_dict(cls, data: dict) -> "Profile":
        if "m" not in data:
            raise ValidationError("profile JSON needs an 'm' field")
        m = int(data["m"])
        if "shares" in data:
            return cls.make(m, data["shares"])
        if "sparse" in data:
            shares = [Fraction(0)] * math.factorial(m)
            for label, val in data["sparse"].items():
                shares[ranking_index(parse_ranking_label(label, m))] = as_fraction(val)
            return cls(m, tuple(shares))
        raise ValidationError("profile JSON needs 'shares' or 'sparse'")

    def to_json(self, sparse: bool = False) -> str:
        return json.dumps(self.to_dict(sparse=sparse))

    @classmethod
    def from_json(cls, text: str) -> "Profile":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class IntProfile:
    """Finite electorate: integer ballot count per ranking type."""

    m: int
    counts: tuple[int, ...]

    def __post_init__(self):
        n_expected = math.factorial(self.m)
        enumerate_rankings(self.m)
        if len(self.counts) != n_expected:
            raise ValidationError(f"expected {n_expected} counts for m={self.m}, got {len(self.counts)}")
        for c in self.counts:
            if not isinstance(c, int) or c < 0:
                raise ValidationError(f"counts must be non-negative integers, got {c!r}")
        if sum(self.counts) == 0:
            raise ValidationError("empty electorate")

    @property
    def n(self) -> int:
        return sum(self.counts)

    def to_profile(self) -> Profile:
        n = self.n
        return Profile(self.m, tuple(Fraction(c, n) for c in self.counts))


@lru_cache(maxsize=None)
def _points_matrix_cached(weights: tuple, m: int):
    rows = []
    for r in enumerate_rankings(m):
        row = [Fraction(0)] * m
        for pos, a in enumerate(r):
            row[a] = weights[pos]
        rows.append(tuple(row))
    return tuple(rows)


def points_matrix(rule: ScoringRule) -> tuple[tuple[Fraction, ...], ...]:
    """m! x m table: entry [j][i] is what ranking j awards alternative i."""
    return _points_matrix_cached(rule.weights, rule.m)


def tally(profile: Profile, rule: ScoringRule) -> tuple[Fraction, ...]:
    """Exact score of every alternative under the given rule."""
    if rule.m != profile.m:
        raise ValidationError(f"rule has m={rule.m} but profile has m={profile.m}")
    pts = points_matrix(rule)
    scores = [Fraction(0)] * profile.m
    for j, s in enumerate(profile.shares):
        if s == 0:
            continue
        row = pts[j]
        for i in range(profile.m):
            scores[i] += s * row[i]
    return tuple(scores)


@dataclass(frozen=True)
class TieReport:
    """Raised-score ties: the order shown breaks them by lowest index."""

    order: tuple[int, ...]
    tied_pairs: tuple[tuple[int, int], ...]


def arrangement(scores):
    """Descending order of alternatives, or a TieReport if any scores tie.

    Returns a tuple of 0-based alternative indices (winner first) when
    the scores are pairwise distinct, otherwise a :class:`TieReport`.
    """
    m = len(scores)
    order = tuple(sorted(range(m), key=lambda a: (-scores[a], a)))
    ties = tuple(
        (order[i], order[i + 1]) for i in range(m - 1) if scores[order[i]] == scores[order[i + 1]]
    )
    if ties:
        return TieReport(order=order, tied_pairs=ties)
    return order


def strict_arrangement(profile: Profile, rule: ScoringRule) -> tuple[int, ...]:
    """Arrangement of the sincere tally; ties raise TiedArrangementError."""
    arr = arrangement(tally(profile, rule))
    if isinstance(arr, TieReport):
        pairs = ", ".join(f"A{a + 1}~A{b + 1}" for a, b in arr.tied_pairs)
        raise TiedArrangementError(f"sincere tally is tied: {pairs}")
    return arr


def relabel(profile: Profile, perm) -> Profile:
    """Rename alternative ``i`` to ``perm[i]`` throughout the profile.

    ``perm`` must be a permutation of 0..m-1.  The defining property is
    tally commutation: relabelling the profile and then tallying gives
    the tally of the original profile read through ``perm``.
    """
    p = tuple(perm)
    if sorted(p) != list(range(profile.m)):
        raise ValidationError(f"{perm!r} is not a permutation of 0..{profile.m - 1}")
    rk = enumerate_rankings(profile.m)
    out = [Fraction(0)] * len(rk)
    for j, s in enumerate(profile.shares):
        if s == 0:
            continue
        out[ranking_index(tuple(p[a] for a in rk[j]))] = s
    return Profile(profile.m, tuple(out))
