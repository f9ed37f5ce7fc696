"""Constructive strategic-ballot witnesses.

When an outcome is manipulable towards ``A_k``, the strategic
inequalities do more than certify existence: they drive a recursive
placement procedure that outputs an explicit joint ballot for the
coalition.  All members put ``A_k`` first; rivals are then seated one
at a time, largest gap first, into the remaining ballot positions.

At each level the coalition's ballot space is a set of branches (mass
plus partially filled ranking) sharing one *virtual* weight vector: the
mass-weighted average weight of each branch's q-th free position.  The
rival ``A_s`` with the largest remaining gap is seated either

* case (a): at every branch's first free position, when even that
  position's full weight keeps ``A_s`` strictly behind ``A_k``; or
* case (b): split across two adjacent virtual positions sigma-1 and
  sigma, chosen so the weight collected lands just below the gap.  The
  split leaves ``A_s`` exactly ``eps`` points behind ``A_k``: with
  ``room = M1 - w_sigma c`` (the score headroom above full placement at
  sigma), mass ``t = (room - eps) / (w_{sigma-1} - w_sigma)`` goes to
  position sigma-1 and the rest to sigma.  Every inequality slack of
  the reduced problem shrinks by at most ``eps``, so the automatic
  choice ``eps`` = half the smaller of the current minimum slack and
  ``room`` keeps all slacks positive at every level (an explicit
  override may replace it).  The two positions then merge into one
  virtual slot of weight ``((c - t) w_{sigma-1} + t w_sigma) / c``.

Every quantity is an exact Fraction.  After the last rival is seated
the branches are re-tallied against the sincere remainder; anything but
a strict win for ``A_k`` raises InternalInvariantError.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    InternalInvariantError,
    MassMismatchError,
    NotManipulableError,
    SameAlternativeError,
    ValidationError,
)
from .manip import check_theorem, coalition, d_vector, si_slacks
from .prefs import Profile, points_matrix, ranking_index, ranking_label, strict_arrangement, tally
from .rules import ScoringRule


@dataclass(frozen=True)
class WitnessStep:
    """One placement level of the construction (case (b) fields are None in case (a))."""

    rival: int
    case: str
    sigma: int | None = None
    t: Fraction | None = None
    epsilon: Fraction | None = None
    merged_weight: Fraction | None = None


@dataclass(frozen=True)
class Witness:
    """Joint coalition ballot: mass on each full ranking, plus the trace."""

    branches: tuple[tuple[Fraction, tuple[int, ...]], ...]
    trace: tuple[WitnessStep, ...]
    final_tally: tuple[Fraction, ...]

    def to_dict(self) -> dict:
        return {
            "branches": [{"ranking": ranking_label(r), "mass": str(mass)} for mass, r in self.branches],
            "trace": [
                {
                    "rival": f"A{s.rival + 1}",
                    "case": s.case,
                    **(
                        {
                            "sigma": s.sigma,
                            "t": str(s.t),
                            "epsilon": str(s.epsilon),
                            "merged_weight": str(s.merged_weight),
                        }
                        if s.case == "b"
                        else {}
                    ),
                }
                for s in self.trace
            ],
            "final_tally": [str(x) for x in self.final_tally],
        }


class _Branch:
    __slots__ = ("mass", "slots")

    def __init__(self, mass: Fraction, slots: list):
        self.mass = mass
        self.slots = slots

    def free(self) -> list[int]:
        return [p for p, a in enumerate(self.slots) if a is None]


def build_witness(
    profile: Profile, rule: ScoringRule, k: int, epsilon: Fraction | None = None
) -> Witness:
    """Construct an explicit manipulation towards ``A_k``.

    Raises NotManipulableError when the inequalities say no witness can
    exist.  ``epsilon`` optionally fixes the case-(b) score margin; it
    must satisfy ``0 < epsilon < min slack`` and ``epsilon <= room`` at
    every level where it is used, otherwise ValidationError.
    """
    verdict = check_theorem(profile, rule, k)
    if not verdict.manipulable:
        raise NotManipulableError(
            f"outcome is not manipulable towards A{k + 1}; no witness exists"
        )
    if epsilon is not None and epsilon <= 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    m = profile.m
    arr = strict_arrangement(profile, rule)
    coal = coalition(profile, arr[0], k)
    dv = d_vector(profile, rule, arr[0], k)
    csize = coal.size
    if csize <= 0:
        raise InternalInvariantError("manipulable verdict with an empty coalition")

    gaps = dict(dv.gaps)  # constant across levels: seating a rival feeds only that rival
    remaining = sorted(gaps, key=lambda i: (-gaps[i], i))
    wv: list[Fraction] = list(rule.weights)
    branches = [_Branch(csize, [None] * m)]
    for br in branches:
        br.slots[0] = k
    trace: list[WitnessStep] = []

    while remaining:
        a_s = remaining[0]
        m1 = gaps[a_s]
        if m1 > wv[1] * csize:
            for br in branches:
                br.slots[br.free()[0]] = a_s
            wv = [wv[0]] + wv[2:]
            trace.append(WitnessStep(rival=a_s, case="a"))
        else:
            sigma = next((s for s in range(3, len(wv) + 1) if wv[s - 1] * csize < m1), None)
            if sigma is None:
                raise InternalInvariantError("no admissible split position; slack invariant broken")
            slacks = si_slacks([gaps[i] for i in remaining], wv, csize)
            min_slack = min(slacks)
            if min_slack <= 0:
                raise InternalInvariantError("strategic slack vanished during construction")
            room = m1 - wv[sigma - 1] * csize
            if epsilon is None:
                eps = Fraction(1, 2) * min(min_slack, room)
            else:
                eps = epsilon
                if eps >= min_slack or eps > room:
                    raise ValidationError(
                        f"epsilon {eps} too large at rival A{a_s + 1}: "
                        f"needs epsilon < {min_slack} and epsilon <= {room}"
                    )
            t = (room - eps) / (wv[sigma - 2] - wv[sigma - 1])
            merged = ((csize - t) * wv[sigma - 2] + t * wv[sigma - 1]) / csize
            new_branches = []
            for br in branches:
                fr = br.free()
                hi = list(br.slots)
                hi[fr[sigma - 3]] = a_s
                lo = list(br.slots)
                lo[fr[sigma - 2]] = a_s
                if t > 0:
                    new_branches.append(_Branch(br.mass * t / csize, hi))
                new_branches.append(_Branch(br.mass * (csize - t) / csize, lo))
            branches = new_branches
            wv = wv[: sigma - 2] + [merged] + wv[sigma:]
            trace.append(
                WitnessStep(rival=a_s, case="b", sigma=sigma, t=t, epsilon=eps, merged_weight=merged)
            )
        remaining.remove(a_s)

    merged_masses: dict[tuple[int, ...], Fraction] = {}
    for br in branches:
        r = tuple(br.slots)
        ranking_index(r)  # sanity: every slot filled with a permutation
        merged_masses[r] = merged_masses.get(r, Fraction(0)) + br.mass
    out = tuple(sorted(merged_masses.items(), key=lambda kv: ranking_index(kv[0])))
    final = _retally(profile, rule, coal.member_types, out)
    for i in range(m):
        if i != k and final[k] <= final[i]:
            raise InternalInvariantError(
                f"constructed ballots fail: A{k + 1} scores {final[k]}, A{i + 1} scores {final[i]}"
            )
    return Witness(
        branches=tuple((mass, r) for r, mass in out),
        trace=tuple(trace),
        final_tally=final,
    )


def _retally(profile, rule, member_types, mass_by_ranking):
    pts = points_matrix(rule)
    scores = [Fraction(0)] * profile.m
    for j, share in enumerate(profile.shares):
        if share == 0 or j in member_types:
            continue
        for i in range(profile.m):
            scores[i] += share * pts[j][i]
    for r, mass in mass_by_ranking:
        row = pts[ranking_index(r)]
        for i in range(profile.m):
            scores[i] += mass * row[i]
    return tuple(scores)


def validate_witness(profile: Profile, rule: ScoringRule, k: int, witness: Witness) -> bool:
    """Independent soundness check of a witness.

    Replaces every coalition member's ballot by the witness branches and
    re-tallies; true exactly when ``A_k`` ends up the strict winner.
    Branch masses must be non-negative and total the coalition mass
    (MassMismatchError otherwise).
    """
    arr = strict_arrangement(profile, rule)
    if k == arr[0]:
        raise SameAlternativeError(f"A{k + 1} is already the sincere winner")
    coal = coalition(profile, arr[0], k)
    total = Fraction(0)
    for mass, r in witness.branches:
        if mass < 0:
            raise ValidationError(f"negative branch mass {mass}")
        ranking_index(r)
        total += mass
    if total != coal.size:
        raise MassMismatchError(f"branch masses total {total}, coalition mass is {coal.size}")
    final = _retally(profile, rule, coal.member_types, [(r, mass) for mass, r in witness.branches])
    return all(final[k] > final[i] for i in range(profile.m) if i != k)
