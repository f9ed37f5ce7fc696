import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from coalmanip import (
    BoundedCoalitionSpec,
    NotApplicableError,
    Profile,
    SameAlternativeError,
    SelectionBoundsError,
    SizeLimitError,
    TiedArrangementError,
    ValidationError,
    check_all,
    check_bounded,
    check_plurality,
    check_theorem,
    coalition,
    d_vector,
    emit_system,
    make_rule,
    named_rule,
    normalize,
    relabel,
)
from coalmanip.manip import si_slacks
from coalmanip.prefs import strict_arrangement

from conftest import random_rational_profile, random_weights

BORDA3 = named_rule("borda", 3)
TWO_TYPE = Profile.make(3, {0: "5/9", 2: "4/9"})


def test_coalition_membership_is_ranking_above_winner():
    coal = coalition(TWO_TYPE, 0, 1)
    # rankings placing the second alternative above the first: indices 2, 3, 5
    assert coal.member_types == frozenset({2, 3, 5})
    assert coal.size == Fraction(4, 9)
    other = coalition(TWO_TYPE, 0, 2)
    assert other.member_types == frozenset({3, 4, 5})
    assert other.size == 0


def test_coalition_rejects_winner_as_unifier():
    with pytest.raises(SameAlternativeError):
        coalition(TWO_TYPE, 0, 0)


def test_gap_values_on_two_type_profile():
    dv = d_vector(TWO_TYPE, BORDA3, 0, 1)
    # coalition mass 4/9 commits weight 2 to its candidate and nothing else
    assert dv.gaps[0] == Fraction(13, 9) - Fraction(10, 9)
    assert dv.gaps[2] == Fraction(13, 9)
    assert dv.maxima == (Fraction(13, 9), Fraction(3, 9))
    assert dv.rivals_desc == (2, 0)


def test_si_slacks_unified_ladder():
    gaps = [Fraction(8, 9), Fraction(7, 9), Fraction(6, 9)]
    weights = (Fraction(3), Fraction(2), Fraction(1), Fraction(0))
    c = Fraction(5, 9)
    slacks = si_slacks(gaps, weights, c)
    # ladder runs from the all-gaps line down to the smallest-gap line
    assert slacks[0] == Fraction(21, 9) - Fraction(3) * c
    assert slacks[1] == Fraction(13, 9) - Fraction(1) * c
    assert slacks[2] == Fraction(6, 9) - Fraction(0) * c
    assert all(s > 0 for s in slacks)


def test_si_slacks_length_guard():
    with pytest.raises(ValidationError):
        si_slacks([Fraction(1)], (Fraction(1), Fraction(0), Fraction(0)), Fraction(1, 2))


def test_two_type_profile_verdicts():
    v = check_theorem(TWO_TYPE, BORDA3, 1)
    assert v.manipulable
    assert v.si_slacks == (Fraction(4, 3), Fraction(1, 3))
    assert not check_theorem(TWO_TYPE, BORDA3, 2).manipulable  # empty-mass coalition


def test_check_all_union_semantics():
    overall, verdicts = check_all(TWO_TYPE, BORDA3)
    assert overall is True
    assert [v.manipulable for v in verdicts] == [True, False]
    assert verdicts[0].coalition.unifying == 1


def test_winner_cannot_be_checked():
    with pytest.raises(SameAlternativeError):
        check_theorem(TWO_TYPE, BORDA3, 0)


def test_tied_arrangement_is_rejected():
    tied = Profile.make(3, {0: "1/2", 5: "1/2"})
    with pytest.raises(TiedArrangementError):
        check_theorem(tied, BORDA3, 1)


def test_two_alternatives_out_of_scope():
    p = Profile(2, (Fraction(2, 3), Fraction(1, 3)))
    with pytest.raises(NotApplicableError):
        check_theorem(p, make_rule([1, 0]), 1)


def test_exact_boundary_is_not_manipulable():
    # family p1 = a, p3 = 1 - a under weights (2,1,0): the smallest-gap
    # inequality reads 2 - 3a > 0, so a = 2/3 sits exactly on the border
    p = Profile.make(3, {0: "2/3", 2: "1/3"})
    v = check_theorem(p, BORDA3, 1)
    assert not v.manipulable
    assert Fraction(0) in v.si_slacks
    inside = Profile.make(3, {0: "13/20", 2: "7/20"})
    assert check_theorem(inside, BORDA3, 1).manipulable


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_affine_invariance(seed):
    rng = random.Random(seed)
    m = rng.choice((3, 4))
    p = random_rational_profile(rng, m)
    rule = random_weights(rng, m)
    a = Fraction(rng.randrange(1, 7), rng.randrange(1, 5))
    b = Fraction(rng.randrange(-4, 5), 3)
    shifted = make_rule([a * w + b for w in rule.weights])
    try:
        base = check_all(p, rule)
    except TiedArrangementError:
        return
    assert [v.manipulable for v in base[1]] == [
        v.manipulable for v in check_all(p, shifted)[1]
    ]
    assert [v.manipulable for v in base[1]] == [
        v.manipulable for v in check_all(p, normalize(rule))[1]
    ]


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_relabel_equivariance(seed):
    rng = random.Random(seed)
    m = rng.choice((3, 4))
    p = random_rational_profile(rng, m)
    rule = named_rule(rng.choice(("plurality", "borda", "antiplurality")), m)
    perm = list(range(m))
    rng.shuffle(perm)
    perm = tuple(perm)
    q = relabel(p, perm)
    for k in range(m):
        try:
            before = check_theorem(p, rule, k).manipulable
        except (TiedArrangementError, SameAlternativeError):
            continue
        assert check_theorem(q, rule, perm[k]).manipulable == before


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_antiplurality_last_position_never_manipulates(seed):
    rng = random.Random(seed)
    m = rng.choice((3, 4, 5))
    p = random_rational_profile(rng, m, denominator=90)
    rule = named_rule("antiplurality", m)
    try:
        _, verdicts = check_all(p, rule)
    except TiedArrangementError:
        return
    assert verdicts[-1].manipulable is False


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_plurality_shortcut_agrees_with_general_checker(seed):
    rng = random.Random(seed)
    m = rng.choice((3, 4))
    p = random_rational_profile(rng, m)
    rule = named_rule("plurality", m)
    for k in range(1, m):
        try:
            direct = check_theorem(p, rule, k)
        except (TiedArrangementError, SameAlternativeError):
            continue
        short = check_plurality(p, k)
        assert short.manipulable == direct.manipulable
        # plurality verdict is exactly "every gap positive"
        winner = strict_arrangement(p, rule)[0]
        dv = d_vector(p, rule, winner, k)
        assert direct.manipulable == (
            all(g > 0 for g in dv.gaps.values()) and all(s > 0 for s in direct.pi_slacks)
        )


# --- bounded coalitions ---------------------------------------------------


def test_bounded_small_coalition_on_two_type_profile():
    # recruiting 2/9 from the type that ranks the candidate first flips
    # the outcome: the sincere winner drops to 12/9 against 13/9
    spec = BoundedCoalitionSpec(cap=Fraction(2, 9), selection={2: Fraction(2, 9)})
    v = check_bounded(TWO_TYPE, BORDA3, 1, spec)
    assert v.manipulable
    assert v.si_slacks == (Fraction(4, 3), Fraction(1, 9))


def test_bounded_selection_must_total_cap():
    spec = BoundedCoalitionSpec(cap=Fraction(2, 9), selection={2: Fraction(1, 9)})
    with pytest.raises(SelectionBoundsError):
        check_bounded(TWO_TYPE, BORDA3, 1, spec)


def test_bounded_selection_must_be_eligible():
    spec = BoundedCoalitionSpec(cap=Fraction(1, 9), selection={0: Fraction(1, 9)})
    with pytest.raises(SelectionBoundsError):
        check_bounded(TWO_TYPE, BORDA3, 1, spec)


def test_bounded_selection_cannot_exceed_type_mass():
    spec = BoundedCoalitionSpec(cap=Fraction(5, 9), selection={2: Fraction(5, 9)})
    with pytest.raises(SelectionBoundsError):
        check_bounded(TWO_TYPE, BORDA3, 1, spec)


def test_bounded_needs_explicit_selection():
    with pytest.raises(ValidationError):
        check_bounded(TWO_TYPE, BORDA3, 1, BoundedCoalitionSpec(cap=Fraction(2, 9)))


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_bounded_full_selection_reproduces_unbounded(seed):
    rng = random.Random(seed)
    m = rng.choice((3, 4))
    p = random_rational_profile(rng, m)
    rule = named_rule(rng.choice(("borda", "plurality")), m)
    for k in range(1, m):
        try:
            unbounded = check_theorem(p, rule, k)
        except (TiedArrangementError, SameAlternativeError):
            continue
        coal = unbounded.coalition
        if coal.size == 0:
            continue
        spec = BoundedCoalitionSpec(
            cap=coal.size,
            selection={j: p.shares[j] for j in coal.member_types if p.shares[j] > 0},
        )
        assert check_bounded(p, rule, k, spec).manipulable == unbounded.manipulable


# --- symbolic emission ----------------------------------------------------


def closed_form_lines(lam: Fraction, k: int) -> list[tuple[Fraction, ...]]:
    """Published three-alternative inequality systems for rule (1, lam, 0).

    Returns the strict-inequality coefficient rows in emission order:
    two arrangement lines, then the strategic block for coalition ``k``.
    """
    pi1 = (1 - lam, 1, lam - 1, -1, lam, -lam)
    pi2 = (lam, -lam, 1, 1 - lam, -1, lam - 1)
    if k == 1:
        d21 = (lam - 1, -1, 1, 1, -lam, 1)
        total = (2 * lam - 1, -(1 + lam), 2 - lam, 2 - lam, -(1 + lam), 2 - lam)
        return [pi1, pi2, total, d21]
    d31 = (-1, lam - 1, -lam, 1, 1, 1)
    d32 = (-lam, lam, -1, 1, 1, 1)
    total = (-(1 + lam), 2 * lam - 1, -(1 + lam), 2 - lam, 2 - lam, 2 - lam)
    return [pi1, pi2, total, d31, d32]


def emitted_lines(rule, k) -> list[tuple[Fraction, ...]]:
    data = emit_system(rule, k, fmt="json")
    out = [tuple(Fraction(c) for c in line["coeffs"]) for line in data["pi"]]
    for line in data["si"]:
        assert "coeffs" in line, "three-alternative systems have no symbolic middle lines"
        out.append(tuple(Fraction(c) for c in line["coeffs"]))
    return out


def clear_denominators(row):
    mult = math.lcm(*(c.denominator for c in row))
    ints = [int(c * mult) for c in row]
    g = math.gcd(*ints)
    return tuple(x // g for x in ints) if g else tuple(ints)


@pytest.mark.parametrize("lam_str", ["1", "1/2", "2/7", "9/10", "1/5"])
def test_emission_matches_published_three_alternative_systems(lam_str):
    lam = Fraction(lam_str)
    rule = make_rule([1, lam, 0])
    for k in (1, 2):
        want = closed_form_lines(lam, k)
        got = emitted_lines(rule, k)
        assert [clear_denominators(r) for r in got] == [clear_denominators(r) for r in want]


def test_emission_scale_invariant_up_to_denominators():
    lam = Fraction(1, 3)
    base = emitted_lines(make_rule([1, lam, 0]), 1)
    scaled = emitted_lines(make_rule([6, 2, 0]), 1)  # same rule, weights scaled by 6
    assert [clear_denominators(r) for r in base] == [clear_denominators(r) for r in scaled]


def test_plurality_emission_lists_every_rival_floor():
    data = emit_system(named_rule("plurality", 4), 2, fmt="json")
    labels = [line["label"] for line in data["si"]]
    assert labels == ["min:d(A3,A1)", "min:d(A3,A2)", "min:d(A3,A4)"]


def test_generic_emission_prunes_implied_floors():
    data = emit_system(BORDA3, 1, fmt="json")
    labels = [line["label"] for line in data["si"]]
    assert labels == ["sum", "min:d(A2,A1)"]
    data = emit_system(BORDA3, 2, fmt="json")
    labels = [line["label"] for line in data["si"]]
    assert labels == ["sum", "min:d(A3,A1)", "min:d(A3,A2)"]


def test_emission_middle_lines_are_symbolic_for_m4():
    data = emit_system(named_rule("borda", 4), 1, fmt="json")
    symbolic = [line for line in data["si"] if "coeffs" not in line]
    assert len(symbolic) == 1
    assert symbolic[0]["maxima_removed"] == 1


def test_expanded_emission_has_factorial_many_systems():
    data = emit_system(BORDA3, 1, fmt="json", expand=True)
    assert len(data["systems"]) == 2
    data4 = emit_system(named_rule("borda", 4), 1, fmt="json", expand=True)
    assert len(data4["systems"]) == 6


def test_expanded_emission_size_guard():
    with pytest.raises(SizeLimitError):
        emit_system(named_rule("borda", 7), 1, expand=True)


def test_text_emission_mentions_blocks():
    text = emit_system(BORDA3, 1)
    assert "[pi]" in text and "[si]" in text and "[simplex]" in text
