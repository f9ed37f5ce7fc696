"""Coalitional manipulability of a scoring-rule outcome.

Fix a profile with a strict sincere arrangement and a non-winning
alternative ``A_k``.  The coalition unified behind ``A_k`` consists of
every voter type ranking ``A_k`` above the sincere winner; its total
share is the coalition mass ``c``.  The decision rests on two groups of
strict linear inequalities in the profile:

* positional inequalities (PI): the sincere arrangement itself, one
  strict comparison per adjacent pair;
* strategic inequalities (SI): written through the gap values
  ``d(A_k, A_i)``, the margin of ``A_k`` over rival ``A_i`` when every
  coalition member gives ``A_k`` the top weight and nothing to anyone
  else while non-members stay sincere.

With gaps sorted and ``M_1 >= M_2 >= ...`` their decreasing order, the
SI block is: the sum of all gaps exceeds ``(w_2+...+w_m) c``, dropping
the ``l`` largest gaps tightens the right side to ``(w_{l+2}+...+w_m) c``
for ``l = 1..m-3``, and the smallest gap alone exceeds ``w_m c``.
Equivalently, for every ``r``, the sum of the ``r`` smallest gaps must
exceed the sum of the ``r`` smallest weights times ``c``.  The outcome
is coalitionally manipulable towards ``A_k`` exactly when PI and SI all
hold strictly; a zero slack anywhere means not manipulable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    NotApplicableError,
    SameAlternativeError,
    SelectionBoundsError,
    SizeLimitError,
    ValidationError,
)
from .prefs import (
    Profile,
    enumerate_rankings,
    points_matrix,
    ranking_label,
    strict_arrangement,
    tally,
)
from .rules import ScoringRule

EXPAND_MAX_M = 6


@dataclass(frozen=True)
class Coalition:
    """Voter types unified behind one alternative against the winner."""

    unifying: int
    member_types: frozenset[int]
    size: Fraction


@dataclass(frozen=True)
class DVector:
    """Gap values of one coalition, keyed by rival alternative.

    ``maxima`` repeats the gaps in decreasing order (ties broken by
    rival index), so ``maxima[0]`` is the largest gap.
    """

    gaps: dict[int, Fraction]
    maxima: tuple[Fraction, ...]
    rivals_desc: tuple[int, ...]


@dataclass(frozen=True)
class ManipVerdict:
    manipulable: bool
    pi_slacks: tuple[Fraction, ...]
    si_slacks: tuple[Fraction, ...]
    coalition: Coalition


@dataclass(frozen=True)
class BoundedCoalitionSpec:
    """Participation bound ``cap`` plus an explicit per-type selection.

    ``selection`` maps ranking indices (coalition-eligible types) to the
    mass recruited from that type; masses must total exactly ``cap``.
    """

    cap: Fraction
    selection: dict[int, Fraction] | None = None


def _check_k(m: int, k: int) -> None:
    if not isinstance(k, int) or not 0 <= k < m:
        raise ValidationError(f"alternative index {k!r} out of range for m={m}")


def coalition(profile: Profile, winner: int, k: int) -> Coalition:
    """All voter types ranking ``A_k`` above ``winner``, with their mass."""
    _check_k(profile.m, winner)
    _check_k(profile.m, k)
    if k == winner:
        raise SameAlternativeError("a coalition cannot unify behind the sincere winner")
    rk = enumerate_rankings(profile.m)
    members = frozenset(j for j, r in enumerate(rk) if r.index(k) < r.index(winner))
    size = sum((profile.shares[j] for j in members), Fraction(0))
    return Coalition(unifying=k, member_types=members, size=size)


def d_vector(profile: Profile, rule: ScoringRule, winner: int, k: int) -> DVector:
    """Gaps of ``A_k`` over each rival under the coalition's zero-commitment vote.

    Members of the coalition contribute the top weight to ``A_k`` and
    nothing to anyone else; everyone else votes sincerely.  The gap for
    rival ``A_i`` is the resulting score difference score(A_k) - score(A_i).
    """
    coal = coalition(profile, winner, k)
    pts = points_matrix(rule)
    m = profile.m
    w1 = rule.weights[0]
    gaps: dict[int, Fraction] = {i: Fraction(0) for i in range(m) if i != k}
    for j, share in enumerate(profile.shares):
        if share == 0:
            continue
        if j in coal.member_types:
            for i in gaps:
                gaps[i] += share * w1
        else:
            row = pts[j]
            for i in gaps:
                gaps[i] += share * (row[k] - row[i])
    rivals = sorted(gaps, key=lambda i: (-gaps[i], i))
    return DVector(gaps=gaps, maxima=tuple(gaps[i] for i in rivals), rivals_desc=tuple(rivals))


def si_slacks(gaps, weights, csize: Fraction) -> tuple[Fraction, ...]:
    """Slack of every strategic inequality, largest block first.

    ``weights`` is the current weight vector (length ``len(gaps) + 1``);
    entry ``r`` of the result (0-based) is the slack of the inequality
    on the ``len(gaps) - r`` smallest gaps.  The final entry is the
    smallest gap minus the last weight times ``csize``.
    """
    asc = sorted(gaps)
    n = len(asc)
    if len(weights) != n + 1:
        raise ValidationError("weight vector must be one longer than the gap list")
    out = []
    for r in range(n, 0, -1):
        lhs = sum(asc[:r], Fraction(0))
        rhs = sum(weights[n + 1 - r :], Fraction(0)) * csize
        out.append(lhs - rhs)
    return tuple(out)


def _require_theorem_scope(profile: Profile, rule: ScoringRule) -> None:
    if rule.m != profile.m:
        raise ValidationError(f"rule has m={rule.m} but profile has m={profile.m}")
    if profile.m < 3:
        raise NotApplicableError("manipulability analysis needs at least three alternatives")


def check_theorem(profile: Profile, rule: ScoringRule, k: int) -> ManipVerdict:
    """Decide manipulability towards ``A_k`` in exact arithmetic.

    Raises TiedArrangementError when the sincere tally has ties and
    SameAlternativeError when ``A_k`` already wins.
    """
    _require_theorem_scope(profile, rule)
    _check_k(profile.m, k)
    scores = tally(profile, rule)
    arr = strict_arrangement(profile, rule)
    winner = arr[0]
    if k == winner:
        raise SameAlternativeError(f"A{k + 1} is already the sincere winner")
    coal = coalition(profile, winner, k)
    dv = d_vector(profile, rule, winner, k)
    pi = tuple(scores[arr[i]] - scores[arr[i + 1]] for i in range(profile.m - 1))
    si = si_slacks(list(dv.gaps.values()), rule.weights, coal.size)
    ok = all(s > 0 for s in pi) and all(s > 0 for s in si)
    return ManipVerdict(manipulable=ok, pi_slacks=pi, si_slacks=si, coalition=coal)


def check_all(profile: Profile, rule: ScoringRule):
    """Verdicts for every non-winning alternative, in arrangement order.

    Returns ``(overall, verdicts)`` where ``overall`` is true when some
    coalition can manipulate and ``verdicts[q]`` treats the alternative
    ranked ``q + 2``-nd as the coalition's candidate.
    """
    _require_theorem_scope(profile, rule)
    arr = strict_arrangement(profile, rule)
    verdicts = tuple(check_theorem(profile, rule, k) for k in arr[1:])
    return any(v.manipulable for v in verdicts), verdicts


def check_plurality(profile: Profile, k: int) -> ManipVerdict:
    """Plurality shortcut: manipulable iff every gap is strictly positive."""
    from .rules import named_rule

    return check_theorem(profile, named_rule("plurality", profile.m), k)


def check_bounded(
    profile: Profile, rule: ScoringRule, k: int, spec: BoundedCoalitionSpec
) -> ManipVerdict:
    """Manipulability by an explicitly selected sub-coalition of mass ``cap``.

    The selection recruits mass ``selection[j] <= shares[j]`` from
    eligible types (those ranking ``A_k`` above the sincere winner);
    recruited mass gives ``A_k`` the top weight and nothing to rivals,
    everything else stays sincere.  The strategic inequalities then use
    ``cap`` in place of the full coalition mass.  The positional
    inequalities refer to the original sincere tally.

    For the existential question (does *some* selection work) use
    :func:`coalmanip.oracle.lp_manipulable` with the same cap.
    """
    _require_theorem_scope(profile, rule)
    _check_k(profile.m, k)
    if spec.selection is None:
        raise ValidationError(
            "check_bounded needs an explicit selection; use oracle.lp_manipulable(cap=...) "
            "for the existential form"
        )
    if not 0 < spec.cap <= 1:
        raise ValidationError(f"cap must lie in (0, 1], got {spec.cap}")
    scores = tally(profile, rule)
    arr = strict_arrangement(profile, rule)
    winner = arr[0]
    if k == winner:
        raise SameAlternativeError(f"A{k + 1} is already the sincere winner")
    coal = coalition(profile, winner, k)

    total = Fraction(0)
    for j, mass in spec.selection.items():
        if j not in coal.member_types:
            raise SelectionBoundsError(
                f"type {ranking_label(enumerate_rankings(profile.m)[j])} does not rank "
                f"A{k + 1} above the winner"
            )
        if mass < 0 or mass > profile.shares[j]:
            raise SelectionBoundsError(
                f"selection takes {mass} from type {j} which only has {profile.shares[j]}"
            )
        total += mass
    if total != spec.cap:
        raise SelectionBoundsError(f"selection masses total {total}, cap is {spec.cap}")

    pts = points_matrix(rule)
    m = profile.m
    w1 = rule.weights[0]
    gaps: dict[int, Fraction] = {i: Fraction(0) for i in range(m) if i != k}
    for j, share in enumerate(profile.shares):
        sel = spec.selection.get(j, Fraction(0))
        sincere = share - sel
        row = pts[j]
        for i in gaps:
            gaps[i] += sel * w1 + sincere * (row[k] - row[i])
    pi = tuple(scores[arr[i]] - scores[arr[i + 1]] for i in range(m - 1))
    si = si_slacks(list(gaps.values()), rule.weights, spec.cap)
    ok = all(s > 0 for s in pi) and all(s > 0 for s in si)
    members = frozenset(j for j, mass in spec.selection.items() if mass > 0)
    return ManipVerdict(
        manipulable=ok,
        pi_slacks=pi,
        si_slacks=si,
        coalition=Coalition(unifying=k, member_types=members, size=spec.cap),
    )


# --- symbolic emission -------------------------------------------------


def _coalition_mass_coeffs(m: int, winner: int, k: int) -> list[Fraction]:
    rk = enumerate_rankings(m)
    return [Fraction(1) if r.index(k) < r.index(winner) else Fraction(0) for r in rk]


def _gap_coeffs(rule: ScoringRule, winner: int, k: int, i: int) -> list[Fraction]:
    """Coefficient vector of d(A_k, A_i) as a linear form in the shares."""
    rk = enumerate_rankings(rule.m)
    w1 = rule.weights[0]
    out = []
    for r in rk:
        if r.index(k) < r.index(winner):
            out.append(w1)
        else:
            out.append(rule.weights[r.index(k)] - rule.weights[r.index(i)])
    return out


def _pi_coeffs(rule: ScoringRule, hi: int, lo: int) -> list[Fraction]:
    rk = enumerate_rankings(rule.m)
    return [rule.weights[r.index(hi)] - rule.weights[r.index(lo)] for r in rk]


def _lin(coeffs, csize_coeffs, factor: Fraction) -> list[Fraction]:
    """coeffs - factor * csize_coeffs, componentwise."""
    return [a - factor * b for a, b in zip(coeffs, csize_coeffs)]


def _combo_str(coeffs, fmt: str) -> str:
    terms = []
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        var = f"p_{{{j + 1}}}" if fmt == "latex" else f"p{j + 1}"
        if c == 1:
            terms.append(f"+ {var}")
        elif c == -1:
            terms.append(f"- {var}")
        else:
            sign = "-" if c < 0 else "+"
            mag = -c if c < 0 else c
            coef = (
                f"\\tfrac{{{mag.numerator}}}{{{mag.denominator}}}"
                if (fmt == "latex" and mag.denominator != 1)
                else str(mag)
            )
            terms.append(f"{sign} {coef} {var}")
    if not terms:
        return "0"
    first = terms[0]
    first = first[2:] if first.startswith("+ ") else "-" + first[2:]
    return " ".join([first] + terms[1:])


def _wsum_label(m: int, lo: int) -> str:
    """Pretty 'w_{lo}+...+w_m' for right-hand sides."""
    if lo > m:
        return "0"
    if lo == m:
        return f"w{m}"
    return f"(w{lo}+...+w{m})"


def emit_system(rule: ScoringRule, k: int, fmt: str = "text", expand: bool = False):
    """Emit the manipulability system for coalition ``A_{k+1}``.

    The system presumes the sincere arrangement ``A1 > A2 > ... > Am``
    and is written over the share variables ``p1..pm!`` (lexicographic
    ranking order).  ``fmt`` is "text", "latex" or "json"; text and
    latex return a string, json returns a plain dict.

    With ``expand=False`` the strategic block keeps the sorted-maxima
    operators ``M_j`` where removal of the j largest gaps is meant; the
    block's first line (sum of all gaps) and its per-rival floor lines
    are emitted as explicit linear forms.  Floor lines for rivals the
    arrangement already places below ``A_k`` are omitted, because the
    positional inequalities force them; when the trailing weights are
    all equal (plurality-like rules) every strategic line reduces to the
    per-rival floors, so exactly those are emitted, for all rivals.

    With ``expand=True`` one fully linear system is emitted per
    decreasing order of the rivals' gaps ((m-1)! systems in all), each
    extended with the gap-order constraints that select its region.
    """
    m = rule.m
    if m < 3:
        raise NotApplicableError("manipulability systems need at least three alternatives")
    _check_k(m, k)
    if k == 0:
        raise SameAlternativeError("the presumed arrangement makes A1 the winner; pick k >= 2")
    if fmt not in ("text", "latex", "json"):
        raise ValidationError(f"unknown format {fmt!r}")
    if expand and m > EXPAND_MAX_M:
        raise SizeLimitError(f"expanded emission is limited to m <= {EXPAND_MAX_M}")

    winner = 0
    rivals = [i for i in range(m) if i != k]
    cmass = _coalition_mass_coeffs(m, winner, k)
    dcoef = {i: _gap_coeffs(rule, winner, k, i) for i in rivals}
    w = rule.weights

    def tailsum(lo: int) -> Fraction:  # w_lo + ... + w_m, 1-based lo
        return sum(w[lo - 1 :], Fraction(0))

    pi_lines = [
        {
            "label": f"A{i + 1}>A{i + 2}",
            "coeffs": _pi_coeffs(rule, i, i + 1),
            "rel": ">",
            "rhs": Fraction(0),
        }
        for i in range(m - 1)
    ]

    si_lines = []
    flat_tail = all(x == w[1] for x in w[1:])
    if not expand:
        if not flat_tail:
            total = [Fraction(0)] * len(cmass)
            for i in rivals:
                total = [a + b for a, b in zip(total, dcoef[i])]
            si_lines.append(
                {
                    "label": "sum",
                    "linear": True,
                    "coeffs": _lin(total, cmass, tailsum(2)),
                    "rel": ">",
                    "rhs": Fraction(0),
                }
            )
            for ell in range(1, m - 2):
                dsum = " + ".join(f"d(A{k + 1},A{i + 1})" for i in rivals)
                msum = " + ".join(f"M{j}" for j in range(1, ell + 1))
                si_lines.append(
                    {
                        "label": f"sum-M1..M{ell}",
                        "linear": False,
                        "maxima_removed": ell,
                        "text": f"{dsum} - ({msum}) > {_wsum_label(m, ell + 2)}*c",
                        "rhs_weight_sum": tailsum(ell + 2),
                    }
                )
        floor_rivals = rivals if flat_tail else [i for i in rivals if i < k]
        for i in floor_rivals:
            si_lines.append(
                {
                    "label": f"min:d(A{k + 1},A{i + 1})",
                    "linear": True,
                    "coeffs": _lin(dcoef[i], cmass, w[-1]),
                    "rel": ">",
                    "rhs": Fraction(0),
                }
            )

    doc = {
        "m": m,
        "weights": [str(x) for x in w],
        "unifying": f"A{k + 1}",
        "arrangement": [f"A{i + 1}" for i in range(m)],
        "variables": [f"p{j + 1}" for j in range(len(cmass))],
        "simplex": {"total": "1", "nonneg": True},
        "defs": {
            "coalition_mass": [str(x) for x in cmass],
            **{f"d(A{k + 1},A{i + 1})": [str(x) for x in dcoef[i]] for i in rivals},
        },
    }

    if expand:
        from itertools import permutations as _perms

        systems = []
        for tau in _perms(rivals):
            lines_pi = [dict(x, coeffs=[str(c) for c in x["coeffs"]], rhs="0") for x in pi_lines]
            gap_order = []
            for a, b in zip(tau, tau[1:]):
                gap_order.append(
                    {
                        "label": f"d(A{k + 1},A{a + 1})>=d(A{k + 1},A{b + 1})",
                        "coeffs": [str(x - y) for x, y in zip(dcoef[a], dcoef[b])],
                        "rel": ">=",
                        "rhs": "0",
                    }
                )
            lines_si = []
            for ell in range(0, m - 1):
                dropped, kept = tau[:ell], tau[ell:]
                total = [Fraction(0)] * len(cmass)
                for i in kept:
                    total = [a + b for a, b in zip(total, dcoef[i])]
                lab = "sum" if ell == 0 else ("min" if ell == m - 2 else f"sum-M1..M{ell}")
                lines_si.append(
                    {
                        "label": lab,
                        "coeffs": [str(x) for x in _lin(total, cmass, tailsum(ell + 2))],
                        "rel": ">",
                        "rhs": "0",
                    }
                )
            systems.append(
                {
                    "order": [f"A{i + 1}" for i in tau],
                    "pi": lines_pi,
                    "gap_order": gap_order,
                    "si": lines_si,
                }
            )
        doc["systems"] = systems
    else:
        doc["pi"] = [dict(x, coeffs=[str(c) for c in x["coeffs"]], rhs="0") for x in pi_lines]
        doc["si"] = [
            dict(x, coeffs=[str(c) for c in x["coeffs"]], rhs="0") if x.get("linear") else x
            for x in si_lines
        ]

    if fmt == "json":
        return doc
    return _render_system(doc, fmt)


def _render_system(doc: dict, fmt: str) -> str:
    gt = ">" if fmt == "text" else r"\;>\;"
    lines = []
    head = (
        f"coalition {doc['unifying']} under w = ({', '.join(doc['weights'])}), "
        f"arrangement {' > '.join(doc['arrangement'])}"
    )
    if fmt == "text":
        lines.append("# " + head)
        lines.append(f"# variables p1..p{len(doc['variables'])} are ranking shares, lexicographic order")
        lines.append("[simplex] " + " + ".join(doc["variables"]) + " = 1, all p_j >= 0")
    else:
        lines.append("% " + head)
        lines.append(r"\begin{align*}")
        lines.append("&" + " + ".join(f"p_{{{j + 1}}}" for j in range(len(doc["variables"]))) + r" = 1, \quad p_j \ge 0 \\")

    def emit_block(tag, block):
        for line in block:
            if line.get("linear", True) and "coeffs" in line:
                combo = _combo_str([Fraction(c) for c in line["coeffs"]], fmt)
                rel = line.get("rel", ">")
                if fmt == "text":
                    lines.append(f"[{tag}] {line['label']}: {combo} {rel} {line['rhs']}")
                else:
                    rel_tex = r"\;\ge\;" if rel == ">=" else gt
                    lines.append(f"&{combo} {rel_tex} {line['rhs']} \\\\")
            else:
                if fmt == "text":
                    lines.append(f"[{tag}] {line['label']}: {line['text']}")
                else:
                    lines.append(f"&\\text{{{line['text']}}} \\\\")

    if "systems" in doc:
        for sysdoc in doc["systems"]:
            if fmt == "text":
                lines.append(f"--- gap order {' >= '.join(sysdoc['order'])} ---")
            else:
                lines.append(r"&\text{gap order " + ", ".join(sysdoc["order"]) + r"} \\")
            emit_block("pi", sysdoc["pi"])
            emit_block("order", sysdoc["gap_order"])
            emit_block("si", sysdoc["si"])
    else:
        emit_block("pi", doc["pi"])
        emit_block("si", doc["si"])
        if fmt == "text":
            cm = _combo_str([Fraction(c) for c in doc["defs"]["coalition_mass"]], fmt)
            lines.append(f"where c = {cm}")
            for name, coeffs in doc["defs"].items():
                if name == "coalition_mass":
                    continue
                lines.append(f"      {name} = {_combo_str([Fraction(c) for c in coeffs], fmt)}")
    if fmt == "latex":
        lines.append(r"\end{align*}")
    return "\n".join(lines)
