"""Independent decision oracles for coalition manipulability.

Two routes that share no logic with the inequality checker:

* :func:`lp_manipulable` solves, in exact rational arithmetic, the
  linear program "choose how the coalition mass distributes over the
  rankings that put A_k first so as to maximise A_k's worst margin".
  The optimum ``delta*`` is positive exactly when a manipulation
  exists.  An optional ``cap`` bounds the participating mass and turns
  the recruited selection into additional variables.

* :func:`finite_brute_force` enumerates, for an integer electorate,
  every anonymous joint strategy of the coalition (multisets of
  A_k-first ballots) and reports the first one that makes A_k the
  strict unique winner.

Restricting strategies to A_k-first ballots loses nothing: moving A_k
to the top of any ballot weakly raises every margin of A_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

from .errors import (
    InfeasibleError,
    SameAlternativeError,
    SizeLimitError,
    ValidationError,
)
from .manip import _require_theorem_scope, coalition
from .prefs import IntProfile, Profile, enumerate_rankings, points_matrix, strict_arrangement, tally
from .rules import ScoringRule

DEFAULT_STRATEGY_LIMIT = 10_000_000


@dataclass(frozen=True)
class OracleResult:
    """LP outcome: best attainable worst margin and a strategy attaining it."""

    delta: Fraction
    manipulable: bool
    strategy: tuple[tuple[Fraction, tuple[int, ...]], ...]
    selection: dict[int, Fraction] | None = None
    cap: Fraction | None = None


@dataclass(frozen=True)
class FiniteResult:
    manipulable: bool
    strategy: tuple[tuple[int, tuple[int, ...]], ...] | None
    selection: dict[int, int] | None
    strategies_tried: int


class _Unbounded(Exception):
    pass


def _simplex_max(c, A, b):
    """Maximise ``c @ x`` over ``A x = b, x >= 0`` with exact Fractions.

    Two-phase tableau method with Bland's rule throughout, so it cannot
    cycle.  Returns ``(value, x)``; raises InfeasibleError when the
    feasible region is empty and _Unbounded when the objective is.
    """
    nrows, ncols = len(A), len(c)
    T = []
    for row, bi in zip(A, b):
        r = list(row) + [bi]
        if bi < 0:
            r = [-x for x in r]
        T.append(r)
    for i in range(nrows):
        art = [Fraction(0)] * nrows
        art[i] = Fraction(1)
        T[i] = T[i][:ncols] + art + [T[i][ncols]]
    basis = list(range(ncols, ncols + nrows))
    ncols_total = ncols + nrows

    def pivot(leave, enter):
        piv = T[leave][enter]
        T[leave] = [x / piv for x in T[leave]]
        for i in range(nrows):
            if i != leave and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * d for a, d in zip(T[i], T[leave])]
        basis[leave] = enter

    def run(costs, allowed):
        while True:
            cb = [costs[bv] for bv in basis]
            enter = -1
            for j in range(allowed):
                if j in basis:
                    continue
                rc = costs[j] - sum(cb[i] * T[i][j] for i in range(nrows))
                if rc > 0:
                    enter = j
                    break
            if enter < 0:
                return
            leave, best = -1, None
            for i in range(nrows):
                if T[i][enter] > 0:
                    ratio = T[i][-1] / T[i][enter]
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        best, leave = ratio, i
            if leave < 0:
                raise _Unbounded
            pivot(leave, enter)

    phase1 = [Fraction(0)] * ncols + [Fraction(-1)] * nrows
    run(phase1, ncols_total)
    if any(basis[i] >= ncols and T[i][-1] != 0 for i in range(nrows)):
        raise InfeasibleError("constraint system has no non-negative solution")
    for i in range(nrows):
        # drive leftover zero-value artificials out of the basis where possible
        if basis[i] >= ncols:
            enter = next((j for j in range(ncols) if T[i][j] != 0), None)
            if enter is not None:
                pivot(i, enter)
    run(list(c) + [Fraction(0)] * nrows, ncols)
    x = [Fraction(0)] * ncols
    for i, bv in enumerate(basis):
        if bv < ncols:
            x[bv] = T[i][-1]
    return sum(ci * xi for ci, xi in zip(c, x)), x


def _ak_first(m: int, k: int):
    return [(k,) + rest for rest in permutations([i for i in range(m) if i != k])]


def lp_manipulable(
    profile: Profile, rule: ScoringRule, k: int, cap: Fraction | None = None
) -> OracleResult:
    """Exact LP oracle: can a coalition for ``A_k`` overturn the outcome?

    Without ``cap`` the full coalition (every type ranking ``A_k`` above
    the sincere winner) recasts its mass over A_k-first ballots.  With
    ``cap`` the recruited mass is a variable selection of eligible types
    totalling exactly ``cap`` (InfeasibleError when the eligible mass
    falls short); the residual stays sincere.  ``delta*`` is the best
    attainable minimum margin of ``A_k`` over its rivals; manipulation
    exists iff ``delta* > 0``.
    """
    _require_theorem_scope(profile, rule)
    m = profile.m
    arr = strict_arrangement(profile, rule)
    winner = arr[0]
    if k == winner:
        raise SameAlternativeError(f"A{k + 1} is already the sincere winner")
    coal = coalition(profile, winner, k)
    strat = _ak_first(m, k)
    pts = points_matrix(rule)
    rk = enumerate_rankings(m)
    w1 = rule.weights[0]
    rivals = [i for i in range(m) if i != k]

    def strat_points(r, i):
        return rule.weights[r.index(i)]

    if cap is None:
        mass = coal.size
        base = [Fraction(0)] * m  # sincere non-members only
        for j, share in enumerate(profile.shares):
            if j in coal.member_types or share == 0:
                continue
            for i in range(m):
                base[i] += share * pts[j][i]
        nx = len(strat)
        nv = nx + 2 + len(rivals)  # x, u, v, slacks
        A, b = [], []
        A.append([Fraction(1)] * nx + [Fraction(0)] * (2 + len(rivals)))
        b.append(mass)
        for idx, i in enumerate(rivals):
            row = [strat_points(r, i) for r in strat]
            row += [Fraction(1), Fraction(-1)]
            row += [Fraction(1) if q == idx else Fraction(0) for q in range(len(rivals))]
            A.append(row)
            b.append(base[k] + w1 * mass - base[i])
        cvec = [Fraction(0)] * nx + [Fraction(1), Fraction(-1)] + [Fraction(0)] * len(rivals)
        value, x = _simplex_max(cvec, A, b)
        strategy = tuple((x[r], strat[r]) for r in range(nx) if x[r] != 0)
        return OracleResult(delta=value, manipulable=value > 0, strategy=strategy, cap=None)

    if not 0 < cap <= 1:
        raise ValidationError(f"cap must lie in (0, 1], got {cap}")
    if coal.size < cap:
        raise InfeasibleError(
            f"eligible coalition mass {coal.size} is smaller than the cap {cap}"
        )
    eligible = sorted(coal.member_types)
    B = tally(profile, rule)
    nx, ne, nr = len(strat), len(eligible), len(rivals)
    # columns: x (nx), tilde (ne), u, v, margin slacks (nr), bound slacks (ne)
    nv = nx + ne + 2 + nr + ne
    A, b = [], []
    row = [Fraction(0)] * nv
    for r in range(nx):
        row[r] = Fraction(1)
    A.append(row)
    b.append(Fraction(cap))
    row = [Fraction(0)] * nv
    for e in range(ne):
        row[nx + e] = Fraction(1)
    A.append(row)
    b.append(Fraction(cap))
    for e, j in enumerate(eligible):
        row = [Fraction(0)] * nv
        row[nx + e] = Fraction(1)
        row[nx + ne + 2 + nr + e] = Fraction(1)
        A.append(row)
        b.append(profile.shares[j])
    for idx, i in enumerate(rivals):
        row = [Fraction(0)] * nv
        for r, sr in enumerate(strat):
            row[r] = strat_points(sr, i)
        for e, j in enumerate(eligible):
            row[nx + e] = pts[j][k] - pts[j][i]
        row[nx + ne] = Fraction(1)
        row[nx + ne + 1] = Fraction(-1)
        row[nx + ne + 2 + idx] = Fraction(1)
        A.append(row)
        b.append(B[k] - B[i] + w1 * cap)
    cvec = [Fraction(0)] * nv
    cvec[nx + ne] = Fraction(1)
    cvec[nx + ne + 1] = Fraction(-1)
    value, x = _simplex_max(cvec, A, b)
    strategy = tuple((x[r], strat[r]) for r in range(nx) if x[r] != 0)
    selection = {j: x[nx + e] for e, j in enumerate(eligible) if x[nx + e] != 0}
    return OracleResult(
        delta=value, manipulable=value > 0, strategy=strategy, selection=selection, cap=cap
    )


def _compositions(total: int, bounds: list[int]):
    """All integer vectors 0 <= t <= bounds with sum(t) == total."""
    if not bounds:
        if total == 0:
            yield ()
        return
    head = bounds[0]
    for t0 in range(min(head, total), -1, -1):
        for rest in _compositions(total - t0, bounds[1:]):
            yield (t0,) + rest


def _count_compositions(total: int, bounds: list[int]) -> int:
    table = {0: 1}
    for bnd in bounds:
        new = {}
        for s, ways in table.items():
            for t in range(0, min(bnd, total - s) + 1):
                new[s + t] = new.get(s + t, 0) + ways
        table = new
    return table.get(total, 0)


def finite_brute_force(
    int_profile: IntProfile,
    rule: ScoringRule,
    k: int,
    cap: int | None = None,
    limit: int = DEFAULT_STRATEGY_LIMIT,
) -> FiniteResult:
    """Exhaustive strategy search for an integer electorate.

    Enumerates every anonymous coalition strategy: a multiset of
    A_k-first ballots cast by the participating members, whose count is
    the full coalition (or ``min(cap, coalition)`` when ``cap`` is
    given; with a cap every selection of participating members is tried
    as well).  Success requires ``A_k`` to become the strict unique
    winner.  SizeLimitError when the enumeration would exceed ``limit``
    candidate strategies.
    """
    profile = int_profile.to_profile()
    _require_theorem_scope(profile, rule)
    m = int_profile.m
    arr = strict_arrangement(profile, rule)
    winner = arr[0]
    if k == winner:
        raise SameAlternativeError(f"A{k + 1} is already the sincere winner")
    if cap is not None and (not isinstance(cap, int) or cap < 0):
        raise ValidationError(f"cap must be a non-negative integer, got {cap!r}")
    rk = enumerate_rankings(m)
    eligible = sorted(j for j in range(len(rk)) if rk[j].index(k) < rk[j].index(winner))
    counts = int_profile.counts
    csize = sum(counts[j] for j in eligible)
    take = csize if cap is None else min(cap, csize)

    scale = math.lcm(*(w.denominator for w in rule.weights))
    iw = [int(w * scale) for w in rule.weights]
    ipts = [[0] * m for _ in rk]
    for j, r in enumerate(rk):
        for pos, a in enumerate(r):
            ipts[j][a] = iw[pos]
    strat = _ak_first(m, k)
    spts = [[iw[r.index(i)] for i in range(m)] for r in strat]

    n_strategies = math.comb(take + len(strat) - 1, len(strat) - 1)
    if cap is None or take == csize:
        selections = [tuple(counts[j] for j in eligible)]
    else:
        bounds = [counts[j] for j in eligible]
        n_sel = _count_compositions(take, bounds)
        if n_sel * n_strategies > limit:
            raise SizeLimitError(
                f"{n_sel} selections x {n_strategies} strategies exceeds the limit {limit}"
            )
        selections = _compositions(take, bounds)
    if n_strategies > limit:
        raise SizeLimitError(f"{n_strategies} strategies exceeds the limit {limit}")

    rivals = [i for i in range(m) if i != k]
    sincere_base = [0] * m
    for j, cnt in enumerate(counts):
        if cnt == 0 or j in eligible:
            continue
        for i in range(m):
            sincere_base[i] += cnt * ipts[j][i]

    tried = 0
    for sel in selections:
        base = list(sincere_base)
        for e, j in enumerate(eligible):
            stay = counts[j] - sel[e]
            if stay:
                for i in range(m):
                    base[i] += stay * ipts[j][i]
        target = base[k] + iw[0] * take  # A_k's score is strategy-independent
        for combo in _compositions(take, [take] * len(strat)):
            tried += 1
            ok = True
            for i in rivals:
                si = base[i]
                for r, cnt in enumerate(combo):
                    if cnt:
                        si += cnt * spts[r][i]
                if si >= target:
                    ok = False
                    break
            if ok:
                strategy = tuple((cnt, strat[r]) for r, cnt in enumerate(combo) if cnt)
                selection = {j: sel[e] for e, j in enumerate(eligible) if sel[e]}
                return FiniteResult(
                    manipulable=True, strategy=strategy, selection=selection, strategies_tried=tried
                )
    return FiniteResult(manipulable=False, strategy=None, selection=None, strategies_tried=tried)
