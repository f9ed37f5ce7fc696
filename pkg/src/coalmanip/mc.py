"""Monte Carlo estimation of the manipulable share of outcomes.

Profiles are drawn uniformly from the open simplex over the m! ranking
types (the impartial anonymous-culture limit) via uniform spacings: for
dimension d, sort d-1 uniforms and take successive differences against
0 and 1.

Two estimation modes:

* ``relabel`` (default): every sample is used.  The sample's score
  order is computed, the profile is relabelled so the arrangement
  becomes A1 > ... > Am through a precomputed gather table, and the
  strategic inequalities are evaluated for each coalition position.
  Ties are broken by alternative index (they carry probability zero).

* ``filter``: only samples whose raw arrangement is already strictly
  A1 > ... > Am are evaluated, and counts are scaled by m!.  Noisier by
  a factor of about sqrt(m!), but wholly independent of the relabelling
  machinery, which makes it a useful cross-check.

The hot path runs in floats; any sample whose smallest absolute
inequality slack falls below 1e-12 is re-evaluated in exact rational
arithmetic, so boundary round-off cannot corrupt a count.

Reproducibility: the sample stream is split into fixed chunks of 2**16
rows; chunk ``ci`` draws from ``Philox(key=seed, counter=[0,0,0,ci])``.
Chunk boundaries and per-chunk integer counts depend only on ``seed``
and ``samples``, never on the worker count, so any ``threads`` value
produces bit-identical counts.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import SizeLimitError, ValidationError
from .manip import check_theorem
from .prefs import Profile, TieReport, arrangement, enumerate_rankings, tally
from .rules import ScoringRule

CHUNK = 1 << 16
BOUNDARY_TOL = 1e-12
MC_MAX_M = 6


@dataclass(frozen=True)
class EstimateResult:
    """Estimated manipulable shares with raw counts and standard errors.

    ``per_coalition[q]`` refers to the coalition unified behind the
    alternative in sincere arrangement position q+2 (0 -> runner-up).
    Shares are probabilities in [0, 1]; counts are the underlying
    integers (bit-reproducible for a fixed seed).
    """

    m: int
    weights: tuple[Fraction, ...]
    mode: str
    samples: int
    seed: int
    threads: int
    cap: Fraction | None
    total_share: float
    per_coalition: tuple[float, ...]
    total_se: float
    per_coalition_se: tuple[float, ...]
    total_count: int
    per_coalition_counts: tuple[int, ...]
    exact_rechecks: int


def sample_simplex(rng: np.random.Generator, d: int) -> np.ndarray:
    """One uniform draw from the d-simplex by sorted uniform spacings."""
    if d < 1:
        raise ValidationError("simplex dimension must be at least 1")
    u = np.sort(rng.random(d - 1))
    return np.diff(np.concatenate([[0.0], u, [1.0]]))


def _sample_block(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    u = rng.random((n, d - 1))
    u.sort(axis=1)
    zeros = np.zeros((n, 1))
    ones = np.ones((n, 1))
    return np.diff(np.concatenate([zeros, u, ones], axis=1), axis=1)


@lru_cache(maxsize=None)
def _tables(weights: tuple, m: int):
    """Float matrices shared by both modes, keyed by (weights, m)."""
    rk = enumerate_rankings(m)
    fact = len(rk)
    w = np.array([float(x) for x in weights])
    pts = np.zeros((fact, m))
    for j, r in enumerate(rk):
        for pos, a in enumerate(r):
            pts[j, a] = w[pos]
    idx = {r: j for j, r in enumerate(rk)}
    gather = np.zeros((fact, fact), dtype=np.int32)
    for pi, newlab in enumerate(rk):  # rk doubles as the list of label permutations
        for j, r in enumerate(rk):
            gather[pi, idx[tuple(newlab[a] for a in r)]] = j
    mem = np.zeros((m - 1, fact))
    gapd = np.zeros((m - 1, fact, m - 1))
    for ki, k in enumerate(range(1, m)):
        for j, r in enumerate(rk):
            member = r.index(k) < r.index(0)
            mem[ki, j] = 1.0 if member else 0.0
            col = 0
            for i in range(m):
                if i == k:
                    continue
                gapd[ki, j, col] = w[0] if member else w[r.index(k)] - w[r.index(i)]
                col += 1
    tails = np.array([w[m - r :].sum() for r in range(1, m)])
    return pts, gather, mem, gapd, tails


def _lehmer_rows(perm_rows: np.ndarray, m: int) -> np.ndarray:
    """Vectorised lexicographic index of each row permutation."""
    out = np.zeros(perm_rows.shape[0], dtype=np.int64)
    for i in range(m):
        c = np.zeros(perm_rows.shape[0], dtype=np.int64)
        for j in range(i + 1, m):
            c += perm_rows[:, j] < perm_rows[:, i]
        out = out * (m - i) + c
    return out


def _exact_row(row, weights, m, mode, cap):
    """Exact verdict vector for one sample row (used near boundaries)."""
    prof = Profile.from_floats(m, row)
    rule = ScoringRule(weights)
    arr = arrangement(tally(prof, rule))
    flags = [False] * (m - 1)
    if isinstance(arr, TieReport):
        return flags
    if mode == "filter" and arr != tuple(range(m)):
        return flags
    for q in range(1, m):
        k = arr[q]
        if cap is None:
            flags[q - 1] = check_theorem(prof, rule, k).manipulable
        else:
            flags[q - 1] = _exact_bounded(prof, rule, k, cap)
    return flags


def _exact_bounded(prof: Profile, rule: ScoringRule, k: int, cap: Fraction) -> bool:
    from .manip import coalition
    from .oracle import lp_manipulable
    from .prefs import strict_arrangement

    arr = strict_arrangement(prof, rule)
    coal = coalition(prof, arr[0], k)
    if coal.size <= cap:
        return check_theorem(prof, rule, k).manipulable
    return lp_manipulable(prof, rule, k, cap=cap).manipulable


def _run_chunk(args):
    weights, m, mode, seed, ci, nrows, cap = args
    pts, gather, mem, gapd, tails = _tables(weights, m)
    fact = pts.shape[0]
    rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, ci]))
    P = _sample_block(rng, nrows, fact)
    S = P @ pts

    if mode == "relabel":
        order = np.argsort(-S, axis=1, kind="stable")
        ssort = np.take_along_axis(S, order, axis=1)
        newlab = np.argsort(order, axis=1)
        pidx = _lehmer_rows(newlab, m)
        Q = P[np.arange(nrows)[:, None], gather[pidx]]
        included = np.ones(nrows, dtype=bool)
    else:
        Q = P
        ssort = S
        included = np.all(np.diff(S, axis=1) < 0, axis=1)

    pi_diffs = ssort[:, :-1] - ssort[:, 1:]
    pi_ok = np.all(pi_diffs > 0, axis=1)
    min_abs = np.abs(pi_diffs).min(axis=1)
    ok = np.zeros((m - 1, nrows), dtype=bool)
    for ki in range(m - 1):
        c = Q @ mem[ki]
        G = Q @ gapd[ki]
        G.sort(axis=1)
        si = np.cumsum(G, axis=1) - tails * c[:, None]
        ok[ki] = np.all(si > 0, axis=1) & pi_ok & included
        np.minimum(min_abs, np.abs(si).min(axis=1), out=min_abs)

    recheck = np.flatnonzero(min_abs < BOUNDARY_TOL)
    if cap is not None:
        # bounded manipulation implies unbounded; run the exact bounded
        # decision only where the cheap check passes or is borderline
        candidates = np.flatnonzero(ok.any(axis=0) | (min_abs < BOUNDARY_TOL))
        ok[:] = False
        for ridx in candidates:
            flags = _exact_row(P[ridx], weights, m, mode, cap)
            for ki in range(m - 1):
                ok[ki, ridx] = flags[ki]
        rechecked = len(candidates)
    else:
        for ridx in recheck:
            flags = _exact_row(P[ridx], weights, m, mode, None)
            for ki in range(m - 1):
                ok[ki, ridx] = flags[ki]
        rechecked = len(recheck)

    per = [int(ok[ki].sum()) for ki in range(m - 1)]
    total = int(ok.any(axis=0).sum())
    return ci, total, tuple(per), rechecked


def estimate_share(
    rule: ScoringRule,
    samples: int,
    seed: int,
    mode: str = "relabel",
    cap: Fraction | None = None,
    threads: int | None = None,
) -> EstimateResult:
    """Estimate the probability that a sampled outcome is manipulable.

    ``mode`` is "relabel" or "filter"; ``cap`` switches to
    bounded-coalition verdicts (participating mass at most ``cap``,
    decided exactly per positive sample, which is much slower).
    ``threads`` defaults to the MANIP_THREADS environment variable,
    then 1.  Counts are bit-identical for any thread count.
    """
    m = rule.m
    if not 3 <= m <= MC_MAX_M:
        raise SizeLimitError(f"estimation supports 3 <= m <= {MC_MAX_M}, got m={m}")
    if mode not in ("relabel", "filter"):
        raise ValidationError(f"unknown mode {mode!r}")
    if not isinstance(samples, int) or samples <= 0:
        raise ValidationError("samples must be a positive integer")
    if cap is not None:
        cap = Fraction(cap)
        if not 0 < cap <= 1:
            raise ValidationError(f"cap must lie in (0, 1], got {cap}")
    if threads is None:
        threads = int(os.environ.get("MANIP_THREADS", "1"))
    if threads < 1:
        raise ValidationError("threads must be at least 1")

    chunks = []
    start = 0
    ci = 0
    while start < samples:
        nrows = min(CHUNK, samples - start)
        chunks.append((rule.weights, m, mode, seed, ci, nrows, cap))
        start += nrows
        ci += 1

    total = 0
    per = [0] * (m - 1)
    rechecks = 0
    if threads == 1:
        results = map(_run_chunk, chunks)
    else:
        pool = ProcessPoolExecutor(max_workers=threads)
        results = pool.map(_run_chunk, chunks)
    for _, t, p, r in results:
        total += t
        rechecks += r
        for ki in range(m - 1):
            per[ki] += p[ki]
    if threads != 1:
        pool.shutdown()

    n = samples
    if mode == "relabel":
        scale = 1.0
    else:
        scale = float(math.factorial(m))

    def est(cnt):
        q = cnt / n
        return scale * q, scale * math.sqrt(q * (1.0 - q) / n)

    tot_share, tot_se = est(total)
    pc = [est(c) for c in per]
    return EstimateResult(
        m=m,
        weights=rule.weights,
        mode=mode,
        samples=samples,
        seed=seed,
        threads=threads,
        cap=cap,
        total_share=tot_share,
        per_coalition=tuple(x for x, _ in pc),
        total_se=tot_se,
        per_coalition_se=tuple(s for _, s in pc),
        total_count=total,
        per_coalition_counts=tuple(per),
        exact_rechecks=rechecks,
    )
