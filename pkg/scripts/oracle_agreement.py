#!/usr/bin/env python3
"""Cross-check the inequality checker against the exact LP oracle.

Draws random rational profiles for every rule in a small corpus (the three
named rules plus seeded random weight vectors), decides each non-winning
coalition twice through code paths that share nothing, builds a witness
for every manipulable pair, and re-tallies it.  Any disagreement or
witness failure is printed with the offending profile.

    python scripts/oracle_agreement.py --alts 3 4 --profiles 500 --seed 2
"""
import argparse
import random
import sys
import time

from coalmanip import build_witness, check_theorem, lp_manipulable, validate_witness
from coalmanip.errors import TiedArrangementError
from coalmanip.prefs import Profile, strict_arrangement
from coalmanip.rules import ScoringRule, named_rule

from fractions import Fraction
from math import factorial


def random_profile(rng: random.Random, m: int, denominator: int) -> Profile:
    cells = [0] * factorial(m)
    for _ in range(denominator):
        cells[rng.randrange(len(cells))] += 1
    return Profile(m, tuple(Fraction(c, denominator) for c in cells))


def random_weights(rng: random.Random, m: int) -> ScoringRule:
    while True:
        vals = sorted((Fraction(rng.randrange(0, 13), 12) for _ in range(m)), reverse=True)
        if vals[0] > vals[-1]:
            return ScoringRule(tuple(vals))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alts", type=int, nargs="+", default=[3, 4])
    ap.add_argument("--profiles", type=int, default=500, help="profiles per (m, rule) combo")
    ap.add_argument("--random-rules", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--denominator", type=int, default=60)
    args = ap.parse_args()

    bad = 0
    for m in args.alts:
        rules = [named_rule(n, m) for n in ("plurality", "borda", "antiplurality")]
        rrng = random.Random(args.seed + m)
        rules += [random_weights(rrng, m) for _ in range(args.random_rules)]
        for ri, rule in enumerate(rules):
            rng = random.Random(args.seed * 1000 + m * 10 + ri)
            pairs = agree = witnesses = 0
            t0 = time.monotonic()
            done = 0
            while done < args.profiles:
                prof = random_profile(rng, m, args.denominator)
                try:
                    arr = strict_arrangement(prof, rule)
                except TiedArrangementError:
                    continue
                done += 1
                for k in arr[1:]:
                    pairs += 1
                    a = check_theorem(prof, rule, k).manipulable
                    b = lp_manipulable(prof, rule, k).manipulable
                    if a == b:
                        agree += 1
                    else:
                        bad += 1
                        print(f"DISAGREE m={m} rule={ri} k=A{k + 1} checker={a} lp={b}")
                        print(f"  profile: {prof.to_dict(sparse=True)}")
                    if a:
                        w = build_witness(prof, rule, k)
                        if validate_witness(prof, rule, k, w):
                            witnesses += 1
                        else:
                            bad += 1
                            print(f"WITNESS FAIL m={m} rule={ri} k=A{k + 1}")
                            print(f"  profile: {prof.to_dict(sparse=True)}")
            dt = time.monotonic() - t0
            label = ",".join(str(w) for w in rule.weights)
            print(
                f"m={m} rule=({label}): {pairs} pairs, {agree} agree, "
                f"{witnesses} witnesses validated, {dt:.1f}s"
            )
    print("all consistent" if bad == 0 else f"{bad} inconsistencies")
    return 0 if bad == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
