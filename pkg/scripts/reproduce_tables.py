#!/usr/bin/env python3
"""Reproduce the published manipulable-share tables (m = 3, 4, 5).

Writes table_m3.csv, table_m4.csv and table_m5.csv with one row per rule
(plurality, antiplurality, borda).  Default sample sizes match the
published tables (1e7 / 8e6 / 8e5); pass --samples3/4/5 to trade
precision for speed.

    python scripts/reproduce_tables.py --out-dir results --threads 4
    python scripts/reproduce_tables.py --samples3 100000 --samples4 100000 --samples5 50000
"""
import argparse
import time

from coalmanip.cli import reproduce_tables


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--mode", choices=["relabel", "filter"], default="relabel")
    ap.add_argument("--threads", type=int, default=None)
    for m in (3, 4, 5):
        ap.add_argument(f"--samples{m}", type=int, default=None)
    args = ap.parse_args()

    samples = {m: v for m in (3, 4, 5) if (v := getattr(args, f"samples{m}")) is not None}
    t0 = time.monotonic()
    paths = reproduce_tables(
        out_dir=args.out_dir, seed=args.seed, samples=samples, mode=args.mode, threads=args.threads
    )
    dt = time.monotonic() - t0
    for p in paths:
        print(p)
    print(f"done in {dt:.1f}s")


if __name__ == "__main__":
    main()
