"""The ``manip`` command line tool.

Subcommands: check, witness, estimate, emit-system, compare, finite and
tables.  Exit codes: 0 on success, 2 for invalid input (bad weights,
malformed profiles, inapplicable requests), 3 when a hard size guard
refuses the computation.

A plain-text config file (``--config``, lines of ``key = value``) can
supply defaults for options such as seed, samples, threads or mode;
explicit flags always win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import (
    CoalmanipError,
    InfeasibleError,
    NotManipulableError,
    SizeLimitError,
    ValidationError,
)
from .manip import BoundedCoalitionSpec, check_all, check_bounded, check_theorem, emit_system
from .mc import estimate_share
from .oracle import finite_brute_force, lp_manipulable
from .prefs import (
    IntProfile,
    Profile,
    enumerate_rankings,
    parse_ranking_label,
    ranking_index,
    ranking_label,
    strict_arrangement,
    tally,
)
from .rules import ScoringRule, as_fraction, make_rule, named_rule
from .witness import build_witness, validate_witness

VERSION_TEXT = (
    f"manip {__version__}\n"
    "ranking order convention: the m! strict rankings are enumerated "
    "lexicographically, so the first is A1>A2>...>Am and the last is its "
    "reversal; JSON 'shares' arrays follow that order, and emitted systems "
    "name the corresponding variables p1..pm!."
)


@dataclass(frozen=True)
class RunConfig:
    """A resolved invocation: subcommand plus effective option values."""

    command: str
    options: dict


def _read_config(path: str) -> dict:
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, val = line.split("=", 1)
        cfg[key.strip().replace("-", "_")] = val.strip()
    return cfg


def _resolve(args, cfg: dict, key: str, conv, default):
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in cfg:
        return conv(cfg[key])
    return default


def _rule_from(args, cfg, m_hint: int | None = None) -> tuple[ScoringRule, str]:
    weights = _resolve(args, cfg, "weights", str, None)
    name = _resolve(args, cfg, "rule", str, None)
    if weights and name:
        raise ValidationError("give either --weights or --rule, not both")
    if weights:
        rule = make_rule([w for w in weights.split(",") if w.strip() != ""])
        return rule, " ".join(str(w) for w in rule.weights)
    if name:
        alts = _resolve(args, cfg, "alts", int, m_hint)
        if alts is None:
            raise ValidationError("--rule needs --alts (number of alternatives)")
        return named_rule(name, int(alts)), name
    raise ValidationError("no rule given; use --weights or --rule/--alts")


def _profile_from(args, cfg) -> tuple[Profile, IntProfile | None]:
    path = _resolve(args, cfg, "profile", str, None)
    counts = _resolve(args, cfg, "counts", str, None)
    if path and counts:
        raise ValidationError("give either --profile or --counts, not both")
    if path:
        return Profile.from_json(Path(path).read_text()), None
    if counts:
        vals = [int(x) for x in counts.split(",")]
        fact = len(vals)
        m = next((mm for mm in range(2, 9) if math.factorial(mm) == fact), None)
        if m is None:
            raise ValidationError(f"--counts has {fact} entries, not a factorial")
        ip = IntProfile(m, tuple(vals))
        return ip.to_profile(), ip
    raise ValidationError("no profile given; use --profile FILE or --counts LIST")


def _coalition_index(args, cfg, m: int) -> int | None:
    k = _resolve(args, cfg, "coalition", int, None)
    if k is None:
        return None
    k = int(k)
    if not 1 <= k <= m:
        raise ValidationError(f"--coalition must name an alternative 1..{m}, got {k}")
    return k - 1


def _parse_selection(text: str, m: int) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValidationError(f"selection entry {part!r} is not 'ranking=mass'")
        label, mass = part.rsplit("=", 1)
        out[ranking_index(parse_ranking_label(label.strip(), m))] = as_fraction(mass)
    if not out:
        raise ValidationError("empty selection")
    return out


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _verdict_dict(v, m: int) -> dict:
    return {
        "unifying": f"A{v.coalition.unifying + 1}",
        "manipulable": v.manipulable,
        "coalition_mass": str(v.coalition.size),
        "member_types": [
            ranking_label(enumerate_rankings(m)[j]) for j in sorted(v.coalition.member_types)
        ],
        "pi_slacks": [str(s) for s in v.pi_slacks],
        "si_slacks": [str(s) for s in v.si_slacks],
    }


def _cmd_check(args, cfg) -> int:
    profile, _ = _profile_from(args, cfg)
    rule, _ = _rule_from(args, cfg, m_hint=profile.m)
    k = _coalition_index(args, cfg, profile.m)
    cap = _resolve(args, cfg, "cap", as_fraction, None)
    selection = _resolve(args, cfg, "selection", str, None)
    as_json = bool(getattr(args, "json", False))
    scores = tally(profile, rule)
    arr = strict_arrangement(profile, rule)
    head = {
        "weights": [str(w) for w in rule.weights],
        "tally": [str(s) for s in scores],
        "arrangement": [f"A{a + 1}" for a in arr],
    }

    if cap is not None and selection is not None:
        if k is None:
            raise ValidationError("bounded check needs --coalition")
        sel = _parse_selection(selection, profile.m)
        v = check_bounded(profile, rule, k, BoundedCoalitionSpec(cap=as_fraction(cap), selection=sel))
        body = {**head, "cap": str(cap), **_verdict_dict(v, profile.m)}
    elif cap is not None:
        if k is None:
            raise ValidationError("bounded check needs --coalition")
        res = lp_manipulable(profile, rule, k, cap=as_fraction(cap))
        body = {
            **head,
            "cap": str(cap),
            "unifying": f"A{k + 1}",
            "manipulable": res.manipulable,
            "delta": str(res.delta),
            "strategy": [{"ranking": ranking_label(r), "mass": str(x)} for x, r in res.strategy],
            "selection": {
                ranking_label(enumerate_rankings(profile.m)[j]): str(x)
                for j, x in (res.selection or {}).items()
            },
        }
    elif k is not None:
        v = check_theorem(profile, rule, k)
        body = {**head, **_verdict_dict(v, profile.m)}
    else:
        overall, verdicts = check_all(profile, rule)
        body = {
            **head,
            "manipulable": overall,
            "coalitions": [_verdict_dict(v, profile.m) for v in verdicts],
        }

    if as_json:
        _emit(json.dumps(body, indent=2), getattr(args, "out", None))
    else:
        _emit("\n".join(_render_check_text(body)), getattr(args, "out", None))
    return 0


def _render_check_text(body: dict) -> list[str]:
    lines = [
        "arrangement: " + " > ".join(body["arrangement"]),
        "tally:       " + ", ".join(body["tally"]),
    ]
    if "cap" in body:
        lines.append(f"cap: {body['cap']}")
    if "coalitions" in body:
        for v in body["coalitions"]:
            lines.append(
                f"coalition {v['unifying']}: mass {v['coalition_mass']}, manipulable: "
                f"{'yes' if v['manipulable'] else 'no'}"
            )
        lines.append(f"manipulable overall: {'yes' if body['manipulable'] else 'no'}")
    else:
        lines.append(f"coalition {body['unifying']}" + (f" mass {body['coalition_mass']}" if "coalition_mass" in body else ""))
        if "pi_slacks" in body:
            lines.append("pi slacks: " + ", ".join(body["pi_slacks"]))
            lines.append("si slacks: " + ", ".join(body["si_slacks"]))
        if "delta" in body:
            lines.append(f"best worst-margin delta: {body['delta']}")
            for s in body.get("strategy", []):
                lines.append(f"  {s['mass']} on {s['ranking']}")
        lines.append(f"manipulable: {'yes' if body['manipulable'] else 'no'}")
    return lines


def _cmd_witness(args, cfg) -> int:
    profile, _ = _profile_from(args, cfg)
    rule, _ = _rule_from(args, cfg, m_hint=profile.m)
    k = _coalition_index(args, cfg, profile.m)
    if k is None:
        raise ValidationError("witness needs --coalition")
    eps = _resolve(args, cfg, "epsilon", as_fraction, None)
    w = build_witness(profile, rule, k, epsilon=as_fraction(eps) if eps is not None else None)
    ok = validate_witness(profile, rule, k, w)
    body = {**w.to_dict(), "validated": ok, "unifying": f"A{k + 1}"}
    if getattr(args, "json", False):
        _emit(json.dumps(body, indent=2), getattr(args, "out", None))
    else:
        lines = [f"strategic ballot for coalition A{k + 1}:"]
        for br in body["branches"]:
            lines.append(f"  {br['mass']} on {br['ranking']}")
        lines.append("trace:")
        for s in body["trace"]:
            if s["case"] == "a":
                lines.append(f"  {s['rival']}: case a (first free position)")
            else:
                lines.append(
                    f"  {s['rival']}: case b, sigma={s['sigma']}, t={s['t']}, "
                    f"epsilon={s['epsilon']}, merged weight {s['merged_weight']}"
                )
        lines.append("final tally: " + ", ".join(body["final_tally"]))
        lines.append(f"validated: {'yes' if ok else 'no'}")
        _emit("\n".join(lines), getattr(args, "out", None))
    return 0


def _estimate_csv_rows(results, labels) -> str:
    buf = io.StringIO()
    m = results[0].m
    writer = csv.writer(buf)
    header = (
        ["rule", "m", "mode", "samples", "seed", "total_share"]
        + [f"share_coal_{q}" for q in range(2, m + 1)]
        + ["total_stderr"]
        + [f"stderr_coal_{q}" for q in range(2, m + 1)]
    )
    writer.writerow(header)
    for res, label in zip(results, labels):
        writer.writerow(
            [label, res.m, res.mode, res.samples, res.seed, f"{res.total_share:.8f}"]
            + [f"{x:.8f}" for x in res.per_coalition]
            + [f"{res.total_se:.8f}"]
            + [f"{x:.8f}" for x in res.per_coalition_se]
        )
    return buf.getvalue()


def _cmd_estimate(args, cfg) -> int:
    rule, label = _rule_from(args, cfg)
    samples = int(_resolve(args, cfg, "samples", int, 100_000))
    seed = int(_resolve(args, cfg, "seed", int, 0))
    mode = _resolve(args, cfg, "mode", str, "relabel")
    threads = _resolve(args, cfg, "threads", int, None)
    cap = _resolve(args, cfg, "cap", as_fraction, None)
    res = estimate_share(
        rule,
        samples,
        seed,
        mode=mode,
        cap=as_fraction(cap) if cap is not None else None,
        threads=int(threads) if threads is not None else None,
    )
    out = getattr(args, "out", None)
    if getattr(args, "json", False):
        body = {
            "rule": label,
            "m": res.m,
            "mode": res.mode,
            "samples": res.samples,
            "seed": res.seed,
            "threads": res.threads,
            "cap": str(res.cap) if res.cap is not None else None,
            "total_share": res.total_share,
            "per_coalition": list(res.per_coalition),
            "total_se": res.total_se,
            "per_coalition_se": list(res.per_coalition_se),
            "total_count": res.total_count,
            "per_coalition_counts": list(res.per_coalition_counts),
            "exact_rechecks": res.exact_rechecks,
        }
        _emit(json.dumps(body, indent=2), out)
    elif out and out.endswith(".csv"):
        Path(out).write_text(_estimate_csv_rows([res], [label]))
    else:
        lines = [
            f"rule {label} (m={res.m}), mode={res.mode}, samples={res.samples}, seed={res.seed}",
            f"total manipulable share: {100 * res.total_share:.3f}% (se {100 * res.total_se:.3f} pp)",
        ]
        for q, (x, s) in enumerate(zip(res.per_coalition, res.per_coalition_se), start=2):
            lines.append(f"  coalition at position {q}: {100 * x:.3f}% (se {100 * s:.3f} pp)")
        _emit("\n".join(lines), out)
    return 0


def _cmd_emit_system(args, cfg) -> int:
    rule, _ = _rule_from(args, cfg)
    k = _coalition_index(args, cfg, rule.m)
    if k is None:
        raise ValidationError("emit-system needs --coalition")
    fmt = _resolve(args, cfg, "format", str, "text")
    doc = emit_system(rule, k, fmt=fmt, expand=bool(getattr(args, "expand", False)))
    text = json.dumps(doc, indent=2) if fmt == "json" else doc
    _emit(text, getattr(args, "out", None))
    return 0


def _random_rational_profile(rng: random.Random, m: int, denominator: int) -> Profile:
    fact = math.factorial(m)
    cells = [0] * fact
    for _ in range(denominator):
        cells[rng.randrange(fact)] += 1
    return Profile(m, tuple(Fraction(c, denominator) for c in cells))


def _cmd_compare(args, cfg) -> int:
    rule, label = _rule_from(args, cfg)
    n = int(_resolve(args, cfg, "profiles", int, 200))
    seed = int(_resolve(args, cfg, "seed", int, 0))
    denom = int(_resolve(args, cfg, "denominator", int, 60))
    rng = random.Random(seed)
    from .prefs import TieReport, arrangement as _arrangement

    tested = pairs = disagreements = 0
    details = []
    while tested < n:
        prof = _random_rational_profile(rng, rule.m, denom)
        arr = _arrangement(tally(prof, rule))
        if isinstance(arr, TieReport):
            continue
        tested += 1
        for k in arr[1:]:
            pairs += 1
            a = check_theorem(prof, rule, k).manipulable
            b = lp_manipulable(prof, rule, k).manipulable
            if a != b:
                disagreements += 1
                details.append((prof.to_dict(sparse=True), k, a, b))
    lines = [
        f"rule {label}: {tested} profiles, {pairs} (profile, coalition) pairs",
        f"inequality checker vs LP oracle disagreements: {disagreements}",
    ]
    for prof_d, k, a, b in details[:10]:
        lines.append(f"  DISAGREE k=A{k + 1} checker={a} oracle={b} profile={prof_d}")
    _emit("\n".join(lines), getattr(args, "out", None))
    return 0


def _cmd_finite(args, cfg) -> int:
    _, ip = _profile_from(args, cfg)
    if ip is None:
        raise ValidationError("finite needs --counts")
    rule, _ = _rule_from(args, cfg, m_hint=ip.m)
    k = _coalition_index(args, cfg, ip.m)
    if k is None:
        raise ValidationError("finite needs --coalition")
    cap = _resolve(args, cfg, "cap", int, None)
    limit = int(_resolve(args, cfg, "limit", int, 10_000_000))
    res = finite_brute_force(ip, rule, k, cap=int(cap) if cap is not None else None, limit=limit)
    if getattr(args, "json", False):
        body = {
            "manipulable": res.manipulable,
            "strategies_tried": res.strategies_tried,
            "strategy": (
                [{"count": c, "ranking": ranking_label(r)} for c, r in res.strategy]
                if res.strategy
                else None
            ),
            "selection": (
                {ranking_label(enumerate_rankings(ip.m)[j]): c for j, c in res.selection.items()}
                if res.selection
                else None
            ),
        }
        _emit(json.dumps(body, indent=2), getattr(args, "out", None))
    else:
        lines = [f"tried {res.strategies_tried} strategies"]
        if res.manipulable:
            lines.append("manipulable: yes")
            for c, r in res.strategy:
                lines.append(f"  {c} ballots on {ranking_label(r)}")
        else:
            lines.append("manipulable: no")
        _emit("\n".join(lines), getattr(args, "out", None))
    return 0


TABLE_RULES = ("plurality", "antiplurality", "borda")
TABLE_DEFAULT_SAMPLES = {3: 10_000_000, 4: 8_000_000, 5: 800_000}


def reproduce_tables(
    out_dir: str = ".",
    seed: int = 1,
    samples: dict[int, int] | None = None,
    mode: str = "relabel",
    threads: int | None = None,
) -> list[Path]:
    """Estimate the published manipulable-share tables (m = 3, 4, 5).

    Writes table_m3.csv, table_m4.csv and table_m5.csv into ``out_dir``
    with one row per rule (plurality, antiplurality, borda) and returns
    the paths.  Shares are written as probabilities in [0, 1].
    """
    samples = {**TABLE_DEFAULT_SAMPLES, **(samples or {})}
    outd = Path(out_dir)
    outd.mkdir(parents=True, exist_ok=True)
    paths = []
    for m in (3, 4, 5):
        results = [
            estimate_share(named_rule(name, m), samples[m], seed, mode=mode, threads=threads)
            for name in TABLE_RULES
        ]
        path = outd / f"table_m{m}.csv"
        path.write_text(_estimate_csv_rows(results, list(TABLE_RULES)))
        paths.append(path)
    return paths


def _cmd_tables(args, cfg) -> int:
    out_dir = _resolve(args, cfg, "out_dir", str, ".")
    seed = int(_resolve(args, cfg, "seed", int, 1))
    mode = _resolve(args, cfg, "mode", str, "relabel")
    threads = _resolve(args, cfg, "threads", int, None)
    samples = {}
    for m in (3, 4, 5):
        val = _resolve(args, cfg, f"samples{m}", int, None)
        if val is not None:
            samples[m] = int(val)
    paths = reproduce_tables(
        out_dir=out_dir,
        seed=seed,
        samples=samples,
        mode=mode,
        threads=int(threads) if threads is not None else None,
    )
    for p in paths:
        print(p)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="manip", description=__doc__)
    p.add_argument("--version", action="version", version=VERSION_TEXT)
    p.add_argument("--config", help="key = value file supplying option defaults")
    sub = p.add_subparsers(dest="command", required=True)

    def add_rule_opts(sp):
        sp.add_argument("--weights", help="comma-separated rational weights, e.g. 1,0.9,0")
        sp.add_argument("--rule", help="named rule: plurality, borda, antiplurality")
        sp.add_argument("--alts", type=int, help="number of alternatives for --rule")

    def add_profile_opts(sp):
        sp.add_argument("--profile", help="profile JSON file (dense or sparse)")
        sp.add_argument("--counts", help="comma-separated ballot counts, length m!")

    def add_common(sp):
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--json", action="store_true", help="JSON output")

    sp = sub.add_parser("check", help="decide manipulability of a profile")
    add_rule_opts(sp)
    add_profile_opts(sp)
    sp.add_argument("--coalition", type=int, help="1-based alternative the coalition backs")
    sp.add_argument("--cap", help="bounded-coalition mass cap (rational)")
    sp.add_argument("--selection", help="explicit recruits: 'A2>A1>A3=1/9,...' (with --cap)")
    add_common(sp)

    sp = sub.add_parser("witness", help="construct explicit strategic ballots")
    add_rule_opts(sp)
    add_profile_opts(sp)
    sp.add_argument("--coalition", type=int)
    sp.add_argument("--epsilon", help="override the automatic safety margin (rational)")
    add_common(sp)

    sp = sub.add_parser("estimate", help="Monte Carlo manipulable-share estimate")
    add_rule_opts(sp)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--mode", choices=["relabel", "filter"])
    sp.add_argument("--threads", type=int, help="worker processes (default MANIP_THREADS or 1)")
    sp.add_argument("--cap", help="bounded-coalition cap (much slower)")
    add_common(sp)

    sp = sub.add_parser("emit-system", help="print the inequality system for a coalition")
    add_rule_opts(sp)
    sp.add_argument("--coalition", type=int)
    sp.add_argument("--format", choices=["text", "latex", "json"])
    sp.add_argument("--expand", action="store_true", help="one linear system per gap order")
    sp.add_argument("--out")

    sp = sub.add_parser("compare", help="inequality checker vs LP oracle on random profiles")
    add_rule_opts(sp)
    sp.add_argument("--profiles", type=int, help="number of random profiles (default 200)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--denominator", type=int, help="profile denominator (default 60)")
    sp.add_argument("--out")

    sp = sub.add_parser("finite", help="exhaustive strategy search for an integer electorate")
    add_rule_opts(sp)
    add_profile_opts(sp)
    sp.add_argument("--coalition", type=int)
    sp.add_argument("--cap", type=int, help="max number of participating members")
    sp.add_argument("--limit", type=int, help="strategy enumeration guard (default 1e7)")
    add_common(sp)

    sp = sub.add_parser("tables", help="reproduce the published share tables (m=3,4,5)")
    sp.add_argument("--out-dir", dest="out_dir")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--mode", choices=["relabel", "filter"])
    sp.add_argument("--threads", type=int)
    for m in (3, 4, 5):
        sp.add_argument(f"--samples{m}", type=int, dest=f"samples{m}")
    return p


_DISPATCH = {
    "check": _cmd_check,
    "witness": _cmd_witness,
    "estimate": _cmd_estimate,
    "emit-system": _cmd_emit_system,
    "compare": _cmd_compare,
    "finite": _cmd_finite,
    "tables": _cmd_tables,
}


def run(argv=None) -> int:
    """Parse arguments, execute, and map errors to exit codes."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _read_config(args.config) if args.config else {}
        config = RunConfig(command=args.command, options=vars(args))
        return _DISPATCH[config.command](args, cfg)
    except SizeLimitError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, NotManipulableError, InfeasibleError) as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
