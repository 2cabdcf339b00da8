"""``anonmutex`` command line.

Exit codes are stable: 0 success/holds, 1 violation (or infeasible, or no
horn observed), 2 usage error, 3 inconclusive exploration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigurationError
from .executor import LOCK_STEP, RANDOM, ROUND_ROBIN, RunConfig, SchedulerSpec, lock_step_schedule, run
from .numtheory import MODELS, FeasibilityQuery, blocking_divisor, explain, gcd, is_feasible, min_feasible_m
from .snapshot import ATOMIC, SNAPSHOT_MODES
from .trace import Trace
from .verifier import (HOLDS, INCONCLUSIVE, VIOLATED, check_entry_invariant, check_mutual_exclusion,
                       check_trace, explore, explore_layouts, impossibility_demo)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

SCHED_FLAGS = {"round-robin": ROUND_ROBIN, "random": RANDOM, "lock-step": LOCK_STEP}


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_check_m(args) -> int:
    q = FeasibilityQuery(args.n, args.m, args.model)
    print(explain(q))
    return EXIT_OK if is_feasible(q) else EXIT_FAIL


def cmd_min_m(args) -> int:
    print(min_feasible_m(args.n, args.model))
    return EXIT_OK


def _run_config(args) -> RunConfig:
    if args.perm == "ring" and args.ell is None:
        raise ConfigurationError("--perm ring requires --ell")
    kind = SCHED_FLAGS[args.sched]
    sched = lock_step_schedule(args.ell or args.n) if kind == LOCK_STEP else SchedulerSpec(kind)
    return RunConfig(n=args.n, m=args.m, algorithm=args.alg, snapshot_mode=args.snapshot, scheduler=sched,
                     permutations=args.perm, ell=args.ell, cycles=args.cycles, max_steps=args.max_steps,
                     seed=args.seed)


def cmd_run(args) -> int:
    cfg = _run_config(args)
    if not is_feasible(FeasibilityQuery(cfg.n, cfg.m, cfg.algorithm)):
        print(f"warning: m={cfg.m} is {explain(FeasibilityQuery(cfg.n, cfg.m, cfg.algorithm))} "
              f"for n={cfg.n}; running anyway", file=sys.stderr)
    result = run(cfg)
    if args.trace:
        result.trace.write(args.trace)
    verdicts = [check_mutual_exclusion(result.trace, cfg), check_entry_invariant(result.trace, cfg.algorithm, cfg)]
    _emit({"summary": result.summary.to_dict(), "verdicts": {v.prop: v.status for v in verdicts}})
    return EXIT_OK if all(v.status == HOLDS for v in verdicts) else EXIT_FAIL


def cmd_check_trace(args) -> int:
    trace = Trace.read(args.path)
    verdicts = check_trace(trace, args.alg)
    for v in verdicts:
        _emit(v.to_dict())
    return EXIT_FAIL if any(v.status == VIOLATED for v in verdicts) else EXIT_OK


def _write_witnesses(report: Path, verdicts) -> None:
    for v in verdicts:
        if v.witness is not None:
            path = report.with_name(f"{report.stem}.{v.prop}.witness.json")
            path.write_text(json.dumps(v.witness.to_dict(), indent=1) + "\n")
            print(f"witness: {path}", file=sys.stderr)


def cmd_model_check(args) -> int:
    cfg = RunConfig(n=args.n, m=args.m, algorithm=args.alg)
    if args.all_layouts:
        reports = explore_layouts(cfg, max_states=args.max_states, backend=args.backend)
    else:
        reports = [explore(cfg, depth=args.depth, max_states=args.max_states, backend=args.backend)]
    lines, verdicts = [], []
    for rep in reports:
        for v in rep.verdicts.values():
            d = v.to_dict()
            d["config"] = rep.config.to_dict()
            d["stats"] = {**rep.stats, **d["stats"]}
            lines.append(d)
            verdicts.append(v)
    if args.report:
        report = Path(args.report)
        report.write_text("".join(json.dumps(d, sort_keys=True) + "\n" for d in lines))
        _write_witnesses(report, verdicts)
    else:
        for d in lines:
            _emit(d)
    states = sum(r.stats["states"] for r in reports)
    statuses = {v.status for v in verdicts}
    if len(reports) == 1:
        detail = ", ".join(f"{v.prop}={v.status}" for v in verdicts)
    else:
        detail = f"over {len(reports)} layouts; statuses: {', '.join(sorted(statuses))}"
    print(f"states explored: {states}; {detail}", file=sys.stderr)
    if VIOLATED in statuses:
        return EXIT_FAIL
    if INCONCLUSIVE in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_impossibility(args) -> int:
    ell = args.ell
    if ell is None:
        if args.n is None:
            raise ConfigurationError("give --ell, or --n to pick a common divisor")
        d = blocking_divisor(args.n, args.m)
        if d is None:
            raise ConfigurationError(f"m={args.m} is coprime to 2..{args.n}; no ring layout exists")
        ell = gcd(d, args.m)
    rep = impossibility_demo(args.alg, args.m, ell, max_steps=args.bound, snapshot_mode=args.snapshot)
    _emit(rep.to_dict())
    if rep.horn is None:
        print(f"no violation within {args.bound} steps", file=sys.stderr)
        return EXIT_FAIL
    where = f"; global state first repeated after round {rep.first_repeat_round}" if rep.first_repeat_round else ""
    print(f"{rep.horn.replace('_', '-')} violation demonstrated{where}", file=sys.stderr)
    return EXIT_FAIL if rep.symmetry_failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anonmutex", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check-m", help="is m a feasible register count for n processes")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--model", choices=MODELS, default="rw")
    c.set_defaults(func=cmd_check_m)

    c = sub.add_parser("min-m", help="smallest feasible m for n processes")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--model", choices=MODELS, default="rw")
    c.set_defaults(func=cmd_min_m)

    c = sub.add_parser("run", help="simulate one run and check it")
    c.add_argument("--alg", choices=MODELS, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--sched", choices=sorted(SCHED_FLAGS), default="random")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--cycles", type=int, default=1)
    c.add_argument("--max-steps", type=int, default=100_000)
    c.add_argument("--snapshot", choices=SNAPSHOT_MODES, default=ATOMIC)
    c.add_argument("--perm", choices=("identity", "seeded", "ring"), default="seeded")
    c.add_argument("--ell", type=int)
    c.add_argument("--trace", metavar="PATH")
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("check-trace", help="run every trace checker on a trace file")
    c.add_argument("--alg", choices=MODELS, required=True)
    c.add_argument("path")
    c.set_defaults(func=cmd_check_trace)

    c = sub.add_parser("model-check", help="explore every interleaving of a small configuration")
    c.add_argument("--alg", choices=MODELS, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--depth", type=int)
    c.add_argument("--max-states", type=int, default=2_000_000)
    c.add_argument("--backend", choices=("auto", "native", "python"), default="auto")
    c.add_argument("--all-layouts", action="store_true", help="repeat over every permutation layout")
    c.add_argument("--report", metavar="PATH")
    c.set_defaults(func=cmd_model_check)

    c = sub.add_parser("impossibility", help="lock-step run on the ring layout")
    c.add_argument("--alg", choices=MODELS, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--ell", type=int)
    c.add_argument("--n", type=int)
    c.add_argument("--bound", type=int, default=100_000)
    c.add_argument("--snapshot", choices=SNAPSHOT_MODES, default=ATOMIC)
    c.set_defaults(func=cmd_impossibility)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:  # ConfigurationError and MalformedTrace included
        print(f"anonmutex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
