"""Command line front end.

Exit codes: 0 success, 1 runtime error, 2 usage error, 3 no convergence
(``simulate``) or failed properties (``verify``).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import verify as verify_mod
from .bench import SuiteConfig, run_suite
from .controllers import CONTROLLERS, default_m, make_controller, search
from .engine import DEFAULT_MAX_STEPS, influence_check, run, write_trajectory_csv
from .errors import HKError
from .instances import GENERATORS, generate, load_instance
from .numeric import FAR, format_value

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _params(text: str | None) -> dict:
    if not text:
        return {}
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"--params is not valid JSON: {exc}") from None
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError("--params must be a JSON object")
    return value


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", type=Path, help="instance JSON file")
    src.add_argument("--gen", help="generator name (equidistant, dumbbell, three_cluster, ...)")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--c2")
    p.add_argument("--span")
    p.add_argument("--size", type=int, help="dumbbell farm group size override")
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=int, help="number of strategic agents (default: what the controller needs)")
    p.add_argument("--mode", choices=["rational", "float64"], default=None)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--out", type=Path)
    p.add_argument("--workers", type=int, default=1)


def _instance(args, controller: str | None, ctrl_params: dict):
    if args.gen is not None and args.gen not in GENERATORS:
        raise UsageError(f"unknown generator {args.gen!r}; choose from {sorted(GENERATORS)}")
    if controller is not None and controller not in CONTROLLERS:
        raise UsageError(f"unknown controller {controller!r}; choose from {sorted(CONTROLLERS)}")
    if args.instance is not None:
        inst = load_instance(args.instance)
        if args.mode:
            inst = inst.with_mode(args.mode)
    else:
        params = {
            key: getattr(args, key)
            for key in ("n", "k", "alpha", "c2", "span", "size", "seed")
            if getattr(args, key) is not None
        }
        inst = generate(args.gen, mode=args.mode or "rational", **params)
    if args.m is not None:
        inst = inst.with_m(args.m)
    elif controller is not None and (args.instance is None or controller != "passive"):
        inst = inst.with_m(default_m(controller, inst.n, ctrl_params))
    return inst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hkcontrol", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one instance under one controller")
    _add_instance_args(sim)
    _common(sim)
    sim.add_argument("--controller", default="passive")
    sim.add_argument("--params", type=_params, default={}, help="controller parameters as JSON")
    sim.add_argument("--trajectory", type=Path, help="write the trajectory CSV here")
    sim.add_argument("--no-monitors", action="store_true")
    sim.add_argument("--witness", action="store_true", help="also run the influence lower-bound check")

    bench = sub.add_parser("bench", help="run a scaling suite")
    bench.add_argument("--config", type=Path, required=True)
    bench.add_argument("--mode", choices=["rational", "float64"])
    bench.add_argument("--seed", type=int)
    _common(bench)

    ver = sub.add_parser("verify", help="run property suites")
    ver.add_argument("suites", nargs="+", choices=sorted(verify_mod.SUITES) + ["all"])
    ver.add_argument("--seeds", type=int, help="sample count for randomized suites")
    ver.add_argument("--out", type=Path)
    ver.add_argument("--mode", choices=["rational", "float64"])

    se = sub.add_parser("search", help="exhaustive look-ahead from an instance's start")
    _add_instance_args(se)
    se.add_argument("--horizon", type=int, default=1)
    se.add_argument("--branch-cap", type=int, default=200_000)
    se.add_argument("--out", type=Path)
    return parser


def _emit(payload: dict, out: Path | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out is not None:
        out.write_text(text + "\n")
    print(text)


def cmd_simulate(args) -> int:
    inst = _instance(args, args.controller, args.params)
    ctrl = make_controller(args.controller, args.params)
    rec = run(
        inst,
        ctrl,
        args.max_steps,
        True if args.trajectory else None,
        monitors=not args.no_monitors,
    )
    if args.out is not None:
        args.out.write_text(rec.dumps() + "\n")
    if args.trajectory is not None:
        write_trajectory_csv(rec, args.trajectory)
    summary = {
        "instance": inst.name,
        "n": inst.n,
        "m": inst.m,
        "controller": args.controller,
        "convergence_time": rec.convergence_time if rec.converged else "NOT_CONVERGED",
        "steps": rec.steps_executed,
        "monitors_passed": all(r["passed"] for r in rec.monitor_report.values()),
    }
    if args.witness:
        wit = influence_check(rec, inst)
        summary["witness"] = {"value": wit.witness, "untouched": len(wit.untouched), "ok": wit.ok}
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if rec.converged else EXIT_NOT_CONVERGED


def cmd_bench(args) -> int:
    config = SuiteConfig.load(args.config)
    if args.mode:
        config.mode = args.mode
    if args.seed is not None:
        config.seeds = [args.seed]
    if args.max_steps != DEFAULT_MAX_STEPS:
        config.max_steps = args.max_steps
    if args.out is not None:
        config.out = str(args.out)
    result = run_suite(config, workers=args.workers)
    for row in result.rows:
        print(",".join(str(row[k]) for k in ("n", "m", "generator", "controller", "convergence_time", "steps", "wall_ms")))
    print(json.dumps(result.summary(), sort_keys=True))
    return EXIT_OK


def cmd_verify(args) -> int:
    names = sorted(verify_mod.SUITES) if "all" in args.suites else args.suites
    reports = []
    for name in names:
        fn = verify_mod.SUITES[name]
        kwargs = {}
        if args.seeds is not None:
            if name in ("invariants", "mass", "contraction"):
                kwargs["seeds"] = args.seeds
            elif name == "three-cluster" or name == "farm":
                kwargs["runs"] = args.seeds
            elif name == "not-too-fast":
                kwargs["random_directives"] = args.seeds
        if args.mode and name == "invariants":
            kwargs["mode"] = args.mode
        reports.append(fn(**kwargs))
    payload = {"passed": all(r.passed for r in reports), "suites": [r.to_dict() for r in reports]}
    _emit(payload, args.out)
    return EXIT_OK if payload["passed"] else EXIT_NOT_CONVERGED


def cmd_search(args) -> int:
    inst = _instance(args, None, {})
    if args.m is None:
        inst = inst.with_m(1)
    directive, score = search(inst.state(), args.horizon, args.branch_cap)
    payload = {
        "instance": inst.name,
        "m": inst.m,
        "horizon": args.horizon,
        "directive": ["FAR" if p is FAR else format_value(p, inst.mode) for p in directive],
        "steps_to_converge": score[0] if score[0] <= args.horizon else None,
        "width_at_horizon": format_value(score[1], inst.mode),
    }
    _emit(payload, args.out)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "bench": cmd_bench, "verify": cmd_verify, "search": cmd_search}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except HKError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
