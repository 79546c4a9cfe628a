"""Command line: ``omkd {validate,gen,run,bench,oracle}``.

Exit codes: 0 success, 1 semantic violation, 2 I/O or parse failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .audit import summarize
from .bench import RUNNERS, SweepConfig, rows_to_csv, run_sweep
from .errors import ConfigError, InstanceError, OracleSizeError
from .generators import GeneratorConfig, adversarial_density_ramp, generate
from .instance import load_instance
from .oracle import exact_optimum
from .validation import validate_instance

EXIT_OK, EXIT_VIOLATION, EXIT_IO = 0, 1, 2


class _InputError(Exception):
    pass


def _load(path):
    try:
        return load_instance(path)
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except InstanceError as exc:
        raise _InputError(f"{path}: {exc}") from exc


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def cmd_validate(args) -> int:
    instance = _load(args.path)
    report = validate_instance(instance, theorem=not args.no_theorem)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        for note in report.notes:
            print(f"note: {note}")
        for v in report.violations:
            print(v)
        print("feasible-for-guarantee:", "yes" if report.feasible_for_guarantee else "no")
    return EXIT_OK if report.feasible_for_guarantee else EXIT_VIOLATION


def cmd_gen(args) -> int:
    data = _read_json(args.config) if args.config else {}
    overrides = {
        "variant": args.variant, "seed": args.seed, "n_requests": args.n_requests,
        "n_resources": args.n_resources, "horizon": args.horizon, "density_bar": args.density_bar,
        "d_bar": args.d_bar, "xi": args.xi, "weight_mode": args.weight_mode,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    cfg = GeneratorConfig.from_dict(data)
    instance = adversarial_density_ramp(cfg) if args.family == "ramp" else generate(cfg)
    text = instance.dumps()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args) -> int:
    instance = _load(args.path)
    algo = args.algo or instance.variant
    if algo != instance.variant:
        print(f"error: --algo {algo} does not match instance variant {instance.variant!r}", file=sys.stderr)
        return EXIT_VIOLATION
    start = time.perf_counter()
    trace = RUNNERS[algo](instance, args.mode)
    offline = exact_optimum(instance, max_requests=args.max_requests) if args.oracle else None
    summary = summarize(str(args.path), instance, trace, offline, time.perf_counter() - start)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.csv").write_text(trace.to_csv())
        (out / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
    print(json.dumps(summary.to_dict(), indent=2))
    return EXIT_OK if summary.invariant_violations == 0 else EXIT_VIOLATION


def cmd_oracle(args) -> int:
    instance = _load(args.path)
    sol = exact_optimum(instance, max_requests=args.max_requests, method=args.method)
    print(json.dumps(sol.to_dict(), indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    sweep = SweepConfig.from_dict(_read_json(args.config))
    if args.workers:
        sweep = SweepConfig(sweep.variant, sweep.points, sweep.reps, sweep.seed, sweep.generator,
                            sweep.family, args.workers)
    rows = run_sweep(sweep)
    text = rows_to_csv(rows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.csv").write_text(text)
    sys.stdout.write(text)
    over = [r for r in rows if r["max_cr"] > r["bound"]]
    return EXIT_VIOLATION if over else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check assumptions and the guarantee's weight precondition")
    p.add_argument("path")
    p.add_argument("--no-theorem", action="store_true", help="skip the weight precondition check")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen", help="generate an instance JSON")
    p.add_argument("--config", help="generator config JSON")
    p.add_argument("--variant", choices=("basic", "lb", "md"))
    p.add_argument("--seed", type=int)
    p.add_argument("--n-requests", type=int)
    p.add_argument("--n-resources", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--density-bar", type=float)
    p.add_argument("--d-bar", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--weight-mode", choices=("compliant", "violating"))
    p.add_argument("--family", choices=("random", "ramp"), default="random")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="run an online algorithm, write trace CSV and summary JSON")
    p.add_argument("path")
    p.add_argument("--algo", choices=("basic", "lb", "md"))
    p.add_argument("--mode", choices=("strict", "guarded"), default="strict")
    p.add_argument("--oracle", action="store_true", help="also compute the offline optimum")
    p.add_argument("--max-requests", type=int, default=20)
    p.add_argument("--out", help="directory for trace.csv and summary.json")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="competitive-ratio sweep")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="exact offline optimum")
    p.add_argument("path")
    p.add_argument("--max-requests", type=int, default=20)
    p.add_argument("--method", choices=("branch-and-bound", "exhaustive"), default="branch-and-bound")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, OracleSizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
