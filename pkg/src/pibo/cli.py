"""Command-line entry point: ``pibo {run,solo,brute,bench,compare,eval}``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from .bench import benchmark, brute_force, compare_solo_vs_pibo
from .bo import run_bo
from .config import RunConfig, parse_config, shipped_config_path
from .errors import PiboError
from .orchestrator import run_pibo
from .stripline import StriplineObjective, metrics_from_values, objective_from_metrics

log = logging.getLogger("pibo")


def _load(args) -> RunConfig:
    cfg = parse_config(args.config or shipped_config_path())
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)
        print(f"wrote {path}")


def _print_best(point, value, evaluations: int) -> None:
    print(f"evaluations: {evaluations}")
    print("best point:  " + ", ".join(f"{k}={v:g}" for k, v in point.as_dict().items()))
    print(f"best value:  {value!r}")


def cmd_run(args) -> int:
    cfg = _load(args)
    pibo = cfg.pibo if args.executor is None else replace(cfg.pibo, executor=args.executor)
    objective = StriplineObjective(cfg.objective)
    t0 = time.perf_counter()
    result = run_pibo(cfg.space, objective, pibo)
    log.info("PIBO finished in %.1f s", time.perf_counter() - t0)
    _write(args.out or cfg.outputs.get("trace"), result.trace.to_csv(objective.metrics))
    _print_best(result.best_point, result.best_value, result.evaluations)
    return 0


def cmd_solo(args) -> int:
    cfg = _load(args)
    objective = StriplineObjective(cfg.objective)
    _, trace = run_bo(cfg.space, objective, cfg.bo)
    _write(args.out or cfg.outputs.get("trace"), trace.to_csv(objective.metrics))
    _print_best(*trace.best, len(trace))
    return 0


def cmd_brute(args) -> int:
    cfg = _load(args)
    objective = StriplineObjective(cfg.objective)
    t0 = time.perf_counter()
    res = brute_force(
        cfg.space, objective, cap=cfg.enumeration_cap,
        table_path=args.table or cfg.outputs.get("table"),
    )
    if args.table or cfg.outputs.get("table"):
        print(f"wrote {args.table or cfg.outputs.get('table')}")
    print(f"enumerated {cfg.space.total_count} points in {time.perf_counter() - t0:.2f} s")
    _print_best(res.point, res.value, cfg.space.total_count)
    return 0


def _seeds(args, cfg: RunConfig) -> list[int]:
    if args.seeds is not None:
        return list(range(args.seeds))
    return list(cfg.bench_seeds)


def cmd_bench(args) -> int:
    cfg = _load(args)
    objective = StriplineObjective(cfg.objective)
    oracle = brute_force(cfg.space, objective, cap=cfg.enumeration_cap)
    report = benchmark(
        cfg.space, objective, cfg.pibo, _seeds(args, cfg),
        oracle_value=oracle.value, rel_tol=cfg.bench_rel_tol,
    )
    _write(args.out or cfg.outputs.get("report"), report.to_csv())
    print(report.summary())
    return 0 if len(report.ok_records) == len(report.records) else 1


def cmd_compare(args) -> int:
    cfg = _load(args)
    objective = StriplineObjective(cfg.objective)
    table = compare_solo_vs_pibo(
        cfg.space, objective, cfg.pibo, _seeds(args, cfg), total_budget=args.budget
    )
    _write(args.out or cfg.outputs.get("report"), table.to_csv())
    print(table.summary())
    return 0


def cmd_eval(args) -> int:
    cfg = _load(args)
    if args.point is not None:
        try:
            values = [float(v) for v in args.point.split(",")]
        except ValueError:
            print(f"error: --point must be six comma-separated numbers, got {args.point!r}",
                  file=sys.stderr)
            return 2
        if len(values) != 6:
            print(f"error: --point needs 6 values (W,S,T,H1,H2,er), got {len(values)}",
                  file=sys.stderr)
            return 2
    else:
        values = [args.w, args.s, args.t, args.h1, args.h2, args.er]
        if any(v is None for v in values):
            print("error: give --point or all of --w --s --t --h1 --h2 --er", file=sys.stderr)
            return 2
    m = metrics_from_values(*values, spec=cfg.objective)
    print(f"z_diff    = {m.z_diff!r} ohm")
    print(f"loss      = {m.loss!r} dB/in")
    print(f"objective = {objective_from_metrics(m, cfg.objective)!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pibo", description="Parallel Bayesian optimization of a differential stripline."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="run config JSON (default: shipped default.json)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.set_defaults(func=func)
        return p

    p = add("run", cmd_run, "parallel BO (PIBO) run")
    p.add_argument("--out", help="trace CSV path")
    p.add_argument("--executor", choices=["sequential", "thread", "process"])
    p = add("solo", cmd_solo, "single classic BO run")
    p.add_argument("--out", help="trace CSV path")
    p = add("brute", cmd_brute, "exhaustive search of the grid")
    p.add_argument("--table", help="write every point's objective to this CSV")
    p = add("bench", cmd_bench, "repeat PIBO over seeds and score against brute force")
    p.add_argument("--seeds", type=int, help="use seeds 0..N-1 instead of the config list")
    p.add_argument("--out", help="report CSV path")
    p = add("compare", cmd_compare, "solo BO vs PIBO at equal budgets")
    p.add_argument("--seeds", type=int, help="use seeds 0..N-1 instead of the config list")
    p.add_argument("--budget", type=int, help="total evaluations per run (default: PIBO budget)")
    p.add_argument("--out", help="comparison CSV path")
    p = add("eval", cmd_eval, "metrics and objective of one stack-up")
    p.add_argument("--point", help="W,S,T,H1,H2,er")
    for name in ("w", "s", "t", "h1", "h2", "er"):
        p.add_argument(f"--{name}", type=float)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except PiboError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
