"""Command-line front end: single runs, experiment grids, analysis, exports.

Exit codes: 0 success, 1 config/usage error, 2 runtime fault. The default
output root is ./results, overridable with the BANDIT_ELITES_OUT variable.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import analyze_directory
from .config import (ConfigError, build_run_configs, load_experiment,
                     parse_resolution)
from .runner import (RunConfig, RunFault, add_manifest_artifacts,
                     execute_experiment, read_grid, read_manifest)
from .selection import POLICY_NAMES, SelectionPolicy
from .testbeds import TESTBEDS, make_testbed

log = logging.getLogger(__name__)

ENV_OUT = "BANDIT_ELITES_OUT"


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as config errors."""

    def error(self, message):
        raise ConfigError(message)


def _out_root() -> Path:
    return Path(os.environ.get(ENV_OUT, "results"))


def _coerce_param(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if "," in text:
        return tuple(part.strip() for part in text.split(","))
    return text


def _parse_params(pairs) -> dict:
    params = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"--param expects key=value, got {pair!r}")
        params[key] = _coerce_param(value)
    return params


def _progress(rec) -> None:
    if isinstance(rec, RunFault):
        print(f"fault  {rec.config.testbed} {rec.config.policy.kind} "
              f"seed={rec.config.seed}: {rec.error}", flush=True)
        return
    last = rec.snapshots[-1]
    print(f"run    {rec.treatment} {rec.config.policy.kind} seed={rec.config.seed} "
          f"evals={last.evaluations} coverage={last.coverage:.3f} "
          f"qd={last.qd_norm:.2f} ({rec.duration:.1f}s)", flush=True)


def _print_table(table: dict, methods: list) -> None:
    name_w = max(len("metric"), *(len(m) for m in table)) if table else len("metric")
    print("metric".ljust(name_w) + "  " + "  ".join(methods))
    for metric, counts in table.items():
        cells = "  ".join(str(counts[m]).rjust(len(m)) for m in methods)
        print(metric.ljust(name_w) + "  " + cells)


def _cmd_run(args) -> int:
    lam = args.lam if args.policy in ("ucb_individual", "ucb_cell") else None
    policy = SelectionPolicy.from_name(args.policy, lam=lam)
    resolution = parse_resolution(args.resolution) if args.resolution else None
    config = RunConfig(
        testbed=args.testbed,
        policy=policy,
        seed=args.seed,
        budget=args.budget,
        init_population=args.init_population,
        resolution=resolution,
        testbed_params=_parse_params(args.param),
    )
    out = Path(args.out) if args.out else _out_root() / (
        f"run_{args.testbed}_{args.policy}_{args.seed}")
    result = execute_experiment([config], out, name=out.name, jobs=1,
                                write_grids=args.grids, progress=_progress)
    if result.faults:
        return 2
    print(f"wrote  {result.metrics_path}")
    return 0


def _cmd_experiment(args) -> int:
    spec = load_experiment(args.config)
    if args.runs is not None:
        if args.runs < 1:
            raise ConfigError("--runs must be >= 1")
        spec = replace(spec, seeds=tuple(range(args.runs)))
    if args.jobs is not None:
        spec = replace(spec, jobs=args.jobs)
    if args.grids:
        spec = replace(spec, grids=True)
    configs = build_run_configs(spec)
    if args.out:
        out = Path(args.out)
    elif spec.out_dir:
        out = Path(spec.out_dir)
    else:
        out = _out_root() / spec.name
    result = execute_experiment(configs, out, name=spec.name, jobs=spec.jobs,
                                write_grids=spec.grids, meta=spec.raw,
                                progress=_progress)
    print(f"wrote  {result.metrics_path} ({len(result.records)} runs, "
          f"{len(result.faults)} faults)")
    if result.faults:
        return 2
    if not args.no_analyze:
        analysis = analyze_directory(out, render=not args.no_figures)
        _print_table(analysis.table, analysis.methods)
        print(f"wrote  {analysis.significance_path}")
    return 0


def _cmd_analyze(args) -> int:
    result = analyze_directory(args.directory, alpha=args.alpha,
                               comparisons=args.comparisons,
                               one_sided=args.one_sided,
                               render=not args.no_figures)
    _print_table(result.table, result.methods)
    print(f"wrote  {result.significance_path}")
    print(f"wrote  {result.progress_path}")
    return 0


def _cmd_export_heatmap(args) -> int:
    exp_dir = Path(args.directory)
    grid_dir = exp_dir / "grids"
    if not grid_dir.is_dir():
        print(f"error: no grids/ under {exp_dir} (run saved without --grids?)",
              file=sys.stderr)
        return 2
    suffix = f"_{args.kind}.csv"
    candidates = sorted(grid_dir.glob(f"run_*{suffix}"))
    if args.seed is not None:
        candidates = [p for p in candidates
                      if p.name.endswith(f"_{args.seed}{suffix}")
                      or p.name == f"run_{args.seed}{suffix}"]
    if args.method:
        candidates = [p for p in candidates if f"_{args.method}_" in p.name]
    if not candidates:
        print(f"error: no matching {args.kind} grid in {grid_dir}", file=sys.stderr)
        return 2
    if len(candidates) > 1:
        names = ", ".join(p.name for p in candidates)
        raise ConfigError(f"ambiguous grid selection; candidates: {names}")
    grid_path = candidates[0]
    grid = read_grid(grid_path, args.kind)
    from .figures import render_heatmap

    out_path = Path(args.out) if args.out else grid_path.with_suffix(".png")
    render_heatmap(grid, args.kind, out_path, title=grid_path.stem)
    print(f"wrote  {out_path}")
    try:
        out_path.resolve().relative_to(exp_dir.resolve())
    except ValueError:
        return 0
    try:
        read_manifest(exp_dir)
    except FileNotFoundError:
        pass
    else:
        add_manifest_artifacts(exp_dir, [out_path])
    return 0


def _cmd_list_testbeds(args) -> int:
    for name in sorted(TESTBEDS):
        tb = make_testbed(name)
        rows, cols = tb.default_resolution
        direction = "maximize" if tb.maximize else "minimize"
        print(f"{name:12s} genome={tb.genome_size:3d} "
              f"resolution={rows}x{cols} {direction}")
    return 0


def _cmd_validate_config(args) -> int:
    spec = load_experiment(args.config)
    n_runs = len(spec.treatments) * len(spec.methods) * len(spec.seeds)
    print(f"ok     {args.config}: {len(spec.treatments)} treatment(s) x "
          f"{len(spec.methods)} method(s) x {len(spec.seeds)} seed(s) "
          f"= {n_runs} runs, budget {spec.budget}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bandit-elites",
                     description="MAP-Elites with bandit-style parent selection")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a single run")
    p_run.add_argument("--testbed", required=True, choices=sorted(TESTBEDS))
    p_run.add_argument("--policy", required=True, choices=POLICY_NAMES)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--budget", type=int, required=True)
    p_run.add_argument("--init-population", type=int, default=100)
    p_run.add_argument("--resolution", help="map resolution, e.g. 100x100")
    p_run.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="UCB exploration weight override")
    p_run.add_argument("--param", action="append", metavar="KEY=VALUE",
                       help="extra testbed parameter (repeatable)")
    p_run.add_argument("--grids", action="store_true",
                       help="also write fitness/selection grid CSVs")
    p_run.add_argument("--out", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_exp = sub.add_parser("experiment", help="execute a config-defined grid")
    p_exp.add_argument("config", help="experiment config file")
    p_exp.add_argument("--runs", type=int, default=None,
                       help="replace the seed list with 0..N-1")
    p_exp.add_argument("--jobs", type=int, default=None)
    p_exp.add_argument("--grids", action="store_true")
    p_exp.add_argument("--out", help="output directory")
    p_exp.add_argument("--no-analyze", action="store_true",
                       help="skip the analysis pass after the runs")
    p_exp.add_argument("--no-figures", action="store_true",
                       help="skip figure rendering during analysis")
    p_exp.set_defaults(func=_cmd_experiment)

    p_an = sub.add_parser("analyze", help="significance table + progress curves")
    p_an.add_argument("directory", help="experiment output directory")
    p_an.add_argument("--alpha", type=float, default=0.05)
    p_an.add_argument("--comparisons", type=int, default=8,
                      help="Bonferroni divisor")
    p_an.add_argument("--one-sided", action="store_true")
    p_an.add_argument("--no-figures", action="store_true")
    p_an.set_defaults(func=_cmd_analyze)

    p_hm = sub.add_parser("export-heatmap", help="render a saved archive grid")
    p_hm.add_argument("directory", help="experiment output directory")
    p_hm.add_argument("--kind", required=True, choices=("fitness", "selections"))
    p_hm.add_argument("--seed", type=int, default=None)
    p_hm.add_argument("--method", default=None)
    p_hm.add_argument("--out", help="output image path")
    p_hm.set_defaults(func=_cmd_export_heatmap)

    p_ls = sub.add_parser("list-testbeds", help="show available testbeds")
    p_ls.set_defaults(func=_cmd_list_testbeds)

    p_val = sub.add_parser("validate-config", help="check a config file")
    p_val.add_argument("config", help="experiment config file")
    p_val.set_defaults(func=_cmd_validate_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
