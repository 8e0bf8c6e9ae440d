"""Experiment config files: INI-style sections mapped onto run grids.

A config names one testbed (or, for mazes, a family of metric assignments),
a method list, and a seed list; `build_run_configs` expands the cross
product into RunConfig objects in a fixed order (treatment, method, seed).
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

from .runner import RunConfig
from .selection import POLICY_NAMES, SelectionPolicy
from .testbeds import TESTBEDS
from .testbeds.maze import MAZE_METRICS, enumerate_assignments

_EXPERIMENT_KEYS = {"name", "methods", "seeds", "budget", "init_population",
                    "jobs", "grids", "lambda"}
_TESTBED_KEYS = {"name", "resolution", "joints", "width", "height",
                 "fitness_metric", "behavior_metrics", "path_count",
                 "assignments", "sizes"}
_OUTPUT_KEYS = {"dir"}
_BOOLEANS = {"true": True, "yes": True, "1": True, "on": True,
             "false": False, "no": False, "0": False, "off": False}


class ConfigError(ValueError):
    """Malformed experiment config; the message names the offending key."""


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    methods: Tuple[str, ...]
    seeds: Tuple[int, ...]
    budget: int
    init_population: int = 100
    jobs: int = 1
    grids: bool = False
    lam: Optional[float] = None
    treatments: Tuple[Tuple[str, dict], ...] = ()
    resolution: Optional[Tuple[int, int]] = None
    out_dir: Optional[str] = None
    raw: dict = field(default_factory=dict, compare=False)


def parse_seeds(text: str) -> Tuple[int, ...]:
    """'0..19' (inclusive range) or a comma list of integers."""
    text = text.strip()
    if ".." in text:
        lo_s, _, hi_s = text.partition("..")
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError:
            raise ConfigError(f"bad seed range {text!r}") from None
        if hi < lo:
            raise ConfigError(f"empty seed range {text!r}")
        return tuple(range(lo, hi + 1))
    try:
        seeds = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"bad seed list {text!r}") from None
    if not seeds:
        raise ConfigError("empty seed list")
    return seeds


def parse_resolution(text: str) -> Tuple[int, int]:
    """'100x100' -> (rows, cols)."""
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"bad resolution {text!r}; expected ROWSxCOLS")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"bad resolution {text!r}; expected ROWSxCOLS") from None
    if rows < 1 or cols < 1:
        raise ConfigError(f"resolution {text!r} must be >= 1 per axis")
    return rows, cols


def _positive_int(section: str, key: str, text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(f"{section}.{key}: {text!r} is not an integer") from None
    if value < 1:
        raise ConfigError(f"{section}.{key} must be >= 1, got {value}")
    return value


def _boolean(section: str, key: str, text: str) -> bool:
    try:
        return _BOOLEANS[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"{section}.{key}: {text!r} is not a boolean") from None


def _parse_methods(text: str) -> Tuple[str, ...]:
    text = text.strip()
    if text.lower() == "all":
        return POLICY_NAMES
    methods = tuple(part.strip() for part in text.split(",") if part.strip())
    if not methods:
        raise ConfigError("experiment.methods is empty")
    for m in methods:
        if m not in POLICY_NAMES:
            raise ConfigError(
                f"experiment.methods: unknown policy {m!r}; "
                f"known: {', '.join(POLICY_NAMES)}")
    return methods


def _maze_treatments(sec: dict) -> Tuple[Tuple[str, dict], ...]:
    path_count = sec.get("path_count", "tiles").strip()
    if path_count not in ("tiles", "moves"):
        raise ConfigError(f"testbed.path_count: {path_count!r} is not tiles or moves")
    if "assignments" in sec:
        if sec["assignments"].strip().lower() != "all":
            raise ConfigError("testbed.assignments only accepts 'all'")
        if "fitness_metric" in sec or "behavior_metrics" in sec:
            raise ConfigError(
                "testbed.assignments=all conflicts with explicit metric keys")
        sizes_text = sec.get("sizes", "8x8,16x16")
        sizes = tuple(parse_resolution(part.strip())
                      for part in sizes_text.split(","))
        out = []
        for width, height in sizes:
            for assign in enumerate_assignments():
                out.append(("maze", {
                    "width": width,
                    "height": height,
                    "fitness_metric": assign.fitness,
                    "behavior_metrics": assign.behavior,
                    "path_count": path_count,
                }))
        return tuple(out)
    if "sizes" in sec:
        raise ConfigError("testbed.sizes requires assignments=all")
    width = _positive_int("testbed", "width", sec.get("width", "8"))
    height = _positive_int("testbed", "height", sec.get("height", "8"))
    fitness = sec.get("fitness_metric", "P").strip()
    if fitness not in MAZE_METRICS:
        raise ConfigError(
            f"testbed.fitness_metric: {fitness!r} is not one of {', '.join(MAZE_METRICS)}")
    behavior_text = sec.get("behavior_metrics", "H,L")
    behavior = tuple(part.strip() for part in behavior_text.split(","))
    for b in behavior:
        if b not in MAZE_METRICS:
            raise ConfigError(
                f"testbed.behavior_metrics: {b!r} is not one of {', '.join(MAZE_METRICS)}")
    return (("maze", {
        "width": width,
        "height": height,
        "fitness_metric": fitness,
        "behavior_metrics": behavior,
        "path_count": path_count,
    }),)


def load_experiment(path) -> ExperimentSpec:
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None

    known = {"experiment": _EXPERIMENT_KEYS, "testbed": _TESTBED_KEYS,
             "output": _OUTPUT_KEYS}
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in known[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
    if "experiment" not in parser:
        raise ConfigError("missing [experiment] section")
    if "testbed" not in parser:
        raise ConfigError("missing [testbed] section")
    exp = dict(parser["experiment"])
    tb = dict(parser["testbed"])
    out = dict(parser["output"]) if "output" in parser else {}

    if "budget" not in exp:
        raise ConfigError("experiment.budget is required")
    budget = _positive_int("experiment", "budget", exp["budget"])
    init_population = _positive_int(
        "experiment", "init_population", exp.get("init_population", "100"))
    if init_population > budget:
        raise ConfigError("experiment.init_population exceeds budget")
    jobs = _positive_int("experiment", "jobs", exp.get("jobs", "1"))
    grids = _boolean("experiment", "grids", exp.get("grids", "false"))
    methods = _parse_methods(exp.get("methods", "all"))
    seeds = parse_seeds(exp.get("seeds", "0"))
    lam = None
    if "lambda" in exp:
        try:
            lam = float(exp["lambda"])
        except ValueError:
            raise ConfigError(
                f"experiment.lambda: {exp['lambda']!r} is not a number") from None
        if lam < 0.0:
            raise ConfigError("experiment.lambda must be >= 0")

    if "name" not in tb:
        raise ConfigError("testbed.name is required")
    tb_name = tb["name"].strip()
    if tb_name not in TESTBEDS:
        raise ConfigError(
            f"testbed.name: unknown testbed {tb_name!r}; known: {', '.join(sorted(TESTBEDS))}")
    resolution = parse_resolution(tb["resolution"]) if "resolution" in tb else None
    if tb_name == "maze":
        if "joints" in tb:
            raise ConfigError("testbed.joints only applies to arm12")
        treatments = _maze_treatments(tb)
    else:
        for key in ("width", "height", "fitness_metric", "behavior_metrics",
                    "path_count", "assignments", "sizes"):
            if key in tb:
                raise ConfigError(f"testbed.{key} only applies to maze")
        params = {}
        if tb_name == "arm12" and "joints" in tb:
            params["joints"] = _positive_int("testbed", "joints", tb["joints"])
        elif "joints" in tb:
            raise ConfigError("testbed.joints only applies to arm12")
        treatments = ((tb_name, params),)

    raw = {"experiment": exp, "testbed": tb, "output": out}
    return ExperimentSpec(
        name=exp.get("name", path.stem).strip(),
        methods=methods,
        seeds=seeds,
        budget=budget,
        init_population=init_population,
        jobs=jobs,
        grids=grids,
        lam=lam,
        treatments=treatments,
        resolution=resolution,
        out_dir=out.get("dir"),
        raw=raw,
    )


def build_run_configs(spec: ExperimentSpec) -> list:
    """Expand the spec into RunConfigs: treatments outer, then method, then seed."""
    configs = []
    for tb_name, params in spec.treatments:
        for method in spec.methods:
            lam = spec.lam if method in ("ucb_individual", "ucb_cell") else None
            policy = SelectionPolicy.from_name(method, lam=lam)
            for seed in spec.seeds:
                configs.append(RunConfig(
                    testbed=tb_name,
                    policy=policy,
                    seed=seed,
                    budget=spec.budget,
                    init_population=spec.init_population,
                    resolution=spec.resolution,
                    testbed_params=dict(params),
                ))
    return configs
