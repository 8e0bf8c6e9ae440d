"""Seeded evolutionary runs, experiment batches, and artifact persistence.

One run owns one feature map and one PCG64 generator; identical configs give
bit-identical records and byte-identical CSV output. Experiments pool the
per-cell best normalized fitness across all their runs to fill in the
reliability metrics, then write a flat, diffable output directory:
metrics.csv, optional grid CSVs, and a manifest with content hashes.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .archive import EvaluationFault, FeatureMap
from .metrics import (
    CSV_COLUMNS,
    MetricVector,
    normalized_fitness_grid,
    reliability_from_grids,
    selection_entropy,
)
from .selection import POLICY_NAMES, SelectionPolicy, select_parent
from .testbeds import make_testbed

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy-PCG64"


def checkpoint_schedule(budget: int):
    """1-2-5 spacing per decade from 100 up to the budget, budget included."""
    budget = int(budget)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if budget < 100:
        return (budget,)
    pts = []
    decade = 100
    while decade <= budget:
        for m in (1, 2, 5):
            v = m * decade
            if v <= budget:
                pts.append(v)
        decade *= 10
    if pts[-1] != budget:
        pts.append(budget)
    return tuple(pts)


@dataclass
class RunConfig:
    testbed: str
    policy: SelectionPolicy
    seed: int
    budget: int
    init_population: int = 100
    resolution: Optional[tuple] = None
    checkpoints: Optional[tuple] = None
    testbed_params: dict = field(default_factory=dict)


@dataclass
class Snapshot:
    evaluations: int
    coverage: float
    qd_raw: float
    qd_norm: float
    global_performance: float
    selection_entropy: float
    fnorm_grid: np.ndarray  # float32, NaN where empty


@dataclass
class RunRecord:
    config: RunConfig
    treatment: str
    snapshots: list
    final_fitness: np.ndarray
    final_selections: np.ndarray
    final_fnorm: np.ndarray
    testbed_info: dict
    duration: float
    rng_algorithm: str = RNG_ALGORITHM


@dataclass
class RunFault:
    config: RunConfig
    error: str


def _snapshot(fmap: FeatureMap, tb) -> Snapshot:
    n = fmap.occupied_count
    occ = fmap.occupied[:n]
    vals = fmap.fitness[occ]
    fnorm = tb.normalize(vals)
    return Snapshot(
        evaluations=fmap.evaluations,
        coverage=n / fmap.n_cells,
        qd_raw=float(vals.sum()) if n else 0.0,
        qd_norm=float(np.sum(fnorm)) if n else 0.0,
        global_performance=float(np.max(fnorm)) if n else 0.0,
        selection_entropy=selection_entropy(fmap),
        fnorm_grid=normalized_fitness_grid(fmap, tb.normalize, dtype=np.float32),
    )


def _step_chunk(fmap: FeatureMap, chunk, extras, code: int, lam: float,
                rng, iters: int) -> int:
    """Run `iters` fused iterations on the map's arrays; sync scalars back."""
    state = np.array([fmap.total_selections, fmap.evaluations,
                      fmap.occupied_count], np.int64)
    done = chunk(iters, code, lam, rng, fmap.fitness, fmap.descriptors,
                 fmap.genomes, fmap.sel_i, fmap.surv_i, fmap.sel_c,
                 fmap.surv_c, fmap.curiosity, fmap.generation,
                 fmap.ratio_i, fmap.bonus_i, fmap.ratio_c, fmap.bonus_c,
                 fmap.occupied, fmap._ties, state, fmap.rows, fmap.cols,
                 fmap.lo1, fmap.hi1, fmap.lo2, fmap.hi2, fmap.sign,
                 fmap.maximize, *extras)
    fmap.total_selections = int(state[0])
    fmap.evaluations = int(state[1])
    fmap.occupied_count = int(state[2])
    return int(done)


def run(config: RunConfig) -> RunRecord:
    """Execute one seeded run: random init, then select/mutate/insert to budget."""
    t0 = time.perf_counter()
    if config.init_population < 1:
        raise ValueError("init_population must be >= 1")
    if config.budget < config.init_population:
        raise ValueError("budget must cover the initial population")
    tb = make_testbed(config.testbed, **config.testbed_params)
    resolution = tuple(config.resolution) if config.resolution else tb.default_resolution
    if config.checkpoints:
        cps = tuple(int(v) for v in config.checkpoints)
        if list(cps) != sorted(set(cps)):
            raise ValueError("checkpoints must be strictly increasing")
        if cps[-1] > config.budget:
            raise ValueError("checkpoints exceed the budget")
    else:
        cps = checkpoint_schedule(config.budget)

    fmap = FeatureMap(
        bounds=tb.bounds,
        resolution=resolution,
        maximize=tb.maximize,
        genome_size=tb.genome_size,
        genome_dtype=tb.genome_dtype,
    )
    rng = np.random.default_rng(config.seed)
    snapshots = []
    cp_iter = iter(cps)
    next_cp = next(cp_iter, None)

    for _ in range(config.init_population):
        g = tb.random_genome(rng)
        f, d = tb.evaluate(g)
        fmap.try_insert(g, f, d)
        if fmap.evaluations == next_cp:
            snapshots.append(_snapshot(fmap, tb))
            next_cp = next(cp_iter, None)

    policy = config.policy
    budget = config.budget
    stepper = getattr(tb, "stepper", None)
    if stepper is not None:
        # fused numba loop between checkpoints; draw-for-draw identical to
        # the per-call path below (each iteration is one evaluation)
        chunk, extras = stepper()
        code = POLICY_NAMES.index(policy.kind)
        while fmap.evaluations < budget:
            target = budget if next_cp is None else next_cp
            iters = target - fmap.evaluations
            done = _step_chunk(fmap, chunk, extras, code, policy.lam, rng, iters)
            if done < iters:
                raise EvaluationFault(
                    f"testbed {config.testbed!r} produced a non-finite fitness")
            if fmap.evaluations == next_cp:
                snapshots.append(_snapshot(fmap, tb))
                next_cp = next(cp_iter, None)
    else:
        while fmap.evaluations < budget:
            cell = select_parent(fmap, policy, rng)
            fmap.record_selection(cell)
            child = tb.mutate(fmap.genome_at(cell), rng)
            f, d = tb.evaluate(child)
            outcome = fmap.try_insert(child, f, d)
            fmap.record_outcome(cell, outcome)
            if fmap.evaluations == next_cp:
                snapshots.append(_snapshot(fmap, tb))
                next_cp = next(cp_iter, None)

    return RunRecord(
        config=config,
        treatment=tb.treatment,
        snapshots=snapshots,
        final_fitness=fmap.fitness_grid(),
        final_selections=fmap.selection_grid(),
        final_fnorm=normalized_fitness_grid(fmap, tb.normalize),
        testbed_info=tb.describe(),
        duration=time.perf_counter() - t0,
    )


def run_experiment(configs: Sequence[RunConfig], parallelism: int = 1,
                   progress: Optional[Callable] = None) -> list:
    """Run a batch; output order matches input order, faults don't stop the batch."""

    def _one(item):
        i, cfg = item
        try:
            rec = run(cfg)
        except Exception as exc:
            log.error("run seed=%s policy=%s testbed=%s failed: %s",
                      cfg.seed, cfg.policy.kind, cfg.testbed, exc)
            rec = RunFault(config=cfg, error=f"{type(exc).__name__}: {exc}")
        if progress is not None:
            progress(rec)
        return i, rec

    results = [None] * len(configs)
    if parallelism <= 1:
        for item in enumerate(configs):
            i, rec = _one(item)
            results[i] = rec
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            for i, rec in pool.map(_one, enumerate(configs)):
                results[i] = rec
    return results


@dataclass
class ExperimentResult:
    out_dir: Path
    records: list
    faults: list
    metrics_path: Path
    manifest_path: Path


def pooled_best_known(records_by_treatment: dict) -> dict:
    """Per-cell best normalized fitness over all final grids of each treatment."""
    out = {}
    for treatment, records in records_by_treatment.items():
        stack = np.stack([rec.final_fnorm for rec in records])
        out[treatment] = np.fmax.reduce(stack, axis=0)
    return out


def metric_rows(records: Sequence[RunRecord]) -> list:
    """Per-checkpoint CSV rows with pooled reliability, in record order."""
    by_treatment = {}
    for rec in records:
        by_treatment.setdefault(rec.treatment, []).append(rec)
    best_known = pooled_best_known(by_treatment)
    rows = []
    for rec in records:
        best = best_known[rec.treatment]
        for snap in rec.snapshots:
            rel, prec = reliability_from_grids(snap.fnorm_grid, best)
            vec = MetricVector(
                global_performance=snap.global_performance,
                global_reliability=rel,
                precision=prec,
                coverage=snap.coverage,
                qd_score=snap.qd_norm,
                selection_entropy=snap.selection_entropy,
                evaluations=snap.evaluations,
            )
            rows.append(vec.as_row(rec.config.seed, rec.config.policy.kind, rec.treatment))
    return rows


def write_metrics_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)


def write_fitness_grid(path, grid: np.ndarray) -> None:
    """Row-major CSV matrix; empty cells as the literal string nan."""
    with open(path, "w") as fh:
        for row in np.asarray(grid, float):
            fh.write(",".join("nan" if np.isnan(v) else repr(float(v)) for v in row))
            fh.write("\n")


def write_selection_grid(path, grid: np.ndarray) -> None:
    with open(path, "w") as fh:
        for row in np.asarray(grid):
            fh.write(",".join(str(int(v)) for v in row))
            fh.write("\n")


def read_grid(path, kind: str) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if kind == "fitness":
                rows.append([float(v) for v in line.split(",")])
            else:
                rows.append([int(v) for v in line.split(",")])
    dtype = float if kind == "fitness" else np.int64
    return np.array(rows, dtype=dtype)


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir, payload: dict) -> Path:
    path = Path(out_dir) / "manifest"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(out_dir) -> dict:
    with open(Path(out_dir) / "manifest") as fh:
        return json.load(fh)


def add_manifest_artifacts(out_dir, paths: Sequence[Path]) -> None:
    """Register extra artifacts (hashed) in an existing manifest."""
    out_dir = Path(out_dir)
    payload = read_manifest(out_dir)
    artifacts = payload.setdefault("artifacts", {})
    for p in paths:
        artifacts[str(Path(p).relative_to(out_dir))] = file_sha256(p)
    write_manifest(out_dir, payload)


def execute_experiment(configs: Sequence[RunConfig], out_dir, name: str = "experiment",
                       jobs: int = 1, write_grids: bool = False, meta: Optional[dict] = None,
                       progress: Optional[Callable] = None) -> ExperimentResult:
    """Run a config batch and persist metrics.csv, optional grids, and the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_experiment(configs, parallelism=jobs, progress=progress)
    records = [r for r in results if isinstance(r, RunRecord)]
    faults = [r for r in results if isinstance(r, RunFault)]

    rows = metric_rows(records)
    metrics_path = out / "metrics.csv"
    write_metrics_csv(metrics_path, rows)
    artifacts = {"metrics.csv": file_sha256(metrics_path)}

    if write_grids and records:
        grid_dir = out / "grids"
        grid_dir.mkdir(exist_ok=True)
        single = len(configs) == 1
        treatments_seen = {rec.treatment for rec in records}
        for rec in records:
            if single:
                stem = f"run_{rec.config.seed}"
            elif len(treatments_seen) > 1:
                stem = f"run_{rec.treatment}_{rec.config.policy.kind}_{rec.config.seed}"
            else:
                stem = f"run_{rec.config.policy.kind}_{rec.config.seed}"
            fit_path = grid_dir / f"{stem}_fitness.csv"
            sel_path = grid_dir / f"{stem}_selections.csv"
            write_fitness_grid(fit_path, rec.final_fitness)
            write_selection_grid(sel_path, rec.final_selections)
            artifacts[f"grids/{fit_path.name}"] = file_sha256(fit_path)
            artifacts[f"grids/{sel_path.name}"] = file_sha256(sel_path)

    testbed_infos = []
    seen = set()
    for rec in records:
        if rec.treatment not in seen:
            seen.add(rec.treatment)
            testbed_infos.append({"treatment": rec.treatment, **rec.testbed_info})
    payload = {
        "name": name,
        "rng_algorithm": RNG_ALGORITHM,
        "runs": [
            {"seed": cfg.seed, "method": cfg.policy.kind, "testbed": cfg.testbed}
            for cfg in configs
        ],
        "testbeds": testbed_infos,
        "faults": [
            {"seed": f.config.seed, "method": f.config.policy.kind, "error": f.error}
            for f in faults
        ],
        "artifacts": artifacts,
    }
    if meta:
        payload["config"] = meta
    manifest_path = write_manifest(out, payload)
    return ExperimentResult(
        out_dir=out,
        records=records,
        faults=faults,
        metrics_path=metrics_path,
        manifest_path=manifest_path,
    )
