"""Post-run statistics: AUC, Welch's t, significance tables, progress curves.

Welch p-values come from the regularized incomplete beta evaluated by the
standard continued fraction, so the library needs no stats dependency. A
method "beats" another on a metric when its mean AUC is higher and the
two-sided Welch p clears the Bonferroni-corrected threshold; win counts are
computed per treatment and summed across treatments.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .metrics import METRIC_COLUMNS
from .selection import POLICY_NAMES

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AucSample:
    treatment: str
    metric: str
    method: str
    seed: int
    auc: float


def auc(evaluations, values) -> float:
    """Trapezoidal area under a metric series on the linear evaluation axis."""
    xs = np.asarray(evaluations, float)
    ys = np.asarray(values, float)
    if xs.shape != ys.shape:
        raise ValueError("checkpoint and value lengths differ")
    if xs.size < 2:
        raise ValueError("auc needs >= 2 checkpoints")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("checkpoints must be strictly increasing")
    return float(np.trapezoid(ys, xs))


def _beta_cf(a: float, b: float, x: float, max_iter: int = 300, eps: float = 3e-16) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) with the symmetry transform for fast convergence."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, dof: float) -> float:
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    return regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t))


def welch_t(a, b):
    """(t, dof, two-sided p) for unequal-variance samples.

    Degenerate inputs (both samples zero variance) fall back to p = 1 for
    equal means and p = 0 otherwise, with a log note.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise ValueError("welch_t needs >= 2 samples per group")
    ma, mb = a.mean(), b.mean()
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0.0 and vb == 0.0:
        dof = float(na + nb - 2)
        if ma == mb:
            log.warning("welch_t: both samples constant and equal; p = 1 by convention")
            return 0.0, dof, 1.0
        log.warning("welch_t: both samples constant, different means; p = 0 by convention")
        return math.copysign(math.inf, ma - mb), dof, 0.0
    sa = va / na
    sb = vb / nb
    se2 = sa + sb
    t = (ma - mb) / math.sqrt(se2)
    dof = se2 * se2 / (sa * sa / (na - 1) + sb * sb / (nb - 1))
    return float(t), float(dof), student_t_two_sided_p(t, dof)


def significance_counts(samples: Sequence[AucSample], alpha: float = 0.05,
                        comparisons: int = 8, one_sided: bool = False):
    """Win counts per (metric, method), summed over treatments.

    Within each treatment and metric, method A beats method B when A's mean
    AUC is higher and the Welch p clears alpha/comparisons. All reported
    metrics are oriented higher-is-better, so no per-metric direction flip
    is needed.
    """
    threshold = alpha / comparisons
    grouped: dict = {}
    metrics_seen: list = []
    methods_seen: list = []
    for s in samples:
        grouped.setdefault((s.treatment, s.metric), {}).setdefault(s.method, []).append(s.auc)
        if s.metric not in metrics_seen:
            metrics_seen.append(s.metric)
        if s.method not in methods_seen:
            methods_seen.append(s.method)
    methods = [m for m in POLICY_NAMES if m in methods_seen]
    methods += [m for m in methods_seen if m not in methods]
    metrics = [m for m in METRIC_COLUMNS if m in metrics_seen]
    metrics += [m for m in metrics_seen if m not in metrics]

    table = {metric: {method: 0 for method in methods} for metric in metrics}
    for (_, metric), per_method in grouped.items():
        names = [m for m in methods if m in per_method]
        for a_name in names:
            a_vals = per_method[a_name]
            for b_name in names:
                if a_name == b_name:
                    continue
                b_vals = per_method[b_name]
                if np.mean(a_vals) <= np.mean(b_vals):
                    continue
                _, _, p = welch_t(a_vals, b_vals)
                if one_sided:
                    # the mean-direction gate already matched the tested side
                    p = p / 2.0
                if p < threshold:
                    table[metric][a_name] += 1
    return table, methods


def progress_summary(rows: Sequence[dict]):
    """Per-checkpoint mean and normal 95% CI for each treatment/method/metric."""
    grouped: dict = {}
    for row in rows:
        key = (row["testbed"], row["method"], int(row["evaluations"]))
        grouped.setdefault(key, []).append(row)
    out = []
    for (treatment, method, evals) in sorted(
            grouped, key=lambda k: (k[0], _method_order(k[1]), k[2])):
        bucket = grouped[(treatment, method, evals)]
        for metric in METRIC_COLUMNS:
            vals = np.array([float(r[metric]) for r in bucket])
            mean = float(vals.mean())
            if vals.size > 1:
                half = 1.96 * float(vals.std(ddof=1)) / math.sqrt(vals.size)
            else:
                half = 0.0
            out.append({
                "testbed": treatment,
                "method": method,
                "evaluations": evals,
                "metric": metric,
                "mean": mean,
                "ci_low": mean - half,
                "ci_high": mean + half,
            })
    return out


def _method_order(name: str) -> int:
    try:
        return POLICY_NAMES.index(name)
    except ValueError:
        return len(POLICY_NAMES)


def load_metrics_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"no metric rows in {path}")
    return rows


def auc_samples(rows: Sequence[dict]) -> list:
    """Per-run AUC for every metric, validated on a shared checkpoint grid."""
    runs: dict = {}
    for row in rows:
        key = (row["testbed"], row["method"], row["run_id"])
        runs.setdefault(key, []).append(row)
    grids: dict = {}
    samples = []
    for (treatment, method, run_id), run_rows in runs.items():
        run_rows.sort(key=lambda r: int(r["evaluations"]))
        evals = tuple(int(r["evaluations"]) for r in run_rows)
        known = grids.setdefault(treatment, evals)
        if known != evals:
            raise ValueError(
                f"checkpoint grids differ within treatment {treatment!r}")
        for metric in METRIC_COLUMNS:
            series = [float(r[metric]) for r in run_rows]
            samples.append(AucSample(
                treatment=treatment,
                metric=metric,
                method=method,
                seed=int(run_id),
                auc=auc(evals, series),
            ))
    return samples


def write_significance_csv(path, table: dict, methods: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", *methods])
        for metric, counts in table.items():
            writer.writerow([metric, *(str(counts[m]) for m in methods)])


def write_progress_csv(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["testbed", "method", "evaluations", "metric",
                         "mean", "ci_low", "ci_high"])
        for row in rows:
            writer.writerow([
                row["testbed"], row["method"], str(row["evaluations"]), row["metric"],
                repr(row["mean"]), repr(row["ci_low"]), repr(row["ci_high"]),
            ])


@dataclass
class AnalysisResult:
    table: dict
    methods: list
    significance_path: Path
    progress_path: Path
    figure_paths: list


def analyze_directory(exp_dir, alpha: float = 0.05, comparisons: int = 8,
                      one_sided: bool = False, render: bool = True) -> AnalysisResult:
    """Read an experiment's metrics.csv and write the derived tables and figures."""
    exp_dir = Path(exp_dir)
    rows = load_metrics_csv(exp_dir / "metrics.csv")
    samples = auc_samples(rows)
    table, methods = significance_counts(samples, alpha=alpha,
                                         comparisons=comparisons, one_sided=one_sided)
    sig_path = exp_dir / "significance.csv"
    write_significance_csv(sig_path, table, methods)
    prog_rows = progress_summary(rows)
    prog_path = exp_dir / "progress_summary.csv"
    write_progress_csv(prog_path, prog_rows)
    figure_paths = []
    if render:
        from .figures import render_progress  # matplotlib import stays off the run path

        figure_paths = render_progress(prog_rows, exp_dir / "figures")
    from .runner import add_manifest_artifacts, read_manifest

    try:
        read_manifest(exp_dir)
    except FileNotFoundError:
        log.info("no manifest in %s; skipping artifact registration", exp_dir)
    else:
        add_manifest_artifacts(exp_dir, [sig_path, prog_path, *figure_paths])
    return AnalysisResult(
        table=table,
        methods=methods,
        significance_path=sig_path,
        progress_path=prog_path,
        figure_paths=figure_paths,
    )
