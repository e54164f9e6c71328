"""The annotate-first-N evaluation protocol with hyper-parameter grids.

For every rumour, kernel parameter and N: the chronologically first N
classifiable messages are seeded with their gold stance, the diffusion runs,
and the remaining messages are scored.  Aggregates are unweighted means over
rumours, and the optimal parameter is the weighted-accuracy argmax at the
largest N.  Benchmarks are evaluated on the same held-out messages.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .data import Rumour
from .errors import ParameterError
from .features import BrownClusterMap, Lexicons
from .metrics import BENCHMARK_KINDS, MetricSet, benchmark_scores, compute_metrics
from .pipeline import PipelineSettings, RumourClassifier

log = logging.getLogger(__name__)

DEFAULT_N_VALUES = (10, 20, 30, 40, 50)
#: Spans four orders of magnitude and contains the tuned optimum 0.85.
DEFAULT_SIGMA_GRID = (0.1, 0.2, 0.325, 0.5, 0.85, 1.0, 2.0, 5.0, 10.0, 100.0, 1000.0)
DEFAULT_K_GRID = (5, 10, 15, 20, 25, 30, 35, 40, 45, 50)

HEURISTIC_PARAM = "heuristic"


@dataclass
class ExperimentConfig:
    n_values: tuple[int, ...] = DEFAULT_N_VALUES
    sigma_grid: tuple[float, ...] = DEFAULT_SIGMA_GRID
    k_grid: tuple[int, ...] = DEFAULT_K_GRID
    feature_space: str = "brown"
    kernel: str = "rbf"
    algorithm: str = "label_spreading"
    alpha: float = 1.0
    sigma_mode: str = "grid"  # fixed | grid | heuristic
    sigma_fixed: float = 0.85
    min_rumour_size: int = 50
    tol: float = 1e-3
    max_iter: int = 1000
    stemmed_variant: bool = False  # the lower-scoring stemmed/no-stop-words pipeline

    def __post_init__(self):
        if not self.n_values:
            raise ParameterError("n_values must be non-empty")
        if list(self.n_values) != sorted(self.n_values):
            raise ParameterError("n_values must be ascending")
        if self.kernel == "rbf" and self.sigma_mode == "grid" and not self.sigma_grid:
            raise ParameterError("sigma_grid must be non-empty")
        if self.kernel == "knn" and not self.k_grid:
            raise ParameterError("k_grid must be non-empty")
        if self.kernel == "knn" and self.sigma_mode == "heuristic":
            raise ParameterError("the sigma heuristic applies to the rbf kernel only")

    def param_labels(self) -> tuple:
        """Column labels of the parameter grid actually evaluated."""
        if self.sigma_mode == "heuristic":
            return (HEURISTIC_PARAM,)
        if self.kernel == "knn":
            return tuple(self.k_grid) if self.sigma_mode == "grid" else (self.k_grid[0],)
        if self.sigma_mode == "fixed":
            return (self.sigma_fixed,)
        return tuple(self.sigma_grid)

    def pipeline_settings(self) -> PipelineSettings:
        return PipelineSettings(
            feature_space=self.feature_space,
            kernel=self.kernel,
            sigma=self.sigma_fixed,
            k=self.k_grid[0] if self.k_grid else 10,
            sigma_mode="fixed" if self.sigma_mode == "grid" else self.sigma_mode,
            algorithm=self.algorithm,
            alpha=self.alpha,
            tol=self.tol,
            max_iter=self.max_iter,
            stemmed_variant=self.stemmed_variant,
        )


@dataclass
class Cell:
    """Scores of one (rumour, parameter, N) combination."""

    rumour_id: str
    param: object  # grid value or "heuristic"
    n_seeds: int
    metrics: MetricSet
    eval_size: int
    flags: tuple[str, ...] = ()


@dataclass
class ExperimentReport:
    feature_space: str
    algorithm: str
    kernel: str
    cells: list[Cell] = field(default_factory=list)
    benchmark_cells: list[Cell] = field(default_factory=list)  # param = benchmark kind
    timings: dict[str, float] = field(default_factory=dict)
    skipped: dict[str, str] = field(default_factory=dict)

    def params(self) -> list:
        return sorted({c.param for c in self.cells}, key=str)

    def n_values(self) -> list[int]:
        return sorted({c.n_seeds for c in self.cells})

    def aggregate(self, param, n_seeds: int) -> MetricSet | None:
        """Unweighted mean over rumours for one grid point."""
        picked = [c.metrics for c in self.cells if c.param == param and c.n_seeds == n_seeds]
        if not picked:
            return None
        return MetricSet(
            accuracy=float(np.mean([m.accuracy for m in picked])),
            weighted_accuracy=float(np.mean([m.weighted_accuracy for m in picked])),
            f1_macro=float(np.mean([m.f1_macro for m in picked])),
            log_loss=float(np.mean([m.log_loss for m in picked])),
        )

    def aggregate_benchmark(self, kind: str, n_seeds: int) -> MetricSet | None:
        picked = [
            c.metrics for c in self.benchmark_cells if c.param == kind and c.n_seeds == n_seeds
        ]
        if not picked:
            return None
        return MetricSet(
            accuracy=float(np.mean([m.accuracy for m in picked])),
            weighted_accuracy=float(np.mean([m.weighted_accuracy for m in picked])),
            f1_macro=float(np.mean([m.f1_macro for m in picked])),
            log_loss=float(np.mean([m.log_loss for m in picked])),
        )

    def optimal_param(self, n_seeds: int | None = None):
        """Parameter with the highest aggregate weighted accuracy."""
        n_seeds = n_seeds if n_seeds is not None else max(self.n_values())
        best, best_score = None, -1.0
        for param in self.params():
            agg = self.aggregate(param, n_seeds)
            if agg is not None and agg.weighted_accuracy > best_score:
                best, best_score = param, agg.weighted_accuracy
        return best

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        """Deterministic document (timings are reported separately)."""
        params = self.params()
        doc = {
            "feature_space": self.feature_space,
            "algorithm": self.algorithm,
            "kernel": self.kernel,
            "n_values": self.n_values(),
            "params": [str(p) for p in params],
            "optimal_param": str(self.optimal_param()) if self.cells else None,
            "rumours": sorted({c.rumour_id for c in self.cells}),
            "skipped": dict(sorted(self.skipped.items())),
            "cells": [
                {
                    "rumour": c.rumour_id,
                    "param": str(c.param),
                    "n": c.n_seeds,
                    "eval_size": c.eval_size,
                    "flags": list(c.flags),
                    **c.metrics.as_dict(),
                }
                for c in sorted(self.cells, key=lambda c: (c.rumour_id, str(c.param), c.n_seeds))
            ],
            "benchmarks": [
                {
                    "rumour": c.rumour_id,
                    "kind": str(c.param),
                    "n": c.n_seeds,
                    **c.metrics.as_dict(),
                }
                for c in sorted(
                    self.benchmark_cells, key=lambda c: (c.rumour_id, str(c.param), c.n_seeds)
                )
            ],
            "aggregates": [
                {"param": str(p), "n": n, **agg.as_dict()}
                for p in params
                for n in self.n_values()
                if (agg := self.aggregate(p, n)) is not None
            ],
            "benchmark_aggregates": [
                {"kind": kind, "n": n, **agg.as_dict()}
                for kind in BENCHMARK_KINDS
                for n in self.n_values()
                if (agg := self.aggregate_benchmark(kind, n)) is not None
            ],
        }
        return doc

    def csv_rows(self) -> Iterable[tuple]:
        """Flat (rumour, feature_space, algorithm, param, N, metric, value) rows."""
        for c in sorted(self.cells, key=lambda c: (c.rumour_id, str(c.param), c.n_seeds)):
            for metric, value in c.metrics.as_dict().items():
                yield (c.rumour_id, self.feature_space, self.algorithm, str(c.param),
                       c.n_seeds, metric, repr(value))
        for c in sorted(self.benchmark_cells, key=lambda c: (c.rumour_id, str(c.param), c.n_seeds)):
            for metric, value in c.metrics.as_dict().items():
                yield (c.rumour_id, self.feature_space, f"benchmark:{c.param}", str(c.param),
                       c.n_seeds, metric, repr(value))
        for param in self.params():
            for n in self.n_values():
                agg = self.aggregate(param, n)
                if agg is not None:
                    for metric, value in agg.as_dict().items():
                        yield ("__mean__", self.feature_space, self.algorithm, str(param),
                               n, metric, repr(value))
        for kind in BENCHMARK_KINDS:
            for n in self.n_values():
                agg = self.aggregate_benchmark(kind, n)
                if agg is not None:
                    for metric, value in agg.as_dict().items():
                        yield ("__mean__", self.feature_space, f"benchmark:{kind}", kind,
                               n, metric, repr(value))


def _uniform_fill(probs: np.ndarray) -> np.ndarray:
    """Replace all-zero rows with the uniform distribution for scoring."""
    out = probs.copy()
    empty = ~(out > 0).any(axis=1)
    out[empty] = 1.0 / 3.0
    return out


def _evaluate_rumour(
    rumour: Rumour,
    cfg: ExperimentConfig,
    cluster_map: BrownClusterMap | None,
    lexicons: Lexicons | None,
) -> tuple[list[Cell], list[Cell], float, str | None]:
    start = time.perf_counter()
    classifier = RumourClassifier(rumour, cfg.pipeline_settings(), cluster_map, lexicons)
    messages = classifier.messages
    gold = {m.id: m.gold_stance for m in messages if m.gold_stance is not None}
    if len(gold) < 2:
        return [], [], time.perf_counter() - start, "not enough gold labels"

    cells: list[Cell] = []
    bench: list[Cell] = []
    seen_bench_n: set[int] = set()
    for param in cfg.param_labels():
        for n in cfg.n_values:
            if n >= len(messages):
                continue
            seed_msgs = messages[:n]
            eval_msgs = messages[n:]
            seeds = {m.id: m.gold_stance for m in seed_msgs if m.gold_stance is not None}
            if not seeds:
                continue
            truth_ids = [m.id for m in eval_msgs if m.gold_stance is not None]
            if not truth_ids:
                continue

            override = None if param == HEURISTIC_PARAM else float(param)
            result = classifier.classify(seeds, param=override)

            rows = [classifier.index[mid] for mid in truth_ids]
            truth = np.array([gold[mid] for mid in truth_ids])
            pred = result.classes[rows]
            probs = _uniform_fill(result.distribution.probs)[rows]
            metrics = compute_metrics(truth, pred, probs)
            cells.append(
                Cell(rumour.rumour_id, param, n, metrics, len(truth_ids), tuple(result.flags))
            )

            if n not in seen_bench_n:
                seen_bench_n.add(n)
                for kind in BENCHMARK_KINDS:
                    bench.append(
                        Cell(rumour.rumour_id, kind, n, benchmark_scores(truth, kind),
                             len(truth_ids))
                    )
    return cells, bench, time.perf_counter() - start, None


def run_experiment(
    rumours: Sequence[Rumour],
    cfg: ExperimentConfig,
    cluster_map: BrownClusterMap | None = None,
    lexicons: Lexicons | None = None,
    workers: int = 1,
) -> ExperimentReport:
    """Run the full protocol; rumours must already satisfy the size filter."""
    report = ExperimentReport(cfg.feature_space, cfg.algorithm, cfg.kernel)
    ordered = sorted(rumours, key=lambda r: r.rumour_id)

    def job(rumour: Rumour):
        log.info("evaluating rumour %s (%d messages)", rumour.rumour_id, len(rumour.messages))
        return rumour.rumour_id, _evaluate_rumour(rumour, cfg, cluster_map, lexicons)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(job, ordered))
    else:
        results = dict(job(r) for r in ordered)

    for rumour in ordered:
        cells, bench, elapsed, skip_reason = results[rumour.rumour_id]
        report.timings[rumour.rumour_id] = elapsed
        if skip_reason:
            report.skipped[rumour.rumour_id] = skip_reason
            continue
        report.cells.extend(cells)
        report.benchmark_cells.extend(bench)
    return report


def write_report(report: ExperimentReport, out_dir: str | Path) -> dict[str, Path]:
    """Emit report.json + report.csv (deterministic) and timings.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out / "report.json",
        "csv": out / "report.csv",
        "timings": out / "timings.json",
    }
    with open(paths["json"], "w", encoding="utf-8") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(paths["csv"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rumour", "feature_space", "algorithm", "param", "n", "metric", "value"])
        writer.writerows(report.csv_rows())
    with open(paths["timings"], "w", encoding="utf-8") as fh:
        json.dump(dict(sorted(report.timings.items())), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
