from __future__ import annotations

import statistics
import time
from functools import partial
from typing import Literal

from varexp import ExponentField, build_uniform, parse
from varexp.elliptic import solve_torsion
from varexp.models import SolverOptions
from varexp.pipeline import run_independent_sync

Metric = Literal["curvature", "diagonal"]
METRICS: tuple[Metric, ...] = ("curvature", "diagonal")


def _torsion(n_cells: int, metric: Metric) -> float:
    grid = build_uniform(0.0, 1.0, n_cells)
    p = ExponentField.from_expression(parse("2 + 0.5*x"), grid)
    start = time.perf_counter()
    report = solve_torsion(1.0, p, opts=SolverOptions(metric=metric))
    elapsed = (time.perf_counter() - start) * 1000
    if not report.converged:
        raise RuntimeError(f"n={n_cells} {metric}: {report.message}")
    return elapsed


def run_benchmark(repeats: int = 5, sizes: tuple[int, ...] = (64, 128, 256, 512)) -> None:
    print("varexp torsion benchmark")
    print(f"Repeats: {repeats}")
    for metric in METRICS:
        for n in sizes:
            if metric == "diagonal" and n > 128:
                continue
            jobs = [partial(_torsion, n, metric) for _ in range(repeats)]
            durations = run_independent_sync(jobs, max_workers=1)
            print(f"{metric:9s} n={n:5d} avg: {statistics.mean(durations):9.2f} ms")


if __name__ == "__main__":
    run_benchmark()
