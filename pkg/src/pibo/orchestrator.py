"""Parallel BO: independent small runs, a canonical merge, then one large run.

Phase 1 runs ``workers`` independent :func:`~pibo.bo.run_bo` instances, each
seeded from the master seed. Phase 2 merges their observations into one
dataset sorted by index tuple. Phase 3 continues the acquisition loop on the
merged data for ``final_iterations`` more evaluations, with no new random
initialization.

The result is a pure function of (space, objective, config): worker seeds are
derived, worker results are collected in worker order, and the merge is
canonical, so sequential and concurrent execution agree exactly.
"""

from __future__ import annotations

import logging
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bo import BoConfig, Objective, Phase, RunTrace, acquire_loop, run_bo
from .errors import DataIntegrityError, ObjectiveError, PreconditionError
from .gp import Dataset
from .space import DesignPoint, SearchSpace

log = logging.getLogger(__name__)

EXECUTORS = ("sequential", "thread", "process")


@dataclass(frozen=True)
class PiboConfig:
    workers: int = 4
    per_worker: BoConfig = BoConfig(init_samples=10, iterations=50)
    final_iterations: int = 20
    master_seed: int = 0
    executor: str = "thread"

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise PreconditionError(f"workers must be >= 1, got {self.workers}")
        if self.final_iterations < 0:
            raise PreconditionError(f"final_iterations must be >= 0, got {self.final_iterations}")
        if self.executor not in EXECUTORS:
            raise PreconditionError(f"executor must be one of {EXECUTORS}, got {self.executor!r}")

    @property
    def budget(self) -> int:
        w = self.per_worker
        return self.workers * (w.init_samples + w.iterations) + self.final_iterations


def derived_seeds(master_seed: int, workers: int) -> list[int]:
    """``workers`` phase-1 seeds followed by one phase-3 seed.

    Seed ``i`` depends only on ``(master_seed, i)``, not on the worker count.
    """
    children = np.random.SeedSequence(master_seed).spawn(workers + 1)
    seeds = [int(c.generate_state(1, np.uint64)[0]) for c in children]
    if len(set(seeds)) != len(seeds):
        raise PreconditionError(f"seed collision for master seed {master_seed}")
    return seeds


def worker_seeds(master_seed: int, workers: int) -> list[int]:
    return derived_seeds(master_seed, workers)[:workers]


def merge_datasets(datasets, tol: float = 1e-9) -> Dataset:
    """Union keyed by index tuple, sorted canonically."""
    merged: dict[tuple[int, ...], tuple[DesignPoint, float]] = {}
    for ds in datasets:
        for point, value in ds:
            prev = merged.get(point.indices)
            if prev is None:
                merged[point.indices] = (point, value)
            elif abs(prev[1] - value) > tol:
                raise DataIntegrityError(
                    f"inconsistent values at {point}: {prev[1]!r} vs {value!r}"
                )
    keys = sorted(merged)
    return Dataset([merged[k][0] for k in keys], [merged[k][1] for k in keys])


@dataclass
class PiboResult:
    dataset: Dataset
    trace: RunTrace
    best_point: DesignPoint
    best_value: float
    worker_datasets: list[Dataset] = field(default_factory=list, repr=False)
    merged_size: int = 0

    @property
    def evaluations(self) -> int:
        return len(self.trace)


def _worker(space: SearchSpace, objective: Objective, config: BoConfig, worker_id: int):
    return run_bo(space, objective, config, worker_id=worker_id)


def _run_phase1(space, objective, configs, executor_kind: str, executor: Executor | None):
    jobs = [(space, objective, cfg, i) for i, cfg in enumerate(configs)]
    if executor is None and executor_kind == "sequential":
        return [_worker(*job) for job in jobs]
    own = executor is None
    if own:
        pool_cls = ThreadPoolExecutor if executor_kind == "thread" else ProcessPoolExecutor
        executor = pool_cls(max_workers=len(jobs))
    try:
        futures = [executor.submit(_worker, *job) for job in jobs]
        results, first_error = [], None
        # collect in worker order; the lowest failing worker id is reported
        for fut in futures:
            try:
                results.append(fut.result())
            except ObjectiveError as exc:
                first_error = first_error or exc
        if first_error is not None:
            raise first_error
        return results
    finally:
        if own:
            executor.shutdown(wait=True)


def run_pibo(
    space: SearchSpace,
    objective: Objective,
    config: PiboConfig = PiboConfig(),
    executor: Executor | None = None,
) -> PiboResult:
    """Run the three PIBO phases.

    ``executor`` overrides ``config.executor`` with a caller-owned pool.
    """
    if config.budget > space.total_count:
        raise PreconditionError(
            f"PIBO budget {config.budget} exceeds the {space.total_count} grid points"
        )
    seeds = derived_seeds(config.master_seed, config.workers)
    configs = [replace(config.per_worker, seed=s) for s in seeds[:-1]]
    results = _run_phase1(space, objective, configs, config.executor, executor)
    datasets = [ds for ds, _ in results]
    trace = RunTrace.concat(t for _, t in results)

    merged = merge_datasets(datasets)
    merged_size = len(merged)
    log.debug("merged %d worker evaluations into %d points", len(trace), merged_size)

    if config.final_iterations > 0 and merged_size < space.total_count:
        final_config = replace(config.per_worker, seed=seeds[-1])
        acquire_loop(
            space, objective, merged, trace, final_config,
            budget=config.final_iterations, phase=Phase.FINAL,
            worker_id=config.workers, seed=seeds[-1],
        )
    best_point, best_value = merged.best()
    return PiboResult(merged, trace, best_point, best_value, datasets, merged_size)
