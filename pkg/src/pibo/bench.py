"""Brute-force oracle and repeated-run benchmarks against it."""

from __future__ import annotations

import csv
import io
import logging
import math
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .bo import BoConfig, Objective, RunTrace, run_bo
from .errors import CapacityError, PiboError
from .orchestrator import PiboConfig, derived_seeds, run_pibo
from .space import DesignPoint, SearchSpace, enumerate_all

log = logging.getLogger(__name__)

ENUMERATION_CAP = 2_000_000
HIT_SLACK = 1e-9


@dataclass
class BruteForceResult:
    point: DesignPoint
    value: float
    # objective per grid point in row-major order, when requested
    table: np.ndarray | None = field(default=None, repr=False)


def brute_force(
    space: SearchSpace,
    objective: Objective,
    cap: int = ENUMERATION_CAP,
    keep_table: bool = False,
    table_path: str | Path | None = None,
) -> BruteForceResult:
    """Evaluate every grid point; ties go to the first point in row-major order."""
    if space.total_count > cap:
        raise CapacityError(
            f"grid has {space.total_count} points, above the enumeration cap of {cap}"
        )
    table = np.empty(space.total_count) if (keep_table or table_path) else None
    best_point, best_value = None, math.inf
    for k, point in enumerate(enumerate_all(space)):
        v = float(objective(point))
        if table is not None:
            table[k] = v
        if v < best_value:
            best_point, best_value = point, v
    if table_path is not None:
        with open(table_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(space.names) + ["objective"])
            for k, point in enumerate(enumerate_all(space)):
                w.writerow([f"{v:.6g}" for v in point.values] + [repr(float(table[k]))])
    return BruteForceResult(best_point, best_value, table if keep_table else None)


def _first_reaching(trace: RunTrace, threshold: float) -> int | None:
    """Number of evaluations until the incumbent first drops to ``threshold``."""
    for r in trace.records:
        if r.best_value <= threshold:
            return r.eval_index + 1
    return None


@dataclass
class SeedRecord:
    seed: int
    total_evaluations: int
    best_value: float
    best_point: DesignPoint | None
    evals_to_within_tol: int | None
    evals_to_global: int | None
    hit_global: bool
    error: str | None = None


@dataclass
class BenchReport:
    records: list[SeedRecord]
    oracle_value: float
    rel_tol: float = 0.01

    @property
    def ok_records(self) -> list[SeedRecord]:
        return [r for r in self.records if r.error is None]

    @property
    def success_rate(self) -> float:
        ok = self.ok_records
        return sum(r.hit_global for r in ok) / len(ok) if ok else math.nan

    @property
    def within_tol_rate(self) -> float:
        ok = self.ok_records
        return sum(r.evals_to_within_tol is not None for r in ok) / len(ok) if ok else math.nan

    @property
    def median_evals_to_global(self) -> float:
        hits = [r.evals_to_global for r in self.ok_records if r.hit_global]
        return float(statistics.median(hits)) if hits else math.nan

    def quantiles(self, qs: Sequence[float] = (0.1, 0.5, 0.9)) -> dict[float, float]:
        hits = [r.evals_to_global for r in self.ok_records if r.hit_global]
        if not hits:
            return {q: math.nan for q in qs}
        return {q: float(np.quantile(hits, q)) for q in qs}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([
            "seed", "total_evaluations", "best_value", "best_point",
            "evals_to_within_tol", "evals_to_global", "hit_global", "error",
        ])
        for r in self.records:
            w.writerow([
                r.seed, r.total_evaluations, repr(r.best_value),
                "" if r.best_point is None else " ".join(f"{v:g}" for v in r.best_point.values),
                "" if r.evals_to_within_tol is None else r.evals_to_within_tol,
                "" if r.evals_to_global is None else r.evals_to_global,
                int(r.hit_global), r.error or "",
            ])
        return buf.getvalue()

    def summary(self) -> str:
        def fmt(x):
            return "undefined" if isinstance(x, float) and math.isnan(x) else f"{x:.4g}"

        q = self.quantiles()
        lines = [
            f"seeds:                 {len(self.records)} ({len(self.records) - len(self.ok_records)} failed)",
            f"oracle optimum:        {self.oracle_value!r}",
            f"hit global optimum:    {fmt(self.success_rate)}",
            f"within {self.rel_tol:.0%} of optimum:  {fmt(self.within_tol_rate)}",
            f"median evals to global: {fmt(self.median_evals_to_global)}",
            "evals-to-global quantiles: " + ", ".join(f"q{int(k * 100)}={fmt(v)}" for k, v in q.items()),
        ]
        return "\n".join(lines)


def seed_record(seed, trace: RunTrace, oracle_value: float, rel_tol: float) -> SeedRecord:
    best_point, best_value = trace.best
    hit = best_value <= oracle_value + HIT_SLACK
    return SeedRecord(
        seed=seed,
        total_evaluations=len(trace),
        best_value=best_value,
        best_point=best_point,
        evals_to_within_tol=_first_reaching(trace, oracle_value + rel_tol * abs(oracle_value)),
        evals_to_global=_first_reaching(trace, oracle_value + HIT_SLACK),
        hit_global=hit,
    )


def benchmark(
    space: SearchSpace,
    objective: Objective,
    pibo_config: PiboConfig,
    seeds: Sequence[int],
    oracle_value: float | None = None,
    rel_tol: float = 0.01,
) -> BenchReport:
    """Run PIBO once per master seed and score each run against the oracle."""
    if oracle_value is None:
        oracle_value = brute_force(space, objective).value
    records = []
    for seed in sorted(seeds):
        try:
            result = run_pibo(space, objective, replace(pibo_config, master_seed=seed))
        except PiboError as exc:
            log.warning("seed %s failed: %s", seed, exc)
            records.append(SeedRecord(seed, 0, math.nan, None, None, None, False, str(exc)))
            continue
        records.append(seed_record(seed, result.trace, oracle_value, rel_tol))
    return BenchReport(records, oracle_value, rel_tol)


@dataclass
class Comparison:
    seeds: list[int]
    solo_best: list[float]
    pibo_best: list[float]
    budget: int

    @staticmethod
    def _var(xs):
        # exact rational arithmetic: identical values give exactly zero
        return float(statistics.variance(xs)) if len(xs) > 1 else 0.0

    @property
    def solo_mean(self) -> float:
        return float(np.mean(self.solo_best))

    @property
    def pibo_mean(self) -> float:
        return float(np.mean(self.pibo_best))

    @property
    def solo_variance(self) -> float:
        return self._var(self.solo_best)

    @property
    def pibo_variance(self) -> float:
        return self._var(self.pibo_best)

    @property
    def pibo_win_rate(self) -> float:
        return float(np.mean([p < s for p, s in zip(self.pibo_best, self.solo_best)]))

    @property
    def tie_rate(self) -> float:
        return float(np.mean([p == s for p, s in zip(self.pibo_best, self.solo_best)]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed", "solo_best", "pibo_best"])
        for row in zip(self.seeds, self.solo_best, self.pibo_best):
            w.writerow([row[0], repr(row[1]), repr(row[2])])
        return buf.getvalue()

    def summary(self) -> str:
        return "\n".join([
            f"budget per run:   {self.budget}",
            f"seeds:            {len(self.seeds)}",
            f"solo BO  mean={self.solo_mean:.6g} variance={self.solo_variance:.6g}",
            f"PIBO     mean={self.pibo_mean:.6g} variance={self.pibo_variance:.6g}",
            f"PIBO better: {self.pibo_win_rate:.3f}  ties: {self.tie_rate:.3f}",
        ])


def solo_config(pibo_config: PiboConfig, seed: int, total_budget: int | None = None) -> BoConfig:
    """Solo BO with PIBO's total budget and its total random-initialization count."""
    budget = pibo_config.budget if total_budget is None else total_budget
    init = min(pibo_config.workers * pibo_config.per_worker.init_samples, budget)
    return replace(pibo_config.per_worker, init_samples=init, iterations=budget - init, seed=seed)


def compare_solo_vs_pibo(
    space: SearchSpace,
    objective: Objective,
    pibo_config: PiboConfig,
    seeds: Sequence[int],
    total_budget: int | None = None,
) -> Comparison:
    """Best values of one solo BO and one PIBO run per seed at equal budgets.

    ``total_budget`` defaults to the PIBO budget; when given, PIBO's phase-3
    iteration count absorbs the difference.
    """
    if total_budget is not None and total_budget != pibo_config.budget:
        extra = total_budget - pibo_config.budget
        pibo_config = replace(pibo_config, final_iterations=pibo_config.final_iterations + extra)
    budget = pibo_config.budget
    seeds = sorted(seeds)
    solo, pibo = [], []
    for seed in seeds:
        solo_seed = derived_seeds(seed, 1)[0]
        _, trace = run_bo(space, objective, solo_config(pibo_config, solo_seed, budget))
        solo.append(trace.best[1])
        pibo.append(run_pibo(space, objective, replace(pibo_config, master_seed=seed)).best_value)
    return Comparison(seeds, solo, pibo, budget)
