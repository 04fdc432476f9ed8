"""Sequential Bayesian optimization over a discrete grid.

Loop: draw random initial points, then repeatedly fit the GP on every
observation so far, pick the acquisition optimum among unvisited points and
evaluate it, until the iteration budget is spent or the grid is exhausted.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

import numpy as np

from .acquisition import AcquisitionConfig, select
from .errors import ExhaustedError, ObjectiveError, PreconditionError
from .gp import (
    DEFAULT_JITTER,
    DEFAULT_THETA,
    Dataset,
    GpModel,
    GridPredictor,
    KernelParams,
    fit,
    select_theta,
)
from .space import DesignPoint, SearchSpace, sample_uniform

Objective = Callable[[DesignPoint], float]


class Phase(str, Enum):
    INIT = "init"
    ACQUIRE = "acquire"
    FINAL = "final"


class StopReason(str, Enum):
    BUDGET = "budget"
    EXHAUSTED = "exhausted"
    STALLED = "stalled"


@dataclass(frozen=True)
class BoConfig:
    init_samples: int = 10
    iterations: int = 50
    theta: float = DEFAULT_THETA
    # None keeps theta fixed; otherwise theta is re-selected by marginal
    # likelihood over this grid every ``refit_every`` new observations
    theta_grid: tuple[float, ...] | None = None
    refit_every: int = 10
    jitter: float = DEFAULT_JITTER
    acquisition: AcquisitionConfig = AcquisitionConfig()
    seed: int = 0
    patience: int | None = None
    rel_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.init_samples < 1:
            raise PreconditionError(f"init_samples must be >= 1, got {self.init_samples}")
        if self.iterations < 0:
            raise PreconditionError(f"iterations must be >= 0, got {self.iterations}")
        if self.refit_every < 1:
            raise PreconditionError(f"refit_every must be >= 1, got {self.refit_every}")
        if self.theta_grid is not None:
            object.__setattr__(self, "theta_grid", tuple(float(t) for t in self.theta_grid))
        KernelParams(self.theta, self.jitter)


@dataclass(frozen=True)
class TraceRecord:
    eval_index: int
    worker_id: int
    phase: Phase
    point: DesignPoint
    value: float
    best_value: float
    best_point: DesignPoint
    score: float = math.nan


TRACE_HEADER = (
    "eval_index", "worker_id", "phase", "W", "S", "T", "H1", "H2", "er",
    "z_diff", "loss", "objective", "best_value",
)


@dataclass
class RunTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def append(
        self, worker_id: int, phase: Phase, point: DesignPoint, value: float,
        score: float = math.nan,
    ) -> TraceRecord:
        if self.records and not value < self.records[-1].best_value:
            best_value, best_point = self.records[-1].best_value, self.records[-1].best_point
        else:
            best_value, best_point = value, point
        rec = TraceRecord(
            len(self.records), worker_id, Phase(phase), point, value, best_value, best_point, score
        )
        self.records.append(rec)
        return rec

    @classmethod
    def concat(cls, traces: Iterable["RunTrace"]) -> "RunTrace":
        """Chain traces in order, renumbering and recomputing the incumbent."""
        out = cls()
        for t in traces:
            for r in t.records:
                out.append(r.worker_id, r.phase, r.point, r.value, r.score)
        return out

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def best(self) -> tuple[DesignPoint, float]:
        if not self.records:
            raise PreconditionError("empty trace has no incumbent")
        last = self.records[-1]
        return last.best_point, last.best_value

    def visited(self) -> set[tuple[int, ...]]:
        return {r.point.indices for r in self.records}

    def count(self, phase: Phase) -> int:
        return sum(1 for r in self.records if r.phase is phase)

    def to_csv(self, metrics: Callable | None = None) -> str:
        """Serialize to the stable trace schema.

        Axis values are written with 6 significant digits; ``objective`` and
        ``best_value`` with full precision. ``metrics`` maps a point to an
        object with ``z_diff`` and ``loss``; without it those columns are empty.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.records:
            names = self.records[0].point.space.names
        else:
            names = TRACE_HEADER[3:9]
        w.writerow(TRACE_HEADER[:3] + tuple(names) + TRACE_HEADER[9:])
        for r in self.records:
            if metrics is not None:
                m = metrics(r.point)
                extra = [f"{m.z_diff:.6g}", f"{m.loss:.6g}"]
            else:
                extra = ["", ""]
            w.writerow(
                [r.eval_index, r.worker_id, r.phase.value]
                + [f"{v:.6g}" for v in r.point.values]
                + extra
                + [repr(r.value), repr(r.best_value)]
            )
        return buf.getvalue()


def stopping_check(
    trace: RunTrace,
    config: BoConfig,
    total_count: int,
    phase: Phase = Phase.ACQUIRE,
    budget: int | None = None,
) -> StopReason | None:
    """``None`` to continue, otherwise why the run must stop.

    Acquisitions are the records of ``phase``; ``budget`` defaults to
    ``config.iterations``. The stall rule is active only when
    ``config.patience`` is set.
    """
    budget = config.iterations if budget is None else budget
    acquired = [r for r in trace.records if r.phase is phase]
    if len(trace.visited()) >= total_count:
        return StopReason.EXHAUSTED
    if len(acquired) >= budget:
        return StopReason.BUDGET
    p = config.patience
    if p is not None and len(acquired) >= p and acquired[-p].eval_index > 0:
        start = trace.records[acquired[-p].eval_index - 1].best_value
        end = acquired[-1].best_value
        if start - end <= config.rel_tol * abs(start):
            return StopReason.STALLED
    return None


def _evaluate(objective: Objective, point: DesignPoint, trace: RunTrace, worker_id: int) -> float:
    try:
        value = float(objective(point))
    except Exception as exc:
        raise ObjectiveError(
            f"objective failed at {point}: {exc}", trace=trace, worker_id=worker_id
        ) from exc
    if not math.isfinite(value):
        raise ObjectiveError(
            f"objective returned {value} at {point}", trace=trace, worker_id=worker_id
        )
    return value


def acquire_loop(
    space: SearchSpace,
    objective: Objective,
    dataset: Dataset,
    trace: RunTrace,
    config: BoConfig,
    *,
    budget: int,
    phase: Phase = Phase.ACQUIRE,
    worker_id: int = 0,
    seed: int | np.random.SeedSequence = 0,
) -> StopReason:
    """Run acquisitions on ``dataset`` in place until a stop condition fires.

    Everything in ``dataset`` counts as visited. ``trace`` receives one record
    per evaluation.
    """
    if len(dataset) < 1:
        raise PreconditionError("acquisition needs at least one observation")
    exhaustive = space.total_count <= config.acquisition.candidate_cap
    predictor = GridPredictor(space.normalized_grid) if exhaustive else None
    subset_rng = np.random.default_rng(seed)
    theta = config.theta
    last_selection: int | None = None
    model: GpModel | None = None
    while True:
        reason = stopping_check(trace, config, space.total_count, phase, budget)
        if reason is None and len(dataset) >= space.total_count:
            reason = StopReason.EXHAUSTED
        if reason is not None:
            return reason
        if config.theta_grid and (
            last_selection is None or len(dataset) - last_selection >= config.refit_every
        ):
            new_theta = select_theta(dataset, config.theta_grid, config.jitter)
            last_selection = len(dataset)
            if model is None or new_theta != theta:
                model = None
            theta = new_theta
        if model is None:
            model = fit(dataset, KernelParams(theta, config.jitter))
        incumbent = None if exhaustive else dataset.best()[0]
        try:
            sel = select(
                model, space, dataset.keys, config.acquisition,
                seed=int(subset_rng.integers(2**63)), predictor=predictor, incumbent=incumbent,
            )
        except ExhaustedError:
            return StopReason.EXHAUSTED
        value = _evaluate(objective, sel.point, trace, worker_id)
        dataset.add(sel.point, value)
        trace.append(worker_id, phase, sel.point, value, sel.score)
        model = model.extend(space.normalize(sel.point), value)


def run_bo(
    space: SearchSpace,
    objective: Objective,
    config: BoConfig = BoConfig(),
    worker_id: int = 0,
) -> tuple[Dataset, RunTrace]:
    """Classic BO: random initialization followed by ``config.iterations`` acquisitions."""
    if config.init_samples + config.iterations > space.total_count:
        raise PreconditionError(
            f"init_samples + iterations = {config.init_samples + config.iterations} "
            f"exceeds the {space.total_count} grid points"
        )
    init_seed, acquire_seed = np.random.SeedSequence(config.seed).spawn(2)
    dataset, trace = Dataset(), RunTrace()
    for point in sample_uniform(space, config.init_samples, init_seed):
        value = _evaluate(objective, point, trace, worker_id)
        dataset.add(point, value)
        trace.append(worker_id, Phase.INIT, point, value)
    if config.iterations > 0:
        acquire_loop(
            space, objective, dataset, trace, config,
            budget=config.iterations, worker_id=worker_id, seed=acquire_seed,
        )
    return dataset, trace
