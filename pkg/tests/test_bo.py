import csv
import io
import math
import statistics

import numpy as np
import pytest

from pibo.acquisition import AcquisitionConfig
from pibo.bo import BoConfig, Phase, RunTrace, StopReason, run_bo, stopping_check
from pibo.errors import ObjectiveError, PreconditionError
from pibo.gp import THETA_GRID
from pibo.space import AxisSpec, SearchSpace, enumerate_all, sample_uniform
from pibo.stripline import StriplineObjective

LINE = SearchSpace((AxisSpec("x", -2.0, 2.0, 0.1),))  # 41 points


def bowl(p):
    return (p["x"] - 0.7) ** 2


def plane_space():
    return SearchSpace((AxisSpec("a", 0, 20, 1), AxisSpec("b", 0, 20, 1)))


def bumpy(p):
    a, b = p["a"] / 20, p["b"] / 20
    return math.sin(5 * a) * math.cos(4 * b) + 0.8 * (a - 0.63) ** 2 + 0.6 * (b - 0.3) ** 2


class TestRunBo:
    def test_zero_iterations_is_random_search(self):
        ds, trace = run_bo(LINE, bowl, BoConfig(init_samples=6, iterations=0, seed=3))
        assert len(ds) == len(trace) == 6
        assert all(r.phase is Phase.INIT for r in trace)
        init_seed = np.random.SeedSequence(3).spawn(2)[0]
        assert [p.indices for p in ds.points] == [p.indices for p in sample_uniform(LINE, 6, init_seed)]

    def test_finds_bowl_minimum(self):
        true_best = min(enumerate_all(LINE), key=bowl)
        _, trace = run_bo(LINE, bowl, BoConfig(init_samples=5, iterations=15, seed=0))
        assert trace.best[0] == true_best
        assert len(trace) == 20

    def test_deterministic(self, table_space, stripline):
        cfg = BoConfig(init_samples=5, iterations=10, seed=42)
        a = run_bo(table_space, stripline, cfg)[1].to_csv(stripline.metrics)
        b = run_bo(table_space, stripline, cfg)[1].to_csv(stripline.metrics)
        assert a == b

    def test_trace_invariants(self, table_space, stripline):
        ds, trace = run_bo(table_space, stripline, BoConfig(init_samples=8, iterations=25, seed=5))
        keys = [r.point.indices for r in trace]
        assert len(keys) == len(set(keys)) == 33
        assert [r.eval_index for r in trace] == list(range(33))
        assert [(r.point.indices, r.value) for r in trace] == [(p.indices, v) for p, v in ds]
        bests = [r.best_value for r in trace]
        assert all(a >= b for a, b in zip(bests, bests[1:]))
        assert bests[-1] == min(r.value for r in trace)
        assert all(not math.isnan(r.score) for r in trace if r.phase is Phase.ACQUIRE)

    def test_exhausting_a_tiny_grid_finds_optimum(self):
        space = SearchSpace((AxisSpec("a", 0, 3, 1), AxisSpec("b", 0, 2, 1)))
        f = lambda p: (p["a"] - 2) ** 2 + abs(p["b"] - 1) + 0.1 * p["a"]
        _, trace = run_bo(space, f, BoConfig(init_samples=2, iterations=10, seed=1))
        assert len(trace) == 12
        assert trace.best[1] == min(f(p) for p in enumerate_all(space))

    def test_capacity_violation(self):
        with pytest.raises(PreconditionError):
            run_bo(LINE, bowl, BoConfig(init_samples=20, iterations=30))

    def test_config_validation(self):
        with pytest.raises(PreconditionError):
            BoConfig(init_samples=0)
        with pytest.raises(PreconditionError):
            BoConfig(iterations=-1)

    def test_objective_failure_keeps_partial_trace(self):
        calls = []

        def flaky(p):
            calls.append(p)
            if len(calls) == 9:
                raise RuntimeError("solver crashed")
            return bowl(p)

        with pytest.raises(ObjectiveError) as info:
            run_bo(LINE, flaky, BoConfig(init_samples=5, iterations=10))
        assert len(info.value.trace) == 8
        assert isinstance(info.value.__cause__, RuntimeError)

    def test_nonfinite_objective_is_a_failure(self):
        with pytest.raises(ObjectiveError):
            run_bo(LINE, lambda p: math.nan, BoConfig(init_samples=2, iterations=1))

    def test_theta_selection_path(self, table_space, stripline):
        cfg = BoConfig(init_samples=10, iterations=25, theta_grid=THETA_GRID, refit_every=5, seed=2)
        ds, trace = run_bo(table_space, stripline, cfg)
        assert len(trace) == 35 and len(ds.keys) == 35

    def test_pi_and_ei_runs(self):
        for kind in ("pi", "ei"):
            cfg = BoConfig(init_samples=4, iterations=12, acquisition=AcquisitionConfig(kind=kind, xi=0.01))
            _, trace = run_bo(plane_space(), bumpy, cfg)
            assert len(trace) == 16

    def test_subset_candidates_for_large_spaces(self):
        cfg = BoConfig(
            init_samples=5, iterations=15, seed=4,
            acquisition=AcquisitionConfig(candidate_cap=100, subset_size=50),
        )
        ds, trace = run_bo(plane_space(), bumpy, cfg)
        assert len(ds) == 20
        assert run_bo(plane_space(), bumpy, cfg)[1].to_csv() == trace.to_csv()

    def test_beats_random_search(self):
        space = plane_space()
        best = min(bumpy(p) for p in enumerate_all(space))
        budget = 60

        def evals_to_opt(trace):
            for r in trace:
                if r.best_value <= best + 1e-12:
                    return r.eval_index + 1
            return budget + 1

        bo, rand = [], []
        for seed in range(50):
            bo.append(evals_to_opt(run_bo(space, bumpy, BoConfig(init_samples=5, iterations=budget - 5, seed=seed))[1]))
            rand.append(evals_to_opt(run_bo(space, bumpy, BoConfig(init_samples=budget, iterations=0, seed=seed))[1]))
        assert statistics.median(bo) <= statistics.median(rand)


class TestStoppingCheck:
    def trace_of(self, values, phase=Phase.ACQUIRE):
        t = RunTrace()
        for i, v in enumerate(values):
            t.append(0, Phase.INIT if i == 0 else phase, LINE.point_from_indices([i]), v)
        return t

    def test_budget(self):
        t = self.trace_of([5, 4, 3])
        assert stopping_check(t, BoConfig(iterations=2), LINE.total_count) is StopReason.BUDGET
        assert stopping_check(t, BoConfig(iterations=3), LINE.total_count) is None

    def test_exhausted(self):
        t = self.trace_of([1.0] * 41)
        assert stopping_check(t, BoConfig(iterations=100), 41) is StopReason.EXHAUSTED

    def test_stall(self):
        cfg = BoConfig(iterations=100, patience=10, rel_tol=1e-6)
        flat = self.trace_of([5.0, 3.0] + [3.0] * 10)
        assert stopping_check(flat, cfg, 41) is StopReason.STALLED
        improving = self.trace_of([5.0, 3.0] + [3.0] * 9 + [2.0])
        assert stopping_check(improving, cfg, 41) is None
        assert stopping_check(flat, BoConfig(iterations=100), 41) is None

    def test_stall_stops_a_run(self):
        cfg = BoConfig(init_samples=3, iterations=30, patience=4, rel_tol=1e-6, seed=0)
        _, trace = run_bo(LINE, lambda p: 1.0, cfg)
        assert len(trace) == 3 + 4


class TestTraceCsv:
    def test_header_and_recompute(self, table_space):
        obj = StriplineObjective()
        _, trace = run_bo(table_space, obj, BoConfig(init_samples=4, iterations=6, seed=9))
        text = trace.to_csv(obj.metrics)
        rows = list(csv.DictReader(io.StringIO(text)))
        assert text.splitlines()[0] == (
            "eval_index,worker_id,phase,W,S,T,H1,H2,er,z_diff,loss,objective,best_value"
        )
        assert len(rows) == 10
        for row, rec in zip(rows, trace):
            values = [float(row[k]) for k in ("W", "S", "T", "H1", "H2", "er")]
            point = table_space.point_from_values(values)
            assert point == rec.point
            assert abs(obj(point) - float(row["objective"])) <= 1e-9
