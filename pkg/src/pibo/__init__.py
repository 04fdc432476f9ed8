"""Parallel Bayesian optimization over discrete design grids."""

from .acquisition import AcquisitionConfig, select_next
from .bench import BenchReport, benchmark, brute_force, compare_solo_vs_pibo
from .bo import BoConfig, RunTrace, run_bo
from .gp import Dataset, GpModel, KernelParams, fit, matern52
from .orchestrator import PiboConfig, PiboResult, merge_datasets, run_pibo
from .space import AxisSpec, DesignPoint, SearchSpace, table_i_space
from .stripline import ObjectiveSpec, StriplineObjective, line_metrics

__all__ = [
    "AcquisitionConfig", "AxisSpec", "BenchReport", "BoConfig", "Dataset", "DesignPoint",
    "GpModel", "KernelParams", "ObjectiveSpec", "PiboConfig", "PiboResult", "RunTrace",
    "SearchSpace", "StriplineObjective", "benchmark", "brute_force", "compare_solo_vs_pibo",
    "fit", "line_metrics", "matern52", "merge_datasets", "run_bo", "run_pibo",
    "select_next", "table_i_space",
]
