"""Acquisition criteria and next-point selection.

The default criterion is the lower confidence bound ``mean - tau * stddev``,
minimized over unvisited candidates. Probability of improvement and expected
improvement (minimization forms) are available as alternates and maximized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Collection

import numpy as np
from scipy.special import ndtr

from .errors import ExhaustedError, PreconditionError
from .gp import GpModel, GridPredictor
from .space import DesignPoint, SearchSpace

DEFAULT_TAU = 1.0
CANDIDATE_CAP = 200_000
SUBSET_SIZE = 10_000

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class Kind(str, Enum):
    LCB = "lcb"
    PI = "pi"
    EI = "ei"


@dataclass(frozen=True)
class AcquisitionConfig:
    kind: Kind = Kind.LCB
    tau: float = DEFAULT_TAU
    xi: float = 0.0
    candidate_cap: int = CANDIDATE_CAP
    subset_size: int = SUBSET_SIZE

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.tau < 0:
            raise PreconditionError(f"tau must be >= 0, got {self.tau}")
        if self.xi < 0:
            raise PreconditionError(f"xi must be >= 0, got {self.xi}")


def norm_pdf(z):
    # the density is 0 long before the square overflows
    z = np.clip(z, -1e6, 1e6)
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(z))


def norm_cdf(z):
    return ndtr(z)


def lcb_score(mean, stddev, tau):
    return mean - tau * stddev


def pi_score(mean, stddev, best, xi=0.0):
    mean, stddev = np.asarray(mean, dtype=float), np.asarray(stddev, dtype=float)
    gap = best - mean - xi
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        z = gap / stddev
    out = np.where(stddev > 0, norm_cdf(z), (gap > 0).astype(float))
    return out[()] if out.ndim == 0 else out


def ei_score(mean, stddev, best, xi=0.0):
    mean, stddev = np.asarray(mean, dtype=float), np.asarray(stddev, dtype=float)
    gap = best - mean - xi
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        z = gap / stddev
        ei = gap * norm_cdf(z) + stddev * norm_pdf(z)
    out = np.where(stddev > 0, np.maximum(ei, 0.0), np.maximum(gap, 0.0))
    return out[()] if out.ndim == 0 else out


def acquisition_values(mean, variance, best, config: AcquisitionConfig) -> np.ndarray:
    """Criterion values in their natural orientation (LCB low is good, PI/EI high)."""
    std = np.sqrt(np.maximum(variance, 0.0))
    if config.kind is Kind.LCB:
        return lcb_score(mean, std, config.tau)
    if config.kind is Kind.PI:
        return pi_score(mean, std, best, config.xi)
    return ei_score(mean, std, best, config.xi)


def _to_minimize(values: np.ndarray, config: AcquisitionConfig) -> np.ndarray:
    return values if config.kind is Kind.LCB else -values


@dataclass(frozen=True)
class Selection:
    point: DesignPoint
    score: float
    mean: float
    variance: float


def _candidate_flats(
    space: SearchSpace, visited_flats: np.ndarray, config: AcquisitionConfig, seed, incumbent
) -> np.ndarray:
    """Unvisited candidate flat indices in ascending (row-major) order."""
    total = space.total_count
    if total <= config.candidate_cap:
        mask = np.ones(total, dtype=bool)
        mask[visited_flats] = False
        return np.flatnonzero(mask)
    rng = np.random.default_rng(seed)
    pool = rng.choice(total, size=min(config.subset_size, total), replace=False)
    if incumbent is not None:
        pool = np.concatenate([pool, [p.flat_index for p in space.neighbors(incumbent)]])
    pool = np.unique(pool)
    return pool[~np.isin(pool, visited_flats)]


def select(
    model: GpModel,
    space: SearchSpace,
    visited: Collection[tuple[int, ...]],
    config: AcquisitionConfig = AcquisitionConfig(),
    seed: int | None = 0,
    predictor: GridPredictor | None = None,
    incumbent: DesignPoint | None = None,
) -> Selection:
    """Score every unvisited candidate and return the best with its score.

    ``predictor`` (covering the whole grid in row-major order) is used when the
    grid is enumerated exhaustively; it only changes speed, not the result.
    Ties resolve to the lowest row-major index.
    """
    visited_flats = np.fromiter(
        (space.flat_index(v) for v in visited), dtype=np.int64, count=len(visited)
    )
    flats = _candidate_flats(space, visited_flats, config, seed, incumbent)
    if flats.size == 0:
        raise ExhaustedError("no unvisited candidate left")
    exhaustive = space.total_count <= config.candidate_cap
    if exhaustive and predictor is not None:
        mean, var = predictor.predict(model)
        mean, var = mean[flats], var[flats]
    else:
        X = space.normalize_indices(np.array(np.unravel_index(flats, space.shape)).T)
        mean, var = model.predict(X)
    best = float(np.min(model.y))
    values = acquisition_values(mean, var, best, config)
    k = int(np.argmin(_to_minimize(values, config)))
    return Selection(
        point=space.point_from_flat(int(flats[k])),
        score=float(values[k]),
        mean=float(mean[k]),
        variance=float(var[k]),
    )


def select_next(
    model: GpModel,
    space: SearchSpace,
    visited: Collection[tuple[int, ...]],
    config: AcquisitionConfig = AcquisitionConfig(),
    seed: int | None = 0,
) -> DesignPoint:
    return select(model, space, visited, config, seed).point
