"""Discrete design grids.

A :class:`SearchSpace` is an ordered tuple of :class:`AxisSpec` objects, each
describing an evenly stepped axis ``min, min + step, ..., max``.  Points on the
grid are identified by their integer index tuples; physical values are decoded
on demand so that deduplication and ordering are exact.

Enumeration order is row-major with the first axis varying slowest.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import BoundsError, CapacityError, PreconditionError

_REL_TOL = 1e-9
# decoded values are rounded so that e.g. 1.1 + 2 * 0.1 prints as 1.3
_DECIMALS = 12


@dataclass(frozen=True)
class AxisSpec:
    name: str
    min: float
    max: float
    step: float

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise PreconditionError(f"axis {self.name!r}: step must be > 0, got {self.step}")
        if self.max < self.min:
            raise PreconditionError(
                f"axis {self.name!r}: max ({self.max}) is below min ({self.min})"
            )
        n = self.cardinality
        end = self.min + (n - 1) * self.step
        if not math.isclose(end, self.max, rel_tol=_REL_TOL, abs_tol=_REL_TOL):
            raise PreconditionError(
                f"axis {self.name!r}: range {self.min}..{self.max} is not a whole "
                f"number of steps of {self.step}"
            )

    @property
    def cardinality(self) -> int:
        return int(round((self.max - self.min) / self.step)) + 1

    def value(self, index: int) -> float:
        return round(self.min + index * self.step, _DECIMALS)

    def values(self) -> np.ndarray:
        return np.round(self.min + np.arange(self.cardinality) * self.step, _DECIMALS)

    def to_dict(self) -> dict:
        return {"name": self.name, "min": self.min, "max": self.max, "step": self.step}


@dataclass(frozen=True)
class SearchSpace:
    axes: tuple[AxisSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise PreconditionError("a search space needs at least one axis")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise PreconditionError(f"duplicate axis names in {names}")

    @classmethod
    def from_dicts(cls, axes: Sequence[dict]) -> "SearchSpace":
        return cls(tuple(AxisSpec(**a) for a in axes))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.cardinality for a in self.axes)

    @property
    def total_count(self) -> int:
        return math.prod(self.shape)

    def axis(self, name: str) -> AxisSpec:
        for a in self.axes:
            if a.name == name:
                return a
        raise KeyError(name)

    def point_from_indices(self, indices: Sequence[int]) -> "DesignPoint":
        if len(indices) != self.ndim:
            raise BoundsError(f"expected {self.ndim} indices, got {len(indices)}")
        idx = tuple(int(i) for i in indices)
        for i, axis in zip(idx, self.axes):
            if not 0 <= i < axis.cardinality:
                raise BoundsError(
                    f"index {i} out of range for axis {axis.name!r} "
                    f"(cardinality {axis.cardinality})"
                )
        return DesignPoint(self, idx)

    def point_from_values(self, values: Sequence[float]) -> "DesignPoint":
        """Snap physical values onto the grid; raises if any is off-grid."""
        idx = []
        for v, axis in zip(values, self.axes, strict=True):
            i = int(round((v - axis.min) / axis.step))
            if not math.isclose(axis.min + i * axis.step, v, rel_tol=_REL_TOL, abs_tol=_REL_TOL):
                raise BoundsError(f"value {v} is not on the grid of axis {axis.name!r}")
            idx.append(i)
        return self.point_from_indices(idx)

    def flat_index(self, indices: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(indices), self.shape))

    def point_from_flat(self, flat: int) -> "DesignPoint":
        if not 0 <= flat < self.total_count:
            raise BoundsError(f"flat index {flat} outside 0..{self.total_count - 1}")
        return DesignPoint(self, tuple(int(i) for i in np.unravel_index(flat, self.shape)))

    @cached_property
    def _scale(self) -> np.ndarray:
        card = np.array(self.shape, dtype=float)
        return np.where(card > 1, 1.0 / np.maximum(card - 1.0, 1.0), 0.0)

    def normalize(self, point: "DesignPoint") -> np.ndarray:
        return np.asarray(point.indices, dtype=float) * self._scale

    def normalize_indices(self, indices: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`normalize` over an ``(n, ndim)`` index array."""
        return np.asarray(indices, dtype=float) * self._scale

    def grid_indices(self) -> np.ndarray:
        """All index tuples as an ``(total_count, ndim)`` array in row-major order."""
        grids = np.indices(self.shape).reshape(self.ndim, -1).T
        return grids.astype(np.int64)

    @cached_property
    def normalized_grid(self) -> np.ndarray:
        return self.normalize_indices(self.grid_indices())

    def neighbors(self, point: "DesignPoint") -> list["DesignPoint"]:
        """Points one step away along a single axis."""
        out = []
        for d, axis in enumerate(self.axes):
            for delta in (-1, 1):
                j = point.indices[d] + delta
                if 0 <= j < axis.cardinality:
                    idx = list(point.indices)
                    idx[d] = j
                    out.append(DesignPoint(self, tuple(idx)))
        return out

    def to_dicts(self) -> list[dict]:
        return [a.to_dict() for a in self.axes]


@dataclass(frozen=True)
class DesignPoint:
    """One grid point; the index tuple is its identity."""

    space: SearchSpace = field(compare=False, repr=False)
    indices: tuple[int, ...]

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(a.value(i) for a, i in zip(self.space.axes, self.indices))

    def __getitem__(self, name: str) -> float:
        for a, i in zip(self.space.axes, self.indices):
            if a.name == name:
                return a.value(i)
        raise KeyError(name)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.space.names, self.values))

    @property
    def flat_index(self) -> int:
        return self.space.flat_index(self.indices)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.as_dict().items())
        return f"DesignPoint({inner})"


def total_count(space: SearchSpace) -> int:
    return space.total_count


def point_from_indices(space: SearchSpace, indices: Sequence[int]) -> DesignPoint:
    return space.point_from_indices(indices)


def normalize(space: SearchSpace, point: DesignPoint) -> np.ndarray:
    return space.normalize(point)


def sample_uniform(space: SearchSpace, n: int, seed: int | np.random.SeedSequence) -> list[DesignPoint]:
    """Draw ``n`` distinct grid points uniformly without replacement."""
    total = space.total_count
    if n < 0:
        raise PreconditionError(f"sample size must be non-negative, got {n}")
    if n > total:
        raise CapacityError(f"cannot draw {n} distinct points from a grid of {total}")
    if n == 0:
        return []
    rng = np.random.default_rng(seed)
    flats = rng.choice(total, size=n, replace=False)
    return [space.point_from_flat(int(f)) for f in flats]


def enumerate_all(space: SearchSpace) -> Iterator[DesignPoint]:
    """Every grid point once, first axis slowest."""
    for idx in itertools.product(*(range(n) for n in space.shape)):
        yield DesignPoint(space, idx)


# Published grid with the T, H1, H2 row labels reassigned so that the reported
# optimum lies on the grid and the trace sits inside the dielectric (H1 + T < H2).
TABLE_I_AXES = (
    AxisSpec("W", 3.0, 8.0, 0.25),
    AxisSpec("S", 3.0, 8.0, 0.25),
    AxisSpec("T", 1.1, 1.3, 0.1),
    AxisSpec("H1", 3.0, 5.0, 0.5),
    AxisSpec("H2", 8.0, 10.0, 0.5),
    AxisSpec("er", 3.6, 3.8, 0.1),
)

# Published grid exactly as printed; geometrically infeasible at every point.
TABLE_I_AS_PRINTED_AXES = (
    AxisSpec("W", 3.0, 8.0, 0.25),
    AxisSpec("S", 3.0, 8.0, 0.25),
    AxisSpec("T", 3.0, 5.0, 0.5),
    AxisSpec("H1", 8.0, 10.0, 0.5),
    AxisSpec("H2", 1.1, 1.3, 0.1),
    AxisSpec("er", 3.6, 3.8, 0.1),
)


def table_i_space() -> SearchSpace:
    return SearchSpace(TABLE_I_AXES)


def table_i_as_printed_space() -> SearchSpace:
    return SearchSpace(TABLE_I_AS_PRINTED_AXES)
