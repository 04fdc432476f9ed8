"""Closed-form differential stripline model and the design objectives.

This stands in for a 2D field solver. The single-ended impedance of an offset
stripline is the parallel combination of two symmetric-stripline impedances,
one per plane spacing; edge coupling reduces it by an exponential factor in
``S / b``. Loss is a dielectric term plus a conductor term scaling as
``sqrt(f) / (Z0 * W)``. All lengths are in mils and frequency in GHz; loss is
a positive dB/inch magnitude.

The model is smooth and cheap, which makes the global optimum of the full
design grid verifiable by enumeration. It is not a field solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import GeometryError, PreconditionError
from .space import DesignPoint


class Mode(str, Enum):
    MINIMIZE_LOSS = "minimize_loss"
    MAXIMIZE_LOSS = "maximize_loss"


_DEFAULT_WEIGHT = {Mode.MINIMIZE_LOSS: 100.0, Mode.MAXIMIZE_LOSS: 40.0}


@dataclass(frozen=True)
class ObjectiveSpec:
    z_target: float = 85.0
    mode: Mode = Mode.MINIMIZE_LOSS
    loss_weight: float | None = None  # None: 100 (minimize) or 40 (maximize)
    f0_ghz: float = 4.0
    tan_delta: float = 0.02
    conductor_coeff: float = 36.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.z_target > 0:
            raise PreconditionError(f"z_target must be positive, got {self.z_target}")
        if not self.f0_ghz > 0:
            raise PreconditionError(f"f0_ghz must be positive, got {self.f0_ghz}")
        if not 0 < self.tan_delta < 0.1:
            raise PreconditionError(f"tan_delta must lie in (0, 0.1), got {self.tan_delta}")
        if self.loss_weight is not None and not self.loss_weight > 0:
            raise PreconditionError(f"loss_weight must be positive, got {self.loss_weight}")

    @property
    def weight(self) -> float:
        return _DEFAULT_WEIGHT[self.mode] if self.loss_weight is None else self.loss_weight


@dataclass(frozen=True)
class LineMetrics:
    z_diff: float
    loss: float
    z0: float = math.nan


def _symmetric_z(s: float, w: float, t: float, er: float, label: str) -> float:
    arg = 4.0 * s / (0.67 * math.pi * (0.8 * w + t))
    if not arg > 1.0:
        raise GeometryError(
            f"{label}: log argument {arg:.4g} <= 1 (plane spacing too small for W={w}, T={t})"
        )
    return 60.0 / math.sqrt(er) * math.log(arg)


def metrics_from_values(
    W: float, S: float, T: float, H1: float, H2: float, er: float,
    spec: ObjectiveSpec = ObjectiveSpec(),
) -> LineMetrics:
    b = H2
    h_low = H1
    h_up = H2 - H1 - T
    if not h_up > 0:
        raise GeometryError(f"H1 + T must be < H2 (H1={H1}, T={T}, H2={H2})")
    z1 = _symmetric_z(2.0 * h_low + T, W, T, er, "lower plane")
    z2 = _symmetric_z(2.0 * h_up + T, W, T, er, "upper plane")
    z0 = 2.0 * z1 * z2 / (z1 + z2)
    z_diff = 2.0 * z0 * (1.0 - 0.347 * math.exp(-2.9 * S / b))
    alpha_d = 2.3 * spec.f0_ghz * math.sqrt(er) * spec.tan_delta
    alpha_c = spec.conductor_coeff * math.sqrt(spec.f0_ghz) / (z0 * W)
    return LineMetrics(z_diff=z_diff, loss=alpha_d + alpha_c, z0=z0)


def line_metrics(point: DesignPoint, spec: ObjectiveSpec = ObjectiveSpec()) -> LineMetrics:
    return metrics_from_values(
        point["W"], point["S"], point["T"], point["H1"], point["H2"], point["er"], spec
    )


def objective_from_metrics(m: LineMetrics, spec: ObjectiveSpec = ObjectiveSpec()) -> float:
    mismatch = abs(m.z_diff - spec.z_target)
    if spec.mode is Mode.MINIMIZE_LOSS:
        return mismatch + spec.weight * m.loss
    return mismatch + spec.weight / m.loss


def objective(point: DesignPoint, spec: ObjectiveSpec = ObjectiveSpec()) -> float:
    return objective_from_metrics(line_metrics(point, spec), spec)


@dataclass(frozen=True)
class StriplineObjective:
    """Picklable callable ``DesignPoint -> float`` for the optimizers."""

    spec: ObjectiveSpec = ObjectiveSpec()

    def __call__(self, point: DesignPoint) -> float:
        return objective(point, self.spec)

    def metrics(self, point: DesignPoint) -> LineMetrics:
        return line_metrics(point, self.spec)
