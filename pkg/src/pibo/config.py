"""JSON run configuration.

Unknown keys are rejected. Validation errors name the offending field by its
dotted JSON path (``bo.acquisition.tau``).
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .acquisition import AcquisitionConfig
from .bo import BoConfig
from .errors import ConfigError, PiboError
from .gp import DEFAULT_JITTER, DEFAULT_THETA, THETA_GRID
from .orchestrator import PiboConfig
from .space import SearchSpace
from .stripline import ObjectiveSpec

log = logging.getLogger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AxisModel(_Strict):
    name: str
    min: float
    max: float
    step: float = Field(gt=0)


class ObjectiveModel(_Strict):
    z_t: float = Field(85.0, gt=0)
    mode: Literal["minimize_loss", "maximize_loss"] = "minimize_loss"
    loss_weight: Optional[float] = Field(None, gt=0)
    f0_ghz: float = Field(4.0, gt=0)
    tan_delta: float = Field(0.02, gt=0, lt=0.1)
    conductor_coeff: float = Field(36.0, gt=0)


class AcquisitionModel(_Strict):
    kind: Literal["lcb", "pi", "ei"] = "lcb"
    tau: float = Field(1.0, ge=0)
    xi: float = Field(0.0, ge=0)
    candidate_cap: int = Field(200_000, ge=1)
    subset_size: int = Field(10_000, ge=1)


class BoModel(_Strict):
    init_samples: int = Field(10, ge=1)
    iterations: int = Field(50, ge=0)
    theta: float = Field(DEFAULT_THETA, gt=0)
    select_theta: bool = False
    theta_grid: list[float] = Field(default_factory=lambda: list(THETA_GRID), min_length=1)
    refit_every: int = Field(10, ge=1)
    jitter: float = Field(DEFAULT_JITTER, ge=0, le=1e-3)
    acquisition: AcquisitionModel = Field(default_factory=AcquisitionModel)
    patience: Optional[int] = Field(None, ge=1)
    rel_tol: float = Field(1e-6, ge=0)


class PiboModel(_Strict):
    workers: int = Field(4, ge=1)
    final_iterations: int = Field(20, ge=0)
    executor: Literal["sequential", "thread", "process"] = "thread"


class BenchModel(_Strict):
    seeds: list[int] = Field(default_factory=lambda: list(range(50)))
    rel_tol: float = Field(0.01, ge=0)
    enumeration_cap: int = Field(2_000_000, ge=1)


class OutputModel(_Strict):
    trace: Optional[str] = None
    report: Optional[str] = None
    table: Optional[str] = None


class RunConfigModel(_Strict):
    space: list[AxisModel] = Field(min_length=1)
    objective: ObjectiveModel = Field(default_factory=ObjectiveModel)
    bo: BoModel = Field(default_factory=BoModel)
    pibo: PiboModel = Field(default_factory=PiboModel)
    bench: BenchModel = Field(default_factory=BenchModel)
    output: OutputModel = Field(default_factory=OutputModel)
    seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    space: SearchSpace
    objective: ObjectiveSpec
    bo: BoConfig
    pibo: PiboConfig
    bench_seeds: tuple[int, ...] = tuple(range(50))
    bench_rel_tol: float = 0.01
    enumeration_cap: int = 2_000_000
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    warnings: tuple[str, ...] = ()

    def with_seed(self, seed: int) -> "RunConfig":
        from dataclasses import replace

        return replace(
            self, seed=seed, bo=replace(self.bo, seed=seed),
            pibo=replace(self.pibo, master_seed=seed),
        )


def _path(loc) -> str:
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def _geometry_warnings(space: SearchSpace) -> list[str]:
    names = set(space.names)
    if not {"H1", "T", "H2"} <= names:
        return []
    h1, t, h2 = space.axis("H1"), space.axis("T"), space.axis("H2")
    if h1.min + t.min >= h2.max:
        return [
            f"grid has no feasible geometry: min H1 + min T = {h1.min + t.min:g} "
            f">= max H2 = {h2.max:g}; every point will raise a geometry error"
        ]
    return []


def from_dict(data: dict) -> RunConfig:
    try:
        m = RunConfigModel.model_validate(data)
    except ValidationError as exc:
        msgs = [f"{_path(e['loc']) or '<root>'}: {e['msg']}" for e in exc.errors()]
        raise ConfigError("invalid config:\n  " + "\n  ".join(msgs)) from None
    try:
        space = SearchSpace.from_dicts([a.model_dump() for a in m.space])
    except PiboError as exc:
        raise ConfigError(f"space: {exc}") from None
    o = m.objective
    objective = ObjectiveSpec(
        z_target=o.z_t, mode=o.mode, loss_weight=o.loss_weight, f0_ghz=o.f0_ghz,
        tan_delta=o.tan_delta, conductor_coeff=o.conductor_coeff,
    )
    b = m.bo
    acq = AcquisitionConfig(**b.acquisition.model_dump())
    bo = BoConfig(
        init_samples=b.init_samples, iterations=b.iterations, theta=b.theta,
        theta_grid=tuple(b.theta_grid) if b.select_theta else None,
        refit_every=b.refit_every, jitter=b.jitter, acquisition=acq, seed=m.seed,
        patience=b.patience, rel_tol=b.rel_tol,
    )
    pibo = PiboConfig(
        workers=m.pibo.workers, per_worker=bo, final_iterations=m.pibo.final_iterations,
        master_seed=m.seed, executor=m.pibo.executor,
    )
    warns = _geometry_warnings(space)
    for w in warns:
        warnings.warn(w, stacklevel=3)
        log.warning(w)
    return RunConfig(
        space=space, objective=objective, bo=bo, pibo=pibo,
        bench_seeds=tuple(m.bench.seeds), bench_rel_tol=m.bench.rel_tol,
        enumeration_cap=m.bench.enumeration_cap,
        outputs={k: v for k, v in m.output.model_dump().items() if v is not None},
        seed=m.seed, warnings=tuple(warns),
    )


def parse_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not text.strip():
        raise ConfigError(f"config {path} is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    return from_dict(data)


def shipped_config_path(name: str = "default.json") -> Path:
    return Path(str(resources.files("pibo") / "configs" / name))
