"""JSON configuration: sections ``generator``, ``classes``, ``penalty`` and ``experiment``."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..core import BASIS_FAMILIES, make_basis, nested_classes
from ..errors import ConfigError
from ..srm import PenaltySpec


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LinearTarget(_Strict):
    kind: Literal["linear"] = "linear"
    basis: str = "monomial"
    theta: List[float]

    @model_validator(mode="after")
    def _simplex(self):
        if self.basis not in BASIS_FAMILIES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if not self.theta:
            raise ValueError("theta must be nonempty")
        if any(t < -1e-9 for t in self.theta) or sum(self.theta) > 1 + 1e-9:
            raise ValueError("target theta must lie in the simplex so that Y stays in [0, 1]")
        return self


class FunctionTarget(_Strict):
    kind: Literal["function"]
    name: Literal["constant", "sine", "bump"]
    value: float = Field(0.5, ge=0.0, le=1.0)


class NoNoise(_Strict):
    kind: Literal["none"] = "none"


class UniformNoise(_Strict):
    kind: Literal["uniform"]
    width: float = Field(gt=0.0, le=1.0)


class FlipNoise(_Strict):
    kind: Literal["bernoulli_flip"]
    p: float = Field(ge=0.0, le=1.0)


Target = Annotated[Union[LinearTarget, FunctionTarget], Field(discriminator="kind")]
Noise = Annotated[Union[NoNoise, UniformNoise, FlipNoise], Field(discriminator="kind")]


class GeneratorConfig(_Strict):
    k: int = Field(1, ge=1)
    design: Literal["uniform_cube", "gaussian_clipped"] = "uniform_cube"
    target: Target = LinearTarget(theta=[0.2, 0.3, 0.4])
    noise: Noise = NoNoise()
    seed: int = Field(20140101, ge=0, lt=2 ** 64)


class ClassesConfig(_Strict):
    basis: str = "monomial"
    j_min: int = Field(1, ge=1)
    j_max: int = Field(6, ge=1)
    dimension_cap: int = Field(64, ge=1)

    @model_validator(mode="after")
    def _range(self):
        if self.basis not in BASIS_FAMILIES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if not self.j_min <= self.j_max <= self.dimension_cap:
            raise ValueError("need j_min <= j_max <= dimension_cap")
        return self

    def build(self):
        return nested_classes(make_basis(self.basis, self.dimension_cap), self.j_max, self.j_min)


class PenaltyConfig(_Strict):
    regime: Literal["vc_subgraph", "parametric", "parametric_example",
                    "local_entropy_experimental"] = "parametric_example"
    vc_dims: Optional[List[float]] = None
    w_dims: Optional[List[float]] = None
    A: Optional[float] = Field(None, gt=0.0)
    m_seq: Optional[List[float]] = None
    scale: float = Field(1.0, ge=0.0)

    @model_validator(mode="after")
    def _vc(self):
        if self.regime == "vc_subgraph" and self.vc_dims is None and self.w_dims is None:
            raise ValueError("vc_subgraph regime needs vc_dims or w_dims")
        return self

    def build(self) -> PenaltySpec:
        return PenaltySpec(self.regime, self.vc_dims, self.w_dims, self.A, self.m_seq, self.scale)


class ExperimentConfig(_Strict):
    n_grid: List[int] = [200, 632, 2000, 6325, 20000]
    trials: int = Field(20, ge=1)
    precision: int = Field(100_000, ge=10_000)
    eta_grid: List[float] = [0.01, 0.05, 0.1]
    coverage_n: List[int] = [1000]
    coverage_j: int = Field(2, ge=1, le=3)
    grid_step: float = Field(0.02, gt=0.0, le=1.0)
    bound_A: Optional[float] = Field(None, gt=0.0)
    bound_W: Optional[float] = Field(None, ge=1.0)

    @model_validator(mode="after")
    def _grids(self):
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be nonempty and strictly increasing")
        if any(n < 2 for n in self.n_grid + self.coverage_n):
            raise ValueError("sample sizes must be >= 2")
        if not self.eta_grid or any(not 0 < e < 1 for e in self.eta_grid):
            raise ValueError("eta values must lie in (0, 1)")
        return self


class Config(_Strict):
    generator: GeneratorConfig = GeneratorConfig()
    classes: ClassesConfig = ClassesConfig()
    penalty: PenaltyConfig = PenaltyConfig()
    experiment: ExperimentConfig = ExperimentConfig()


def parse_config(data) -> Config:
    try:
        return Config.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None) -> Config:
    if path is None:
        return Config()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)
