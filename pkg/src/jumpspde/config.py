"""Run configuration: JSON schema, validation and object construction."""
from __future__ import annotations

import json
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import levy
from .errors import ParseError, RangeError, UnknownField
from .generator import CylinderFunction
from .integrator import TimeGrid
from .spectral import ModelSpec, NemytskiiFn, SpectralBasis
from .streams import MASK64

PositiveFloat = Annotated[float, Field(gt=0, allow_inf_nan=False)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NemytskiiConfig(_Strict):
    kind: Literal["linear", "scaled_sine"]
    kappa: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None

    @model_validator(mode="after")
    def _params(self):
        if self.kind == "linear" and (self.kappa is None or self.a is not None or self.b is not None):
            raise ValueError("linear map takes exactly 'kappa'")
        if self.kind == "scaled_sine" and (self.a is None or self.b is None or self.kappa is not None):
            raise ValueError("scaled_sine map takes exactly 'a' and 'b'")
        return self

    def build(self) -> NemytskiiFn:
        if self.kind == "linear":
            return NemytskiiFn.linear(self.kappa)
        return NemytskiiFn.scaled_sine(self.a, self.b)


class ModelConfig(_Strict):
    modes: int = Field(16, ge=1)
    fractional_power: float = Field(1.0, gt=0, le=1)
    burgers: bool = True
    b1: Optional[NemytskiiConfig] = None
    sigma: NemytskiiConfig = NemytskiiConfig(kind="linear", kappa=0.5)
    sigma_projection_n: Optional[int] = Field(None, ge=1)
    initial: list[float] = [1.0]

    @model_validator(mode="after")
    def _consistent(self):
        if self.burgers and self.fractional_power != 1:
            raise ValueError("burgers requires fractional_power = 1")
        if self.sigma_projection_n is not None and self.sigma_projection_n > self.modes:
            raise ValueError("sigma_projection_n exceeds modes")
        if len(self.initial) > self.modes:
            raise ValueError("initial has more coefficients than modes")
        if not all(np.isfinite(self.initial)):
            raise ValueError("initial coefficients must be finite")
        return self

    def build(self) -> ModelSpec:
        return ModelSpec(
            basis=SpectralBasis(self.modes, self.fractional_power),
            sigma=self.sigma.build(),
            h=np.array(self.initial, dtype=float),
            burgers=self.burgers,
            b1=self.b1.build() if self.b1 is not None else None,
            sigma_projection_n=self.sigma_projection_n,
        )


class StableConfig(_Strict):
    family: Literal["stable"]
    c: PositiveFloat = 1.0
    beta: float = Field(1.0, gt=0, lt=2)
    sided: Literal["symmetric", "positive"] = "symmetric"

    def build(self):
        return levy.StableLike(self.c, self.beta, self.sided)


class UniformConfig(_Strict):
    family: Literal["uniform"]
    c: PositiveFloat = 1.0
    R: PositiveFloat = 1.0

    def build(self):
        return levy.UniformDensity(self.c, self.R)


class AtomicConfig(_Strict):
    family: Literal["atomic"]
    atoms: list[tuple[float, PositiveFloat]] = Field(min_length=1)

    @model_validator(mode="after")
    def _nonzero(self):
        if any(x == 0 for x, _ in self.atoms):
            raise ValueError("atom locations must be nonzero")
        return self

    def build(self):
        return levy.Atomic(tuple(self.atoms))


MeasureConfig = Annotated[Union[StableConfig, UniformConfig, AtomicConfig],
                          Field(discriminator="family")]


class GridConfig(_Strict):
    T: PositiveFloat = 0.25
    dt: PositiveFloat = 5e-4
    save_stride: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _divides(self):
        n = round(self.T / self.dt)
        if n < 1 or abs(n * self.dt - self.T) > 1e-9 * self.T:
            raise ValueError("T/dt must be a positive integer")
        return self

    def build(self) -> TimeGrid:
        return TimeGrid(self.T, self.dt, self.save_stride)


class EnsembleConfig(_Strict):
    paths: int = Field(2000, ge=1)
    seed: int = Field(20261019, ge=0, le=MASK64)
    eps_list: list[PositiveFloat] = [0.4, 0.2, 0.1, 0.05]
    eps: Optional[PositiveFloat] = 0.1
    n_list: list[Annotated[int, Field(ge=1)]] = [2, 4, 8, 16]
    K: int = Field(3, ge=1)
    neglect_tol: float = Field(levy.DEFAULT_NEGLECT_TOL, gt=0, lt=1)
    jump_budget: PositiveFloat = float(levy.DEFAULT_JUMP_BUDGET)
    delta_threshold: PositiveFloat = 0.05


class GeneratorConfig(_Strict):
    modes: list[Annotated[int, Field(ge=1)]] = [1]
    terms: list[tuple[list[Annotated[int, Field(ge=0)]], float]] = [([3], 1.0)]
    measure: Optional[MeasureConfig] = None
    ball_radius: PositiveFloat = 1.0
    z_samples: int = Field(64, ge=1)
    eps_list: list[PositiveFloat] = [2.0**-k for k in range(2, 10)]

    def build(self) -> CylinderFunction:
        return CylinderFunction(self.modes, [(tuple(e), c) for e, c in self.terms])


class OutputConfig(_Strict):
    directory: str = "out"
    format: Literal["csv"] = "csv"


class RunConfig(_Strict):
    model: ModelConfig = ModelConfig()
    measure: MeasureConfig = StableConfig(family="stable")
    grid: GridConfig = GridConfig()
    ensemble: EnsembleConfig = EnsembleConfig()
    generator: GeneratorConfig = GeneratorConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _cross(self):
        N = self.model.modes
        if self.ensemble.K > N:
            raise ValueError(f"ensemble.K exceeds model.modes ({N})")
        if any(n > N for n in self.ensemble.n_list):
            raise ValueError(f"ensemble.n_list entries exceed model.modes ({N})")
        if any(k > N for k in self.generator.modes):
            raise ValueError(f"generator.modes entries exceed model.modes ({N})")
        try:
            self.generator.build()
        except ValueError as exc:
            raise ValueError(f"generator: {exc}") from None
        return self

    def dump(self) -> str:
        """Normalized JSON with every default filled in."""
        return self.model_dump_json(indent=2) + "\n"


def _loc(err) -> str:
    return ".".join(str(p) for p in err["loc"]) or "<root>"


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ParseError("line 1: configuration must be a JSON object")
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        errors = exc.errors()
        for err in errors:
            if err["type"] == "extra_forbidden":
                raise UnknownField(f"unknown field '{_loc(err)}'") from None
        err = errors[0]
        raise RangeError(f"{_loc(err)}: {err['msg']}") from None
