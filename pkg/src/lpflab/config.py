"""Experiment configuration: one JSON document per run, validated up front."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .dynamics import DynSystem, Observable
from .ekstats import NormalizationSpec, TestFunction
from .primeset import H_FAMILY, PrimeSetSpec
from .sieve import DEFAULT_MEMORY_LIMIT, WEIGHT_KINDS, WeightSpec

EXPERIMENT_KINDS = ("ek", "ekpnt", "ep", "friable", "rho", "density", "dynamics", "ivic", "identity")


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class WeightConfig(_Model):
    kind: Literal[WEIGHT_KINDS] = "unit"
    alpha: float = Field(1.0, gt=0)

    def spec(self) -> WeightSpec:
        alpha = int(self.alpha) if float(self.alpha).is_integer() else self.alpha
        return WeightSpec(self.kind, alpha)


class SetConfig(_Model):
    kind: Literal["all", "residue", "explicit"] = "all"
    a: int = 1
    q: int = Field(1, ge=1)
    primes: list[int] = []

    def spec(self) -> PrimeSetSpec:
        if self.kind == "residue":
            return PrimeSetSpec.residue(self.a, self.q)
        if self.kind == "explicit":
            return PrimeSetSpec.explicit(self.primes)
        return PrimeSetSpec.all()


class NormalizationConfig(_Model):
    kind: Literal["EK", "EP"] = "EK"
    alpha: float | None = Field(None, gt=0)

    def spec(self, x: float, weight_alpha: float) -> NormalizationSpec:
        if self.kind == "EP":
            return NormalizationSpec.ep(x)
        return NormalizationSpec.ek(x, float(self.alpha if self.alpha is not None else weight_alpha))


class SystemConfig(_Model):
    kind: Literal["finite", "circle"] = "finite"
    m: int = Field(2, ge=1)
    x0: str = "0"
    theta: str | None = None
    values: list[float] | None = None
    fourier: list[tuple[int, float, float]] | None = None

    @field_validator("x0", "theta")
    @classmethod
    def _rational(cls, v):
        if v is not None:
            Fraction(v)
        return v

    def system(self) -> DynSystem:
        if self.kind == "finite":
            return DynSystem.finite_rotation(self.m, int(Fraction(self.x0)))
        theta = None if self.theta is None else Fraction(self.theta)
        return DynSystem.circle_rotation(theta, Fraction(self.x0))

    def observable(self) -> Observable:
        if self.values is not None:
            return Observable.finite(self.values)
        if self.fourier is not None:
            return Observable.trig({j: complex(re, im) for j, re, im in self.fourier})
        if self.kind == "finite":
            return Observable.finite([1.0 if k % 2 == 0 else -1.0 for k in range(self.m)])
        return Observable.cosine(1)


class BlockConfig(_Model):
    rho: float = Field(gt=1)
    eps: float = Field(gt=0, le=1)
    j_min: int = Field(ge=0)
    j_max: int = Field(ge=0)
    per_block: int = Field(1, ge=1)
    coprime: bool = False


class ExperimentConfig(_Model):
    """A single experiment.  Grids are explicit lists and must be strictly
    increasing; every referenced integer must fit the in-memory sieve."""

    kind: Literal[EXPERIMENT_KINDS]
    N: list[int] = []
    pairs: list[tuple[int, int]] = []
    r: list[float] = []
    alphas: list[float] = []
    u_max: float = Field(20.0, ge=1, le=50)
    step: float = Field(2.0**-10, gt=0, le=2.0**-8)
    grid: list[int] = []
    choose_y_at: list[float] = []
    h: Literal[H_FAMILY] = "loglog"
    weight: WeightConfig = WeightConfig()
    set: SetConfig = SetConfig()
    normalization: NormalizationConfig = NormalizationConfig()
    statistic: Literal["big_omega", "small_omega"] = "big_omega"
    system: SystemConfig | None = None
    F: list[tuple[float, float]] | Literal["one"] | None = None
    blocks: BlockConfig | None = None
    output: str | None = None
    seed: int = 0

    @field_validator("N", "grid")
    @classmethod
    def _increasing(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("grid must be strictly increasing")
        if v and v[0] < 2:
            raise ValueError("grid values must be >= 2")
        if v and v[-1] > DEFAULT_MEMORY_LIMIT:
            raise ValueError(f"grid values must be <= {DEFAULT_MEMORY_LIMIT}")
        return v

    @field_validator("pairs")
    @classmethod
    def _pairs(cls, v):
        for x, y in v:
            if not 2 <= y <= x <= DEFAULT_MEMORY_LIMIT:
                raise ValueError(f"pair ({x}, {y}) must satisfy 2 <= y <= x <= {DEFAULT_MEMORY_LIMIT}")
        return v

    @field_validator("alphas", "r")
    @classmethod
    def _floats_increasing(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("values must be strictly increasing")
        return v

    @model_validator(mode="after")
    def _required(self):
        need = {
            "ek": "N", "ekpnt": "N", "ep": "N", "dynamics": "N", "ivic": "N",
            "friable": "pairs", "identity": "pairs", "rho": "alphas", "density": "grid",
        }[self.kind]
        if not getattr(self, need):
            raise ValueError(f"{self.kind} experiments need a non-empty '{need}'")
        if self.kind == "ivic" and not self.r:
            raise ValueError("ivic experiments need a non-empty 'r'")
        if self.kind == "ivic" and any(r <= -1 for r in self.r):
            raise ValueError("every r must exceed -1")
        if self.kind in ("ekpnt", "dynamics") and self.system is None:
            raise ValueError(f"{self.kind} experiments need a 'system'")
        if self.kind in ("ep",) or self.normalization.kind == "EP":
            if self.weight.kind != "unit":
                raise ValueError("EP statistics take the unit weight only")
        if self.kind == "identity" and any(y >= x for x, y in self.pairs):
            raise ValueError("identity pairs need y < x")
        # build the domain objects once so their own checks surface here
        self.weight.spec()
        self.set.spec()
        self.test_function()
        if self.system is not None:
            self.system.observable().check_system(self.system.system())
        return self

    def test_function(self) -> TestFunction:
        if self.F is None or self.F == "one":
            return TestFunction.one()
        return TestFunction(tuple(self.F))

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def load_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.model_validate_json(Path(path).read_text())
