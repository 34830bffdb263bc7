"""Strict scenario configs.

Every model forbids unknown keys.  Exact quantities (lengths, masses, eps)
are ints or "p/q" strings; a float where an exact value is expected is a
parse error, not a silent rounding.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .rational import as_fraction

Exact = Union[int, str]


class ConfigError(ValueError):
    pass


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _exact(v):
    if isinstance(v, bool) or isinstance(v, float):
        raise ValueError(f"{v!r} is not exact; use an int or a 'p/q' string")
    as_fraction(v)
    return v


class Progression(Strict):
    generators: list[Any]
    lengths: list[Exact]
    H: Optional[list[Any]] = None

    @field_validator("lengths")
    @classmethod
    def _lengths_exact(cls, v):
        return [_exact(x) for x in v]


class Common(Strict):
    name: Optional[str] = None
    description: Optional[str] = None
    seed: Optional[int] = None
    cap: Optional[int] = None
    budget_seconds: Optional[float] = None


# -- profile -------------------------------------------------------------------

class LieSpec(Strict):
    k: int = Field(ge=2, le=8)
    generators: list[Union[str, list[list[Exact]]]]
    lengths: list[list[Exact]]


class ClosedForm(Strict):
    family: Literal["abelian_box"]
    N: list[int]
    m_max_factor: int = Field(default=4, ge=1)


class FitSpec(Strict):
    max_pieces: int = Field(default=3, ge=1, le=4)
    max_slope: int = Field(default=6, ge=1, le=12)
    dense_upto: int = 16
    ratio: float = 1.1


class ProfileExpect(Strict):
    slopes: Optional[list[int]] = None
    breakpoint_args: Optional[list[list[Exact]]] = None
    breakpoint_tol: float = 0.0


class ProfileConfig(Common):
    kind: Literal["profile"]
    predict: Optional[LieSpec] = None
    closed_form: Optional[ClosedForm] = None
    fit: FitSpec = FitSpec()
    expect: Optional[ProfileExpect] = None


# -- grow ----------------------------------------------------------------------

class GrowExpect(Strict):
    slopes: Optional[list[int]] = None
    base_size: Optional[int] = None
    ratio_band: Optional[float] = None
    loglog_slope: Optional[float] = None
    loglog_tol: float = 0.2
    loglog_range: Optional[list[int]] = None


class GrowConfig(Common):
    kind: Literal["grow"]
    group: dict
    elements: Optional[list[Any]] = None
    coordinate_box: Optional[list[list[int]]] = None
    progression: Optional[Progression] = None
    symmetrize: bool = True
    n_max: int = Field(default=8, ge=1)
    fit: Optional[FitSpec] = None
    predict: Optional[LieSpec] = None
    expect: Optional[GrowExpect] = None


# -- norm ----------------------------------------------------------------------

class NormInstance(Strict):
    name: str
    group: dict
    progression: Progression
    X: Optional[list[Any]] = None
    elements: list[Any] = []
    expected: Optional[list[Exact]] = None
    norm: Literal["P", "HP", "HPX"] = "HPX"


class AxiomSpec(Strict):
    pairs: int = Field(default=500, ge=1)
    radius: int = Field(default=3, ge=1)


class NormConfig(Common):
    kind: Literal["norm"]
    instances: list[NormInstance]
    axioms: Optional[AxiomSpec] = None


# -- measures ------------------------------------------------------------------

class MeasureSpec(Strict):
    atoms: list[list[Any]]


class RandomMeasures(Strict):
    count: int = Field(ge=1)
    support_max: int = Field(default=4, ge=1)
    radius: int = Field(default=5, ge=1)
    groups: list[dict]


class DirectSpec(Strict):
    progression: Progression
    X: list[Any]
    n: int = Field(ge=1)
    measure: MeasureSpec


class MeasureExpect(Strict):
    M_max: Optional[Exact] = None
    ratio_max: Optional[Exact] = None


class MeasureGrowConfig(Common):
    kind: Literal["measure-grow"]
    group: Optional[dict] = None
    measure: Optional[MeasureSpec] = None
    random: Optional[RandomMeasures] = None
    n_max: int = Field(default=12, ge=1)
    direct: Optional[DirectSpec] = None
    expect: Optional[MeasureExpect] = None


class DonkInstance(Strict):
    group: dict
    measures: list[MeasureSpec]
    expected: Optional[list[Union[Exact, float]]] = None


class DonkConfig(Common):
    kind: Literal["donk"]
    trials: int = Field(default=0, ge=0)
    n_max: int = Field(default=6, ge=1)
    support_max: int = Field(default=5, ge=1)
    radius: int = Field(default=4, ge=1)
    moduli: list[int] = [5, 7, 12]
    instances: list[DonkInstance] = []
    tolerance: float = 1e-12


class GaugeInstance(Strict):
    p: list[list[float]]
    a: list[list[float]]
    expected_t: Optional[list[float]] = None


class GaugeConfig(Common):
    kind: Literal["gauge"]
    trials: int = Field(default=0, ge=0)
    d_max: int = Field(default=6, ge=2, le=64)
    instances: list[GaugeInstance] = []
    tolerance: float = 1e-9


# -- lo --------------------------------------------------------------------------

class BernoulliCase(Strict):
    group: dict
    v: list[Any]
    expected: Optional[Exact] = None


class WalkEquality(Strict):
    trials: int = Field(ge=1)
    n_max: int = Field(default=5, ge=1)
    radius: int = Field(default=3, ge=1)
    groups: list[dict]


class LOConfig(Common):
    kind: Literal["lo"]
    bernoulli: list[BernoulliCase] = []
    walk_equality: Optional[WalkEquality] = None


class MamCase(Strict):
    label: str
    group: dict
    elements: Optional[list[Any]] = None
    random_elements: Optional[int] = None
    eps: Exact
    fraction_target: Optional[Exact] = None
    order_cap: Optional[int] = None
    expect_hypothesis: Optional[bool] = None
    expect_order: Optional[int] = None
    expect_fraction_min: Optional[Exact] = None


class MamConfig(Common):
    kind: Literal["mam"]
    cases: list[MamCase]


class Mam2Config(Common):
    kind: Literal["mam2"]
    group: dict
    measure: MeasureSpec
    d: int = Field(ge=0)
    eps: Exact
    n: int = Field(ge=1)
    expect_consistent: Optional[bool] = None


class BassCase(Strict):
    label: str
    k: int = Field(ge=2, le=8)
    generators: list[Union[str, list[list[Exact]]]]
    expected: Optional[int] = None


class BassConfig(Common):
    kind: Literal["bass"]
    cases: list[BassCase]
    slope_check: Optional[GrowConfig] = None


class SandwichConfig(Common):
    kind: Literal["sandwich"]
    group: dict
    A: list[Any]
    progression: Progression
    X: list[Any]
    n: int = Field(ge=1)
    C: int = Field(ge=1)
    ms: list[int] = [1, 2, 3]
    control_X: Optional[list[Any]] = None


ScenarioConfig = Annotated[
    Union[ProfileConfig, GrowConfig, NormConfig, MeasureGrowConfig, DonkConfig, GaugeConfig,
          LOConfig, MamConfig, Mam2Config, BassConfig, SandwichConfig],
    Field(discriminator="kind"),
]

RANDOMIZED = {"donk", "gauge"}


class _Wrapper(Strict):
    config: ScenarioConfig


def parse_config(obj) -> Any:
    if not isinstance(obj, dict) or not obj:
        raise ConfigError("config must be a non-empty JSON object")
    try:
        cfg = _Wrapper(config=obj).config
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from None
    if _needs_seed(cfg) and cfg.seed is None:
        raise ConfigError(f"scenario kind {cfg.kind!r} draws random instances; 'seed' is mandatory")
    return cfg


def _needs_seed(cfg):
    if cfg.kind in RANDOMIZED:
        return getattr(cfg, "trials", 0) > 0
    if cfg.kind == "norm":
        return cfg.axioms is not None
    if cfg.kind == "measure-grow":
        return cfg.random is not None
    if cfg.kind == "lo":
        return cfg.walk_equality is not None
    if cfg.kind == "mam":
        return any(c.random_elements for c in cfg.cases)
    return False


def load_config(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if not text.strip():
        raise ConfigError(f"{path} is empty")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    cfg = parse_config(obj)
    if cfg.name is None:
        cfg = cfg.model_copy(update={"name": path.stem})
    return cfg
