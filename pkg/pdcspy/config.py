"""Run configuration read from TOML files.

.. code-block:: toml

    [physical]
    preset = "quartic"

    [point]
    delta_eff = 12.0
    nu = 1.05

    [omega]
    max = 15.0
    points = 301
"""

import cmath
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pdcspy.defaults import ALL, DEFAULT_CONF, FIGURE_POINTS, conf_for_name
from pdcspy.dispersion import PhysicalParams
from pdcspy.exceptions import ConfigError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PhysicalSection(_Section):
    preset: str = "quartic"
    fsr_hz: Optional[float] = Field(default=None, gt=0)
    finesse: Optional[float] = Field(default=None, gt=0)
    d2_hz: Optional[float] = None
    d3_hz: Optional[float] = None
    d4_hz: Optional[float] = None
    kerr_coeff: Optional[float] = Field(default=None, gt=0)
    cavity_length_m: Optional[float] = Field(default=None, gt=0)
    pump_mode_index: Optional[int] = None
    mode_count: Optional[int] = Field(default=None, ge=8)

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, value: str) -> str:
        if conf_for_name(value) is None:
            raise ValueError(f"unknown preset {value!r}, expected one of {sorted(ALL)}")
        return value

    @field_validator("mode_count")
    @classmethod
    def _even(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value % 2:
            raise ValueError("mode_count must be even")
        return value

    def overrides(self) -> Dict[str, Any]:
        return self.model_dump(exclude={"preset"}, exclude_none=True)


class DispersionSection(_Section):
    d4_zero: bool = False


class PointSection(_Section):
    delta_eff: float = FIGURE_POINTS["stable_soliton"][0]
    nu: float = Field(default=FIGURE_POINTS["stable_soliton"][1], ge=0)
    nu_phase: float = 0.0

    @property
    def drive(self) -> complex:
        return self.nu * cmath.exp(1j * self.nu_phase)


class SweepSection(_Section):
    delta_eff: List[float] = Field(default_factory=list)
    nu: List[float] = Field(default_factory=list)

    @field_validator("delta_eff", "nu")
    @classmethod
    def _increasing(cls, values: List[float]) -> List[float]:
        if not values:
            raise ValueError("grid is empty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("grid must be strictly increasing")
        return values


class OmegaSection(_Section):
    min: float = Field(default=DEFAULT_CONF["omega_min"], ge=0)
    max: float = DEFAULT_CONF["omega_max"]
    points: int = Field(default=DEFAULT_CONF["omega_points"], ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> "OmegaSection":
        if self.max < self.min:
            raise ValueError("max must not be below min")
        return self


class EnvelopeSection(_Section):
    omega_max: float = Field(default=DEFAULT_CONF["envelope_omega_max"], gt=0)
    omega_points: int = Field(default=DEFAULT_CONF["envelope_omega_points"], ge=3)
    theta_points: int = Field(default=DEFAULT_CONF["theta_points"], ge=8)
    exclusion_halfwidth: float = Field(default=0.35, gt=0)
    check_convergence: bool = True

    @field_validator("omega_points")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("omega_points must be odd")
        return value


class IntegratorSection(_Section):
    dt: float = Field(default=DEFAULT_CONF["dt"], gt=0)
    tol: float = Field(default=DEFAULT_CONF["steady_tol"], gt=0)
    max_time: float = Field(default=DEFAULT_CONF["max_time"], gt=0)
    transient_time: float = Field(default=DEFAULT_CONF["transient_time"], ge=0)
    blowup_norm: float = Field(default=DEFAULT_CONF["blowup_norm"], gt=0)
    pump_model: Literal["pdnlse", "full"] = DEFAULT_CONF["pump_model"]


class SeedsSection(_Section):
    noise_amplitude: float = Field(default=DEFAULT_CONF["noise_amplitude"], gt=0)
    seed: int = DEFAULT_CONF["seed"]
    kind: Literal["soliton", "noise"] = "soliton"


class LossSection(_Section):
    overcoupling_ratio: float = Field(default=DEFAULT_CONF["overcoupling_ratio"], gt=0, le=1)


class SqueezeSection(_Section):
    supermodes: int = Field(default=2, ge=1)
    levels: int = Field(default=8, ge=1)
    omega: List[float] = Field(default_factory=lambda: [10.0])
    state: Optional[str] = None
    qdw_window: float = Field(default=3.0, ge=0)
    degeneracy_tol: float = Field(default=1e-6, gt=0)


class OracleSection(_Section):
    mu: int = Field(default=0, ge=0)


class OutputSection(_Section):
    directory: str = "results"


class RunSection(_Section):
    threads: Optional[int] = Field(default=None, ge=1)
    processes: bool = False


class RunConfig(_Section):
    physical: PhysicalSection = Field(default_factory=PhysicalSection)
    dispersion: DispersionSection = Field(default_factory=DispersionSection)
    point: PointSection = Field(default_factory=PointSection)
    sweep: Optional[SweepSection] = None
    omega: OmegaSection = Field(default_factory=OmegaSection)
    envelope: EnvelopeSection = Field(default_factory=EnvelopeSection)
    integrator: IntegratorSection = Field(default_factory=IntegratorSection)
    seeds: SeedsSection = Field(default_factory=SeedsSection)
    loss: LossSection = Field(default_factory=LossSection)
    squeeze: SqueezeSection = Field(default_factory=SqueezeSection)
    oracle: OracleSection = Field(default_factory=OracleSection)
    output: OutputSection = Field(default_factory=OutputSection)
    run: RunSection = Field(default_factory=RunSection)

    def physical_params(self, d4_zero: Optional[bool] = None) -> PhysicalParams:
        """Preset values with the section overrides applied, optionally without fourth-order dispersion."""
        values = dict(conf_for_name(self.physical.preset), **self.physical.overrides())
        if self.dispersion.d4_zero if d4_zero is None else d4_zero:
            values["d4_hz"] = 0.0
        try:
            return PhysicalParams(**values)
        except ValueError as exc:
            raise ConfigError(f"physical: {exc}") from exc

    def resonator_conf(self) -> Dict[str, Any]:
        """Numerical settings in the shape of :data:`pdcspy.defaults.DEFAULT_CONF`."""
        return {
            "dt": self.integrator.dt,
            "steady_tol": self.integrator.tol,
            "max_time": self.integrator.max_time,
            "transient_time": self.integrator.transient_time,
            "blowup_norm": self.integrator.blowup_norm,
            "noise_amplitude": self.seeds.noise_amplitude,
            "seed": self.seeds.seed,
            "overcoupling_ratio": self.loss.overcoupling_ratio,
            "omega_min": self.omega.min,
            "omega_max": self.omega.max,
            "omega_points": self.omega.points,
            "envelope_omega_max": self.envelope.omega_max,
            "envelope_omega_points": self.envelope.omega_points,
            "theta_points": self.envelope.theta_points,
            "pump_model": self.integrator.pump_model,
        }


def _describe(exc: pydantic.ValidationError) -> str:
    lines = []
    for error in exc.errors():
        path = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"{path}: {error['msg']}")
    return "; ".join(lines)


def parse_config(data: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except pydantic.ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc


def load_config(path) -> RunConfig:
    """Read and validate a TOML run configuration.

    :raises ConfigError: on malformed TOML or invalid values, naming the offending keys
    """
    path = Path(path)
    with path.open("rb") as f:
        try:
            data = tomllib.load(f)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    logger.debug("loaded configuration from %s", path)
    return parse_config(data)


def with_overrides(config: RunConfig, overrides: Dict[str, Any]) -> RunConfig:
    """Copy of ``config`` with dotted keys replaced, e.g. ``{"omega.max": 20.0}``; ``None`` values are skipped."""
    data = config.model_dump(exclude_none=True)
    for key, value in overrides.items():
        if value is None:
            continue
        section, _, name = key.partition(".")
        data.setdefault(section, {})[name] = value
    return parse_config(data)


def config_hash(config: RunConfig) -> str:
    payload = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
