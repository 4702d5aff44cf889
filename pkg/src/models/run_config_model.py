import math
from enum import Enum
from pathlib import Path
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.errors import UsageError
from src.models.chain_model import ChainParams
from src.models.encoding_model import BlochState, EncodingName, LogicalEncoding
from src.models.sweep_model import SweepSpec, uniform_grid


class CommandName(str, Enum):
    PROPAGATOR = "propagator"
    TRACE = "trace"
    FIG1 = "fig1"
    FIG2 = "fig2"
    FIG3 = "fig3"
    FIG4 = "fig4"
    AVG_FIDELITY = "avg-fidelity"
    PROTOCOL_MEMORY = "protocol-memory"
    PROTOCOL_DUAL = "protocol-dual"
    VERIFY_ORACLE = "verify-oracle"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """
    Every knob a command can read.

    Values come from model defaults, then a key=value config file, then
    command-line flags. Fields left as None take a per-command default.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: CommandName
    n_sites: Optional[int] = Field(None, ge=1)
    n_min: Optional[int] = Field(None, ge=1)
    n_max: Optional[int] = Field(None, ge=1)
    j_xy: float = 1.0
    j_z: float = 0.0
    h_field: float = 1.0

    encoding: Optional[EncodingName] = None
    encodings: Optional[List[EncodingName]] = None
    theta: Optional[float] = Field(None, ge=0.0, le=math.pi + 1e-12)
    phi: float = Field(0.0, ge=0.0, lt=2 * math.pi)

    t: float = Field(25.0, description="Single evaluation time (propagator, avg-fidelity, protocol-dual)")
    t_max: float = Field(100.0, ge=0.0)
    t_step: float = Field(0.05, gt=0.0)
    h_min: float = 0.0
    h_max: float = 2.0
    h_step: float = Field(0.05, gt=0.0)
    theta_step: float = Field(math.pi / 60, gt=0.0)
    sites: Optional[List[int]] = None
    swap_times: Optional[List[float]] = None
    prominence: float = Field(0.02, ge=0.0)

    trials: int = Field(50, ge=1, description="Random states per sector for verify-oracle")
    seed: int = 0

    out: Optional[Path] = None
    summary_out: Optional[Path] = None
    output_format: OutputFormat = OutputFormat.CSV

    @field_validator("encodings", "sites", "swap_times", mode="before")
    @classmethod
    def _split_commas(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator("out", "summary_out")
    @classmethod
    def _writable(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.parent.resolve().is_dir():
            raise ValueError(f"output directory {value.parent} does not exist")
        return value

    def _check_free_magnons(self) -> None:
        if self.j_z != 0.0:
            raise UsageError("the magnon engine needs Jz = 0; a non-zero Jz is only meaningful to the dense oracle")

    def chain(self, n_sites: Optional[int] = None) -> ChainParams:
        n = n_sites if n_sites is not None else self.n_sites
        if n is None:
            raise UsageError(f"command {self.command.value} needs --n")
        self._check_free_magnons()
        return ChainParams(n_sites=n, j_xy=self.j_xy, j_z=self.j_z, h_field=self.h_field)

    def bloch(self, default_theta: float = math.pi) -> BlochState:
        theta = default_theta if self.theta is None else min(self.theta, math.pi)
        return BlochState(theta=theta, phi=self.phi)

    def n_or(self, default: int) -> int:
        return self.n_sites if self.n_sites is not None else default

    def encoding_or(self, default: EncodingName) -> LogicalEncoding:
        return LogicalEncoding.from_name(self.encoding or default)

    def lengths(self, default_min: int, default_max: int) -> List[int]:
        return list(range(self.n_min or default_min, (self.n_max or default_max) + 1))

    def theta_grid(self) -> List[float]:
        return [min(theta, math.pi) for theta in uniform_grid(0.0, math.pi, self.theta_step)]

    def field_values(self) -> List[float]:
        return uniform_grid(self.h_min, self.h_max, self.h_step)

    def sweep_spec(self, **domains: Any) -> SweepSpec:
        """A SweepSpec carrying this run's chain, time grid and peak settings plus `domains`."""
        self._check_free_magnons()
        return SweepSpec(
            phi=self.phi,
            t_max=self.t_max,
            t_step=self.t_step,
            j_xy=self.j_xy,
            h_field=self.h_field,
            prominence=self.prominence,
            **domains,
        )

    def time_grid(self) -> np.ndarray:
        return self.sweep_spec().time_grid()
