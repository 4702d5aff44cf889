import math
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator


class EncodingName(str, Enum):
    TWO_QUBIT = "two-qubit"
    THREE_QUBIT_1 = "three-qubit-1"
    THREE_QUBIT_2 = "three-qubit-2"
    FOUR_QUBIT = "four-qubit"
    VACUUM_SINGLET = "vacuum-singlet"
    SINGLE_SPIN = "single-spin"


BLOCK_SIZES = {
    EncodingName.TWO_QUBIT: 2,
    EncodingName.THREE_QUBIT_1: 3,
    EncodingName.THREE_QUBIT_2: 3,
    EncodingName.FOUR_QUBIT: 4,
    EncodingName.VACUUM_SINGLET: 3,
    EncodingName.SINGLE_SPIN: 1,
}

# (alpha, beta) gauge of the three-qubit subsystem code: alpha weighs the
# one-excitation component, beta the two-excitation one.
DEFAULT_GAUGES = {
    EncodingName.THREE_QUBIT_1: ((1.0 + 0j, 0j), (1.0 + 0j, 0j)),
    EncodingName.THREE_QUBIT_2: ((0j, 1.0 + 0j), (0j, 1.0 + 0j)),
}


class Placement(str, Enum):
    START = "start"
    END = "end"


class BlochState(BaseModel):
    """cos(theta/2)|0_L> + sin(theta/2) e^{i phi}|1_L>"""

    model_config = ConfigDict(frozen=True)

    theta: float = Field(..., ge=0.0, le=math.pi + 1e-12)
    phi: float = Field(0.0, ge=0.0, lt=2 * math.pi)

    @property
    def alpha(self) -> complex:
        return complex(math.cos(self.theta / 2))

    @property
    def beta(self) -> complex:
        return math.sin(self.theta / 2) * complex(math.cos(self.phi), math.sin(self.phi))


class LogicalEncoding(BaseModel):
    """
    A named logical-qubit encoding.

    `gauge_zero` / `gauge_one` are the (alpha, beta) pairs of the three-qubit
    subsystem code and must be normalized. They are rejected for the other
    encodings.
    """

    model_config = ConfigDict(frozen=True)

    name: EncodingName
    gauge_zero: Optional[Tuple[complex, complex]] = None
    gauge_one: Optional[Tuple[complex, complex]] = None

    @computed_field
    @property
    def block_size(self) -> int:
        return BLOCK_SIZES[self.name]

    @model_validator(mode="after")
    def _check_gauge(self) -> "LogicalEncoding":
        if self.name not in DEFAULT_GAUGES:
            if self.gauge_zero is not None or self.gauge_one is not None:
                raise ValueError(f"encoding {self.name.value} takes no gauge parameters")
            return self
        for label, pair in (("gauge_zero", self.gauge_zero), ("gauge_one", self.gauge_one)):
            if pair is not None and abs(abs(pair[0]) ** 2 + abs(pair[1]) ** 2 - 1.0) > 1e-12:
                raise ValueError(f"{label} must satisfy |alpha|^2 + |beta|^2 = 1, got {pair}")
        return self

    @classmethod
    def from_name(cls, name: str | EncodingName, **gauge) -> "LogicalEncoding":
        return cls(name=EncodingName(name), **gauge)

    @property
    def gauges(self) -> Tuple[Tuple[complex, complex], Tuple[complex, complex]]:
        default_zero, default_one = DEFAULT_GAUGES[self.name]
        return (self.gauge_zero or default_zero, self.gauge_one or default_one)

    @property
    def mixes_sectors(self) -> bool:
        """True when the logical states span several excitation numbers, so h changes fidelities."""
        if self.name in (EncodingName.VACUUM_SINGLET, EncodingName.SINGLE_SPIN):
            return True
        if self.name in DEFAULT_GAUGES:
            return any(abs(a) > 0 and abs(b) > 0 for a, b in self.gauges)
        return False
