from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.errors import NumericalInvariantError


class ChainParams(BaseModel):
    """
    Parameters of the open XY chain
    H = -J/2 sum(sx sx + sy sy) + Jz sum(sz sz) - h sum(sz).

    Energies are in units of J, time in units of 1/J.
    """

    model_config = ConfigDict(frozen=True)

    n_sites: int = Field(..., ge=1, description="Number of spins N")
    j_xy: float = Field(1.0, description="xy exchange constant J")
    j_z: float = Field(0.0, description="z exchange constant Jz (exact oracle only)")
    h_field: float = Field(1.0, description="Uniform field h along z")

    @field_validator("j_xy")
    @classmethod
    def _nonzero_coupling(cls, value: float) -> float:
        if value == 0.0:
            raise ValueError("j_xy must be non-zero")
        return value

    def with_field(self, h_field: float) -> "ChainParams":
        return self.model_copy(update={"h_field": h_field})


class MagnonMode(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=1)
    momentum: float
    energy: float


class PropagatorMatrix(BaseModel):
    """
    The single-magnon propagator f_{j,l}(t) at a fixed time.

    `entries[j-1, l-1]` is the amplitude for a magnon created at site j to be
    found at site l. The array is made read-only on construction.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    time: float
    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def _square_complex(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=complex)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError(f"propagator must be square, got shape {array.shape}")
        array.setflags(write=False)
        return array

    @property
    def n_sites(self) -> int:
        return self.entries.shape[0]

    def entry(self, j: int, l: int) -> complex:
        """1-based access to f_{j,l}."""
        return complex(self.entries[j - 1, l - 1])

    def compose(self, other: "PropagatorMatrix") -> "PropagatorMatrix":
        return PropagatorMatrix(time=self.time + other.time, entries=self.entries @ other.entries)

    def check_invariants(self, atol: float = 1e-10) -> None:
        """Raise NumericalInvariantError unless rows are normalized and both symmetries hold."""
        f = self.entries
        row_norms = np.sum(np.abs(f) ** 2, axis=1)
        deviation = float(np.max(np.abs(row_norms - 1.0)))
        if deviation > atol:
            raise NumericalInvariantError(f"propagator rows not normalized (max deviation {deviation:.3e})")
        deviation = float(np.max(np.abs(f - f.T)))
        if deviation > atol:
            raise NumericalInvariantError(f"propagator not symmetric (max deviation {deviation:.3e})")
        deviation = float(np.max(np.abs(f - f[::-1, ::-1])))
        if deviation > atol:
            raise NumericalInvariantError(f"propagator not mirror-symmetric (max deviation {deviation:.3e})")
