from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.errors import NumericalInvariantError


class ReducedBlockState(BaseModel):
    """
    Reduced density matrix of a block of sites.

    Basis index: the first block site is the most significant bit, bit 1 = excited.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    block_sites: List[int]
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _as_complex(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=complex)
        array.setflags(write=False)
        return array

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, vector: np.ndarray) -> float:
        """<v|rho|v> (real part)."""
        return float(np.real(np.conj(vector) @ self.matrix @ vector))

    def check_invariants(self, atol: float = 1e-10) -> None:
        rho = self.matrix
        if rho.shape != (2 ** len(self.block_sites),) * 2:
            raise NumericalInvariantError(f"density matrix shape {rho.shape} does not match block {self.block_sites}")
        hermiticity = float(np.max(np.abs(rho - rho.conj().T)))
        if hermiticity > max(atol, 1e-12):
            raise NumericalInvariantError(f"reduced state not Hermitian (deviation {hermiticity:.3e})")
        trace = float(np.real(np.trace(rho)))
        if abs(trace - 1.0) > atol:
            raise NumericalInvariantError(f"reduced state trace {trace!r} != 1")
        lowest = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
        if lowest < -atol:
            raise NumericalInvariantError(f"reduced state not positive semidefinite (eigenvalue {lowest:.3e})")


class FidelityPeak(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=1)
    time: float
    value: float


class FidelityTrace(BaseModel):
    """F(t) on a uniform time grid, with its refined local maxima."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    values: np.ndarray
    peaks: List[FidelityPeak] = Field(default_factory=list)
    site: Optional[int] = Field(None, description="Last site i of the receiving block {i-2, i-1, i}")

    @field_validator("times", "values", mode="before")
    @classmethod
    def _as_float(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=float)
        array.setflags(write=False)
        return array

    @field_validator("values")
    @classmethod
    def _in_unit_interval(cls, value: np.ndarray) -> np.ndarray:
        if value.size and (value.min() < 0.0 or value.max() > 1.0 + 1e-12):
            raise ValueError("fidelities must lie in [0, 1]")
        return value

    def peak_records(self) -> List[dict]:
        return [{"k": p.k, "t_k": p.time, "F_k": p.value} for p in self.peaks]
