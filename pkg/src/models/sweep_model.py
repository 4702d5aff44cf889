import math
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.errors import GridError
from src.models.encoding_model import EncodingName

FIG1_ENCODINGS = [
    EncodingName.TWO_QUBIT,
    EncodingName.THREE_QUBIT_1,
    EncodingName.THREE_QUBIT_2,
    EncodingName.FOUR_QUBIT,
]


def _ascending(values: List[float], label: str) -> List[float]:
    if not values:
        raise ValueError(f"{label} grid is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{label} grid must be strictly ascending")
    return values


def uniform_grid(start: float, stop: float, step: float) -> List[float]:
    """Inclusive grid start, start+step, ..., stop (stop snapped to the nearest step)."""
    if step <= 0:
        raise GridError("grid step must be positive")
    count = int(round((stop - start) / step)) + 1
    if count < 1:
        raise GridError(f"empty grid [{start}, {stop}]")
    return [float(v) for v in np.linspace(start, start + (count - 1) * step, count)]


class SweepSpec(BaseModel):
    """
    Domains of a figure sweep.

    The time grid is 0, t_step, ..., t_max. `h_values` is only used by the
    average-fidelity sweep, which optimizes over the field as well.
    """

    model_config = ConfigDict(frozen=True)

    encodings: List[EncodingName] = Field(default_factory=lambda: list(FIG1_ENCODINGS))
    n_values: List[int] = Field(default_factory=lambda: list(range(6, 51)))
    thetas: List[float] = Field(default_factory=lambda: [math.pi / 2])
    phi: float = Field(0.0, ge=0.0, lt=2 * math.pi)
    t_max: float = Field(100.0, ge=0.0)
    t_step: float = Field(0.05, gt=0.0)
    h_values: Optional[List[float]] = None
    sites: Optional[List[int]] = Field(None, description="Receiving-block end sites for site traces")
    j_xy: float = 1.0
    h_field: float = 1.0
    prominence: float = Field(0.02, ge=0.0)

    @field_validator("n_values")
    @classmethod
    def _check_lengths(cls, value: List[int]) -> List[int]:
        _ascending(value, "N")
        if value[0] < 1:
            raise ValueError("chain lengths must be positive")
        return value

    @field_validator("thetas")
    @classmethod
    def _check_thetas(cls, value: List[float]) -> List[float]:
        _ascending(value, "theta")
        if value[0] < 0.0 or value[-1] > math.pi + 1e-12:
            raise ValueError("theta must lie in [0, pi]")
        return value

    @field_validator("h_values")
    @classmethod
    def _check_fields(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        return None if value is None else _ascending(value, "h")

    @field_validator("sites")
    @classmethod
    def _check_sites(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        return None if value is None else _ascending(value, "site")

    @model_validator(mode="after")
    def _check_encodings(self) -> "SweepSpec":
        if not self.encodings:
            raise ValueError("at least one encoding is required")
        return self

    def time_grid(self) -> np.ndarray:
        count = int(round(self.t_max / self.t_step)) + 1
        return np.linspace(0.0, (count - 1) * self.t_step, count)

    def field_grid(self) -> np.ndarray:
        return np.array(self.h_values if self.h_values is not None else [self.h_field], dtype=float)


class SweepResult(BaseModel):
    """
    Sweep output on the product of `axes`.

    `values` holds the grid maxima. `t_star` is where they occur, `f_refined`
    the quadratic-interpolated maxima and `h_star` the optimal field when the
    field was swept.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    axes: Dict[str, List[Any]]
    values: np.ndarray
    t_star: np.ndarray
    f_refined: np.ndarray
    h_star: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def _check_shapes(self) -> "SweepResult":
        shape = tuple(len(axis) for axis in self.axes.values())
        for label in ("values", "t_star", "f_refined", "h_star"):
            array = getattr(self, label)
            if array is not None and array.shape != shape:
                raise ValueError(f"{label} has shape {array.shape}, axes imply {shape}")
        if self.values.size and (self.values.min() < 0.0 or self.values.max() > 1.0 + 1e-12):
            raise ValueError("sweep values must lie in [0, 1]")
        return self

    def value_at(self, **coordinates: Any) -> float:
        index = tuple(self.axes[axis].index(coordinates[axis]) for axis in self.axes)
        return float(self.values[index])

    def to_rows(self) -> List[Dict[str, Any]]:
        """Long format: one row per grid point."""
        names = list(self.axes)
        rows = []
        for index in np.ndindex(self.values.shape):
            row: Dict[str, Any] = {name: self.axes[name][i] for name, i in zip(names, index)}
            row["F"] = float(self.values[index])
            row["F_refined"] = float(self.f_refined[index])
            row["t_star"] = float(self.t_star[index])
            if self.h_star is not None:
                row["h_star"] = float(self.h_star[index])
            rows.append(row)
        return rows

    def argmax_records(self) -> List[Dict[str, Any]]:
        """Best point along the last axis for every setting of the others."""
        names = list(self.axes)
        records = []
        for outer in np.ndindex(self.values.shape[:-1]):
            line = self.values[outer]
            best = int(np.argmax(line))
            index = outer + (best,)
            record: Dict[str, Any] = {name: self.axes[name][i] for name, i in zip(names, index)}
            record.update(F_max=float(line[best]), t_star=float(self.t_star[index]))
            if self.h_star is not None:
                record["h_star"] = float(self.h_star[index])
            records.append(record)
        return records
