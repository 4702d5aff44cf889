import logging
from typing import Any, Dict, List, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, computed_field, field_validator

logger = logging.getLogger(__name__)


class DenseHamiltonian(BaseModel):
    """
    Full 2^N matrix of the chain in the spin z-basis.

    Index convention: site 1 is the most significant bit, bit 1 = excitation.
    Sector eigendecompositions are computed on first use and cached.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_sites: int = Field(..., ge=1)
    matrix: np.ndarray

    _popcounts: np.ndarray = PrivateAttr()
    _spectra: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]] = PrivateAttr(default_factory=dict)

    @field_validator("matrix", mode="before")
    @classmethod
    def _read_only(cls, value: Any) -> np.ndarray:
        array = np.asarray(value, dtype=float)
        array.setflags(write=False)
        return array

    def model_post_init(self, __context: Any) -> None:
        indices = np.arange(2**self.n_sites)
        self._popcounts = np.array([bin(i).count("1") for i in indices])

    @computed_field
    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def sector_indices(self, excitations: int) -> np.ndarray:
        return np.flatnonzero(self._popcounts == excitations)

    def sector_spectrum(self, excitations: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(basis indices, eigenvalues, eigenvectors) of one excitation sector."""
        if excitations not in self._spectra:
            indices = self.sector_indices(excitations)
            block = self.matrix[np.ix_(indices, indices)]
            logger.debug(f"Diagonalizing sector M={excitations} of dimension {len(indices)}")
            energies, vectors = scipy.linalg.eigh(block)
            self._spectra[excitations] = (indices, energies, vectors)
        return self._spectra[excitations]

    def sector_leakage(self) -> float:
        """Largest |H_ab| between basis states of different excitation number."""
        mismatch = self._popcounts[:, None] != self._popcounts[None, :]
        return float(np.max(np.abs(self.matrix[mismatch]), initial=0.0))


class CheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    trials: int
    max_deviation: float
    tolerance: float

    @computed_field
    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance


class VerificationReport(BaseModel):
    n_sites: int
    seed: int
    checks: List[CheckResult] = Field(default_factory=list)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @computed_field
    @property
    def max_deviation(self) -> float:
        return max((check.max_deviation for check in self.checks), default=0.0)
