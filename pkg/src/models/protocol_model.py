from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class MemoryProtocolResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    swap_times: List[float]
    etas: List[float] = Field(..., description="Per-swap success probabilities")
    cumulative_failure: List[float] = Field(..., description="Running product of (1 - eta_k)")

    @model_validator(mode="after")
    def _check_probabilities(self) -> "MemoryProtocolResult":
        if not len(self.swap_times) == len(self.etas) == len(self.cumulative_failure):
            raise ValueError("swap_times, etas and cumulative_failure must have equal length")
        if any(not 0.0 <= eta <= 1.0 for eta in self.etas):
            raise ValueError(f"swap probabilities must lie in [0, 1], got {self.etas}")
        if any(b > a for a, b in zip(self.cumulative_failure, self.cumulative_failure[1:])):
            raise ValueError("cumulative failure must be non-increasing")
        return self

    @property
    def success_probability(self) -> float:
        return 1.0 - self.cumulative_failure[-1] if self.cumulative_failure else 0.0

    def report(self) -> dict:
        return {
            "swap_times": self.swap_times,
            "etas": self.etas,
            "cumulative": [1.0 - q for q in self.cumulative_failure],
            "cumulative_failure": self.cumulative_failure,
            "success_probability": self.success_probability,
        }


class DualChainOutcome(BaseModel):
    """
    Result of the two-chain confirmation scheme.

    `outcome_probabilities` are keyed by the measured bit string on chain 2's
    last block, first block site first. `f_conditioned` is None when the
    confirming outcome never occurs.
    """

    model_config = ConfigDict(frozen=True)

    n_sites: int
    t_wait: float
    p_confirm: float = Field(..., ge=0.0, le=1.0)
    f_conditioned: Optional[float] = Field(None, ge=0.0, le=1.0)
    f_unconditioned: float = Field(..., ge=0.0, le=1.0)
    leakage: float = Field(..., ge=0.0, le=1.0)
    outcome_probabilities: Dict[str, float]

    def report(self) -> dict:
        return self.model_dump()
