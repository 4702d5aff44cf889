from typing import Dict, Iterable, Mapping, Sequence, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Ascending tuple of excited sites (1-based); () is the all-down vacuum.
Configuration = Tuple[int, ...]


def make_configuration(sites: Iterable[int], n_sites: int) -> Configuration:
    """Validate and return a canonical configuration. Sites must already be strictly ascending."""
    config = tuple(int(site) for site in sites)
    for site in config:
        if not 1 <= site <= n_sites:
            raise ValueError(f"site {site} outside 1..{n_sites}")
    if any(a >= b for a, b in zip(config, config[1:])):
        raise ValueError(f"configuration {config} is not strictly ascending")
    return config


class ExcitationState(BaseModel):
    """
    Sparse chain state: a map from canonical configurations to complex amplitudes.

    Amplitudes are spin-basis amplitudes. Because the Jordan-Wigner string counts
    occupied sites to the left, c†_{l1} c†_{l2} |0> with l1 < l2 is the spin state
    with ups at l1 and l2 and sign +1, so the two readings coincide.
    Sectors may be mixed (the vacuum-singlet logical qubit needs 0 and 1).
    """

    model_config = ConfigDict(frozen=True)

    n_sites: int = Field(..., ge=1)
    amplitudes: Dict[Tuple[int, ...], complex] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _canonical_keys(self) -> "ExcitationState":
        for config in self.amplitudes:
            make_configuration(config, self.n_sites)
        return self

    @classmethod
    def trusted(cls, n_sites: int, amplitudes: Dict[Configuration, complex]) -> "ExcitationState":
        """Build without validation. Callers guarantee canonical keys."""
        return cls.model_construct(n_sites=n_sites, amplitudes=amplitudes)

    @classmethod
    def vacuum(cls, n_sites: int) -> "ExcitationState":
        return cls.trusted(n_sites, {(): 1.0 + 0.0j})

    @classmethod
    def from_mapping(cls, n_sites: int, amplitudes: Mapping[Sequence[int], complex]) -> "ExcitationState":
        """Accepts any site order per key; keys are sorted. Unsorted fermionic orders are not re-signed."""
        canonical: Dict[Configuration, complex] = {}
        for sites, amplitude in amplitudes.items():
            config = make_configuration(sorted(int(s) for s in sites), n_sites)
            canonical[config] = canonical.get(config, 0.0j) + complex(amplitude)
        return cls.trusted(n_sites, canonical)

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def excitation_numbers(self) -> Set[int]:
        return {len(config) for config in self.amplitudes}

    def sector(self, excitations: int) -> "ExcitationState":
        return ExcitationState.trusted(
            self.n_sites, {c: a for c, a in self.amplitudes.items() if len(c) == excitations}
        )

    def without_vacuum(self) -> "ExcitationState":
        return ExcitationState.trusted(self.n_sites, {c: a for c, a in self.amplitudes.items() if c})

    def normalized(self) -> "ExcitationState":
        norm = np.sqrt(self.norm_squared())
        if norm == 0.0:
            raise ValueError("cannot normalize the zero state")
        return self.scaled(1.0 / norm)

    def scaled(self, factor: complex) -> "ExcitationState":
        return ExcitationState.trusted(self.n_sites, {c: factor * a for c, a in self.amplitudes.items()})

    def added(self, other: "ExcitationState", factor: complex = 1.0) -> "ExcitationState":
        """self + factor * other"""
        if other.n_sites != self.n_sites:
            raise ValueError("states live on chains of different length")
        merged = dict(self.amplitudes)
        for config, amplitude in other.amplitudes.items():
            merged[config] = merged.get(config, 0.0j) + factor * amplitude
        return ExcitationState.trusted(self.n_sites, merged)

    def inner(self, other: "ExcitationState") -> complex:
        """<self|other>"""
        return complex(sum(np.conj(a) * other.amplitudes.get(c, 0.0) for c, a in self.amplitudes.items()))

    def shifted(self, offset: int, n_sites: int) -> "ExcitationState":
        """Translate every excitation by `offset` sites onto a chain of `n_sites`."""
        return ExcitationState(
            n_sites=n_sites,
            amplitudes={tuple(s + offset for s in c): a for c, a in self.amplitudes.items()},
        )

    def occupied_sites(self) -> Set[int]:
        return {site for config in self.amplitudes for site in config}

    def max_deviation(self, other: "ExcitationState") -> float:
        keys = set(self.amplitudes) | set(other.amplitudes)
        if not keys:
            return 0.0
        return float(max(abs(self.amplitudes.get(k, 0.0) - other.amplitudes.get(k, 0.0)) for k in keys))

    def to_dense(self) -> np.ndarray:
        """Spin-basis vector of length 2^N, site 1 as the most significant bit."""
        vector = np.zeros(2**self.n_sites, dtype=complex)
        for config, amplitude in self.amplitudes.items():
            vector[configuration_index(config, self.n_sites)] += amplitude
        return vector


def configuration_index(config: Configuration, n_sites: int) -> int:
    return sum(1 << (n_sites - site) for site in config)


def index_configuration(index: int, n_sites: int) -> Configuration:
    return tuple(site for site in range(1, n_sites + 1) if index >> (n_sites - site) & 1)
