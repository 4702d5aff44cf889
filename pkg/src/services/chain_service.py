import logging
from typing import List

import numpy as np

from src.models.chain_model import ChainParams, MagnonMode, PropagatorMatrix

logger = logging.getLogger(__name__)


class MagnonChain:
    """
    Single-magnon spectrum of an open XY chain and its propagator.

    f_{j,l}(t) = sum_m U[j,m] U[l,m] exp(-i E_m t) with
    U[l,m] = sqrt(2/(N+1)) sin(q_m l), q_m = pi m/(N+1), E_m = 2h - 2J cos q_m.
    J_z plays no part here; only the exact oracle uses it.
    """

    def __init__(self, params: ChainParams):
        self.params = params
        n = params.n_sites
        self.momenta = np.pi * np.arange(1, n + 1) / (n + 1)
        self.energies = 2.0 * params.h_field - 2.0 * params.j_xy * np.cos(self.momenta)
        sites = np.arange(1, n + 1)
        self.modes = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(sites, self.momenta))
        self.modes.setflags(write=False)

    @property
    def n_sites(self) -> int:
        return self.params.n_sites

    @property
    def vacuum_energy(self) -> float:
        """All-down energy of the analytic engine (J_z = 0)."""
        return -self.params.h_field * self.params.n_sites

    def magnon_modes(self) -> List[MagnonMode]:
        return [
            MagnonMode(index=m, momentum=float(q), energy=float(e))
            for m, (q, e) in enumerate(zip(self.momenta, self.energies), start=1)
        ]

    def propagator(self, t: float) -> PropagatorMatrix:
        if not np.isfinite(t):
            raise ValueError(f"time must be finite, got {t}")
        phases = np.exp(-1j * self.energies * t)
        entries = (self.modes * phases) @ self.modes.T
        return PropagatorMatrix(time=float(t), entries=entries)

    def propagator_rows(self, site: int, times: np.ndarray) -> np.ndarray:
        """f_{site,l}(t) for every t in `times`: array of shape (len(times), N)."""
        if not 1 <= site <= self.n_sites:
            raise ValueError(f"site {site} outside 1..{self.n_sites}")
        times = np.asarray(times, dtype=float)
        phases = np.exp(-1j * np.outer(times, self.energies))
        return (phases * self.modes[site - 1, :]) @ self.modes.T


def magnon_modes(params: ChainParams) -> List[MagnonMode]:
    return MagnonChain(params).magnon_modes()


def propagator(params: ChainParams, t: float) -> PropagatorMatrix:
    return MagnonChain(params).propagator(t)
