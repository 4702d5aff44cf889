import itertools
import logging
from typing import Callable, List

import numpy as np

from src.models.chain_model import ChainParams
from src.models.oracle_model import CheckResult, VerificationReport
from src.models.state_model import ExcitationState
from src.services.chain_service import MagnonChain
from src.services.dynamics_service import evolve
from src.services.fidelity_service import reduce_to_block
from src.services.oracle_service import build_hamiltonian, embed, evolve_exact, extract, partial_trace_dense

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


class OracleVerifier:
    """
    Cross-checks the analytic engine against dense exact evolution on one chain length.

    Random states and times come from a seeded generator, so a report is reproducible.
    """

    def __init__(
        self,
        n_sites: int,
        trials: int = 50,
        seed: int = 0,
        j_xy: float = 1.0,
        h_field: float = 1.0,
        t_max: float = 20.0,
        tolerance: float = DEFAULT_TOLERANCE,
    ):
        self.params = ChainParams(n_sites=n_sites, j_xy=j_xy, j_z=0.0, h_field=h_field)
        self.trials = trials
        self.seed = seed
        self.t_max = t_max
        self.tolerance = tolerance
        self.rng = np.random.default_rng(seed)
        self.hamiltonian = build_hamiltonian(self.params)
        self.chain = MagnonChain(self.params)

    def random_state(self, excitations: int) -> ExcitationState:
        n = self.params.n_sites
        configs = list(itertools.combinations(range(1, n + 1), excitations))
        values = self.rng.normal(size=len(configs)) + 1j * self.rng.normal(size=len(configs))
        values /= np.linalg.norm(values)
        return ExcitationState.trusted(n, dict(zip(configs, values)))

    def random_time(self) -> float:
        return float(self.rng.uniform(0.0, self.t_max))

    def _run(self, name: str, trial: Callable[[], float], trials: int) -> CheckResult:
        deviation = max(trial() for _ in range(trials))
        result = CheckResult(name=name, trials=trials, max_deviation=deviation, tolerance=self.tolerance)
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, f"Check {name}: max deviation {deviation:.3e} over {trials} trials")
        return result

    def check_spectrum(self) -> float:
        _, energies, _ = self.hamiltonian.sector_spectrum(1)
        _, vacuum, _ = self.hamiltonian.sector_spectrum(0)
        return float(np.max(np.abs(np.sort(energies - vacuum[0]) - np.sort(self.chain.energies))))

    def check_propagator(self) -> float:
        t = self.random_time()
        prop = self.chain.propagator(t)
        n = self.params.n_sites
        deviation = 0.0
        for site in range(1, n + 1):
            vacuum = ExcitationState.vacuum(n)
            excited = ExcitationState.trusted(n, {(site,): 1.0 + 0j})
            # the vacuum phase cancels in the relative amplitude
            exact_excited = evolve_exact(self.hamiltonian, embed(excited), t)
            exact_vacuum = evolve_exact(self.hamiltonian, embed(vacuum), t)[0]
            row = np.array([exact_excited[1 << (n - l)] for l in range(1, n + 1)]) / exact_vacuum
            deviation = max(deviation, float(np.max(np.abs(row - prop.entries[site - 1]))))
        return deviation

    def check_evolution(self, excitations: int) -> float:
        state = self.random_state(excitations)
        t = self.random_time()
        analytic = embed(evolve(state, self.params, t))
        exact = evolve_exact(self.hamiltonian, embed(state), t)
        return float(np.max(np.abs(analytic - exact)))

    def check_partial_trace(self) -> float:
        n = self.params.n_sites
        state = self.random_state(min(2, n))
        block = list(range(max(1, n - 2), n + 1))
        sparse = reduce_to_block(state, block).matrix
        dense = partial_trace_dense(embed(state), block, n).matrix
        return float(np.max(np.abs(sparse - dense)))

    def check_round_trip(self) -> float:
        excitations = int(self.rng.integers(0, min(2, self.params.n_sites) + 1))
        state = self.random_state(excitations)
        return extract(embed(state), self.params.n_sites).max_deviation(state)

    def run(self) -> VerificationReport:
        n = self.params.n_sites
        logger.info(f"Verifying the analytic engine against the exact oracle for N={n}")
        checks: List[CheckResult] = [
            self._run("spectrum", self.check_spectrum, 1),
            self._run("propagator", self.check_propagator, min(self.trials, 10)),
        ]
        for excitations in range(min(2, n) + 1):
            checks.append(
                self._run(f"evolution-M{excitations}", lambda m=excitations: self.check_evolution(m), self.trials)
            )
        checks.append(self._run("partial-trace", self.check_partial_trace, self.trials))
        checks.append(self._run("round-trip", self.check_round_trip, self.trials))
        return VerificationReport(n_sites=n, seed=self.seed, checks=checks)
