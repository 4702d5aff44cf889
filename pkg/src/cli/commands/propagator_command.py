import logging
from typing import Any, Dict

from src.models.run_config_model import RunConfig
from src.services.chain_service import MagnonChain
from src.services.output_service import OutputWriter, write_outputs

logger = logging.getLogger(__name__)


class PropagatorCommand:
    """
    Tabulates the single-magnon propagator f_{j,l}(t) of one chain at one time.
    """

    def __init__(self, writer: OutputWriter):
        self.writer = writer

    def execute(self, config: RunConfig) -> Dict[str, Any]:
        """
        Args:
            config: needs `n_sites`; reads `t` and the chain couplings.

        Returns:
            Summary with the chain length, the time and the output paths.
        """
        chain = MagnonChain(config.chain())
        prop = chain.propagator(config.t)
        prop.check_invariants()
        n = chain.n_sites
        rows = [
            {"j": j, "l": l, "re": prop.entries[j - 1, l - 1].real, "im": prop.entries[j - 1, l - 1].imag}
            for j in range(1, n + 1)
            for l in range(1, n + 1)
        ]
        logger.info(f"Propagator for N={n} at t={config.t:g}: |f_1N|={abs(prop.entry(1, n)):.6f}")
        summary = {
            "command": config.command.value,
            "n": n,
            "t": config.t,
            "end_to_end": abs(prop.entry(1, n)),
        }
        summary["outputs"] = write_outputs(self.writer, config, rows)
        return summary
