import logging
import math
from typing import Any, Dict, List

from src.errors import GridError
from src.models.encoding_model import EncodingName, LogicalEncoding, Placement
from src.models.run_config_model import RunConfig
from src.services.chain_service import MagnonChain
from src.services.encoding_service import block_sites, logical_state
from src.services.fidelity_service import find_peaks
from src.services.output_service import OutputWriter, write_outputs
from src.services.protocol_service import dual_chain_protocol, memory_protocol
from src.services.transfer_service import TransferEngine

logger = logging.getLogger(__name__)


class MemoryProtocolCommand:
    """
    Repeated swaps of the receiving block into a memory.

    Without --swap-times the swaps happen at the peaks of the end-block
    fidelity trace inside [0, t_max].
    """

    def __init__(self, writer: OutputWriter):
        self.writer = writer

    def _peak_times(self, config: RunConfig, encoding: LogicalEncoding) -> List[float]:
        params = config.chain(config.n_or(48))
        n = params.n_sites
        bloch = config.bloch()
        engine = TransferEngine(MagnonChain(params), config.time_grid())
        trace = engine.fidelity_trace(
            logical_state(encoding, bloch, Placement.START, n),
            logical_state(encoding, bloch, Placement.END, n),
            block_sites(encoding, Placement.END, n),
        )
        times = [peak.time for peak in find_peaks(trace, config.prominence)]
        if not times:
            raise GridError(f"no fidelity peaks in [0, {config.t_max:g}]; pass --swap-times explicitly")
        return times

    def execute(self, config: RunConfig) -> Dict[str, Any]:
        params = config.chain(config.n_or(48))
        encoding = config.encoding_or(EncodingName.VACUUM_SINGLET)
        swap_times = config.swap_times or self._peak_times(config, encoding)
        logger.info(f"Memory protocol on N={params.n_sites} with swaps at {swap_times}")

        result = memory_protocol(params, encoding, config.bloch(), swap_times)
        report = {"n": params.n_sites, "encoding": encoding.name.value, **result.report()}
        rows = [
            {"k": k, "t": t, "eta": eta, "cumulative": 1.0 - failure}
            for k, (t, eta, failure) in enumerate(
                zip(result.swap_times, result.etas, result.cumulative_failure), start=1
            )
        ]
        summary = {"command": config.command.value, **report}
        summary["outputs"] = write_outputs(self.writer, config, rows, report)
        return summary


class DualChainCommand:
    """Two-chain confirmation protocol at one waiting time."""

    def __init__(self, writer: OutputWriter):
        self.writer = writer

    def execute(self, config: RunConfig) -> Dict[str, Any]:
        params = config.chain(config.n_or(48))
        outcome = dual_chain_protocol(params, config.bloch(default_theta=math.pi / 2), config.t)
        report = outcome.report()
        rows = [{"outcome": bits, "probability": p} for bits, p in outcome.outcome_probabilities.items()]
        summary = {"command": config.command.value, **report}
        summary["outputs"] = write_outputs(self.writer, config, rows, report)
        return summary
