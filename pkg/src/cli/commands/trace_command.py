import logging
from typing import Any, Dict

from src.errors import GridError
from src.models.encoding_model import EncodingName, Placement
from src.models.run_config_model import RunConfig
from src.services.chain_service import MagnonChain
from src.services.encoding_service import logical_state, place_logical_state
from src.services.fidelity_service import with_peaks
from src.services.output_service import OutputWriter, peak_records, trace_rows, write_outputs
from src.services.transfer_service import TransferEngine

logger = logging.getLogger(__name__)


class TraceCommand:
    """
    F(t) of a logical state sent from the chain start and read on the block
    ending at one site (the last site by default), with its peaks.
    """

    def __init__(self, writer: OutputWriter):
        self.writer = writer

    def execute(self, config: RunConfig) -> Dict[str, Any]:
        params = config.chain(config.n_or(48))
        n = params.n_sites
        encoding = config.encoding_or(EncodingName.VACUUM_SINGLET)
        bloch = config.bloch()
        site = config.sites[0] if config.sites else n
        if config.sites and len(config.sites) > 1:
            raise GridError("trace reads a single site; use fig3 for several")
        size = encoding.block_size
        if not size <= site <= n:
            raise GridError(f"receiving site must lie in {size}..{n}, got {site}")

        engine = TransferEngine(MagnonChain(params), config.time_grid())
        initial = logical_state(encoding, bloch, Placement.START, n)
        target = place_logical_state(encoding, bloch, site - size + 1, n)
        trace = engine.fidelity_trace(initial, target, list(range(site - size + 1, site + 1)))
        trace = with_peaks(trace, config.prominence)
        logger.info(f"Trace of {encoding.name.value} on site {site} of N={n}: {len(trace.peaks)} peaks")

        peaks = peak_records([trace])
        summary = {
            "command": config.command.value,
            "n": n,
            "encoding": encoding.name.value,
            "theta": bloch.theta,
            "phi": bloch.phi,
            "site": site,
            "max_fidelity": float(trace.values.max()),
            "peaks": peaks,
        }
        summary["outputs"] = write_outputs(self.writer, config, trace_rows([trace]), peaks)
        return summary
