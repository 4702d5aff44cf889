import logging
from typing import Any, Dict

import numpy as np

from src.models.encoding_model import EncodingName
from src.models.run_config_model import RunConfig
from src.services.chain_service import MagnonChain
from src.services.fidelity_service import (
    average_fidelity_closed_form,
    single_spin_average_fidelity_closed_form,
)
from src.services.output_service import OutputWriter, write_outputs
from src.services.transfer_service import TransferEngine

logger = logging.getLogger(__name__)


class AverageFidelityCommand:
    """Bloch-averaged fidelity at a single (N, t, h)."""

    def __init__(self, writer: OutputWriter):
        self.writer = writer

    def execute(self, config: RunConfig) -> Dict[str, Any]:
        params = config.chain()
        encoding = config.encoding_or(EncodingName.VACUUM_SINGLET)
        chain = MagnonChain(params)
        if encoding.name == EncodingName.VACUUM_SINGLET:
            value = average_fidelity_closed_form(chain.propagator(config.t))
        elif encoding.name == EncodingName.SINGLE_SPIN:
            value = single_spin_average_fidelity_closed_form(chain.propagator(config.t))
        else:
            engine = TransferEngine(chain, np.array([config.t]))
            value = float(engine.average_fidelity_values(encoding)[0])
        logger.info(f"F_av of {encoding.name.value} at N={params.n_sites}, t={config.t:g}, h={params.h_field:g}: {value:.6f}")

        row = {"encoding": encoding.name.value, "n": params.n_sites, "t": config.t, "h": params.h_field, "F_av": value}
        summary = {"command": config.command.value, **row}
        summary["outputs"] = write_outputs(self.writer, config, [row])
        return summary
