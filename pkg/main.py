import logging
import os
import sys

from dotenv import load_dotenv

from src.cli.runner import LOG_FORMAT, run

# --- Basic Logging Setup ---
load_dotenv()
logging.basicConfig(level=os.environ.get("MAGNON_LOG_LEVEL", "INFO").upper(), format=LOG_FORMAT)
logger = logging.getLogger(__name__)


def main() -> int:
    """
    Entry point: `python main.py <command> [flags]`, e.g. `python main.py fig3 --n 48 --out fig3.csv`.
    """
    logger.debug(f"Arguments: {sys.argv[1:]}")
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
