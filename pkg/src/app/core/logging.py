"""
Logging setup for the simulator.

Every module creates its own logger under the ``cavity_sim`` namespace
(e.g. ``cavity_sim.closed.evolution``); this module only wires the root
handler once, from the CLI or from scripts.
"""
import logging
from typing import Optional

from src.app.core.config import settings

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"

_configured = False


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Configure the root handler (idempotent) and return the package logger.

    Args:
        level: logging level name; defaults to ``settings.log_level``

    Returns:
        The ``cavity_sim`` logger.
    """
    global _configured
    level_name = (level or settings.log_level).upper()
    if not _configured:
        logging.basicConfig(level=level_name, format=LOG_FORMAT)
        _configured = True
    logger = logging.getLogger("cavity_sim")
    logger.setLevel(level_name)
    return logger
