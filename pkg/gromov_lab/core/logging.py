import logging
from typing import Optional

from gromov_lab.core.config import settings


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: Optional[str] = None) -> None:
    """
    Configure the package logger once per process.
    Level falls back to settings.LOG_LEVEL.
    """
    level_name = (level or settings.LOG_LEVEL).upper()
    logging.basicConfig(format=LOG_FORMAT, level=logging.WARNING)
    logging.getLogger("gromov_lab").setLevel(getattr(logging, level_name, logging.WARNING))
