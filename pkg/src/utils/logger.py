import os
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)


def configure_logging(
    level: Optional[str] = None, log_file: Optional[str] = None, serialize: bool = False
) -> List[int]:
    """Replace loguru's default sink with a stderr sink and an optional rotating file sink."""
    level = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    logger.remove()  # Remove default handler
    sink_ids = [logger.add(sys.stderr, level=level, format=LOG_FORMAT, serialize=serialize)]

    # File sink if log_file specified
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        sink_ids.append(
            logger.add(log_file, level=level, format=LOG_FORMAT, rotation="10 MB", serialize=serialize)
        )
    return sink_ids
