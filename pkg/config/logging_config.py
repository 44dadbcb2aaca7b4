"""Logging configuration for the scene graph toolkit."""
import logging
from pathlib import Path
from typing import Optional, Union

DEFAULT_LOG_FILE = Path(__file__).parent.parent / "ssg_toolkit.log"


def setup_logging(level: Union[int, str] = logging.INFO,
                  log_file: Optional[Union[str, Path]] = DEFAULT_LOG_FILE) -> logging.Logger:
    """Set up logging for an entry point; ``log_file=None`` logs to the stream only."""
    handlers = [logging.StreamHandler()]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )

    return logging.getLogger(__name__)
