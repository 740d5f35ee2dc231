import logging
import logging.handlers
from pathlib import Path

from qirw.core.config import settings

_HANDLER_TAG = "_qirw_handler"


def setup_logging(level: str | None = None, to_file: bool | None = None):
    # Configure root logger
    logger = logging.getLogger()
    logger.setLevel(level or settings.LOG_LEVEL)

    # Repeated calls (tests, nested CLI invocations) must not stack handlers
    for handler in list(logger.handlers):
        if getattr(handler, _HANDLER_TAG, False):
            logger.removeHandler(handler)
            handler.close()

    # Create formatter
    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S")

    # Console handler goes to stderr so stdout stays machine-readable
    console_handler = logging.StreamHandler()
    console_handler.setLevel(level or settings.LOG_LEVEL)
    console_handler.setFormatter(formatter)
    setattr(console_handler, _HANDLER_TAG, True)
    logger.addHandler(console_handler)

    if settings.LOG_TO_FILE if to_file is None else to_file:
        log_dir = Path(settings.LOG_DIR)
        log_dir.mkdir(exist_ok=True)
        log_file = log_dir / "qirw.log"

        file_handler = logging.handlers.RotatingFileHandler(
            log_file, maxBytes=10_000_000, backupCount=5  # 10MB per file, 5 backups
        )
        file_handler.setLevel(level or settings.LOG_LEVEL)
        file_handler.setFormatter(formatter)
        setattr(file_handler, _HANDLER_TAG, True)
        logger.addHandler(file_handler)
