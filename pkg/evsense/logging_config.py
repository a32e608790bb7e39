# Logging setup driven by the EVSENSE_LOG environment variable
import logging
import os
from typing import Optional

from dotenv import load_dotenv

LOG_ENV_VAR = "EVSENSE_LOG"
DEFAULT_LEVEL = "warn"

_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

logger = logging.getLogger("evsense")


def resolve_level(value: Optional[str]) -> int:
    """Map an EVSENSE_LOG value to a logging level, falling back to warn"""
    if not value:
        return _LEVELS[DEFAULT_LEVEL]
    level = _LEVELS.get(value.strip().lower())
    if level is None:
        logger.warning(f"Unknown {LOG_ENV_VAR} value '{value}', using '{DEFAULT_LEVEL}'")
        return _LEVELS[DEFAULT_LEVEL]
    return level


def configure_logging(level: Optional[str] = None) -> int:
    """
    Install one stream handler on the package logger.
    An explicit level wins over the environment; repeated calls only adjust the level.
    """
    load_dotenv()
    resolved = resolve_level(level if level is not None else os.getenv(LOG_ENV_VAR))

    if not any(getattr(h, "_evsense_handler", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        handler._evsense_handler = True
        logger.addHandler(handler)

    logger.setLevel(resolved)
    return resolved
