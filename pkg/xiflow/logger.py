"""
The package-wide "xiflow" logger.

Levels are used consistently across modules:
    DEBUG    diagnostics: step statistics, refined brackets, truncation sizes
    INFO     results: catalogue sizes, detected periods, suite verdicts
    WARNING  recoverable anomalies such as a step rejected for a non-finite
             right-hand side or a zero whose xi value is not real
    ERROR    emitted just before an exception is converted to an exit code
"""

import logging

# Create a logger
logger = logging.getLogger("xiflow")

# Default log level
DEFAULT_LOG_LEVEL = logging.INFO

# Avoid duplicate handlers
if not logger.hasHandlers():
    handler = logging.StreamHandler()
    formatter = logging.Formatter("%(asctime)s [%(levelname)s] [%(module)s] %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)

logger.setLevel(DEFAULT_LOG_LEVEL)


def set_log_level(level_name: str):
    """
    Sets the log level of the xiflow logger at runtime.
    Args:
        level_name (str): Name of the log level (e.g., "DEBUG", "INFO", "WARNING").
    """
    level = logging.getLevelName(level_name.upper())
    if not isinstance(level, int):
        logger.warning(f"Unknown log level {level_name!r}; using {logging.getLevelName(DEFAULT_LOG_LEVEL)}.")
        level = DEFAULT_LOG_LEVEL
    logger.setLevel(level)
    logger.debug(f"Log level set to {logging.getLevelName(level)}.")
