"""Command-line interface (``shiftcraft`` console script)."""

from .config import ConfigError, load_config, parse_config
from .main import EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main

__all__ = [
    "EXIT_CONFIG",
    "EXIT_IO",
    "EXIT_NUMERIC",
    "EXIT_OK",
    "EXIT_USAGE",
    "ConfigError",
    "load_config",
    "main",
    "parse_config",
]
