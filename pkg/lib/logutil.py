"""
Logging for the braidadic library and CLI.

Records go to stderr so stdout stays machine-readable JSON. DEBUG is switched on
by APP_DEBUG=1, LOG_LEVEL=DEBUG or the CLI's --verbose; paths.debug_log_file in
app.yml then also receives every record.
"""
import logging
import os
import sys
from pathlib import Path
from typing import Optional

LOGGER_NAME = "braidadic"
LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def get_logger(module: str) -> logging.Logger:
    return logging.getLogger(f"{LOGGER_NAME}.{module}")


def resolve_level(default_level: str = "INFO", verbose: bool = False) -> int:
    if verbose or os.environ.get("APP_DEBUG") == "1":
        return logging.DEBUG
    name = (os.environ.get("LOG_LEVEL") or default_level).upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def _debug_file_handler(path: str, formatter: logging.Formatter) -> Optional[logging.Handler]:
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(target, encoding="utf-8")
    except OSError as exc:
        sys.stderr.write(f"{LOGGER_NAME}: debug_log_file {path} unavailable: {exc}\n")
        return None
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(formatter)
    return handler


def setup_app_logging(
    *,
    debug_log_file: Optional[str] = None,
    default_level: str = "INFO",
    verbose: bool = False,
) -> logging.Logger:
    """(Re)configure the braidadic logger; safe to call once per CLI invocation."""
    log = logging.getLogger(LOGGER_NAME)
    for handler in list(log.handlers):
        handler.close()
    log.handlers.clear()
    log.setLevel(logging.DEBUG)
    log.propagate = False

    level = resolve_level(default_level, verbose)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(level)
    console.setFormatter(formatter)
    log.addHandler(console)

    if debug_log_file and level == logging.DEBUG:
        handler = _debug_file_handler(debug_log_file, formatter)
        if handler is not None:
            log.addHandler(handler)
    log.debug("logging at %s", logging.getLevelName(level))
    return log
