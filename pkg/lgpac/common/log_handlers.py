"""
Log Handlers

This module contains utility functions to set up logging
consistently
"""
import logging
import sys

LOG_FORMAT = "[%(asctime)s] [%(levelname)s] [%(module)s] %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S %z"
LIBRARY_LOGGER = "flask.app"


def init_logging(app, logger_name: str):
    """Set up logging for production"""
    app.logger.propagate = False
    gunicorn_logger = logging.getLogger(logger_name)
    if gunicorn_logger.handlers:
        app.logger.handlers = gunicorn_logger.handlers
        app.logger.setLevel(gunicorn_logger.level)
    else:
        app.logger.setLevel(app.config.get("LOGGING_LEVEL", logging.INFO))
    # Make all log formats consistent
    formatter = logging.Formatter(LOG_FORMAT, DATE_FORMAT)
    for handler in app.logger.handlers:
        handler.setFormatter(formatter)
    app.logger.info("Logging handler established")


def init_cli_logging(level=logging.WARNING) -> logging.Logger:
    """Sends library logs to stderr; repeated calls reuse the one handler"""
    logger = logging.getLogger(LIBRARY_LOGGER)
    logger.setLevel(level)
    handler = next((h for h in logger.handlers if getattr(h, "lgpac_cli", False)), None)
    if handler is None:
        handler = logging.StreamHandler()
        handler.lgpac_cli = True
        handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
        logger.addHandler(handler)
    # stderr may have been swapped since the last call (CliRunner does)
    handler.setStream(sys.stderr)
    logger.propagate = False
    return logger
