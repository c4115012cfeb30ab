import logging


_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(verbosity: int = 0) -> logging.Logger:
    """
    Configures the `cimcloud` logger once and returns it.

    Args:
        `verbosity`: 0 for INFO, positive for DEBUG, negative for WARNING.
    """
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    else:
        level = logging.INFO

    logger = logging.getLogger("cimcloud")
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        logger.addHandler(handler)
    logger.setLevel(level)
    return logger
