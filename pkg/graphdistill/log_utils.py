import logging
import os
import sys

LOG_FORMAT = "%(name)s - %(asctime)s %(levelname)s: %(message)s"
LOG_LEVEL_ENV = "GDB_LOG_LEVEL"
PACKAGE_LOGGER = "graphdistill"


def _module_name(logger_name):
    """Turn a module ``__file__`` or dotted ``__name__`` into a short name"""
    basename = os.path.splitext(os.path.basename(logger_name))[0]
    basename = basename.split(".")[-1]
    return f"{PACKAGE_LOGGER}.{basename}"


def get_level_from_env(default=logging.INFO):
    level = os.environ.get(LOG_LEVEL_ENV)
    if level is None:
        return default
    if level.isdigit():
        return int(level)
    return logging.getLevelName(level.upper())


def set_level(level):
    """Change the level of every graphdistill logger at once"""
    logging.getLogger(PACKAGE_LOGGER).setLevel(level)


def get_logger(logger_name, level=None):

    # create logger as a child of the package logger
    logger = logging.getLogger(_module_name(logger_name))

    package_logger = logging.getLogger(PACKAGE_LOGGER)
    if not package_logger.handlers:
        # create formatter and add it to the handler; stderr keeps stdout
        # free for command output
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        package_logger.addHandler(handler)
        package_logger.setLevel(get_level_from_env())
        package_logger.propagate = False
    if level is not None:
        logger.setLevel(level)

    return logger
