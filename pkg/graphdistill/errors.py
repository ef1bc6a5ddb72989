"""
errors.py

Exception hierarchy shared by every module, plus the exit-code contract
used by the command line
"""
import functools
import sys

import click

from graphdistill.log_utils import get_logger

logger = get_logger(__file__)

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class GraphDistillError(Exception):
    """Base class for every error raised on purpose by graphdistill"""

    exit_code = EXIT_USAGE


class ConfigError(GraphDistillError, ValueError):
    """A hyper-parameter or size is outside its valid range"""


class DimensionError(GraphDistillError, ValueError):
    """Array shapes do not line up"""


class ContractError(GraphDistillError):
    """A precondition of an operation was violated by the caller"""


class ParseError(GraphDistillError):
    """A text input could not be parsed"""

    def __init__(self, message, path=None, line_number=None):
        location = ""
        if path is not None:
            location += f"{path}"
        if line_number is not None:
            location += f":{line_number}"
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
        self.path = path
        self.line_number = line_number


class ValidationError(GraphDistillError):
    """Well-formed input that breaks a data invariant"""


class FormatError(GraphDistillError):
    """Binary file with a wrong magic, version or a truncated payload"""

    def __init__(self, message):
        super().__init__(f"format error: {message}")


class NumericalError(GraphDistillError, ArithmeticError):
    """An operation produced NaN or infinity"""

    exit_code = EXIT_FAILURE


class TrainingError(GraphDistillError, RuntimeError):
    """Training diverged"""

    exit_code = EXIT_FAILURE

    def __init__(self, message, epoch=None):
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)
        self.epoch = epoch


def exit_on_error(func):
    """Translate graphdistill errors into the CLI exit-code contract

    0 success, 1 runtime/training failure, 2 usage/validation failure
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except GraphDistillError as error:
            click.echo(f"Error: {error}", err=True)
            sys.exit(error.exit_code)
        except (OSError, IOError) as error:
            click.echo(f"Error: {error}", err=True)
            sys.exit(EXIT_USAGE)

    return wrapper
