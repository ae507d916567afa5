#!/usr/bin/env python3
"""
Error Handling Utilities
Exception translation, CLI exit-code mapping and logger setup.
"""

import logging
import os
import sys
import traceback
from functools import wraps
from typing import Callable, Dict, Optional, Type

import colorlog

from exceptions.control_exceptions import (
    BinMisalignment, ConfigValidationError, ControlError, DataFormatError, DesignError,
    InsufficientExcitation, TooShort,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_DATA = 4
EXIT_INTERRUPTED = 130

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
COLOR_FORMAT = "%(log_color)s%(asctime)s - %(name)s - %(levelname)s%(reset)s - %(message)s"


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception onto the stable CLI exit codes.

    Args:
        error: Exception raised by a command

    Returns:
        2 for configuration, schema and design-spec problems, 4 for data that cannot
        support the analysis, 3 for everything else
    """
    if isinstance(error, (ConfigValidationError, DataFormatError, DesignError, BinMisalignment)):
        return EXIT_CONFIG
    if isinstance(error, (InsufficientExcitation, TooShort)):
        return EXIT_DATA
    return EXIT_RUNTIME


def exit_on_error(cleanup_func: Optional[Callable] = None):
    """
    Decorator turning exceptions of a command into exit codes

    Args:
        cleanup_func: Optional function to call before returning an error code

    Returns:
        Decorated function returning an int exit code
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                result = func(*args, **kwargs)
                return EXIT_OK if result is None else result
            except KeyboardInterrupt:
                logger.info("Process interrupted by user")
                if cleanup_func:
                    cleanup_func()
                return EXIT_INTERRUPTED
            except ControlError as e:
                code = exit_code_for(e)
                logger.error(f"{func.__name__} failed: {e}")
                print(f"error: {e}", file=sys.stderr)
                if cleanup_func:
                    cleanup_func()
                return code
            except OSError as e:
                logger.error(f"I/O error in {func.__name__}: {e}")
                print(f"error: {e}", file=sys.stderr)
                if cleanup_func:
                    cleanup_func()
                return EXIT_RUNTIME
            except Exception as e:
                logger.error(f"Fatal error in {func.__name__}: {str(e)}")
                logger.debug(traceback.format_exc())
                print(f"error: {e}", file=sys.stderr)
                if cleanup_func:
                    cleanup_func()
                return EXIT_RUNTIME
        return wrapper
    return decorator


def setup_logger(name: Optional[str] = None, log_file: Optional[str] = None, level: int = logging.INFO,
                 use_color: bool = True) -> logging.Logger:
    """
    Set up a logger with a stderr handler and an optional file handler

    Args:
        name: Logger name, None for the root logger
        log_file: Path to log file
        level: Logging level
        use_color: Colour the console output with colorlog

    Returns:
        Configured logger
    """
    target = logging.getLogger(name)
    target.setLevel(level)
    for handler in list(target.handlers):
        if getattr(handler, "_trikectl", False):
            target.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)
    if use_color:
        console_handler.setFormatter(colorlog.ColoredFormatter(
            COLOR_FORMAT,
            log_colors={
                "DEBUG": "cyan",
                "INFO": "green",
                "WARNING": "yellow",
                "ERROR": "red",
                "CRITICAL": "red,bg_white",
            },
        ))
    else:
        console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    console_handler._trikectl = True
    target.addHandler(console_handler)

    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        file_handler._trikectl = True
        target.addHandler(file_handler)

    return target


def exception_mapper(exception_map: Dict[Type[Exception], Type[Exception]]):
    """
    Decorator to map caught exceptions to toolkit exceptions

    Args:
        exception_map: Dictionary mapping source exceptions to target exceptions

    Returns:
        Decorated function
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except ControlError:
                raise
            except Exception as e:
                for source_exception, target_exception in exception_map.items():
                    if isinstance(e, source_exception):
                        raise target_exception(str(e)) from e
                raise
        return wrapper
    return decorator
