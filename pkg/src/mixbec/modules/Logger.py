# Logger.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 2.0

"""
Shared logging for mixbec.

`Logger` is a singleton wrapper around the standard `logging` module. Every
module imports the ready-made instance:

    from .Logger import logger
    logger.info("Propagating sector (3, 2)")

Console output is always on. A log file is only written once a directory is
configured (`Logger.attach_file` or the `log_directory` argument), so importing
the library never touches the file system.
"""

import inspect
import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

DEFAULT_FORMAT = "%(asctime)s - %(levelname)s - %(message)s - %(caller_class)s - %(filename)s:%(lineno)d"
DEFAULT_DATEFMT = "%Y-%m-%d %H:%M:%S"


class CallerFilter(logging.Filter):
    """
    Attach the name of the calling class to each record as `caller_class`.

    The stack is scanned for the first frame whose `self` is not the Logger
    wrapper; module level calls get "None".
    """
    def filter(self, record):
        record.caller_class = "None"
        try:
            for frame_info in inspect.stack()[6:]:
                owner = frame_info.frame.f_locals.get("self")
                if owner is not None and owner.__class__.__name__ != "Logger":
                    record.caller_class = owner.__class__.__name__
                    break
        except Exception:
            pass
        return True


class ColoredFormatter(logging.Formatter):
    """Formatter that wraps the level name in ANSI colour codes."""
    COLOR_CODES = {
        'DEBUG': "\033[37m",
        'INFO': "\033[36m",
        'WARNING': "\033[33m",
        'ERROR': "\033[31m",
        'CRITICAL': "\033[41m",
    }
    RESET_CODE = "\033[0m"

    def __init__(self, fmt, datefmt=None, use_color=True):
        super().__init__(fmt, datefmt)
        self.use_color = use_color

    def format(self, record):
        if not (self.use_color and record.levelname in self.COLOR_CODES):
            return super().format(record)
        # Colour a copy so the file handler still sees the plain level name.
        original = record.levelname
        record.levelname = f"{self.COLOR_CODES[original]}{original}{self.RESET_CODE}"
        try:
            return super().format(record)
        finally:
            record.levelname = original


class Logger:
    """
    Singleton logging front-end used throughout mixbec.

    Parameters:
      log_level_console (int): level of the stderr handler.
      log_level_file (int): level of the file handler, once one is attached.
      log_directory (str | None): directory for log files; None means console only.
      source_name (str | None): prefix of the log file name.
      fmt, datefmt (str | None): formatting overrides.
      use_color (bool): colour the console level names (ignored on Windows).
    """

    _instance = None

    def __new__(cls, *args, **kwargs):
        if cls._instance is None:
            cls._instance = super(Logger, cls).__new__(cls)
        return cls._instance

    def __init__(self,
                 log_level_console=logging.INFO,
                 log_level_file=logging.DEBUG,
                 log_directory: Optional[str] = None,
                 source_name: Optional[str] = None,
                 fmt: Optional[str] = None,
                 datefmt: Optional[str] = None,
                 use_color: bool = False):
        if getattr(self, "_initialized", False):
            return

        self.source_name = source_name or "mixbec"
        self.fmt = fmt or DEFAULT_FORMAT
        self.datefmt = datefmt or DEFAULT_DATEFMT
        self.log_level_file = log_level_file
        self.log_filename: Optional[str] = None

        self._logger = logging.getLogger("mixbec")
        self._logger.setLevel(logging.DEBUG)
        self._logger.propagate = False
        if self._logger.hasHandlers():
            self._logger.handlers.clear()

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(log_level_console if log_level_console is not None else logging.CRITICAL + 1)
        console_handler.setFormatter(
            ColoredFormatter(fmt=self.fmt, datefmt=self.datefmt, use_color=use_color and os.name != 'nt')
        )
        console_handler.addFilter(CallerFilter())
        self._logger.addHandler(console_handler)

        self._initialized = True

        if log_directory is not None:
            self.attach_file(log_directory)

    def attach_file(self, log_directory: str) -> str:
        """
        Start writing a log file `<source_name>_<timestamp>.log` in `log_directory`.

        Returns:
          str: the path of the new log file.
        """
        Path(log_directory).mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
        self.log_filename = os.path.join(log_directory, f"{self.source_name}_{timestamp}.log")

        for handler in list(self._logger.handlers):
            if isinstance(handler, logging.FileHandler):
                self._logger.removeHandler(handler)
                handler.close()

        file_handler = logging.FileHandler(self.log_filename, encoding="utf-8")
        file_handler.setLevel(self.log_level_file)
        file_handler.setFormatter(logging.Formatter(self.fmt, self.datefmt))
        file_handler.addFilter(CallerFilter())
        self._logger.addHandler(file_handler)
        self._logger.debug(f"Log file attached: {self.log_filename}", stacklevel=2)
        return self.log_filename

    # Wrappers skip this frame so filename/lineno point at the real caller.
    def debug(self, msg, *args, **kwargs):
        kwargs.setdefault("stacklevel", 2)
        self._logger.debug(msg, *args, **kwargs)

    def info(self, msg, *args, **kwargs):
        kwargs.setdefault("stacklevel", 2)
        self._logger.info(msg, *args, **kwargs)

    def warning(self, msg, *args, **kwargs):
        kwargs.setdefault("stacklevel", 2)
        self._logger.warning(msg, *args, **kwargs)

    def error(self, msg, *args, **kwargs):
        kwargs.setdefault("stacklevel", 2)
        self._logger.error(msg, *args, **kwargs)

    def critical(self, msg, *args, **kwargs):
        kwargs.setdefault("stacklevel", 2)
        self._logger.critical(msg, *args, **kwargs)

    def exception(self, msg, *args, **kwargs):
        kwargs.setdefault("stacklevel", 2)
        self._logger.exception(msg, *args, **kwargs)

    def set_level(self, level, handler_type="both"):
        """
        Change the level of the console and/or file handlers.

        Parameters:
          level (int): new level, e.g. logging.WARNING.
          handler_type (str): 'console', 'file' or 'both'.
        """
        for handler in self._logger.handlers:
            is_file = isinstance(handler, logging.FileHandler)
            if handler_type == "both" or (handler_type == "file") == is_file:
                handler.setLevel(level)
        self._logger.debug(f"Logger level changed to {logging.getLevelName(level)} for {handler_type} handler(s).")


# Shared instance imported by the rest of the package.
logger = Logger()

# End of Logger module
