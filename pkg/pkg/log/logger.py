import inspect
import sys
import traceback
from typing import Any, Dict

from loguru import logger


class Logger:
    """Console logger for solver runs, with k=v run context on every line"""

    def __init__(self, level: str = "INFO", colorize: bool = True, context: dict[str, Any] | None = None) -> None:
        self.level = level.upper()
        self.colorize = colorize
        self._context = dict(context or {})
        if context is None:
            self._configure_sink()

    def _configure_sink(self) -> None:
        logger.remove()

        log_format = (
            "<green>{time:HH:mm:ss.SSS}</green> | "
            "<level>{level: <8}</level> | "
            "<cyan>{extra[filename]}:{extra[line_no]}</cyan> | "
            "{extra[context]} | "
            "<cyan>{message}</cyan>"
        )

        # stderr keeps stdout free for CLI output redirection
        logger.add(
            sys.stderr,
            format=log_format,
            level=self.level,
            colorize=self.colorize,
            backtrace=False,
            diagnose=False,
        )

    def bind(self, **context: Any) -> "Logger":
        """Child logger that prefixes every record with the given run context"""
        merged = {**self._context, **context}
        return Logger(level=self.level, colorize=self.colorize, context=merged)

    def _get_caller_info(self) -> dict[str, Any]:
        frame = inspect.currentframe()
        caller_frame = frame.f_back.f_back if frame and frame.f_back else None

        if caller_frame:
            filename = caller_frame.f_code.co_filename.split("/")[-1]
            return {"filename": filename, "line_no": caller_frame.f_lineno, "context": ""}
        return {"filename": "unknown", "line_no": 0, "context": ""}

    def _format_extra(self, extra: dict[str, Any] | None) -> str:
        fields = {**self._context, **(extra or {})}
        if not fields:
            return "-"
        return " ".join(f"{k}={_short(v)}" for k, v in fields.items())

    def info(self, message: str, extra: dict[str, Any] | None = None) -> None:
        caller_info = self._get_caller_info()
        caller_info["context"] = self._format_extra(extra)
        logger.bind(**caller_info).info(message)

    def error(self, message: str, exc_info: bool = False, extra: dict[str, Any] | None = None) -> None:
        caller_info = self._get_caller_info()
        caller_info["context"] = self._format_extra(extra)
        logger.bind(**caller_info).error(message)
        if exc_info:
            logger.bind(**caller_info).error(traceback.format_exc())

    def debug(self, message: str, extra: dict[str, Any] | None = None) -> None:
        caller_info = self._get_caller_info()
        caller_info["context"] = self._format_extra(extra)
        logger.bind(**caller_info).debug(message)

    def warning(self, message: str, extra: dict[str, Any] | None = None) -> None:
        caller_info = self._get_caller_info()
        caller_info["context"] = self._format_extra(extra)
        logger.bind(**caller_info).warning(message)


def _short(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


_loggers: Dict[str, Logger] = {}


def get_logger(name: str = "default", level: str = "INFO") -> Logger:
    """Return a named, cached Logger instance.

    Args:
        name: Name of the logger instance. Defaults to "default".
        level: Minimum level for the console sink on first creation.

    Returns:
        A Logger instance.
    """
    if name not in _loggers:
        _loggers[name] = Logger(level=level)
    return _loggers[name]
