"""
Structured logging configuration for mrsc-optsize
"""

import json
import logging
import logging.handlers
import os
import sys
import time
from datetime import datetime, timezone
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from .exceptions import ConfigurationError

ROOT_LOGGER_NAME = "mrsc_optsize"

_STANDARD_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class StructuredFormatter(logging.Formatter):
    """JSON structured logging formatter"""

    def format(self, record: logging.LogRecord) -> str:
        log_entry: Dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        if record.exc_info and record.exc_info[0] is not None:
            log_entry["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": self.formatException(record.exc_info),
            }

        # Supercompilation context attached through `extra=`
        for attr in ("example", "query", "operation", "duration", "status"):
            if hasattr(record, attr):
                log_entry[attr] = getattr(record, attr)

        extra_fields = getattr(record, "extra_fields", {})
        if extra_fields:
            log_entry.update(extra_fields)

        return json.dumps(log_entry, default=str)


class LoggingConfig:
    """Centralized logging configuration"""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}
        self.setup_logging()

    def setup_logging(self) -> None:
        """Configure the package logger based on configuration"""
        log_level = str(self.config.get("log_level", "WARNING")).upper()
        log_format = self.config.get("log_format", "standard")
        log_file = self.config.get("log_file")
        console_logging = self.config.get("console_logging", True)

        level = getattr(logging, log_level, None)
        if not isinstance(level, int):
            raise ConfigurationError(
                f"Unknown log level: {log_level}", error_code="LOG_LEVEL"
            )
        if log_format not in ("structured", "standard"):
            raise ConfigurationError(
                f"Unknown log format: {log_format}", error_code="LOG_FORMAT"
            )

        logger = logging.getLogger(ROOT_LOGGER_NAME)
        logger.setLevel(level)
        logger.handlers.clear()

        formatter: logging.Formatter
        if log_format == "structured":
            formatter = StructuredFormatter()
        else:
            formatter = logging.Formatter(_STANDARD_FORMAT)

        # stdout carries residual programs, logs go to stderr
        if console_logging:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setFormatter(formatter)
            logger.addHandler(console_handler)

        if log_file:
            try:
                log_path = Path(log_file)
                log_path.parent.mkdir(parents=True, exist_ok=True)

                file_handler = logging.handlers.RotatingFileHandler(
                    log_file, maxBytes=10 * 1024 * 1024, backupCount=5  # 10MB
                )
                file_handler.setFormatter(formatter)
                logger.addHandler(file_handler)
            except OSError as e:
                logger.warning(f"Could not setup file logging: {e}")


def log_performance(logger: logging.Logger, operation: str) -> Callable:
    """Decorator to log the duration and outcome of an operation"""

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(
                    f"{operation} failed: {e}",
                    extra={
                        "operation": operation,
                        "duration": time.perf_counter() - start_time,
                        "status": "error",
                    },
                )
                raise
            logger.info(
                f"{operation} completed",
                extra={
                    "operation": operation,
                    "duration": time.perf_counter() - start_time,
                    "status": "success",
                },
            )
            return result

        return wrapper

    return decorator


def _env_flag(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == "true"


DEFAULT_LOGGING_CONFIG: Dict[str, Any] = {
    "log_level": os.getenv("MRSC_LOG_LEVEL", "WARNING"),
    "log_format": os.getenv("MRSC_LOG_FORMAT", "standard"),
    "log_file": os.getenv("MRSC_LOG_FILE"),
    "console_logging": _env_flag("MRSC_CONSOLE_LOGGING", "true"),
}

try:
    _default_config = LoggingConfig(DEFAULT_LOGGING_CONFIG)
except ConfigurationError as e:
    logging.basicConfig(level=logging.WARNING, format=_STANDARD_FORMAT)
    logging.getLogger(ROOT_LOGGER_NAME).warning(
        f"Could not configure logging from environment: {e}"
    )


def get_logger(name: str) -> logging.Logger:
    """Get a logger below the package root logger"""
    if name.startswith(f"{ROOT_LOGGER_NAME}."):
        name = name[len(ROOT_LOGGER_NAME) + 1 :]
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


def configure_logging(config: Dict[str, Any]) -> None:
    """Reconfigure logging with new settings"""
    global _default_config
    _default_config = LoggingConfig(config)
