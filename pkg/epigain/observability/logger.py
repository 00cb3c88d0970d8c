"""Structured logging for observability."""

import logging
import sys
from typing import Any, Dict

import orjson
import structlog

_configured = False


def _dumps(event: Dict[str, Any], **kwargs: Any) -> str:
    # optimizer and quadrature events carry numpy scalars
    return orjson.dumps(
        event, default=kwargs.get("default"), option=orjson.OPT_SERIALIZE_NUMPY
    ).decode()


def _configure_structlog() -> None:
    global _configured
    if _configured:
        return

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(serializer=_dumps),
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )
    _configured = True


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    _configure_structlog()
    return structlog.get_logger(name)


def configure_logging(level: int | str = logging.WARNING) -> None:
    """Send JSON events to stderr at `level`; stdout is left to CLI output."""
    _configure_structlog()
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(level)
