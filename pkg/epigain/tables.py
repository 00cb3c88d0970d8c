"""Shared writers for CSV tables and JSON documents."""

import sys
from pathlib import Path
from typing import Any, Optional, TextIO, Union

import orjson
import pandas as pd

from epigain.errors import ExportError

Destination = Union[str, Path, TextIO, None]

FLOAT_FORMAT = "%.9g"


def write_frame(frame: pd.DataFrame, destination: Destination) -> int:
    """
    Write a table as CSV with 9 significant digits and LF line endings.

    Args:
        frame: Table to write
        destination: Path, open text stream, or None for stdout

    Returns:
        Number of data rows written

    Raises:
        ExportError: If the destination cannot be written
    """
    target = sys.stdout if destination is None else destination
    try:
        frame.to_csv(target, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise ExportError(destination, str(e)) from e
    return len(frame)


def write_json(payload: Any, destination: Destination) -> None:
    """
    Serialize a document with orjson (NaN becomes null).

    Raises:
        ExportError: If the destination cannot be written
    """
    data = orjson.dumps(
        payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY
    ) + b"\n"
    try:
        if destination is None:
            sys.stdout.write(data.decode())
        elif isinstance(destination, (str, Path)):
            Path(destination).write_bytes(data)
        else:
            destination.write(data.decode())
    except OSError as e:
        raise ExportError(destination, str(e)) from e


def read_json(source: Union[str, Path, bytes]) -> Any:
    """Parse a JSON document from a path or raw bytes."""
    raw = source if isinstance(source, bytes) else Path(source).read_bytes()
    return orjson.loads(raw)


def open_destination(path: Optional[Path]) -> Destination:
    return None if path is None or str(path) == "-" else path
