"""CSV and JSON exports of sweep results."""

from pathlib import Path
from typing import Any, Dict, Iterable, List, TextIO, Union

import pandas as pd

from epigain.errors import ExportError
from epigain.optimize.optima import OptimaRecord
from epigain.sweep.grid import SweepGrid
from epigain.tables import Destination, write_frame, write_json

CSV_COLUMNS = [
    "s_l", "s_p",
    "max_kld", "max_bs", "max_ig",
    "delta_kld", "delta_bs", "delta_ig",
    "s_kld", "s_bs", "s_ig",
    "d_delta", "d_s",
    "converged",
]


def record_row(record: OptimaRecord) -> Dict[str, Any]:
    """One OptimaRecord as a flat row keyed by CSV column."""
    row: Dict[str, Any] = {"s_l": record.params.s_l, "s_p": record.params.s_p}
    for column in CSV_COLUMNS[2:-1]:
        row[column] = getattr(record, column)
    row["converged"] = record.all_converged
    return row


def records_frame(records: Iterable[OptimaRecord]) -> pd.DataFrame:
    return pd.DataFrame([record_row(record) for record in records], columns=CSV_COLUMNS)


def export_csv(grid: Union[SweepGrid, List[OptimaRecord]], destination: Destination) -> int:
    """
    Write one row per cell in grid order.

    Args:
        grid: Completed sweep, or a plain list of records
        destination: Path, open text stream, or None for stdout

    Returns:
        Number of data rows

    Raises:
        ExportError: If the destination cannot be written
    """
    if isinstance(grid, SweepGrid):
        records = grid.records
    else:
        records = grid
    return write_frame(records_frame(records), destination)


def export_json(grid: SweepGrid, destination: Destination) -> int:
    """Write metadata, the sweep settings and the CSV fields of every cell."""
    payload = {
        "metadata": grid.metadata.model_dump(mode="json"),
        "spec": grid.spec.model_dump(mode="json"),
        "records": [
            {**record_row(record), "converged_by_objective": record.model_dump(mode="json")["converged"]}
            for record in grid.records
        ],
    }
    write_json(payload, destination)
    return len(grid.records)


def read_csv(source: Union[str, Path, TextIO]) -> pd.DataFrame:
    """
    Parse an exported sweep CSV.

    Raises:
        ExportError: If the header does not match the export schema
    """
    frame = pd.read_csv(source)
    if list(frame.columns) != CSV_COLUMNS:
        raise ExportError(source, f"unexpected header {list(frame.columns)}")
    return frame
