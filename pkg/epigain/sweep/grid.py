"""
Uncertainty sweep.

Evaluates an OptimaRecord in every cell of a rectangular (s_l, s_p) grid.
Cells are independent and may run in a process pool; results are always
assembled in row-major order (s_l outer, s_p inner), so the grid does not
depend on the number of workers.
"""

import itertools
import math
import time
from datetime import datetime, timezone
from enum import Enum
from functools import partial
from multiprocessing import Pool
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from epigain import __version__
from epigain.errors import EpigainError
from epigain.model.params import ModelParams
from epigain.numerics.quadrature import QuadratureConfig
from epigain.observability.logger import get_logger
from epigain.observability.metrics import MetricsCollector
from epigain.optimize.optima import OptimaRecord, default_search_bound, find_optima

logger = get_logger(__name__)

ProgressSink = Callable[[int, int], None]
Cell = Tuple[float, float]

# Fields of OptimaRecord that form a surface over the grid.
SURFACE_FIELDS = (
    "max_kld", "max_bs", "max_ig",
    "delta_kld", "delta_bs", "delta_ig",
    "s_kld", "s_bs", "s_ig",
    "d_delta", "d_s",
)


class SweepAxis(BaseModel):
    """Inclusive arithmetic range min:max:step over a positive variance."""

    model_config = ConfigDict(frozen=True)

    minimum: float = Field(..., gt=0, description="First grid value")
    maximum: float = Field(..., gt=0, description="Last grid value (inclusive)")
    step: float = Field(..., gt=0, description="Grid spacing")

    @model_validator(mode="after")
    def _ordered(self) -> "SweepAxis":
        if self.maximum < self.minimum:
            raise ValueError(f"range max {self.maximum} is below min {self.minimum}")
        return self

    @classmethod
    def parse(cls, text: str) -> "SweepAxis":
        """
        Parse "min:max:step" (or a single value).

        Raises:
            ValueError: On malformed syntax; pydantic ValidationError on
                invalid values
        """
        parts = text.strip().split(":")
        try:
            numbers = [float(part) for part in parts]
        except ValueError:
            raise ValueError(f"Malformed range '{text}', expected min:max:step") from None
        if len(numbers) == 1:
            return cls(minimum=numbers[0], maximum=numbers[0], step=1.0)
        if len(numbers) != 3:
            raise ValueError(f"Malformed range '{text}', expected min:max:step")
        return cls(minimum=numbers[0], maximum=numbers[1], step=numbers[2])

    @property
    def count(self) -> int:
        return int(math.floor((self.maximum - self.minimum) / self.step + 1e-9)) + 1

    def values(self) -> List[float]:
        return [round(self.minimum + i * self.step, 12) for i in range(self.count)]

    def __str__(self) -> str:
        return f"{self.minimum:g}:{self.maximum:g}:{self.step:g}"


class SweepSpec(BaseModel):
    """Grid ranges plus the settings shared by every cell."""

    model_config = ConfigDict(frozen=True)

    s_l_range: SweepAxis
    s_p_range: SweepAxis
    epsilon: float = Field(default=1e-3, ge=0)
    n: int = Field(default=1, ge=1)
    eta: float = Field(default=0.0, description="Prior mean shared by every cell")
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)
    tol: float = Field(default=1e-5, gt=0)
    max_iters: int = Field(default=500, gt=0)
    max_widenings: int = Field(default=6, ge=0)
    worker_count_hint: int = Field(default=1, ge=1)

    @property
    def cell_count(self) -> int:
        return self.s_l_range.count * self.s_p_range.count

    def cells(self) -> List[Cell]:
        """(s_l, s_p) pairs in row-major order."""
        return list(itertools.product(self.s_l_range.values(), self.s_p_range.values()))

    def cell_params(self, s_l: float, s_p: float) -> ModelParams:
        return ModelParams(
            eta=self.eta,
            s_p=s_p,
            s_l=s_l,
            n=self.n,
            obs_mean=self.eta,
            epsilon=self.epsilon,
        )


class SweepMetadata(BaseModel):
    tool_version: str = __version__
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    total_cells: int = Field(..., ge=0)
    failed_cells: int = Field(..., ge=0)


class SweepGrid(BaseModel):
    """Row-major grid of OptimaRecords with provenance."""

    spec: SweepSpec
    records: List[OptimaRecord]
    metadata: SweepMetadata

    @model_validator(mode="after")
    def _records_fill_grid(self) -> "SweepGrid":
        if len(self.records) != self.spec.cell_count:
            raise ValueError(
                f"{len(self.records)} records for a grid of {self.spec.cell_count} cells"
            )
        return self

    @property
    def s_l_values(self) -> List[float]:
        return self.spec.s_l_range.values()

    @property
    def s_p_values(self) -> List[float]:
        return self.spec.s_p_range.values()

    def record(self, s_l_index: int, s_p_index: int) -> OptimaRecord:
        return self.records[s_l_index * self.spec.s_p_range.count + s_p_index]

    def surface(self, field: str) -> np.ndarray:
        """Matrix of one field, rows indexed by s_l and columns by s_p."""
        if field not in SURFACE_FIELDS:
            raise KeyError(f"Unknown surface field '{field}'")
        values = [getattr(record, field) for record in self.records]
        return np.asarray(values, dtype=float).reshape(
            self.spec.s_l_range.count, self.spec.s_p_range.count
        )

    def failed_indices(self) -> List[int]:
        return [i for i, record in enumerate(self.records) if not record.all_converged]


def _evaluate_cell(spec: SweepSpec, cell: Cell) -> Tuple[OptimaRecord, float]:
    s_l, s_p = cell
    params = spec.cell_params(s_l, s_p)
    start = time.perf_counter()
    try:
        record = find_optima(
            params,
            spec.quadrature,
            tol=spec.tol,
            max_iters=spec.max_iters,
            max_widenings=spec.max_widenings,
        )
    except EpigainError as e:
        logger.warning("sweep.cell_failed", s_l=s_l, s_p=s_p, error=str(e))
        record = OptimaRecord.failed(params, default_search_bound(params))
    return record, time.perf_counter() - start


def _evaluate_cells(spec: SweepSpec, cells: List[Cell]) -> Iterator[Tuple[OptimaRecord, float]]:
    task = partial(_evaluate_cell, spec)
    workers = min(spec.worker_count_hint, len(cells))
    if workers <= 1:
        yield from map(task, cells)
        return
    with Pool(processes=workers) as pool:
        yield from pool.imap(task, cells, chunksize=1)


def _collect(
    spec: SweepSpec,
    cells: List[Cell],
    progress: Optional[ProgressSink],
    metrics: Optional[MetricsCollector],
) -> List[OptimaRecord]:
    records: List[OptimaRecord] = []
    for done, (record, seconds) in enumerate(_evaluate_cells(spec, cells), start=1):
        records.append(record)
        if metrics:
            status = "converged" if record.all_converged else "failed"
            metrics.increment("sweep.cells", {"status": status})
            metrics.observe("sweep.cell_time", seconds)
        if progress:
            progress(done, len(cells))
    return records


def _assemble(spec: SweepSpec, records: List[OptimaRecord]) -> SweepGrid:
    failed = sum(1 for record in records if not record.all_converged)
    return SweepGrid(
        spec=spec,
        records=records,
        metadata=SweepMetadata(total_cells=len(records), failed_cells=failed),
    )


def run_sweep(
    spec: SweepSpec,
    progress: Optional[ProgressSink] = None,
    metrics: Optional[MetricsCollector] = None,
) -> SweepGrid:
    """
    Evaluate every cell of the grid.

    Args:
        spec: Grid and per-cell settings
        progress: Optional callback receiving (cells done, total cells)
        metrics: Optional collector for cell counts and timings

    Returns:
        SweepGrid; failed cells are kept with converged flags set to False
    """
    cells = spec.cells()
    logger.info(
        "sweep.started",
        cells=len(cells),
        s_l_range=str(spec.s_l_range),
        s_p_range=str(spec.s_p_range),
        workers=spec.worker_count_hint,
    )
    grid = _assemble(spec, _collect(spec, cells, progress, metrics))
    logger.info(
        "sweep.completed",
        cells=grid.metadata.total_cells,
        failed=grid.metadata.failed_cells,
    )
    return grid


def retry_failed(
    grid: SweepGrid,
    factor: int = 4,
    metrics: Optional[MetricsCollector] = None,
) -> SweepGrid:
    """
    Recompute the cells that did not converge with a larger budget.

    The evaluation budget grows by `factor` and the bound may double
    `factor` more times. Converged cells are carried over unchanged.
    """
    if factor < 1:
        raise ValueError("factor must be at least 1")
    failed = grid.failed_indices()
    if not failed:
        return grid

    relaxed = grid.spec.model_copy(
        update={
            "max_iters": grid.spec.max_iters * factor,
            "max_widenings": grid.spec.max_widenings + factor,
        }
    )
    cells = grid.spec.cells()
    logger.info("sweep.retrying", cells=len(failed), max_iters=relaxed.max_iters)
    retried = _collect(relaxed, [cells[i] for i in failed], None, metrics)

    records = list(grid.records)
    for index, record in zip(failed, retried):
        records[index] = record
    return _assemble(grid.spec, records)


class Axis(str, Enum):
    """Grid axis held fixed when slicing a surface."""
    S_L = "s_l"
    S_P = "s_p"


def _nearest_index(values: List[float], target: float) -> int:
    for index, value in enumerate(values):
        if math.isclose(value, target, rel_tol=1e-9, abs_tol=1e-12):
            return index
    raise ValueError(f"{target} is not a grid value; available: {values}")


def extract_trend(
    grid: SweepGrid, field: str, fixed_axis: Axis, fixed_value: float
) -> List[Tuple[float, float]]:
    """
    One-dimensional slice of a surface.

    Args:
        grid: Completed sweep
        field: Surface field name (see SURFACE_FIELDS)
        fixed_axis: Axis held constant
        fixed_value: Grid value of the fixed axis

    Returns:
        (free-axis value, field value) pairs in increasing free-axis order
    """
    surface = grid.surface(field)
    if Axis(fixed_axis) is Axis.S_L:
        row = _nearest_index(grid.s_l_values, fixed_value)
        return list(zip(grid.s_p_values, surface[row, :].tolist()))
    column = _nearest_index(grid.s_p_values, fixed_value)
    return list(zip(grid.s_l_values, surface[:, column].tolist()))


class QuadrantSummary(BaseModel):
    """Optima at one corner of the uncertainty grid."""

    s_l: float
    s_p: float
    max_ig: float
    delta_kld: float
    delta_bs: float
    s_kld: float
    s_bs: float
    d_delta: float
    d_s: float


def quadrant_summary(grid: SweepGrid) -> Dict[str, QuadrantSummary]:
    """
    Optima at the four corners of the grid.

    Keys are "small_s_l/small_s_p", "small_s_l/large_s_p",
    "large_s_l/small_s_p" and "large_s_l/large_s_p".
    """
    last_l = grid.spec.s_l_range.count - 1
    last_p = grid.spec.s_p_range.count - 1
    corners: Iterable[Tuple[str, int, int]] = (
        ("small_s_l/small_s_p", 0, 0),
        ("small_s_l/large_s_p", 0, last_p),
        ("large_s_l/small_s_p", last_l, 0),
        ("large_s_l/large_s_p", last_l, last_p),
    )
    summary: Dict[str, QuadrantSummary] = {}
    for name, i, j in corners:
        record = grid.record(i, j)
        summary[name] = QuadrantSummary(
            s_l=record.params.s_l,
            s_p=record.params.s_p,
            max_ig=record.max_ig,
            delta_kld=record.delta_kld,
            delta_bs=record.delta_bs,
            s_kld=record.s_kld,
            s_bs=record.s_bs,
            d_delta=record.d_delta,
            d_s=record.d_s,
        )
    return summary
