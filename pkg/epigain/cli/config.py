"""
Run configurations for the CLI subcommands.

Each subcommand turns its parsed flags into one of these models before any
computation starts, so every numeric flag is checked against the same
constraints as the library types.
"""

import argparse
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from epigain.errors import ModelValidationError
from epigain.inquiry.cycle import EmotionThresholds, InquiryConfig, StepMode
from epigain.model.params import ModelParams
from epigain.numerics.quadrature import QuadratureConfig
from epigain.sweep.grid import SURFACE_FIELDS, SweepAxis, SweepSpec
from epigain.tables import read_json

JOBS_ENV_VAR = "EPIGAIN_JOBS"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


class RunConfig(BaseModel):
    """Options shared by every subcommand."""

    model_config = ConfigDict(frozen=True)

    output: Optional[Path] = Field(default=None, description="Output file (stdout when omitted)")
    format: OutputFormat = OutputFormat.CSV

    def _require_format(self, *allowed: OutputFormat) -> None:
        if self.format not in allowed:
            names = ", ".join(f.value for f in allowed)
            raise ValueError(f"format '{self.format.value}' is not supported here (use {names})")


class EvalRunConfig(RunConfig):
    params: ModelParams
    quadrature: QuadratureConfig
    delta_max: float = Field(..., gt=0)
    steps: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _svg_needs_a_file(self) -> "EvalRunConfig":
        if self.format is OutputFormat.SVG and self.output is None:
            raise ValueError("--format svg needs --out")
        return self


class OptimizeRunConfig(RunConfig):
    params: ModelParams
    quadrature: QuadratureConfig
    search_bound: Optional[float] = Field(default=None, gt=0)
    tol: float = Field(..., gt=0)
    max_iters: int = Field(..., gt=0)
    strict: bool = False

    @model_validator(mode="after")
    def _table_formats(self) -> "OptimizeRunConfig":
        self._require_format(OutputFormat.CSV, OutputFormat.JSON)
        return self


class SweepRunConfig(RunConfig):
    spec: SweepSpec
    heatmap: Optional[str] = None
    heatmap_out: Optional[Path] = None
    summary: bool = False
    retry_failed: bool = False
    metrics_out: Optional[Path] = None

    @model_validator(mode="after")
    def _heatmap_field_exists(self) -> "SweepRunConfig":
        self._require_format(OutputFormat.CSV, OutputFormat.JSON)
        if self.heatmap is not None and self.heatmap not in SURFACE_FIELDS:
            raise ValueError(
                f"unknown heatmap field '{self.heatmap}' (choose from {', '.join(SURFACE_FIELDS)})"
            )
        return self


class SimulateRunConfig(RunConfig):
    inquiry: InquiryConfig
    plot: Optional[Path] = None

    @model_validator(mode="after")
    def _trace_is_csv(self) -> "SimulateRunConfig":
        self._require_format(OutputFormat.CSV)
        return self


class EfeRunConfig(RunConfig):
    model_path: Optional[Path] = None
    gamma: Optional[float] = Field(default=None, ge=0)
    check: bool = False


class PosteriorRunConfig(RunConfig):
    params: ModelParams
    deltas: List[float] = Field(..., min_length=1)
    s_min: float
    s_max: float
    points: int = Field(..., ge=2)

    @model_validator(mode="after")
    def _ordered_grid(self) -> "PosteriorRunConfig":
        self._require_format(OutputFormat.CSV)
        if not self.s_max > self.s_min:
            raise ValueError("--s-max must exceed --s-min")
        return self


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    Read a JSON object of option values keyed by option name.

    Raises:
        ModelValidationError: If the file is unreadable or not an object
    """
    try:
        values = read_json(path)
    except (OSError, ValueError) as e:
        raise ModelValidationError(f"Cannot read config file {path}: {e}") from e
    if not isinstance(values, dict):
        raise ModelValidationError(f"Config file {path} must hold a JSON object")
    return {key.replace("-", "_"): value for key, value in values.items()}


def resolve_jobs(jobs: Optional[int]) -> int:
    """--jobs, else EPIGAIN_JOBS, else the CPU count."""
    if jobs is not None:
        return jobs
    env = os.environ.get(JOBS_ENV_VAR)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{JOBS_ENV_VAR} must be an integer, got '{env}'") from None
    return os.cpu_count() or 1


def model_params(args: argparse.Namespace) -> ModelParams:
    return ModelParams(
        eta=args.eta,
        s_p=args.sp,
        s_l=args.sl,
        n=args.n,
        obs_mean=args.eta,
        obs_var=args.obs_var,
        epsilon=args.eps,
    )


def quadrature_config(args: argparse.Namespace) -> QuadratureConfig:
    return QuadratureConfig(
        abs_tol=args.abs_tol,
        rel_tol=args.rel_tol,
        max_subdivisions=args.max_subdivisions,
        truncation_sigmas=args.truncation_sigmas,
    )


def eval_config(args: argparse.Namespace) -> EvalRunConfig:
    return EvalRunConfig(
        params=model_params(args),
        quadrature=quadrature_config(args),
        delta_max=args.delta_max,
        steps=args.steps,
        output=args.out,
        format=args.format,
    )


def optimize_config(args: argparse.Namespace) -> OptimizeRunConfig:
    return OptimizeRunConfig(
        params=model_params(args),
        quadrature=quadrature_config(args),
        search_bound=args.delta_max,
        tol=args.tol,
        max_iters=args.max_iters,
        strict=args.strict,
        output=args.out,
        format=args.format,
    )


def _axis(value: Any) -> SweepAxis:
    return value if isinstance(value, SweepAxis) else SweepAxis.parse(str(value))


def sweep_config(args: argparse.Namespace) -> SweepRunConfig:
    spec = SweepSpec(
        s_l_range=_axis(args.sl),
        s_p_range=_axis(args.sp),
        epsilon=args.eps,
        n=args.n,
        quadrature=quadrature_config(args),
        tol=args.tol,
        max_iters=args.max_iters,
        worker_count_hint=resolve_jobs(args.jobs),
    )
    return SweepRunConfig(
        spec=spec,
        heatmap=args.heatmap,
        heatmap_out=args.heatmap_out,
        summary=args.summary,
        retry_failed=args.retry_failed,
        metrics_out=args.metrics_out,
        output=args.out,
        format=args.format,
    )


def simulate_config(args: argparse.Namespace) -> SimulateRunConfig:
    inquiry = InquiryConfig(
        params=model_params(args),
        initial_delta=args.initial_delta,
        cycles=args.cycles,
        step_mode=StepMode(args.mode),
        relax_rate=args.rate,
        label_thresholds=EmotionThresholds(
            boredom_frac=args.boredom_frac,
            confusion_frac=args.confusion_frac,
        ),
        quadrature=quadrature_config(args),
    )
    return SimulateRunConfig(inquiry=inquiry, plot=args.plot, output=args.out)


def efe_config(args: argparse.Namespace) -> EfeRunConfig:
    return EfeRunConfig(
        model_path=args.model,
        gamma=args.gamma,
        check=args.check,
        output=args.out,
        format=OutputFormat.JSON,
    )


def posterior_config(args: argparse.Namespace) -> PosteriorRunConfig:
    return PosteriorRunConfig(
        params=model_params(args),
        deltas=args.deltas,
        s_min=args.s_min,
        s_max=args.s_max,
        points=args.points,
        output=args.out,
    )
