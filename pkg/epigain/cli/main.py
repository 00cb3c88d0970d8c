"""
Command-line entry point.

Subcommands: eval, optimize, sweep, simulate, efe, posterior. Exit codes are
0 on success, 2 for invalid flags or input documents and 3 for numerical
failures (quadrature, convergence, identity checks).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from epigain import __version__
from epigain.cli import config as run_config
from epigain.cli import plots
from epigain.efe.policy import (
    IDENTITY_TOLERANCE,
    check_identity,
    efe_decompose,
    example_model_path,
    load_policy_model,
    policy_prior,
)
from epigain.errors import EpigainError, ModelValidationError, describe
from epigain.inquiry.cycle import export_trace_csv, simulate
from epigain.model.gaussian import posterior_density_table
from epigain.numerics.gains import gain_point
from epigain.observability.logger import configure_logging, get_logger
from epigain.observability.metrics import MetricsCollector
from epigain.optimize.optima import find_optima
from epigain.sweep.export import export_csv, export_json
from epigain.sweep.grid import SURFACE_FIELDS, quadrant_summary, retry_failed, run_sweep
from epigain.tables import open_destination, write_frame, write_json

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

EVAL_COLUMNS = ["delta", "evidence", "surprise", "f", "kld", "bs", "ig", "u", "w_post", "w_pri"]


def _add_model_flags(parser: argparse.ArgumentParser, sweep: bool = False) -> None:
    group = parser.add_argument_group("generative model")
    if not sweep:
        group.add_argument("--sp", type=float, default=10.0, help="prior variance s_p")
        group.add_argument("--sl", type=float, default=1.0, help="likelihood variance s_l")
        group.add_argument("--eta", type=float, default=0.0, help="prior mean")
        group.add_argument("--obs-var", type=float, default=0.0, help="observed variance V (n > 1)")
    group.add_argument("--eps", type=float, default=1e-3, help="uniform likelihood ε")
    group.add_argument("--n", type=int, default=1, help="number of observations")


def _add_quadrature_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("quadrature")
    group.add_argument("--abs-tol", type=float, default=1e-9)
    group.add_argument("--rel-tol", type=float, default=1e-8)
    group.add_argument("--max-subdivisions", type=int, default=2000)
    group.add_argument("--truncation-sigmas", type=float, default=12.0)


def _add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=1e-5, help="tolerance on δ")
    parser.add_argument("--max-iters", type=int, default=500, help="evaluations per objective")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    common.add_argument("--config", type=Path, help="JSON file of option values; flags win")
    common.add_argument("--out", type=Path, help="output file (default stdout)")
    return common


def build_parser(overrides: Optional[Dict[str, Dict[str, Any]]] = None) -> argparse.ArgumentParser:
    """
    Build the argument parser.

    Args:
        overrides: Per-subcommand option defaults (from --config)
    """
    overrides = overrides or {}
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="epigain",
        description="Information gains, optimal surprise and inquiry cycles of a "
                    "free-energy model of epistemic emotions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("eval", parents=[common], help="gain curves over a δ grid")
    _add_model_flags(p)
    _add_quadrature_flags(p)
    p.add_argument("--delta-max", type=float, default=20.0)
    p.add_argument("--steps", type=int, default=400, help="grid intervals (rows = steps + 1)")
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    p.set_defaults(handler=cmd_eval)

    p = commands.add_parser("optimize", parents=[common], help="optimal δ and surprise")
    _add_model_flags(p)
    _add_quadrature_flags(p)
    _add_optimizer_flags(p)
    p.add_argument("--delta-max", type=float, default=None, help="initial search bound")
    p.add_argument("--strict", action="store_true", help="exit 3 unless every objective converged")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.set_defaults(handler=cmd_optimize)

    p = commands.add_parser("sweep", parents=[common], help="optima over an (s_l, s_p) grid")
    _add_model_flags(p, sweep=True)
    _add_quadrature_flags(p)
    _add_optimizer_flags(p)
    p.add_argument("--sl", default="1:50:5", help="s_l range min:max:step")
    p.add_argument("--sp", default="1:50:5", help="s_p range min:max:step")
    p.add_argument("--jobs", type=int, default=None, help=f"workers (or ${run_config.JOBS_ENV_VAR})")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--heatmap", choices=list(SURFACE_FIELDS), help="field to render as SVG")
    p.add_argument("--heatmap-out", type=Path, help="heatmap file (default <field>.svg)")
    p.add_argument("--summary", action="store_true", help="print the corner summary as JSON")
    p.add_argument("--retry-failed", action="store_true", help="recompute unconverged cells")
    p.add_argument("--metrics-out", type=Path, help="write Prometheus metrics here")
    p.set_defaults(handler=cmd_sweep)

    p = commands.add_parser("simulate", parents=[common], help="inquiry cycle trace")
    _add_model_flags(p)
    _add_quadrature_flags(p)
    p.add_argument("--initial-delta", type=float, default=0.0)
    p.add_argument("--cycles", type=int, default=3)
    p.add_argument("--mode", choices=["jump", "relax"], default="jump")
    p.add_argument("--rate", type=float, default=1.0, help="relax rate in (0, 1]")
    p.add_argument("--boredom-frac", type=float, default=0.5)
    p.add_argument("--confusion-frac", type=float, default=1.5)
    p.add_argument("--plot", type=Path, help="SVG of surprise per step")
    p.set_defaults(handler=cmd_simulate)

    p = commands.add_parser("efe", parents=[common], help="expected free energy breakdown")
    p.add_argument("--model", type=Path, help="model JSON (default: bundled example)")
    p.add_argument("--gamma", type=float, default=None, help="override the model's γ")
    p.add_argument(
        "--check",
        action="store_true",
        help="re-enumerate every component and fail on a residual above tolerance",
    )
    p.set_defaults(handler=cmd_efe)

    p = commands.add_parser("posterior", parents=[common], help="mixture posterior densities")
    _add_model_flags(p)
    p.add_argument("--deltas", type=float, nargs="+", default=[0.0, 5.0, 10.0, 15.0])
    p.add_argument("--s-min", type=float, default=-25.0)
    p.add_argument("--s-max", type=float, default=25.0)
    p.add_argument("--points", type=int, default=401)
    p.set_defaults(handler=cmd_posterior)

    for name, values in overrides.items():
        commands.choices[name].set_defaults(**values)
    return parser


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = run_config.eval_config(args)
    deltas = np.linspace(0.0, cfg.delta_max, cfg.steps + 1)
    points = [gain_point(cfg.params, float(delta), cfg.quadrature) for delta in deltas]

    if cfg.format is run_config.OutputFormat.JSON:
        write_json(
            {
                "params": cfg.params.to_record(),
                "points": [point.model_dump() for point in points],
            },
            open_destination(cfg.output),
        )
        return EXIT_OK

    frame = pd.DataFrame(
        [
            [p.delta, p.evidence, p.surprise, p.free_energy, p.kld, p.bs, p.ig, p.u, p.w_post, p.w_pri]
            for p in points
        ],
        columns=EVAL_COLUMNS,
    )
    if cfg.format is run_config.OutputFormat.SVG:
        assert cfg.output is not None
        write_frame(frame, cfg.output.with_suffix(".csv"))
        plots.plot_gain_curves(points, cfg.output)
    else:
        write_frame(frame, open_destination(cfg.output))
    return EXIT_OK


def cmd_optimize(args: argparse.Namespace) -> int:
    cfg = run_config.optimize_config(args)
    record = find_optima(
        cfg.params,
        cfg.quadrature,
        search_bound=cfg.search_bound,
        tol=cfg.tol,
        max_iters=cfg.max_iters,
    )
    destination = open_destination(cfg.output)
    if cfg.format is run_config.OutputFormat.CSV:
        export_csv([record], destination)
    else:
        write_json(record.model_dump(mode="json"), destination)

    if cfg.strict and not record.all_converged:
        failed = [k.value for k, ok in record.converged.items() if not ok]
        logger.error("optimizer.not_converged", objectives=failed)
        print(f"epigain: not converged: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = run_config.sweep_config(args)
    metrics = MetricsCollector()

    def progress(done: int, total: int) -> None:
        logger.debug("sweep.progress", done=done, total=total)

    grid = run_sweep(cfg.spec, progress=progress, metrics=metrics)
    if cfg.retry_failed:
        grid = retry_failed(grid, metrics=metrics)

    destination = open_destination(cfg.output)
    if cfg.format is run_config.OutputFormat.JSON:
        export_json(grid, destination)
    else:
        export_csv(grid, destination)

    if cfg.heatmap:
        plots.plot_heatmap(grid, cfg.heatmap, cfg.heatmap_out or Path(f"{cfg.heatmap}.svg"))
    if cfg.summary:
        summary = {name: corner.model_dump() for name, corner in quadrant_summary(grid).items()}
        write_json(summary, None if destination is not None else sys.stderr)
    if cfg.metrics_out:
        metrics.write(cfg.metrics_out)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = run_config.simulate_config(args)
    trace = simulate(cfg.inquiry)
    export_trace_csv(trace, open_destination(cfg.output))
    if cfg.plot:
        plots.plot_trace(trace, cfg.plot)
    return EXIT_OK


def cmd_efe(args: argparse.Namespace) -> int:
    cfg = run_config.efe_config(args)
    model = load_policy_model(cfg.model_path or example_model_path())
    if not model.policies:
        raise ModelValidationError("model document defines no policies")
    gamma = model.gamma if cfg.gamma is None else cfg.gamma

    breakdowns = [efe_decompose(model, policy) for policy in model.policies]
    payload: Dict[str, Any] = {
        "gamma": gamma,
        "policies": [b.model_dump() for b in breakdowns],
        "policy_prior": policy_prior(breakdowns, gamma),
    }
    if cfg.check:
        residual = max(check_identity(model, b) for b in breakdowns)
        payload["identity"] = {"max_residual": residual, "tolerance": IDENTITY_TOLERANCE}
    write_json(payload, open_destination(cfg.output))
    return EXIT_OK


def cmd_posterior(args: argparse.Namespace) -> int:
    cfg = run_config.posterior_config(args)
    table = posterior_density_table(cfg.params, cfg.deltas, cfg.s_min, cfg.s_max, cfg.points)
    write_frame(table, open_destination(cfg.output))
    return EXIT_OK


def _report(error: BaseException) -> None:
    name, message = describe(error)
    print(f"epigain: {name}: {message}", file=sys.stderr)


def _parse(argv: Optional[Sequence[str]]) -> argparse.Namespace:
    arguments: List[str] = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(arguments)
    if args.config is None:
        return args

    values = run_config.load_config_file(args.config)
    reserved = {"handler", "command", "config"}
    unknown = sorted((set(values) - set(vars(args))) | (set(values) & reserved))
    if unknown:
        raise ModelValidationError(f"Unknown options in {args.config}: {', '.join(unknown)}")
    return build_parser({args.command: values}).parse_args(arguments)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI.

    Returns:
        Process exit code
    """
    try:
        args = _parse(argv)
    except ModelValidationError as e:
        _report(e)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(max(logging.DEBUG, logging.WARNING - 10 * args.verbose))
    handler: Callable[[argparse.Namespace], int] = args.handler

    try:
        return handler(args)
    except (ValidationError, ModelValidationError, ValueError) as e:
        _report(e)
        return EXIT_USAGE
    except EpigainError as e:
        _report(e)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
