"""
Optimal prediction errors and optimal surprises.

For each objective (KLD, BS and their sum IG) the δ ≥ 0 that maximizes it is
located with `maximize_scalar`, and mapped to an optimal surprise through
surprise(δ*). The search interval grows when a maximum presses against its
upper end.
"""

import math
from enum import Enum
from typing import Callable, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field

from epigain.errors import EpigainError
from epigain.model.gaussian import surprise
from epigain.model.params import ModelParams
from epigain.numerics.gains import bs_noisy, information_gains, kld_noisy
from epigain.numerics.quadrature import QuadratureConfig
from epigain.observability.logger import get_logger
from epigain.observability.metrics import MetricsCollector
from epigain.optimize.scalar import ScalarMaximum, maximize_scalar

logger = get_logger(__name__)


class Objective(str, Enum):
    """Information gain being maximized."""
    KLD = "kld"
    BS = "bs"
    IG = "ig"


class OptimaRecord(BaseModel):
    """Optimal δ, optimal surprise and peak value for each objective."""

    model_config = ConfigDict(frozen=True)

    delta_kld: float = Field(..., description="δ_KLD")
    delta_bs: float = Field(..., description="δ_BS")
    delta_ig: float = Field(..., description="δ_IG")
    s_kld: float = Field(..., description="Surprise at δ_KLD")
    s_bs: float = Field(..., description="Surprise at δ_BS")
    s_ig: float = Field(..., description="Surprise at δ_IG")
    max_kld: float
    max_bs: float
    max_ig: float
    params: ModelParams
    search_bound: float = Field(..., gt=0)
    converged: Dict[Objective, bool]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def d_delta(self) -> float:
        return self.delta_bs - self.delta_kld

    @computed_field  # type: ignore[prop-decorator]
    @property
    def d_s(self) -> float:
        return self.s_bs - self.s_kld

    @property
    def all_converged(self) -> bool:
        return all(self.converged.get(objective, False) for objective in Objective)

    @classmethod
    def failed(cls, params: ModelParams, search_bound: float) -> "OptimaRecord":
        """Placeholder for a cell whose optimization could not run."""
        nan = math.nan
        return cls(
            delta_kld=nan, delta_bs=nan, delta_ig=nan,
            s_kld=nan, s_bs=nan, s_ig=nan,
            max_kld=nan, max_bs=nan, max_ig=nan,
            params=params,
            search_bound=search_bound,
            converged={objective: False for objective in Objective},
        )


def default_search_bound(params: ModelParams) -> float:
    """10·√(s_p + s_l)."""
    return 10.0 * params.scale


def objective_function(
    params: ModelParams, objective: Objective, cfg: QuadratureConfig
) -> Callable[[float], float]:
    """Objective as a function of δ."""
    if objective is Objective.KLD:
        return lambda delta: kld_noisy(params, delta, cfg)
    if objective is Objective.BS:
        return lambda delta: bs_noisy(params, delta, cfg)
    return lambda delta: sum(information_gains(params, delta, cfg))


def _maximize_with_widening(
    f: Callable[[float], float],
    bound: float,
    tol: float,
    max_iters: int,
    max_widenings: int,
) -> tuple[ScalarMaximum, float, bool]:
    for attempt in range(max_widenings + 1):
        result = maximize_scalar(f, 0.0, bound, tol=tol, max_iters=max_iters)
        at_edge = bound - result.argmax <= 2.0 * tol
        if not at_edge or attempt == max_widenings:
            return result, bound, at_edge
        logger.info("optimizer.bound_widened", old_bound=bound, new_bound=2.0 * bound)
        bound *= 2.0
    raise AssertionError("unreachable")


def find_optima(
    params: ModelParams,
    cfg: Optional[QuadratureConfig] = None,
    search_bound: Optional[float] = None,
    tol: float = 1e-5,
    max_iters: int = 500,
    max_widenings: int = 6,
    metrics: Optional[MetricsCollector] = None,
) -> OptimaRecord:
    """
    Maximize KLD, BS and IG over δ ≥ 0.

    Args:
        params: Model parameters
        cfg: Quadrature settings (defaults when omitted)
        search_bound: Initial upper end of the δ interval (default 10·√(s_p+s_l))
        tol: Absolute tolerance on δ
        max_iters: Objective evaluations allowed per maximization
        max_widenings: How many times the interval may double
        metrics: Optional collector counting optimizer runs

    Returns:
        OptimaRecord; an objective whose optimization failed carries NaN
        values and a False converged flag
    """
    cfg = cfg or QuadratureConfig()
    initial_bound = search_bound if search_bound is not None else default_search_bound(params)
    final_bound = initial_bound

    deltas: Dict[Objective, float] = {}
    maxima: Dict[Objective, float] = {}
    converged: Dict[Objective, bool] = {}

    for objective in Objective:
        f = objective_function(params, objective, cfg)
        try:
            result, bound, at_edge = _maximize_with_widening(
                f, initial_bound, tol, max_iters, max_widenings
            )
        except EpigainError as e:
            logger.warning(
                "optimizer.objective_failed",
                objective=objective.value,
                s_p=params.s_p,
                s_l=params.s_l,
                error=str(e),
            )
            deltas[objective], maxima[objective], converged[objective] = math.nan, math.nan, False
        else:
            deltas[objective] = result.argmax
            maxima[objective] = result.maximum
            converged[objective] = result.converged and not at_edge
            final_bound = max(final_bound, bound)

        if metrics:
            status = "converged" if converged[objective] else "failed"
            metrics.increment("optimizer.runs", {"objective": objective.value, "status": status})

    def surprise_at(delta: float) -> float:
        return surprise(params, delta) if math.isfinite(delta) else math.nan

    record = OptimaRecord(
        delta_kld=deltas[Objective.KLD],
        delta_bs=deltas[Objective.BS],
        delta_ig=deltas[Objective.IG],
        s_kld=surprise_at(deltas[Objective.KLD]),
        s_bs=surprise_at(deltas[Objective.BS]),
        s_ig=surprise_at(deltas[Objective.IG]),
        max_kld=maxima[Objective.KLD],
        max_bs=maxima[Objective.BS],
        max_ig=maxima[Objective.IG],
        params=params,
        search_bound=final_bound,
        converged=converged,
    )
    logger.debug(
        "optimizer.optima_found",
        s_p=params.s_p,
        s_l=params.s_l,
        delta_kld=record.delta_kld,
        delta_bs=record.delta_bs,
        delta_ig=record.delta_ig,
    )
    return record
