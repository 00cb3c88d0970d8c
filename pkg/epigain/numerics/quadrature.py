"""
Adaptive quadrature over a truncated window.

Thin layer over scipy's QUADPACK bindings that turns silent accuracy loss into
either a logged warning (round-off only) or a QuadratureError (subdivision
budget exhausted, error bound far above the requested tolerance).
"""

import math
from typing import Callable, Iterable, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import quad

from epigain.errors import DomainRangeError, QuadratureError
from epigain.model.gaussian import gaussian_posterior
from epigain.model.params import ModelParams
from epigain.observability.logger import get_logger

logger = get_logger(__name__)

Integrand = Callable[[float], float]
LogDensity = Callable[[float], float]

# An error bound this many times above the request is treated as a failure.
_ERROR_BOUND_SLACK = 1e3


class QuadratureConfig(BaseModel):
    """Accuracy and truncation settings for every integral in the library."""

    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(default=1e-9, gt=0, description="Absolute error tolerance")
    rel_tol: float = Field(default=1e-8, gt=0, description="Relative error tolerance")
    max_subdivisions: int = Field(default=2000, gt=0, description="Subinterval budget")
    truncation_sigmas: float = Field(
        default=12.0,
        ge=8.0,
        description="Window half-width in units of √(s_p + s_l)",
    )


def integration_window(params: ModelParams, cfg: QuadratureConfig) -> Tuple[float, float]:
    """
    Finite window covering both the prior and the Gaussian posterior.

    Args:
        params: Model parameters at the δ of interest
        cfg: Quadrature settings

    Returns:
        (lower, upper) bounds
    """
    post = gaussian_posterior(params)
    half_width = cfg.truncation_sigmas * params.scale
    return (
        min(params.eta, post.eta_post) - half_width,
        max(params.eta, post.eta_post) + half_width,
    )


def integrate(
    func: Integrand,
    lower: float,
    upper: float,
    cfg: QuadratureConfig,
    points: Optional[Iterable[float]] = None,
) -> float:
    """
    Integrate func over [lower, upper].

    Args:
        func: Scalar integrand
        lower: Lower bound
        upper: Upper bound
        cfg: Quadrature settings
        points: Optional interior breakpoints (features of the integrand)

    Returns:
        Integral estimate

    Raises:
        QuadratureError: If the estimate is not finite, the subdivision budget
            ran out, or the error bound is far above the tolerance
    """
    inner = sorted({float(p) for p in points or () if lower < p < upper})
    result = quad(
        func,
        lower,
        upper,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=cfg.max_subdivisions,
        points=inner or None,
        full_output=1,
    )
    value, error_bound, info = result[0], result[1], result[2]
    subdivisions = int(info.get("last", 0))

    if len(result) > 3:
        message = str(result[3]).strip().splitlines()[0]
        tolerance = max(cfg.abs_tol, cfg.rel_tol * abs(value))
        if (
            not math.isfinite(value)
            or subdivisions >= cfg.max_subdivisions
            or error_bound > _ERROR_BOUND_SLACK * tolerance
        ):
            raise QuadratureError(message, value, error_bound, subdivisions)
        logger.debug(
            "quadrature.roundoff",
            estimate=value,
            error_bound=error_bound,
            subdivisions=subdivisions,
        )
    elif not math.isfinite(value):
        raise QuadratureError("non-finite estimate", value, error_bound, subdivisions)

    return float(value)


def direct_kl(
    log_density_p: LogDensity,
    log_density_q: LogDensity,
    cfg: QuadratureConfig,
    window: Tuple[float, float],
    points: Optional[Iterable[float]] = None,
) -> float:
    """
    KL(p ‖ q) = ∫ p·ln(p/q) by quadrature over a finite window.

    Densities are passed as log-density callables so that tails far from the
    bulk stay representable.

    Raises:
        DomainRangeError: If q has no mass where p does
    """

    def integrand(s: float) -> float:
        log_p = log_density_p(s)
        if log_p == -math.inf:
            return 0.0
        log_q = log_density_q(s)
        if not math.isfinite(log_q):
            raise DomainRangeError("log q", log_q, location=s)
        return math.exp(log_p) * (log_p - log_q)

    return integrate(integrand, window[0], window[1], cfg, points=points)
