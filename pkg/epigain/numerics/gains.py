"""
Information gains under the uniform-noise likelihood.

With p_ε(o|s) = p(o|s) + ε the posterior is a mixture of the Gaussian
posterior and the prior, and KLD, BS and the perceived uncertainty U all
reduce to one-dimensional integrals of ln(1 + p(o|s)/ε) against one of the
two mixture components:

    K_pri  = ∫ N_pri(s)  · ln(1 + p(o|s)/ε) ds
    K_post = ∫ N_post(s) · ln(1 + p(o|s)/ε) ds

    KLD_ε = ln(1 + e/ε) − K_pri
    BS_ε  = w_post·K_post + w_pri·K_pri − ln(1 + e/ε)
    U     = −ln ε − w_post·K_post − w_pri·K_pri

Every term is bounded, so no large quantities cancel when δ grows. The
I and J integrals of the textbook decomposition are computed separately
for reporting.
"""

import math
from typing import List, NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator
from scipy.special import expit

from epigain.errors import IdentityViolationError, check_divergence
from epigain.model.gaussian import (
    bs_gaussian,
    free_energy,
    gaussian_posterior,
    kld_gaussian,
    log_evidence,
    log_likelihood,
    surprise,
)
from epigain.model.params import LOG_2PI, ModelParams, normal_logpdf
from epigain.numerics.quadrature import QuadratureConfig, integrate, integration_window
from epigain.observability.logger import get_logger

logger = get_logger(__name__)

# Surprise = BS + U must hold to this absolute tolerance.
IDENTITY_TOLERANCE = 1e-5


def _softplus(x: float) -> float:
    return float(np.logaddexp(0.0, x))


def _clamp(name: str, value: float, delta: float) -> float:
    clamped = check_divergence(name, value)
    if clamped != value:
        logger.debug("divergence.clamped", name=name, value=value, delta=delta)
    return clamped


def _breakpoints(params: ModelParams) -> List[float]:
    """Component means and the states where p(o|s) crosses ε."""
    post = gaussian_posterior(params)
    points = [params.eta, post.eta_post, params.obs_mean]
    if params.epsilon > 0.0:
        n, s_l = params.n, params.s_l
        radius_sq = (2.0 * s_l / n) * (
            -math.log(params.epsilon) - 0.5 * n * (LOG_2PI + math.log(s_l))
        ) - params.obs_var
        if radius_sq > 0.0:
            radius = math.sqrt(radius_sq)
            points.extend([params.obs_mean - radius, params.obs_mean + radius])
    return points


def _weighted_softplus(
    params: ModelParams,
    mean: float,
    var: float,
    sign: float,
    cfg: QuadratureConfig,
) -> float:
    """∫ N(s; mean, var)·ln(1 + exp(sign·(ln p(o|s) − ln ε))) ds."""
    log_eps = math.log(params.epsilon)

    def integrand(s: float) -> float:
        weight = math.exp(normal_logpdf(s, mean, var))
        if weight == 0.0:
            return 0.0
        return weight * _softplus(sign * (log_likelihood(params, s) - log_eps))

    lower, upper = integration_window(params, cfg)
    return integrate(integrand, lower, upper, cfg, points=_breakpoints(params))


class _MixtureTerms(NamedTuple):
    log_e: float
    gap: float
    w_post: float
    k_pri: float
    k_post: float


def _mixture_terms(params: ModelParams, delta: float, cfg: QuadratureConfig) -> _MixtureTerms:
    moved = params.at_delta(delta)
    post = gaussian_posterior(moved)
    log_e = log_evidence(moved, delta)
    log_ratio = log_e - math.log(params.epsilon)
    return _MixtureTerms(
        log_e=log_e,
        gap=_softplus(log_ratio),
        w_post=float(expit(log_ratio)),
        k_pri=_weighted_softplus(moved, moved.eta, moved.s_p, 1.0, cfg),
        k_post=_weighted_softplus(moved, post.eta_post, post.s_post, 1.0, cfg),
    )


def integral_I(params: ModelParams, delta: float, cfg: QuadratureConfig) -> float:
    """
    ∫ N_pri(s)·ln(1 + ε/p(o|s)) ds.

    The ratio ε·N_pri/(e·N_post) equals ε/p(o|s), so the integrand is a
    softplus of ln ε − ln p(o|s) and never overflows. Zero when ε = 0.
    """
    if params.epsilon == 0.0:
        return 0.0
    moved = params.at_delta(delta)
    return _weighted_softplus(moved, moved.eta, moved.s_p, -1.0, cfg)


def integral_J(params: ModelParams, delta: float, cfg: QuadratureConfig) -> float:
    """∫ N_post(s)·ln(1 + ε/p(o|s)) ds; zero when ε = 0."""
    if params.epsilon == 0.0:
        return 0.0
    moved = params.at_delta(delta)
    post = gaussian_posterior(moved)
    return _weighted_softplus(moved, post.eta_post, post.s_post, -1.0, cfg)


def kld_noisy(params: ModelParams, delta: float, cfg: QuadratureConfig) -> float:
    """
    KL(prior ‖ mixture posterior) at prediction error δ.

    Args:
        params: Model parameters
        delta: Prediction error
        cfg: Quadrature settings

    Returns:
        Nonnegative divergence; the Gaussian KLD when ε = 0

    Raises:
        QuadratureError: If the K integral does not converge
        NegativeDivergenceError: If quadrature noise exceeds the slack
    """
    if params.epsilon == 0.0:
        return kld_gaussian(params, delta)
    moved = params.at_delta(delta)
    log_ratio = log_evidence(moved, delta) - math.log(params.epsilon)
    k_pri = _weighted_softplus(moved, moved.eta, moved.s_p, 1.0, cfg)
    return _clamp("kld", _softplus(log_ratio) - k_pri, delta)


def bs_noisy(params: ModelParams, delta: float, cfg: QuadratureConfig) -> float:
    """KL(mixture posterior ‖ prior) at δ; the Gaussian BS when ε = 0."""
    if params.epsilon == 0.0:
        return bs_gaussian(params, delta)
    terms = _mixture_terms(params, delta, cfg)
    value = terms.w_post * terms.k_post + (1.0 - terms.w_post) * terms.k_pri - terms.gap
    return _clamp("bs", value, delta)


def information_gains(
    params: ModelParams, delta: float, cfg: QuadratureConfig
) -> Tuple[float, float]:
    """(KLD_ε, BS_ε) at δ, sharing the prior-weighted integral."""
    if params.epsilon == 0.0:
        return kld_gaussian(params, delta), bs_gaussian(params, delta)
    terms = _mixture_terms(params, delta, cfg)
    kld = terms.gap - terms.k_pri
    bs = terms.w_post * terms.k_post + (1.0 - terms.w_post) * terms.k_pri - terms.gap
    return _clamp("kld", kld, delta), _clamp("bs", bs, delta)


def uncertainty_U(params: ModelParams, delta: float, cfg: QuadratureConfig) -> float:
    """
    Perceived uncertainty −∫ posterior(s)·ln p_ε(o|s) ds.

    With ε = 0 the posterior is the Gaussian one and the expectation of the
    Gaussian log likelihood is integrated directly.
    """
    if params.epsilon == 0.0:
        moved = params.at_delta(delta)
        post = gaussian_posterior(moved)

        def integrand(s: float) -> float:
            weight = math.exp(post.logpdf(s))
            if weight == 0.0:
                return 0.0
            return -weight * log_likelihood(moved, s)

        lower, upper = integration_window(moved, cfg)
        return integrate(integrand, lower, upper, cfg, points=_breakpoints(moved))

    terms = _mixture_terms(params, delta, cfg)
    return -(
        math.log(params.epsilon)
        + terms.w_post * terms.k_post
        + (1.0 - terms.w_post) * terms.k_pri
    )


class GainPoint(BaseModel):
    """Every model quantity at one prediction error."""

    model_config = ConfigDict(frozen=True)

    delta: float
    evidence: float = Field(..., ge=0, description="e(δ); may underflow to 0")
    surprise: float
    free_energy: float = Field(..., description="Gaussian free energy A_F·δ² + B_F")
    kld: float = Field(..., ge=0)
    bs: float = Field(..., ge=0)
    u: float = Field(..., description="Perceived uncertainty")
    i_integral: float = Field(..., ge=0)
    j_integral: float = Field(..., ge=0)
    w_post: float = Field(..., ge=0, le=1)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def ig(self) -> float:
        return self.kld + self.bs

    @computed_field  # type: ignore[prop-decorator]
    @property
    def w_pri(self) -> float:
        return 1.0 - self.w_post

    @model_validator(mode="after")
    def _surprise_splits_into_bs_and_u(self) -> "GainPoint":
        total = self.bs + self.u
        if abs(self.surprise - total) > IDENTITY_TOLERANCE:
            raise IdentityViolationError("surprise = bs + u", self.surprise, total, IDENTITY_TOLERANCE)
        return self


def gain_point(params: ModelParams, delta: float, cfg: QuadratureConfig) -> GainPoint:
    """
    Evaluate all quantities at δ.

    Args:
        params: Model parameters
        delta: Prediction error
        cfg: Quadrature settings

    Returns:
        Fully populated GainPoint
    """
    moved = params.at_delta(delta)
    log_e = log_evidence(moved, delta)

    if params.epsilon == 0.0:
        kld, bs = kld_gaussian(params, delta), bs_gaussian(params, delta)
        u = uncertainty_U(params, delta, cfg)
        w_post = 1.0
    else:
        terms = _mixture_terms(params, delta, cfg)
        w_post = terms.w_post
        mixed = w_post * terms.k_post + (1.0 - w_post) * terms.k_pri
        kld = _clamp("kld", terms.gap - terms.k_pri, delta)
        bs = _clamp("bs", mixed - terms.gap, delta)
        u = -(math.log(params.epsilon) + mixed)

    return GainPoint(
        delta=delta,
        evidence=math.exp(log_e),
        surprise=surprise(params, delta),
        free_energy=free_energy(params, delta),
        kld=kld,
        bs=bs,
        u=u,
        i_integral=integral_I(params, delta, cfg),
        j_integral=integral_J(params, delta, cfg),
        w_post=w_post,
    )
