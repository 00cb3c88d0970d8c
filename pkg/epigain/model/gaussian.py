"""
Closed-form Gaussian model quantities.

Evidence, surprise, free energy, the conjugate posterior and the two
information gains (KLD and BS) of the Gaussian model, together with the
uniform-noise evidence, the mixture posterior and a few derived analytic
helpers. Every quantity is a function of δ and the model parameters.
"""

import math
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import expit

from epigain.errors import DomainRangeError
from epigain.model.params import (
    LOG_2PI,
    CoefficientSensitivities,
    GaussianPosterior,
    MixturePosterior,
    ModelParams,
    QuadraticCoeffs,
)


def log_evidence(params: ModelParams, delta: float) -> float:
    """
    Log marginal likelihood of the observations under the Gaussian model.

    Args:
        params: Model parameters (obs_mean is ignored in favour of delta)
        delta: Prediction error η − ō

    Returns:
        ln e(δ); −inf for infinite δ
    """
    n, s_p, s_l = params.n, params.s_p, params.s_l
    total = n * s_p + s_l
    return (
        0.5 * math.log(s_l / total)
        - 0.5 * n * (LOG_2PI + math.log(s_l))
        - n * params.obs_var / (2.0 * s_l)
        - n * delta * delta / (2.0 * total)
    )


def evidence(params: ModelParams, delta: float) -> float:
    """
    Marginal likelihood e(δ).

    Raises:
        DomainRangeError: If δ is not finite or e(δ) underflows to zero
    """
    if not math.isfinite(delta):
        raise DomainRangeError("delta", delta)
    value = math.exp(log_evidence(params, delta))
    if value == 0.0:
        raise DomainRangeError("evidence", value, location=delta)
    return value


def log_evidence_noisy(params: ModelParams, delta: float) -> float:
    """Log evidence with the additive uniform term: ln(e(δ) + ε)."""
    log_e = log_evidence(params, delta)
    if params.epsilon == 0.0:
        return log_e
    return float(np.logaddexp(log_e, math.log(params.epsilon)))


def surprise(params: ModelParams, delta: float) -> float:
    """Surprise −ln(e(δ) + ε) of the observations."""
    return -log_evidence_noisy(params, delta)


def log_likelihood(params: ModelParams, s: float) -> float:
    """Log likelihood of all n observations given the hidden state s."""
    n, s_l = params.n, params.s_l
    diff = s - params.obs_mean
    return -0.5 * n * (LOG_2PI + math.log(s_l)) - n * (diff * diff + params.obs_var) / (2.0 * s_l)


def free_energy_coeffs(params: ModelParams) -> QuadraticCoeffs:
    """Free energy of the Gaussian model as A_F·δ² + B_F."""
    n, s_p, s_l = params.n, params.s_p, params.s_l
    total = n * s_p + s_l
    return QuadraticCoeffs(
        a=n / (2.0 * total),
        b=0.5 * (
            math.log(total)
            + (n - 1) * math.log(s_l)
            + n * LOG_2PI
            + n * params.obs_var / s_l
        ),
    )


def free_energy(params: ModelParams, delta: float) -> float:
    return free_energy_coeffs(params).evaluate(delta)


def gaussian_posterior(params: ModelParams) -> GaussianPosterior:
    """Conjugate posterior of s after observing n samples with mean obs_mean."""
    n, s_p, s_l = params.n, params.s_p, params.s_l
    total = n * s_p + s_l
    return GaussianPosterior(
        eta_post=(n * s_p * params.obs_mean + s_l * params.eta) / total,
        s_post=s_p * s_l / total,
    )


def gaussian_kl(mean_p: float, var_p: float, mean_q: float, var_q: float) -> float:
    """KL(N(mean_p, var_p) ‖ N(mean_q, var_q))."""
    diff = mean_p - mean_q
    return 0.5 * (math.log(var_q / var_p) + var_p / var_q + diff * diff / var_q - 1.0)


def kld_coeffs(params: ModelParams) -> QuadraticCoeffs:
    """KL(prior ‖ posterior) as A·δ² + B."""
    n, s_p, s_l = params.n, params.s_p, params.s_l
    total = n * s_p + s_l
    return QuadraticCoeffs(
        a=n * n * s_p / (2.0 * s_l * total),
        b=0.5 * (n * s_p / s_l - math.log(total / s_l)),
    )


def bs_coeffs(params: ModelParams) -> QuadraticCoeffs:
    """KL(posterior ‖ prior) (Bayesian surprise) as A·δ² + B."""
    n, s_p, s_l = params.n, params.s_p, params.s_l
    total = n * s_p + s_l
    return QuadraticCoeffs(
        a=n * n * s_p / (2.0 * total * total),
        b=0.5 * (math.log(total / s_l) + s_l / total - 1.0),
    )


def kld_minus_bs_coeffs(params: ModelParams) -> QuadraticCoeffs:
    kld, bs = kld_coeffs(params), bs_coeffs(params)
    return QuadraticCoeffs(a=kld.a - bs.a, b=kld.b - bs.b)


def kld_gaussian(params: ModelParams, delta: float) -> float:
    """
    Gaussian KLD = KL(prior ‖ posterior) at prediction error δ.

    A single observation uses the closed-form quadratic; n > 1 evaluates the
    divergence between the prior and the conjugate posterior directly.
    """
    if params.n == 1:
        return kld_coeffs(params).evaluate(delta)
    moved = params.at_delta(delta)
    post = gaussian_posterior(moved)
    return gaussian_kl(moved.eta, moved.s_p, post.eta_post, post.s_post)


def bs_gaussian(params: ModelParams, delta: float) -> float:
    """Gaussian Bayesian surprise = KL(posterior ‖ prior) at δ."""
    if params.n == 1:
        return bs_coeffs(params).evaluate(delta)
    moved = params.at_delta(delta)
    post = gaussian_posterior(moved)
    return gaussian_kl(post.eta_post, post.s_post, moved.eta, moved.s_p)


def kld_minus_bs_gaussian(params: ModelParams, delta: float) -> float:
    return kld_gaussian(params, delta) - bs_gaussian(params, delta)


def coefficient_sensitivities(params: ModelParams) -> CoefficientSensitivities:
    """Partial derivatives of A_KLD and A_BS with respect to s_l and s_p."""
    n, s_p, s_l = params.n, params.s_p, params.s_l
    total = n * s_p + s_l
    n2 = n * n
    return CoefficientSensitivities(
        d_a_kld_d_s_l=-n2 * s_p * (n * s_p + 2.0 * s_l) / (2.0 * s_l * s_l * total * total),
        d_a_kld_d_s_p=n2 / (2.0 * total * total),
        d_a_bs_d_s_l=-n2 * s_p / total**3,
        d_a_bs_d_s_p=n2 * (s_l - n * s_p) / (2.0 * total**3),
    )


def mixture_posterior(params: ModelParams, delta: float) -> MixturePosterior:
    """
    Posterior under the uniform-noise likelihood at δ.

    w_post = e/(e + ε); with ε = 0 the mixture collapses to the Gaussian
    posterior.
    """
    moved = params.at_delta(delta)
    if params.epsilon == 0.0:
        w_post = 1.0
    else:
        w_post = float(expit(log_evidence(moved, delta) - math.log(params.epsilon)))
    return MixturePosterior(
        w_post=w_post,
        gaussian_post=gaussian_posterior(moved),
        prior_mean=moved.eta,
        prior_var=moved.s_p,
    )


def crossover_delta(params: ModelParams) -> Optional[float]:
    """
    Prediction error at which e(δ) = ε.

    Returns None when ε = 0 or when ε already exceeds e(0).
    """
    if params.epsilon == 0.0:
        return None
    gap = log_evidence(params, 0.0) - math.log(params.epsilon)
    if gap <= 0.0:
        return None
    total = params.n * params.s_p + params.s_l
    return math.sqrt(2.0 * total * gap / params.n)


def posterior_density_table(
    params: ModelParams,
    deltas: Sequence[float],
    s_min: float,
    s_max: float,
    points: int = 201,
) -> pd.DataFrame:
    """
    Tabulate mixture-posterior densities on a regular state grid.

    Args:
        params: Model parameters
        deltas: Prediction errors to tabulate, one block of rows each
        s_min: Lower end of the state grid
        s_max: Upper end of the state grid
        points: Number of grid points

    Returns:
        Long table with columns s, delta, density, w_post
    """
    if points < 2 or not s_max > s_min:
        raise DomainRangeError("state grid", (s_min, s_max, points))
    grid = np.linspace(s_min, s_max, points)
    blocks = []
    for delta in deltas:
        mixture = mixture_posterior(params, delta)
        blocks.append(
            pd.DataFrame(
                {
                    "s": grid,
                    "delta": float(delta),
                    "density": mixture.pdf(grid),
                    "w_post": mixture.w_post,
                }
            )
        )
    return pd.concat(blocks, ignore_index=True)
