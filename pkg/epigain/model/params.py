"""
Generative Model Types

Value objects for the one-dimensional Gaussian generative model with an
additive uniform likelihood: the parameterization, the conjugate Gaussian
posterior, the prior/posterior mixture that the uniform term produces, and
quadratic-in-δ coefficient pairs.
"""

import math
from typing import Any, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

ArrayLike = Union[float, np.ndarray]

LOG_2PI = math.log(2.0 * math.pi)


def normal_logpdf(x: ArrayLike, mean: float, var: float) -> ArrayLike:
    """Log density of N(mean, var) at x (scalar or array)."""
    return -0.5 * (LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


class ModelParams(BaseModel):
    """
    Full parameterization of the generative model.

    The prediction error δ = eta − obs_mean is always derived from the two
    means; use `at_delta` to move the observation to a given δ while keeping
    the prior fixed.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    eta: float = Field(default=0.0, description="Prior mean η (state units)")
    s_p: float = Field(..., gt=0, description="Prior variance (prediction uncertainty)")
    s_l: float = Field(..., gt=0, description="Gaussian likelihood variance (observation uncertainty)")
    n: int = Field(default=1, ge=1, description="Number of observations")
    obs_mean: float = Field(default=0.0, description="Observed data mean ō")
    obs_var: float = Field(default=0.0, ge=0, description="Observed data variance V")
    epsilon: float = Field(default=1e-3, ge=0, description="Uniform-likelihood probability ε")

    @model_validator(mode="before")
    @classmethod
    def _single_observation_has_no_spread(cls, data: Any) -> Any:
        if isinstance(data, dict) and int(data.get("n", 1)) == 1 and data.get("obs_var"):
            data = {**data, "obs_var": 0.0}
        return data

    def delta(self) -> float:
        """Prediction error η − ō."""
        return self.eta - self.obs_mean

    def at_delta(self, delta: float) -> "ModelParams":
        """Same model with the observation placed so that δ equals `delta`."""
        return self.model_copy(update={"obs_mean": self.eta - delta})

    @property
    def scale(self) -> float:
        """Combined standard deviation √(s_p + s_l)."""
        return math.sqrt(self.s_p + self.s_l)

    def prior_logpdf(self, s: ArrayLike) -> ArrayLike:
        """Log density of the Gaussian prior N(η, s_p)."""
        return normal_logpdf(s, self.eta, self.s_p)

    def to_record(self) -> dict[str, Any]:
        """Flat key/value record with the field names above."""
        return self.model_dump()

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "ModelParams":
        """Validate a flat key/value record."""
        return cls.model_validate(record)


class GaussianPosterior(BaseModel):
    """Conjugate Gaussian posterior N(η_post, s_post)."""

    model_config = ConfigDict(frozen=True)

    eta_post: float = Field(..., description="Posterior mean")
    s_post: float = Field(..., gt=0, description="Posterior variance")

    def logpdf(self, s: ArrayLike) -> ArrayLike:
        return normal_logpdf(s, self.eta_post, self.s_post)


class MixturePosterior(BaseModel):
    """
    Posterior under the uniform-noise likelihood.

    A weighted combination w_post·N_post + w_pri·N_pri of the Gaussian
    posterior and the prior; w_pri is defined as 1 − w_post so the weights
    always sum to one.
    """

    model_config = ConfigDict(frozen=True)

    w_post: float = Field(..., ge=0, le=1, description="Weight of the Gaussian posterior")
    gaussian_post: GaussianPosterior
    prior_mean: float
    prior_var: float = Field(..., gt=0)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def w_pri(self) -> float:
        return 1.0 - self.w_post

    def logpdf(self, s: ArrayLike) -> ArrayLike:
        with np.errstate(divide="ignore"):
            log_post = np.log(self.w_post) + self.gaussian_post.logpdf(s)
            log_pri = np.log(self.w_pri) + normal_logpdf(s, self.prior_mean, self.prior_var)
        return np.logaddexp(log_post, log_pri)

    def pdf(self, s: ArrayLike) -> ArrayLike:
        return np.exp(self.logpdf(s))


class QuadraticCoeffs(BaseModel):
    """Coefficients of a·δ² + b."""

    model_config = ConfigDict(frozen=True)

    a: float = Field(..., description="Gradient coefficient of δ²")
    b: float = Field(..., description="Constant term")

    def evaluate(self, delta: float) -> float:
        return self.a * delta * delta + self.b


class CoefficientSensitivities(BaseModel):
    """Partial derivatives of the KLD and BS δ² gradients."""

    model_config = ConfigDict(frozen=True)

    d_a_kld_d_s_l: float
    d_a_kld_d_s_p: float
    d_a_bs_d_s_l: float
    d_a_bs_d_s_p: float
