"""
epigain - free-energy model of epistemic emotions.

Surprise, KL-divergence information gain (KLD) and Bayesian surprise (BS)
under a Gaussian generative model with a uniform likelihood floor; the
prediction errors and surprises that maximize them; uncertainty sweeps;
inquiry-cycle simulation; and the expected free energy decomposition.
"""

__version__ = "0.1.0"

from epigain.model.params import ModelParams, GaussianPosterior, MixturePosterior, QuadraticCoeffs
from epigain.model.gaussian import (
    evidence,
    log_evidence_noisy,
    surprise,
    free_energy_coeffs,
    gaussian_posterior,
    kld_gaussian,
    bs_gaussian,
    kld_minus_bs_gaussian,
    mixture_posterior,
)
from epigain.numerics.quadrature import QuadratureConfig, direct_kl
from epigain.numerics.gains import (
    GainPoint,
    gain_point,
    integral_I,
    integral_J,
    kld_noisy,
    bs_noisy,
    uncertainty_U,
)
from epigain.optimize.scalar import maximize_scalar
from epigain.optimize.optima import OptimaRecord, find_optima
from epigain.sweep.grid import SweepAxis, SweepSpec, SweepGrid, run_sweep
from epigain.sweep.export import export_csv, export_json
from epigain.inquiry.cycle import InquiryConfig, InquiryTrace, simulate, label_emotion
from epigain.efe.policy import (
    DiscretePolicyModel,
    EfeBreakdown,
    efe_direct,
    efe_decompose,
    policy_prior,
    load_policy_model,
)

__all__ = [
    "__version__",
    "ModelParams",
    "GaussianPosterior",
    "MixturePosterior",
    "QuadraticCoeffs",
    "evidence",
    "log_evidence_noisy",
    "surprise",
    "free_energy_coeffs",
    "gaussian_posterior",
    "kld_gaussian",
    "bs_gaussian",
    "kld_minus_bs_gaussian",
    "mixture_posterior",
    "QuadratureConfig",
    "direct_kl",
    "GainPoint",
    "gain_point",
    "integral_I",
    "integral_J",
    "kld_noisy",
    "bs_noisy",
    "uncertainty_U",
    "maximize_scalar",
    "OptimaRecord",
    "find_optima",
    "SweepAxis",
    "SweepSpec",
    "SweepGrid",
    "run_sweep",
    "export_csv",
    "export_json",
    "InquiryConfig",
    "InquiryTrace",
    "simulate",
    "label_emotion",
    "DiscretePolicyModel",
    "EfeBreakdown",
    "efe_direct",
    "efe_decompose",
    "policy_prior",
    "load_policy_model",
]
