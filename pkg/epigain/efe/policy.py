"""
Expected free energy for finite policy sets.

Each policy predicts a state distribution q(s|π). With a likelihood p(o|s)
and a preference prior p(s|C) over states, the expected free energy

    G_π = Σ_s Σ_o q(s|π)·p(o|s)·[ln q(s|π) − ln p(s|C) − ln p(o|s)]

splits exactly into

    G_π = risk + pF − (pKLD + pBS)

where risk = KL(q(s|π) ‖ p(s|C)), pF is the expected negative log
likelihood, pKLD the expected KL(prior ‖ posterior) and pBS the expected
KL(posterior ‖ prior) over predicted observations.
"""

import math
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy.special import softmax

from epigain.errors import (
    DomainRangeError,
    IdentityViolationError,
    ModelValidationError,
    check_divergence,
)
from epigain.observability.logger import get_logger
from epigain.tables import read_json

logger = get_logger(__name__)

NORMALIZATION_TOLERANCE = 1e-12
IDENTITY_TOLERANCE = 1e-10


def _check_distribution(name: str, values: Sequence[float]) -> None:
    if any(v < 0 for v in values):
        raise ValueError(f"{name} has a negative entry")
    total = float(np.sum(values))
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise ValueError(f"{name} sums to {total:.15g}, expected 1")


class PolicyBelief(BaseModel):
    """Predicted state distribution q(s|π) of one policy."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1)
    predicted_states: List[float]


class DiscretePolicyModel(BaseModel):
    """Finite generative model with a set of candidate policies."""

    model_config = ConfigDict(frozen=True)

    states: List[str] = Field(..., min_length=1)
    observations: List[str] = Field(..., min_length=1)
    likelihood: List[List[float]] = Field(..., description="Rows are states, columns observations")
    preference: List[float] = Field(..., description="Preference prior p(s|C)")
    policies: List[PolicyBelief] = Field(default_factory=list)
    gamma: float = Field(default=1.0, ge=0, description="Policy precision γ")

    @model_validator(mode="after")
    def _shapes_and_normalization(self) -> "DiscretePolicyModel":
        n_states, n_obs = len(self.states), len(self.observations)
        if len(self.likelihood) != n_states:
            rows = len(self.likelihood)
            message = f"likelihood has {rows} rows for {n_states} states"
            if rows < n_states:
                message += f" (row {rows} missing)"
            raise ValueError(message)
        for index, row in enumerate(self.likelihood):
            if len(row) != n_obs:
                raise ValueError(
                    f"likelihood row {index} ({self.states[index]}) has {len(row)} "
                    f"entries for {n_obs} observations"
                )
            _check_distribution(f"likelihood row {index} ({self.states[index]})", row)
        if len(self.preference) != n_states:
            raise ValueError(f"preference has {len(self.preference)} entries for {n_states} states")
        _check_distribution("preference", self.preference)

        names = set()
        for policy in self.policies:
            if policy.name in names:
                raise ValueError(f"duplicate policy name '{policy.name}'")
            names.add(policy.name)
            if len(policy.predicted_states) != n_states:
                raise ValueError(
                    f"policy '{policy.name}' predicts {len(policy.predicted_states)} "
                    f"states, expected {n_states}"
                )
            _check_distribution(f"policy '{policy.name}' predicted_states", policy.predicted_states)
        return self

    def likelihood_matrix(self) -> np.ndarray:
        return np.asarray(self.likelihood, dtype=float)

    def policy(self, name: str) -> PolicyBelief:
        for policy in self.policies:
            if policy.name == name:
                return policy
        raise KeyError(f"Unknown policy '{name}'")


class EfeBreakdown(BaseModel):
    """Expected free energy of one policy and its four components."""

    model_config = ConfigDict(frozen=True)

    policy: str
    g: float = Field(..., description="G_π by direct enumeration")
    risk: float = Field(..., ge=0)
    p_f: float = Field(..., description="Predicted free energy")
    p_kld: float = Field(..., ge=0, description="Expected KL(prior ‖ posterior)")
    p_bs: float = Field(..., ge=0, description="Expected KL(posterior ‖ prior)")

    @model_validator(mode="after")
    def _components_reconstruct_g(self) -> "EfeBreakdown":
        rebuilt = self.risk + self.p_f - (self.p_kld + self.p_bs)
        if abs(rebuilt - self.g) > IDENTITY_TOLERANCE:
            raise IdentityViolationError(
                "G = risk + pF - (pKLD + pBS)", self.g, rebuilt, IDENTITY_TOLERANCE
            )
        return self


PolicyRef = Union[str, PolicyBelief]


def _resolve(model: DiscretePolicyModel, policy: PolicyRef) -> PolicyBelief:
    return model.policy(policy) if isinstance(policy, str) else policy


def _arrays(
    model: DiscretePolicyModel, policy: PolicyBelief
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return (
        np.asarray(policy.predicted_states, dtype=float),
        model.likelihood_matrix(),
        np.asarray(model.preference, dtype=float),
    )


def _require_positive(
    model: DiscretePolicyModel, quantity: str, values: np.ndarray, needed: np.ndarray
) -> None:
    """Raise for the first (s, o) where mass is needed but the log argument is zero."""
    bad = np.argwhere(needed & (values <= 0))
    if bad.size:
        s, o = (int(i) for i in bad[0])
        raise DomainRangeError(
            quantity, float(values[s, o]), location=(model.states[s], model.observations[o])
        )


def efe_direct(model: DiscretePolicyModel, policy: PolicyRef) -> float:
    """
    G_π by exhaustive enumeration over states × observations.

    Terms with zero joint weight q(s|π)·p(o|s) are skipped.

    Raises:
        DomainRangeError: If p(s|C) is zero for a contributing (s, o)
    """
    q, likelihood, preference = _arrays(model, _resolve(model, policy))
    weights = q[:, None] * likelihood
    contributing = weights > 0
    _require_positive(
        model, "ln p(s|C)", np.broadcast_to(preference[:, None], weights.shape), contributing
    )

    with np.errstate(divide="ignore"):
        log_q = np.log(q)[:, None]
        log_c = np.log(preference)[:, None]
        log_a = np.log(likelihood)
    terms = np.where(contributing, weights * (log_q - log_c - log_a), 0.0)
    return float(terms.sum())


def efe_decompose(model: DiscretePolicyModel, policy: PolicyRef) -> EfeBreakdown:
    """
    Split G_π into risk, predicted free energy, pKLD and pBS.

    The posterior q(s|o,π) is exact Bayes on the joint q(s|π)·p(o|s).

    Raises:
        DomainRangeError: If a required log argument is zero
        IdentityViolationError: If the components do not reconstruct G_π
    """
    belief = _resolve(model, policy)
    q, likelihood, preference = _arrays(model, belief)
    support = q > 0
    q_obs = q @ likelihood
    observed = q_obs > 0
    needed = support[:, None] & observed[None, :]
    _require_positive(model, "ln p(o|s)", likelihood, needed)
    if np.any(support & (preference <= 0)):
        s = int(np.argmax(support & (preference <= 0)))
        raise DomainRangeError("ln p(s|C)", float(preference[s]), location=model.states[s])

    qs = q[support]
    a = likelihood[support][:, observed]
    qo = q_obs[observed]
    posterior = qs[:, None] * a / qo[None, :]

    risk = float(np.sum(qs * np.log(qs / preference[support])))
    p_f = float(np.sum(qo * (qs @ -np.log(a))))
    log_ratio = np.log(qs[:, None] / posterior)
    p_kld = float(np.sum(qo * np.sum(qs[:, None] * log_ratio, axis=0)))
    p_bs = float(np.sum(qo * np.sum(posterior * -log_ratio, axis=0)))

    breakdown = EfeBreakdown(
        policy=belief.name,
        g=efe_direct(model, belief),
        risk=check_divergence("risk", risk, IDENTITY_TOLERANCE),
        p_f=p_f,
        p_kld=check_divergence("p_kld", p_kld, IDENTITY_TOLERANCE),
        p_bs=check_divergence("p_bs", p_bs, IDENTITY_TOLERANCE),
    )
    logger.debug("efe.identity_checked", policy=belief.name, g=breakdown.g)
    return breakdown


def enumerate_components(model: DiscretePolicyModel, policy: PolicyRef) -> Dict[str, float]:
    """risk, p_f, p_kld and p_bs by scalar loops over (s, o), skipping zero-weight terms."""
    q = _resolve(model, policy).predicted_states
    a, c = model.likelihood, model.preference
    support = [s for s, q_s in enumerate(q) if q_s > 0]

    risk = sum(q[s] * math.log(q[s] / c[s]) for s in support)
    p_f = p_kld = p_bs = 0.0
    for o in range(len(model.observations)):
        q_o = sum(q[s] * a[s][o] for s in support)
        if q_o <= 0:
            continue
        for s in support:
            post = q[s] * a[s][o] / q_o
            p_f -= q_o * q[s] * math.log(a[s][o])
            p_kld += q_o * q[s] * math.log(q[s] / post)
            p_bs += q_o * post * math.log(post / q[s])
    return {"risk": risk, "p_f": p_f, "p_kld": p_kld, "p_bs": p_bs}


def check_identity(model: DiscretePolicyModel, breakdown: EfeBreakdown) -> float:
    """
    Residual of a breakdown against scalar enumeration.

    The largest of the per-component differences and of
    |risk + pF − (pKLD + pBS) − G_π| with every term re-enumerated.

    Raises:
        IdentityViolationError: If the residual exceeds IDENTITY_TOLERANCE
    """
    enumerated = enumerate_components(model, breakdown.policy)
    g = efe_direct(model, breakdown.policy)
    rebuilt = enumerated["risk"] + enumerated["p_f"] - (enumerated["p_kld"] + enumerated["p_bs"])
    residual = abs(rebuilt - g)
    for name, value in enumerated.items():
        actual = getattr(breakdown, name)
        if abs(actual - value) > IDENTITY_TOLERANCE:
            raise IdentityViolationError(f"{breakdown.policy} {name}", value, actual, IDENTITY_TOLERANCE)
        residual = max(residual, abs(actual - value))
    if residual > IDENTITY_TOLERANCE:
        raise IdentityViolationError("G = risk + pF - (pKLD + pBS)", g, rebuilt, IDENTITY_TOLERANCE)
    return residual


def policy_prior(breakdowns: Sequence[EfeBreakdown], gamma: float) -> Dict[str, float]:
    """
    Softmax policy prior p(π) ∝ exp(−γ·G_π).

    Args:
        breakdowns: One breakdown per policy
        gamma: Policy precision

    Returns:
        Probability per policy name, in input order
    """
    if not breakdowns:
        raise ValueError("policy_prior needs at least one policy")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    energies = np.array([b.g for b in breakdowns], dtype=float)
    probabilities = softmax(-gamma * energies)
    return {b.policy: float(p) for b, p in zip(breakdowns, probabilities)}


def example_model_path() -> Path:
    """Path of the bundled example model."""
    return Path(str(resources.files("epigain.efe").joinpath("data/example_model.json")))


def load_policy_model(source: Union[str, Path, bytes, Mapping[str, Any]]) -> DiscretePolicyModel:
    """
    Parse and validate a model document.

    Args:
        source: Path, raw JSON bytes, or an already parsed mapping

    Raises:
        ModelValidationError: If the document violates the schema
    """
    try:
        document = source if isinstance(source, Mapping) else read_json(source)
    except (OSError, ValueError) as e:
        raise ModelValidationError(f"Cannot read model document: {e}") from e
    try:
        return DiscretePolicyModel.model_validate(document)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'model'}: {err['msg']}" for err in e.errors()
        )
        raise ModelValidationError(details) from e
