"""Tests for the expected free energy decomposition and policy prior."""

import math

import numpy as np
import pytest

from epigain.errors import DomainRangeError, IdentityViolationError, ModelValidationError
from epigain.efe.policy import (
    IDENTITY_TOLERANCE,
    DiscretePolicyModel,
    EfeBreakdown,
    PolicyBelief,
    check_identity,
    efe_decompose,
    efe_direct,
    enumerate_components,
    example_model_path,
    load_policy_model,
    policy_prior,
)


def two_state_model(**overrides) -> DiscretePolicyModel:
    document = {
        "states": ["s0", "s1"],
        "observations": ["o0", "o1"],
        "likelihood": [[0.9, 0.1], [0.2, 0.8]],
        "preference": [0.5, 0.5],
        "policies": [{"name": "look", "predicted_states": [0.7, 0.3]}],
    }
    document.update(overrides)
    return load_policy_model(document)


def enumerate_g(q, likelihood, preference) -> float:
    total = 0.0
    for s, q_s in enumerate(q):
        for o, a in enumerate(likelihood[s]):
            if q_s * a > 0:
                total += q_s * a * (math.log(q_s) - math.log(preference[s]) - math.log(a))
    return total


def breakdown(name: str, g: float) -> EfeBreakdown:
    return EfeBreakdown(policy=name, g=g, risk=max(g, 0.0), p_f=min(g, 0.0), p_kld=0.0, p_bs=0.0)


def random_model(rng: np.random.Generator) -> DiscretePolicyModel:
    n_states = int(rng.integers(2, 6))
    n_obs = int(rng.integers(2, 6))
    return DiscretePolicyModel(
        states=[f"s{i}" for i in range(n_states)],
        observations=[f"o{i}" for i in range(n_obs)],
        likelihood=rng.dirichlet(np.ones(n_obs), size=n_states).tolist(),
        preference=rng.dirichlet(np.ones(n_states)).tolist(),
        policies=[
            PolicyBelief(name=f"pi{k}", predicted_states=rng.dirichlet(np.ones(n_states)).tolist())
            for k in range(3)
        ],
        gamma=float(rng.uniform(0.0, 8.0)),
    )


class TestEfeDirect:
    def test_hand_enumerated(self):
        model = two_state_model()
        expected = enumerate_g([0.7, 0.3], [[0.9, 0.1], [0.2, 0.8]], [0.5, 0.5])
        assert efe_direct(model, "look") == pytest.approx(expected, abs=1e-15)

    def test_zero_mass_state_contributes_nothing(self):
        base = two_state_model()
        padded = load_policy_model(
            {
                "states": ["s0", "s1", "s2"],
                "observations": ["o0", "o1"],
                "likelihood": [[0.9, 0.1], [0.2, 0.8], [0.5, 0.5]],
                "preference": [0.5, 0.5, 0.0],
                "policies": [{"name": "look", "predicted_states": [0.7, 0.3, 0.0]}],
            }
        )
        assert efe_direct(padded, "look") == pytest.approx(efe_direct(base, "look"), abs=1e-15)
        assert efe_decompose(padded, "look").g == pytest.approx(efe_decompose(base, "look").g, abs=1e-15)

    def test_deterministic_likelihood_at_preference(self):
        model = two_state_model(
            likelihood=[[1.0, 0.0], [0.0, 1.0]],
            policies=[{"name": "match", "predicted_states": [0.5, 0.5]}],
        )
        assert efe_direct(model, "match") == 0.0
        with pytest.raises(DomainRangeError):
            efe_decompose(model, "match")

    def test_unreachable_preference_raises(self):
        model = two_state_model(preference=[1.0, 0.0])
        with pytest.raises(DomainRangeError) as info:
            efe_direct(model, "look")
        assert info.value.location[0] == "s1"

    def test_unknown_policy(self):
        with pytest.raises(KeyError):
            efe_direct(two_state_model(), "wander")


class TestEfeDecompose:
    def test_hand_enumerated_components(self):
        result = efe_decompose(two_state_model(), "look")
        assert result.risk == pytest.approx(0.7 * math.log(1.4) + 0.3 * math.log(0.6), abs=1e-15)
        # q(o) = (0.69, 0.31); free energy of each o under the prediction q(s|π)
        p_f = -(
            0.69 * (0.7 * math.log(0.9) + 0.3 * math.log(0.2))
            + 0.31 * (0.7 * math.log(0.1) + 0.3 * math.log(0.8))
        )
        assert result.p_f == pytest.approx(p_f, abs=1e-14)
        assert result.risk + result.p_f - (result.p_kld + result.p_bs) == pytest.approx(result.g, abs=1e-12)

    def test_expected_divergences_against_enumeration(self):
        q = np.array([0.7, 0.3])
        a = np.array([[0.9, 0.1], [0.2, 0.8]])
        q_obs = q @ a
        kld = bs = 0.0
        for o in range(2):
            post = q * a[:, o] / q_obs[o]
            kld += q_obs[o] * np.sum(q * np.log(q / post))
            bs += q_obs[o] * np.sum(post * np.log(post / q))
        result = efe_decompose(two_state_model(), "look")
        assert result.p_kld == pytest.approx(kld, abs=1e-14)
        assert result.p_bs == pytest.approx(bs, abs=1e-14)

    def test_random_models_satisfy_identity(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            model = random_model(rng)
            for policy in model.policies:
                result = efe_decompose(model, policy)
                rebuilt = result.risk + result.p_f - (result.p_kld + result.p_bs)
                assert abs(rebuilt - result.g) <= IDENTITY_TOLERANCE
                assert result.p_kld >= 0 and result.p_bs >= 0

    def test_risk_vanishes_only_at_preference(self):
        model = two_state_model(
            policies=[
                {"name": "match", "predicted_states": [0.5, 0.5]},
                {"name": "lean", "predicted_states": [0.6, 0.4]},
            ]
        )
        assert efe_decompose(model, "match").risk == 0.0
        assert efe_decompose(model, "lean").risk > 0.0

    def test_breakdown_rejects_inconsistent_components(self):
        with pytest.raises(IdentityViolationError):
            EfeBreakdown(policy="x", g=1.0, risk=0.5, p_f=0.2, p_kld=0.0, p_bs=0.0)


class TestCheckIdentity:
    def test_enumeration_matches_decomposition(self):
        model = two_state_model()
        result = efe_decompose(model, "look")
        enumerated = enumerate_components(model, "look")
        for name, value in enumerated.items():
            assert getattr(result, name) == pytest.approx(value, abs=1e-14)
        assert check_identity(model, result) <= IDENTITY_TOLERANCE

    def test_random_models_pass(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            model = random_model(rng)
            for policy in model.policies:
                assert check_identity(model, efe_decompose(model, policy)) <= IDENTITY_TOLERANCE

    def test_shifted_components_fail_even_when_they_cancel(self):
        model = two_state_model()
        result = efe_decompose(model, "look")
        shifted = result.model_copy(update={"p_f": result.p_f + 0.1, "p_kld": result.p_kld + 0.1})
        assert shifted.risk + shifted.p_f - (shifted.p_kld + shifted.p_bs) == pytest.approx(shifted.g, abs=1e-12)
        with pytest.raises(IdentityViolationError) as info:
            check_identity(model, shifted)
        assert "p_f" in str(info.value)


class TestPolicyPrior:
    def test_two_policies(self):
        prior = policy_prior([breakdown("a", 1.0), breakdown("b", 2.0)], gamma=1.0)
        assert prior["a"] == pytest.approx(0.7311, abs=1e-4)
        assert prior["b"] == pytest.approx(0.2689, abs=1e-4)
        assert prior["a"] == pytest.approx(math.exp(-1) / (math.exp(-1) + math.exp(-2)), rel=1e-12)

    def test_zero_precision_is_uniform(self):
        prior = policy_prior([breakdown(n, g) for n, g in zip("abc", (0.3, 5.0, -2.0))], gamma=0.0)
        assert list(prior.values()) == pytest.approx([1 / 3] * 3, abs=1e-15)

    def test_shift_invariance(self):
        energies = (0.3, 1.1, 2.5)
        shifted = policy_prior([breakdown(n, g + 40.0) for n, g in zip("abc", energies)], gamma=2.0)
        plain = policy_prior([breakdown(n, g) for n, g in zip("abc", energies)], gamma=2.0)
        assert list(shifted.values()) == pytest.approx(list(plain.values()), abs=1e-12)

    def test_high_precision_picks_lowest_energy(self):
        prior = policy_prior([breakdown("a", 1.0), breakdown("b", 0.5), breakdown("c", 2.0)], gamma=1e4)
        assert prior["b"] == pytest.approx(1.0, abs=1e-12)
        assert sum(prior.values()) == pytest.approx(1.0, abs=1e-15)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            policy_prior([], gamma=1.0)
        with pytest.raises(ValueError):
            policy_prior([breakdown("a", 1.0)], gamma=-1.0)


class TestModelValidation:
    def test_missing_likelihood_row(self):
        with pytest.raises(ModelValidationError) as info:
            two_state_model(likelihood=[[0.9, 0.1]])
        assert "row 1 missing" in str(info.value)

    def test_row_not_normalized(self):
        with pytest.raises(ModelValidationError) as info:
            two_state_model(likelihood=[[0.9, 0.1], [0.2, 0.7]])
        assert "likelihood row 1 (s1)" in str(info.value)

    def test_negative_entry(self):
        with pytest.raises(ModelValidationError):
            two_state_model(preference=[1.5, -0.5])

    def test_policy_shape(self):
        with pytest.raises(ModelValidationError) as info:
            two_state_model(policies=[{"name": "bad", "predicted_states": [1.0]}])
        assert "'bad'" in str(info.value)

    def test_duplicate_policy_names(self):
        policy = {"name": "same", "predicted_states": [0.5, 0.5]}
        with pytest.raises(ModelValidationError):
            two_state_model(policies=[policy, policy])

    def test_negative_precision(self):
        with pytest.raises(ModelValidationError):
            two_state_model(gamma=-1.0)

    def test_unparseable_document(self):
        with pytest.raises(ModelValidationError):
            load_policy_model(b"{not json")

    def test_bundled_model(self):
        model = load_policy_model(example_model_path())
        assert [p.name for p in model.policies] == ["approach", "hold", "scan"]
        breakdowns = [efe_decompose(model, p) for p in model.policies]
        prior = policy_prior(breakdowns, model.gamma)
        assert sum(prior.values()) == pytest.approx(1.0, abs=1e-12)
        for result in breakdowns:
            assert result.g == pytest.approx(efe_direct(model, result.policy), abs=1e-15)
