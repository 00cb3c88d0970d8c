"""Tests for bounded maximization and the optimal prediction errors."""

import math

import numpy as np
import pytest

from epigain.errors import OptimizerError
from epigain.model.gaussian import surprise
from epigain.model.params import ModelParams
from epigain.numerics.gains import information_gains
from epigain.numerics.quadrature import QuadratureConfig
from epigain.observability.metrics import MetricsCollector
from epigain.optimize.optima import (
    Objective,
    OptimaRecord,
    default_search_bound,
    find_optima,
)
from epigain.optimize.scalar import maximize_scalar

COARSE_AXIS = [1.0, 5.0, 10.0, 25.0, 50.0]
TREND_AXIS = [1.0, 5.0, 10.0, 20.0, 50.0]


class TestMaximizeScalar:
    def test_quadratic_vertex(self):
        result = maximize_scalar(lambda d: -((d - 2.0) ** 2), 0.0, 5.0, tol=1e-5)
        assert result.converged
        assert result.argmax == pytest.approx(2.0, abs=1e-5)
        assert result.maximum == pytest.approx(0.0, abs=1e-9)

    def test_maximum_on_the_boundary(self):
        result = maximize_scalar(lambda d: d, 0.0, 1.0, tol=1e-6)
        assert result.argmax == pytest.approx(1.0, abs=1e-5)

    def test_plateau_breaks_ties_low(self):
        result = maximize_scalar(lambda d: 3.0, 0.0, 5.0)
        assert result.converged
        assert result.maximum == 3.0
        first_probe = 0.5 * (3.0 - math.sqrt(5.0)) * 5.0
        assert 0.0 <= result.argmax <= first_probe + 1e-12

    def test_non_finite_objective_raises(self):
        with pytest.raises(OptimizerError) as info:
            maximize_scalar(lambda d: math.nan if d > 1.0 else -d, 0.0, 5.0)
        assert info.value.delta > 1.0

    @pytest.mark.parametrize("lo,hi", [(1.0, 1.0), (2.0, 1.0), (0.0, math.inf)])
    def test_invalid_bracket(self, lo, hi):
        with pytest.raises(ValueError):
            maximize_scalar(lambda d: -d * d, lo, hi)

    def test_evaluation_cap_returns_best_so_far(self):
        f = lambda d: -((d - 2.0) ** 2)  # noqa: E731
        result = maximize_scalar(f, 0.0, 5.0, tol=1e-12, max_iters=4)
        assert not result.converged
        assert result.evaluations == 4
        assert result.maximum == f(result.argmax)

    def test_deterministic(self):
        f = lambda d: math.sin(d) * math.exp(-0.1 * d)  # noqa: E731
        assert maximize_scalar(f, 0.0, 3.0) == maximize_scalar(f, 0.0, 3.0)


class TestFindOptima:
    def test_reference_ordering(self, reference_optima):
        record = reference_optima
        assert record.all_converged
        assert record.delta_kld < record.delta_bs
        assert record.s_kld < record.s_bs
        assert record.delta_kld <= record.delta_ig <= record.delta_bs
        assert record.s_kld <= record.s_ig <= record.s_bs

    def test_derived_fields(self, reference_optima):
        record = reference_optima
        assert record.d_delta == record.delta_bs - record.delta_kld
        assert record.d_s == record.s_bs - record.s_kld
        assert record.s_bs == surprise(record.params, record.delta_bs)

    def test_peak_values_match_gains(self, reference_params, reference_optima, quad_cfg):
        kld, bs = information_gains(reference_params, reference_optima.delta_kld, quad_cfg)
        assert reference_optima.max_kld == pytest.approx(kld, abs=1e-12)
        _, bs = information_gains(reference_params, reference_optima.delta_bs, quad_cfg)
        assert reference_optima.max_bs == pytest.approx(bs, abs=1e-12)

    def test_default_bound(self, reference_params):
        assert default_search_bound(reference_params) == pytest.approx(10.0 * math.sqrt(11.0))

    def test_narrow_bound_is_widened(self, reference_params, reference_optima):
        record = find_optima(reference_params, search_bound=0.5)
        assert record.all_converged
        assert record.search_bound > 0.5
        assert record.delta_bs == pytest.approx(reference_optima.delta_bs, abs=1e-4)

    def test_bound_without_widening_fails_to_converge(self, reference_params):
        record = find_optima(reference_params, search_bound=1e-6, max_widenings=0)
        assert not record.all_converged
        assert record.converged[Objective.BS] is False
        assert record.delta_bs <= 1e-6

    def test_identical_inputs_identical_records(self, reference_params):
        assert find_optima(reference_params) == find_optima(reference_params)

    def test_metrics_count_each_objective(self, reference_params):
        metrics = MetricsCollector()
        find_optima(reference_params, metrics=metrics)
        for objective in Objective:
            assert metrics.value(
                "optimizer.runs", {"objective": objective.value, "status": "converged"}
            ) == 1.0

    def test_failed_placeholder(self, reference_params):
        record = OptimaRecord.failed(reference_params, 10.0)
        assert math.isnan(record.delta_ig)
        assert math.isnan(record.d_delta)
        assert not record.all_converged

    def test_wider_prior_raises_peak_information(self):
        narrow = find_optima(ModelParams(s_p=1.0, s_l=1.0, epsilon=1e-3))
        wide = find_optima(ModelParams(s_p=50.0, s_l=1.0, epsilon=1e-3))
        assert wide.max_ig > narrow.max_ig

    @pytest.mark.slow
    def test_grid_scan_oracle(self, reference_params, reference_optima):
        cfg = QuadratureConfig()
        deltas = np.linspace(0.0, 20.0, 4000)
        pairs = np.array([information_gains(reference_params, float(d), cfg) for d in deltas])
        scans = {
            "kld": pairs[:, 0].max(),
            "bs": pairs[:, 1].max(),
            "ig": pairs.sum(axis=1).max(),
        }
        assert reference_optima.max_kld == pytest.approx(scans["kld"], abs=1e-4)
        assert reference_optima.max_bs == pytest.approx(scans["bs"], abs=1e-4)
        assert reference_optima.max_ig == pytest.approx(scans["ig"], abs=1e-4)
        assert reference_optima.max_ig >= scans["ig"] - 1e-9


@pytest.fixture(scope="module")
def coarse_records():
    return {
        (s_l, s_p): find_optima(ModelParams(s_p=s_p, s_l=s_l, epsilon=1e-3))
        for s_l in COARSE_AXIS
        for s_p in COARSE_AXIS
    }


@pytest.mark.slow
class TestCoarseGrid:
    def test_enough_cells_converge(self, coarse_records):
        converged = sum(record.all_converged for record in coarse_records.values())
        assert converged >= 24

    def test_orderings(self, coarse_records):
        for record in coarse_records.values():
            if not record.all_converged:
                continue
            assert record.d_delta > 0
            assert record.d_s > 0
            assert record.delta_kld <= record.delta_ig <= record.delta_bs

    def test_peaks_match_scan(self, coarse_records, local_maxima):
        cfg = QuadratureConfig()
        for (s_l, s_p), record in coarse_records.items():
            if not record.all_converged:
                continue
            params = record.params
            deltas = np.linspace(0.0, record.search_bound, 4000)
            pairs = np.array([information_gains(params, float(d), cfg) for d in deltas])
            assert record.max_kld >= pairs[:, 0].max() - 1e-4, (s_l, s_p)
            assert record.max_bs >= pairs[:, 1].max() - 1e-4, (s_l, s_p)
            assert record.max_ig >= pairs.sum(axis=1).max() - 1e-4, (s_l, s_p)
            for name, values in (("kld", pairs[:, 0]), ("bs", pairs[:, 1]), ("ig", pairs.sum(axis=1))):
                assert len(local_maxima(values)) == 1, (s_l, s_p, name)


@pytest.mark.slow
class TestTrends:
    def test_peak_information_falls_with_likelihood_variance(self):
        peaks = [find_optima(ModelParams(s_p=10.0, s_l=s_l, epsilon=1e-3)).max_ig for s_l in TREND_AXIS]
        assert all(a > b for a, b in zip(peaks, peaks[1:]))

    def test_prior_variance_spreads_optimal_surprises(self):
        records = [find_optima(ModelParams(s_p=s_p, s_l=1.0, epsilon=1e-3)) for s_p in TREND_AXIS]
        peaks = [r.max_ig for r in records]
        s_kld = [r.s_kld for r in records]
        s_bs = [r.s_bs for r in records]
        assert all(a < b for a, b in zip(peaks, peaks[1:]))
        assert all(a > b for a, b in zip(s_kld, s_kld[1:]))
        assert all(a < b for a, b in zip(s_bs, s_bs[1:]))

    def test_optimal_gaps_widen_with_prior_and_narrow_with_likelihood_variance(self):
        along_s_p = [find_optima(ModelParams(s_p=s_p, s_l=1.0, epsilon=1e-3)) for s_p in TREND_AXIS]
        along_s_l = [find_optima(ModelParams(s_p=10.0, s_l=s_l, epsilon=1e-3)) for s_l in TREND_AXIS]
        assert all(r.all_converged for r in along_s_p + along_s_l)
        for field in ("d_delta", "d_s"):
            rising = [getattr(r, field) for r in along_s_p]
            falling = [getattr(r, field) for r in along_s_l]
            assert all(a < b for a, b in zip(rising, rising[1:])), field
            assert all(a > b for a, b in zip(falling, falling[1:])), field
