import numpy as np
import pytest
from scipy.special import ndtri

from fastmi import estimate_mi
from fastmi import sce
from fastmi.copulas import CopulaSpec, sample_copula, true_mi
from fastmi.errors import ConfigError, DomainError, InsufficientData
from fastmi.estimator import (EstimatorConfig, copula_density_at, fit_copula_density,
                              log_copula_density_probit)
from fastmi.pseudo_obs import probit_sample

from conftest import correlated_normal

GAUSS_MI_TAU_HALF = 0.5 * np.log(2.0)


def product_normal_grid(m=256, half=8.0):
    grid = sce.GridSpec(m, -half, half)
    x = grid.nodes
    values = np.exp(-0.5 * (x[:, None] ** 2 + x[None, :] ** 2)) / (2 * np.pi)
    return sce.DensityGrid(values=values, grid=grid, floor=0.0)


class TestCopulaDensity:
    def test_independence_grid_is_unit(self):
        density = product_normal_grid()
        u, v = np.meshgrid(np.linspace(0.1, 0.9, 9), np.linspace(0.1, 0.9, 9))
        np.testing.assert_allclose(copula_density_at(density, u, v), 1.0, atol=2e-3)

    def test_node_query_is_exact(self):
        density = product_normal_grid(m=64)
        z = density.grid.nodes[[20, 37]]
        logc, _ = log_copula_density_probit(density, np.array([z]))
        expected = density.values[20, 37] * 2 * np.pi * np.exp(0.5 * (z ** 2).sum())
        assert np.exp(logc[0]) == pytest.approx(expected, rel=1e-13)

    def test_gaussian_centre_value(self):
        rho = np.sin(np.pi / 4)
        data = correlated_normal(np.random.default_rng(1), 5000, rho)
        density = fit_copula_density(probit_sample(data))
        assert copula_density_at(density, 0.5, 0.5) == pytest.approx(1 / np.sqrt(1 - rho ** 2),
                                                                     abs=0.1)

    @pytest.mark.parametrize("u", [0.0, 1.0, -0.2])
    def test_domain(self, u):
        with pytest.raises(DomainError):
            copula_density_at(product_normal_grid(m=32), u, 0.5)

    def test_floor_clamps(self):
        density = product_normal_grid(m=64)
        zero = sce.DensityGrid(np.zeros_like(density.values), density.grid, 0.0)
        assert copula_density_at(zero, 0.3, 0.6, floor=1e-10) == pytest.approx(1e-10)


class TestEstimateMi:
    def test_comonotone(self, rng):
        x = rng.standard_normal(500)
        assert estimate_mi(x, x).value > 1.0

    def test_rank_invariance_bit_identical(self, rng):
        data = correlated_normal(rng, 400, 0.5)
        a = estimate_mi(data)
        b = estimate_mi(np.exp(data[:, 0]), 3 * data[:, 1] ** 3 + 1)
        assert a.value == b.value

    def test_axis_swap(self, rng):
        data = correlated_normal(rng, 600, 0.3)
        assert estimate_mi(data).value == pytest.approx(estimate_mi(data[:, ::-1]).value,
                                                        abs=1e-10)

    def test_report_fields(self, rng):
        est = estimate_mi(correlated_normal(rng, 300, 0.5))
        assert est.n == 300 and 0 <= est.floor_hits <= 300
        assert est.bits == pytest.approx(est.value / np.log(2))
        assert est.grid.m == 256

    def test_overrides(self, rng):
        data = correlated_normal(rng, 300, 0.5)
        est = estimate_mi(data, m=128, ecf_mode="direct")
        assert est.grid.m == 128 and est.config.ecf_mode == "direct"
        assert est.value == pytest.approx(estimate_mi(data, m=128).value, abs=1e-3)

    @pytest.mark.parametrize("field,value", [("m", 96), ("pad", -1.0), ("ecf_mode", "nufft"),
                                             ("floor", 0.0), ("clip_mode", "none")])
    def test_config_validation(self, field, value):
        with pytest.raises(ConfigError):
            EstimatorConfig(**{field: value})

    def test_too_small(self):
        with pytest.raises(InsufficientData):
            estimate_mi(np.arange(5.0), np.arange(5.0))

    def test_renormalize_mode_runs(self, rng):
        est = estimate_mi(correlated_normal(rng, 300, 0.5), clip_mode="renormalize")
        assert np.isfinite(est.value)

    def test_gaussian_calibration_small(self):
        spec = CopulaSpec("gaussian", 0.5)
        values = [estimate_mi(sample_copula(spec, 1000, seed=s)).value for s in range(40)]
        assert np.mean(values) == pytest.approx(GAUSS_MI_TAU_HALF, abs=0.05)


class TestStatisticalBehaviour:
    def test_independence_bias_band(self):
        spec = CopulaSpec("independence", 0.0)
        values = [estimate_mi(sample_copula(spec, 500, seed=s)).value for s in range(500)]
        assert -0.02 <= np.mean(values) <= 0.06

    @pytest.mark.parametrize("family", [
        "gaussian",
        # Measured over 1500 reps: +0.050 (se 0.002) at n=100, +0.061 (se 0.001)
        # at n=500. Smoothing of the lower-tail peak offsets the plug-in bias
        # at small n. MSE still falls strictly; see test_mse_shrinks_with_n.
        pytest.param("clayton", marks=pytest.mark.xfail(
            strict=True, reason="|bias| is larger at n=500 than at n=100 for Clayton")),
        "gumbel",
    ])
    def test_bias_shrinks_with_n(self, family):
        spec = CopulaSpec(family, 0.5)
        truth = true_mi(spec)
        bias = []
        for n in (100, 500, 2000):
            values = [estimate_mi(sample_copula(spec, n, seed=(n, s))).value for s in range(200)]
            bias.append(abs(np.mean(values) - truth))
        assert bias[0] > bias[1] > bias[2]

    @pytest.mark.parametrize("family", ["gaussian", "clayton", "gumbel"])
    def test_mse_shrinks_with_n(self, family):
        spec = CopulaSpec(family, 0.5)
        truth = true_mi(spec)
        mse = []
        for n in (100, 500, 2000):
            values = np.array([estimate_mi(sample_copula(spec, n, seed=(n, s))).value
                               for s in range(100)])
            mse.append(np.mean((values - truth) ** 2))
        assert mse[0] > mse[1] > mse[2]
