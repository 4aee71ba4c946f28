import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freetransport.matrep.ensemble import Ensemble
from freetransport.ncalg import quartic_1d
from freetransport.ncalg.potential import PotentialSpec
from freetransport.onevar import (
    EquilibriumError,
    GibbsDensity,
    GridFunc,
    as_polynomial,
    cdf_quantile,
    classical_transport_1d,
    equilibrium_measure,
    poisson_cn,
    poisson_velocity_direct,
    pv_residual,
    quantile_transport,
    quartic_endpoint,
    sd_quadrature_residual,
    spectral_ks,
)
from freetransport.sampler import gaussian_ensemble

SEMI = [0, 0, 0.5]
QUART = [0, 0, 0.5, 0, 0.25]


def catalan(k):
    return math.comb(2 * k, k) / (k + 1)


# equilibrium measures ------------------------------------------------------

def test_semicircle_support_and_moments():
    mu = equilibrium_measure(SEMI)
    assert (mu.a, mu.b) == pytest.approx((-2.0, 2.0), abs=1e-12)
    for k in range(1, 6):
        assert mu.moment(2 * k) == pytest.approx(catalan(k), rel=1e-12)
        assert abs(mu.moment(2 * k - 1)) < 1e-12


def test_semicircle_density_and_cdf():
    mu = equilibrium_measure(SEMI)
    x = np.linspace(-1.9, 1.9, 7)
    assert np.allclose(mu.density(x), np.sqrt(4 - x**2) / (2 * np.pi))
    assert mu.cdf(np.array([0.0]))[0] == pytest.approx(0.5, abs=1e-12)
    assert mu.cdf(np.array([mu.b]))[0] == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0.05, 5.0))
def test_pure_quartic_endpoint(t):
    mu = equilibrium_measure([0, 0, 0, 0, t / 4])
    assert mu.b == pytest.approx(quartic_endpoint(t), abs=1e-8)
    assert mu.a == pytest.approx(-mu.b, abs=1e-8)


@given(st.floats(0.1, 3.0), st.floats(0.0, 2.0), st.floats(-0.5, 0.5))
@settings(max_examples=25)
def test_sd_quadrature_residual_vanishes(a2, a4, a1):
    V = [0, a1, a2 / 2, 0, a4 / 4]
    mu = equilibrium_measure(V)
    for k in range(1, 7):
        assert abs(sd_quadrature_residual(mu, [0] * k + [1])) < 1e-9


def test_principal_value_balance_inside_support():
    mu = equilibrium_measure(QUART)
    x = np.linspace(mu.a, mu.b, 9)[1:-1]
    assert np.max(np.abs(pv_residual(mu, x))) < 1e-10


def test_two_cut_potential_rejected():
    with pytest.raises(EquilibriumError):
        equilibrium_measure([0, 0, -2.0, 0, 0.25])


def test_as_polynomial_inputs():
    ref = as_polynomial(QUART).coef
    assert np.allclose(as_polynomial(quartic_1d()).coef, ref)
    assert np.allclose(as_polynomial(PotentialSpec.one_var(1, 0, 1)).coef, ref)


def test_quantile_inverts_cdf():
    mu = equilibrium_measure(QUART)
    u = np.linspace(0.01, 0.99, 11)
    assert np.allclose(mu.cdf(cdf_quantile(mu, u)), u, atol=1e-10)
    with pytest.raises(ValueError):
        cdf_quantile(mu, [1.5])


def test_spectral_ks_gue_and_errors():
    mu = equilibrium_measure(SEMI)
    assert spectral_ks(gaussian_ensemble(64, 1, 20, seed=0), mu) < 0.05
    with pytest.raises(ValueError):
        spectral_ks(np.array([]), mu)
    with pytest.raises(ValueError):
        spectral_ks(Ensemble(np.zeros((1, 2, 2, 2))), mu)


# classical transport -------------------------------------------------------

def test_gridfunc_validation():
    with pytest.raises(ValueError):
        GridFunc([0.0, 1.0, 3.0], [0, 1, 2])
    with pytest.raises(ValueError):
        GridFunc([0.0, 1.0], [0.0])
    f = GridFunc(np.linspace(0, 1, 11), np.linspace(0, 1, 11) ** 2)
    assert f(0.55) == pytest.approx(0.3025, abs=1e-12)
    assert f.is_monotone()
    assert len(f.to_rows()) == 11


def test_gibbs_density_of_gaussian():
    g = GibbsDensity(SEMI)
    assert g.expect(lambda x: x**2) == pytest.approx(1.0, abs=1e-12)
    assert g.cdf(np.array([0.0]))[0] == pytest.approx(0.5, abs=1e-12)


@given(st.floats(1.2, 4.0))
@settings(max_examples=8)
def test_gaussian_quantile_map_is_linear(c):
    x = np.linspace(-3, 3, 61)
    T = quantile_transport(GibbsDensity(SEMI), GibbsDensity([0, 0, c / 2]), x)
    assert np.allclose(T.values, x / np.sqrt(c), atol=1e-9)


def test_poisson_cn_converges_to_direct_integration():
    # same equation (p g′)′ = p W̃ by two routes; the flux-form drift error is O(dx²)
    errs = []
    for dx in (0.01, 0.005):
        x = np.arange(-8, 8 + dx / 2, dx)
        sol = poisson_cn(SEMI, [0, 0, 0, 0, 0.25], 0.5, x)
        ref = poisson_velocity_direct(SEMI, [0, 0, 0, 0, 0.25], 0.5, x)
        errs.append(np.max(np.abs(sol.velocity - ref)[np.abs(x) < 3]))
        assert sol.tail_bound < 1e-6 * max(1.0, np.abs(sol.g).max())
    assert errs[0] < 5e-3
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_classical_gaussian_to_gaussian():
    x = np.linspace(-4, 4, 257)
    res = classical_transport_1d(SEMI, [0, 0, 0.5], x, alpha_steps=6)
    assert np.max(np.abs(res.F.values - x / np.sqrt(2))) < 2e-3
    assert res.F.is_monotone()


def test_classical_zero_perturbation_is_identity():
    x = np.linspace(-2, 2, 33)
    assert np.array_equal(classical_transport_1d(SEMI, [0.0], x).F.values, x)
