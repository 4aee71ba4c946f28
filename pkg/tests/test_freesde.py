import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freetransport.freesde import (
    BlowupError,
    PotentialFamily,
    brownian_increment,
    coupled_contraction,
    generator_check,
    ito_residual,
    ito_residual_mc,
    quadratic_family,
    sde_path,
    semigroup_eval,
)
from freetransport.matrep.evaluate import random_hermitian
from freetransport.ncalg import X
from freetransport.ncalg.potential import PotentialSpec
from freetransport.noise import gue, stream

QUARTIC = PotentialSpec.one_var(1, 0, 1)


def quartic_family():
    return PotentialFamily(QUARTIC.to_ncpoly(), "0", V_spec=QUARTIC)


def test_increment_variance():
    dS = brownian_increment(8, 0.3, np.random.default_rng(0), (4000,))
    tr = np.einsum("bij,bji->b", dS, dS).real / 8
    assert tr.mean() == pytest.approx(0.3, rel=0.02)
    with pytest.raises(ValueError):
        brownian_increment(2, -1.0, np.random.default_rng(0))


@given(st.floats(0.5, 4.0), st.integers(1, 40))
def test_zero_noise_quadratic_path_is_geometric(c, K):
    fam = quadratic_family(c)
    X0 = random_hermitian(np.random.default_rng(K), (1,), 3)
    dt = 0.01
    path = sde_path(X0, fam, 1.0, K * dt, dt, np.random.default_rng(0), noise_scale=0)
    assert np.allclose(path.final, (1 - c * dt / 2) ** K * X0)


def test_path_replays_noise():
    fam = quartic_family()
    X0 = gue(stream(0, 0), (1,), 4)
    a = sde_path(X0, fam, 0.0, 0.2, 0.01, np.random.default_rng(1), keep_noise=True)
    b = sde_path(X0, fam, 0.0, 0.2, 0.01, None, noise=a.noise)
    assert np.array_equal(a.states, b.states)


def test_grid_must_divide():
    with pytest.raises(ValueError):
        sde_path(gue(stream(0, 0), (1,), 2), quartic_family(), 0.0, 0.25, 0.1, np.random.default_rng(0))


def test_blowup_detected():
    X0 = 3 * gue(stream(0, 1), (1,), 4)
    with pytest.warns(UserWarning):
        with pytest.raises(BlowupError):
            sde_path(X0, quartic_family(), 0.0, 5.0, 0.5, np.random.default_rng(0))


def test_quadratic_contraction_rate():
    X0, Y0 = gue(stream(2, 0), (1,), 8), gue(stream(2, 1), (1,), 8)
    c = coupled_contraction(X0, Y0, quadratic_family(2.0), 1.0, 2.0, 1e-3, seed=0)
    assert c.slope_fro == pytest.approx(-1.0, rel=1e-3)
    assert np.all(np.diff(c.dist_fro) < 0)


def test_ou_semigroup_small():
    N = 6
    X0 = gue(stream(3, 0), (1,), N)
    est = semigroup_eval(X(0, 1) * X(0, 1), X0, quadratic_family(1.0), 0.0, [0.5, 1.0], 4000, 0.05, seed=1, richardson=True)
    for j, t in enumerate([0.5, 1.0]):
        exact = np.exp(-t) * X0[0] @ X0[0] + (1 - np.exp(-t)) * np.eye(N)
        z = np.abs(est.mean[j] - exact) / np.maximum(est.stderr[j], 1e-12)
        assert np.max(z) < 5
    rows = est.to_rows()
    assert [r["t"] for r in rows] == [0.5, 1.0]


def test_semigroup_of_constant_is_constant():
    X0 = gue(stream(4, 0), (1,), 3)
    from freetransport.ncalg import one

    est = semigroup_eval(one(1), X0, quartic_family(), 0.0, [0.3], 10, 0.05, seed=0)
    assert np.allclose(est.mean[0], np.eye(3))


def test_generator_check_at_small_time():
    X0 = gue(stream(5, 0), (1,), 4)
    r = generator_check(X(0, 1) * X(0, 1), X0, quadratic_family(1.0), 0.0, 0.02, paths=4000, seed=2)
    assert r["gap"] < 5 * r["mc_error"] + 0.05


def test_ito_residual_on_stored_paths_is_centered():
    fam = quadratic_family(1.0)
    X0 = np.broadcast_to(gue(stream(6, 0), (1,), 6), (400, 1, 6, 6)).copy()
    path = sde_path(X0, fam, 0.0, 0.5, 0.01, np.random.default_rng(3))
    M = ito_residual(X(0, 1) * X(0, 1), path).M[-1]
    tr = np.real(np.einsum("...ii->...", M)) / 6
    assert abs(tr.mean()) < 4 * tr.std() / np.sqrt(len(tr)) + 1e-3


def test_ito_residual_mc_rows():
    X0 = gue(stream(7, 0), (1,), 8)
    rows = ito_residual_mc(X(0, 1) * X(0, 1), X0, quadratic_family(1.0), 0.0, [0.5], 200, 0.05, [np.eye(8)], seed=0)
    assert rows["mean"].shape == (1, 1)
    assert abs(rows["mean"][0, 0]) < 4 * rows["stderr"][0, 0]


def test_family_helpers():
    fam = quadratic_family(3.0)
    assert fam.is_affine_drift()
    assert fam.c_alpha(0.5) == pytest.approx(2.0)
    back = PotentialFamily.from_dict(fam.to_dict())
    assert back.V == fam.V and back.W == fam.W
    assert not PotentialFamily(QUARTIC.to_ncpoly(), "0").is_affine_drift()


def test_family_rejects_non_self_adjoint():
    with pytest.raises(ValueError):
        PotentialFamily(QUARTIC.to_ncpoly().with_n(2), "X1*X2")
