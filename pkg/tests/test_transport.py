import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freetransport.freesde import PotentialFamily, quadratic_family
from freetransport.matrep.ensemble import Ensemble
from freetransport.ncalg.potential import PotentialSpec
from freetransport.noise import gue, stream
from freetransport.transport import (
    TransportConfig,
    TransportError,
    adjoint_fd_pair,
    dg_eval,
    flow_transport,
    pushforward_check,
    semigroup_gradient,
)


def quartic_family():
    V = PotentialSpec.quartic([[0.5]], [[0]], [0], [[1, 0, 1]])
    return PotentialFamily(V.to_ncpoly(), "X1^4/4", V_spec=V, target_spec=PotentialSpec.one_var(1, 0, 1))


def test_adjoint_matches_finite_differences():
    Y = gue(stream(0, 0), (1,), 3)
    _, _, rel = adjoint_fd_pair(Y, quartic_family(), 0.4, 0.3, paths=3, dt=0.01, seed=1)
    assert rel < 1e-6


def test_adjoint_matches_finite_differences_two_letters():
    V = PotentialSpec.quartic([[0.5, 0], [0, 0.5]], [[1], [1]], [1], [[0, 0, 1]])
    fam = PotentialFamily(V.to_ncpoly(), "X1^2/4 + X2^2/4", V_spec=V)
    Y = gue(stream(0, 1), (2,), 2)
    _, _, rel = adjoint_fd_pair(Y, fam, 0.5, 0.2, paths=2, dt=0.02, seed=2)
    assert rel < 1e-6


@given(st.floats(1.2, 3.0), st.floats(0.0, 1.0))
@settings(max_examples=10)
def test_dg_closed_form_quadratic(c, alpha):
    fam = quadratic_family(c)
    Y = gue(stream(1, 0), (1,), 5)
    ca = 1 + alpha * (c - 1)
    exact = -(c - 1) / (2 * ca) * Y
    # Euler error is first order in dt; extrapolation removes it
    plain = dg_eval(Y, fam, alpha, TransportConfig(fam, T=20, dt=0.01)).value
    assert np.abs(plain - exact).max() < 3e-3 * np.abs(Y).max()
    rich = dg_eval(Y, fam, alpha, TransportConfig(fam, T=20, dt=0.01, richardson=True)).value
    assert np.abs(rich - exact).max() < 1e-4 * np.abs(Y).max()


def test_affine_reduction_matches_full_run():
    fam = quadratic_family(2.0)
    Y = np.stack([gue(stream(2, k), (1,), 6) for k in range(3)])
    a = dg_eval(Y, fam, 0.3, TransportConfig(fam, T=12, dt=0.01)).value
    b = dg_eval(Y, fam, 0.3, TransportConfig(fam, T=12, dt=0.01, reduce_affine=False)).value
    assert np.max(np.abs(a - b)) < 1e-10


def test_semigroup_gradient_modes_agree_without_noise():
    fam = quadratic_family(2.0)
    Y = gue(stream(3, 0), (1,), 3)
    adj = semigroup_gradient(Y, fam, 0.5, 0.5, paths=2, dt=0.01, noise=False).mean
    fd = semigroup_gradient(Y, fam, 0.5, 0.5, paths=2, dt=0.01, mode="fd", noise=False).mean
    assert np.allclose(adj, fd, atol=1e-6)


def test_quadratic_flow_rk4_graded():
    fam = quadratic_family(2.0)
    Y = np.stack([gue(stream(4, k), (1,), 8) for k in range(4)])
    cfg = TransportConfig(fam, T=20, dt=0.02, d_alpha=0.25, scheme="rk4", snapshots=[0.5, 1.0], sd_degree=2)
    res = flow_transport(Ensemble(Y), cfg)
    assert np.allclose(res.ensemble.samples, Y / np.sqrt(2), atol=2e-3)
    assert np.allclose(res.snapshots[0.5], Y / np.sqrt(1.5), atol=2e-3)
    assert [d.alpha for d in res.diagnostics] == pytest.approx([0, 0.25, 0.5, 0.75, 1.0])


def test_short_horizon_is_rejected_by_tail_bound():
    fam = quadratic_family(2.0)
    Y = gue(stream(5, 0), (1,), 4)
    with pytest.raises(TransportError):
        dg_eval(Y, fam, 0.0, TransportConfig(fam, T=0.5, dt=0.05))


def test_quartic_flow_is_reproducible_and_contracts():
    fam = quartic_family()
    ens = Ensemble(np.stack([gue(stream(6, k), (1,), 4) for k in range(2)]))
    cfg = TransportConfig(fam, T=3, dt=0.05, paths=2, d_alpha=0.5, alpha_max=0.5, tail_tol=1.0, seed=1, sd_degree=0)
    a, b = flow_transport(ens, cfg), flow_transport(ens, cfg)
    assert np.array_equal(a.ensemble.samples, b.ensemble.samples)
    assert a.ensemble.moments(2).mean() < ens.moments(2).mean()


def test_config_validation_and_grid():
    fam = quadratic_family(2.0)
    with pytest.raises(ValueError):
        TransportConfig(fam, paths=3)
    with pytest.raises(ValueError):
        TransportConfig(fam, scheme="euler")
    with pytest.raises(ValueError):
        TransportConfig(fam, T=1.0, dt=0.3).steps
    with pytest.raises(ValueError):
        TransportConfig(fam, d_alpha=0.3).alpha_grid()
    g = TransportConfig(fam, d_alpha=0.25, grid="graded", grid_power=2).alpha_grid()
    assert g == pytest.approx([0, 1 / 16, 1 / 4, 9 / 16, 1])
    cfg = TransportConfig(fam, d_alpha=0.5)
    assert TransportConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


def test_pushforward_check_on_gue():
    from freetransport.ncalg import quadratic
    from freetransport.sampler import gaussian_ensemble

    ens = gaussian_ensemble(16, 1, 50, seed=0)
    rep = pushforward_check(ens, quadratic(1), reference=gaussian_ensemble(16, 1, 50, seed=1))
    assert all(abs(r["mean"]) < 5 * r["stderr"] + 1e-12 for r in rep["sd"])
    assert all(abs(r["diff"]) < 5 * r["stderr"] + 1e-12 for r in rep["moments"])
