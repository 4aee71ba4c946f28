import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freetransport.matrep import (
    Ensemble,
    Evaluator,
    HermBasis,
    HessianOperator,
    PotentialField,
    certify_convexity,
    hessian_min_eig,
    load_hmt1,
    moment_law_1d,
    monomial_battery,
    old_convexity_form_exact,
    random_hermitian,
    retr,
    sd_residual,
    sd_residual_law,
    tau_hat,
)
from freetransport.ncalg import X, parse_poly, quadratic, quartic_1d
from freetransport.ncalg.potential import PotentialSpec
from freetransport.noise import gue, stream
from freetransport.onevar import equilibrium_measure

seeds = st.integers(0, 2**31 - 1)


def catalan_moment(k):
    return 0.0 if k % 2 else math.comb(k, k // 2) / (k // 2 + 1)


def test_word_evaluation_matches_matmul():
    rng = np.random.default_rng(0)
    Xm = random_hermitian(rng, (2,), 5)
    P = parse_poly("X1*X2*X1 + 2*X2^2", 2)
    expect = Xm[0] @ Xm[1] @ Xm[0] + 2 * Xm[1] @ Xm[1]
    assert np.allclose(Evaluator(Xm).poly(P), expect)


def test_batched_evaluation_matches_loop():
    rng = np.random.default_rng(1)
    Xb = random_hermitian(rng, (3, 2), 4)
    P = parse_poly("X1^3 + X1*X2", 2)
    batched = Evaluator(Xb).poly(P)
    for b in range(3):
        assert np.allclose(batched[b], Evaluator(Xb[b]).poly(P))


def test_gradient_of_quartic():
    rng = np.random.default_rng(2)
    Xm = random_hermitian(rng, (1,), 6)
    G = PotentialField(quartic_1d()).grad(Xm)
    assert np.allclose(G[0], Xm[0] + Xm[0] @ Xm[0] @ Xm[0])


def test_energy_is_n_squared_normalized_trace():
    rng = np.random.default_rng(3)
    Xm = random_hermitian(rng, (1,), 5)
    e = PotentialField(quadratic(1)).energy(Xm)
    assert np.isclose(e, 5 * 0.5 * np.real(np.trace(Xm[0] @ Xm[0])))


def test_potential_field_rejects_non_self_adjoint():
    with pytest.raises(ValueError):
        PotentialField(parse_poly("X1*X2", 2))


@given(seeds)
def test_hess_apply_is_derivative_of_grad(seed):
    rng = np.random.default_rng(seed)
    Xm, L = random_hermitian(rng, (2,), 4), random_hermitian(rng, (2,), 4)
    F = PotentialField(parse_poly("X1^4/4 + X1*X2*X1*X2/4 + X2*X1*X2*X1/4 + X2^2", 2))
    eps = 1e-6
    fd = (F.grad(Xm + eps * L) - F.grad(Xm - eps * L)) / (2 * eps)
    assert np.allclose(F.hess_apply(Xm, L), fd, atol=1e-6)


@given(seeds)
def test_herm_basis_roundtrip_is_isometry(seed):
    rng = np.random.default_rng(seed)
    B = HermBasis(2, 3)
    H, K = random_hermitian(rng, (2,), 3), random_hermitian(rng, (2,), 3)
    assert np.allclose(B.from_vec(B.to_vec(H)), H)
    assert np.isclose(B.to_vec(H) @ B.to_vec(K), retr(H, K))


def test_quadratic_hessian_min_eig_equals_c():
    X0 = random_hermitian(np.random.default_rng(4), (2,), 3)
    assert hessian_min_eig(quadratic(2, 3), X0).value == pytest.approx(3.0, abs=1e-8)


def test_hessian_operator_is_symmetric():
    X0 = random_hermitian(np.random.default_rng(5), (1,), 4)
    assert HessianOperator(quartic_1d(), X0).symmetry_defect(np.random.default_rng(0)) < 1e-10


def test_quartic_hessian_bounded_below_by_certificate():
    spec = PotentialSpec.one_var(1, 0, 1)
    cert = certify_convexity(spec)
    assert cert.certified and cert.c == pytest.approx(1.0)
    rng = np.random.default_rng(6)
    for _ in range(3):
        assert hessian_min_eig(spec.to_ncpoly(), random_hermitian(rng, (1,), 4)).value >= cert.c - 1e-8


def test_certificate_rejections():
    assert not certify_convexity(PotentialSpec.one_var(1, 3, 1)).certified  # ν3² > 8ν2ν4/3
    assert not certify_convexity(PotentialSpec.one_var(1, 0, -1)).certified
    assert not certify_convexity(PotentialSpec.one_var(1, 0, 1, c_claim=2.0)).certified
    assert not certify_convexity(PotentialSpec.from_poly(quadratic(1))).certified


def test_counterexample_is_exact_and_negative():
    _, lo = old_convexity_form_exact()
    assert float(lo) == pytest.approx(-26.308587439901384, abs=1e-12)


def test_sd_law_residual_vanishes_for_semicircle():
    res = sd_residual_law(moment_law_1d(catalan_moment), quadratic(1), monomial_battery(1, 6))
    assert max(abs(r[2]) for r in res) < 1e-14


def test_sd_law_residual_vanishes_for_quartic_equilibrium():
    mu = equilibrium_measure([0, 0, 0.5, 0, 0.25])
    res = sd_residual_law(moment_law_1d(mu.moment), quartic_1d(), monomial_battery(1, 4))
    assert max(abs(r[2]) for r in res) < 1e-10


def test_sd_residual_on_gue_is_small():
    S = np.stack([gue(stream(0, k), (1,), 32) for k in range(40)])
    res = sd_residual(S, quadratic(1), monomial_battery(1, 4))
    assert all(abs(r.mean) < 4 * r.stderr + 1e-12 for r in res)


def test_sd_residual_rejects_empty():
    with pytest.raises(ValueError):
        sd_residual(np.zeros((0, 1, 2, 2)), quadratic(1), monomial_battery(1, 2))


def test_tau_hat_of_identity():
    assert np.isclose(tau_hat(np.eye(7)), 1.0)


def test_hmt1_roundtrip(tmp_path):
    ens = Ensemble(np.stack([gue(stream(1, k), (2,), 3) for k in range(4)]), {"note": "x"})
    p = tmp_path / "e.hmt1"
    ens.save(p)
    back = load_hmt1(p)
    assert np.array_equal(back.samples, ens.samples)
    assert back.meta == {"note": "x"}


def test_hmt1_rejects_corrupt(tmp_path):
    p = tmp_path / "bad.hmt1"
    p.write_bytes(b"xx")
    with pytest.raises(ValueError):
        load_hmt1(p)
    ens = Ensemble(np.stack([gue(stream(1, 0), (1,), 3)]))
    ens.save(p)
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError):
        load_hmt1(p)


def test_ensemble_shape_validation():
    with pytest.raises(ValueError):
        Ensemble(np.zeros((2, 3, 3)))


def test_moments_of_identity_ensemble():
    ens = Ensemble(np.stack([np.eye(3)[None]] * 2))
    assert np.allclose(ens.moments(4), 1.0)
    assert ens.spectrum().shape == (6,)


def test_letter_count_mismatch():
    with pytest.raises(ValueError):
        Evaluator(random_hermitian(np.random.default_rng(0), (1,), 3)).poly(X(1, 2))
