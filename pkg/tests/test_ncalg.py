from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from freetransport.matrep.evaluate import Evaluator, random_hermitian
from freetransport.ncalg import (
    DegreeError,
    NCPoly,
    TensorPoly,
    TracePoly,
    X,
    cyclic_grad,
    cyclic_gradient,
    cyclic_min,
    fdq,
    fdq_iter,
    generator,
    hessian,
    laplacian,
    one,
    parse_poly,
    quadratic,
    quartic_1d,
    rho,
    set_degree_limit,
    tau,
)
from freetransport.ncalg import serialize
from freetransport.ncalg.randpoly import random_ncpoly, random_self_adjoint, random_tracepoly

seeds = st.integers(0, 2**31 - 1)
letters = st.integers(1, 3)


# oracles -------------------------------------------------------------------

def test_fdq_of_square():
    x, o = X(0, 1), one(1)
    assert fdq(x * x, 0) == TensorPoly.tensor(o, x) + TensorPoly.tensor(x, o)


def test_fdq_other_letter_vanishes():
    x, y = X(0, 2), X(1, 2)
    assert fdq(x * x, 1).is_zero()
    assert fdq(x * y, 1) == TensorPoly.tensor(x, one(2))


def test_second_difference_quotient_differentiates_first_leg():
    x = X(0, 1)
    T = fdq_iter(x * x, [0, 0])
    assert T.legs == 3
    ((_, c),) = T.items()
    assert c == 1


def test_cyclic_gradient_cube():
    x = X(0, 1)
    assert cyclic_grad(x * x * x, 0) == (x * x).scale(3)


def test_cyclic_gradient_mixed_word():
    x, y = X(0, 2), X(1, 2)
    P = x * y * x
    assert cyclic_grad(P, 0) == x * y + y * x
    assert cyclic_grad(P, 1) == x * x


def test_laplacian_and_generator_of_square():
    x = X(0, 1)
    assert laplacian(x * x) == TracePoly.from_poly(one(1)).scale(2)
    # OU: L(X²) = 1 − X² for V = x²/2
    assert TracePoly.from_poly(generator(x * x, quadratic(1))) == TracePoly.from_poly(one(1) - x * x)


def test_quartic_hessian_kernel():
    x, o = X(0, 1), one(1)
    H = hessian(quartic_1d())[0][0]
    expect = TensorPoly.tensor(o, o) + TensorPoly.tensor(o, x * x) + TensorPoly.tensor(x, x) + TensorPoly.tensor(x * x, o)
    assert H == expect


def test_parse_poly_exact_coefficients():
    P = parse_poly("X1^2/2 + 3*X1*X2", 2)
    assert P == NCPoly({(0, 0): Fraction(1, 2), (0, 1): 3}, 2)


def test_parse_poly_rejects_unknown_symbol():
    with pytest.raises(ValueError):
        parse_poly("Y1^2", 1)


def test_letter_out_of_range():
    with pytest.raises(ValueError):
        X(2, 2)


def test_degree_limit_raises():
    old = set_degree_limit(3)
    try:
        with pytest.raises(DegreeError):
            X(0, 1) ** 4
    finally:
        set_degree_limit(old)


def test_trace_products_commute():
    x = X(0, 1)
    assert tau(x * x) * tau(x) == tau(x) * tau(x * x)


# properties ----------------------------------------------------------------

@given(seeds, letters)
def test_leibniz_rule(seed, n):
    rng = np.random.default_rng(seed)
    P, Q = random_ncpoly(rng, n, 3), random_ncpoly(rng, n, 3)
    o = one(n)
    for i in range(n):
        assert fdq(P * Q, i) == fdq(P, i) * TensorPoly.tensor(o, Q) + TensorPoly.tensor(P, o) * fdq(Q, i)


@given(seeds, letters)
def test_cyclic_gradient_is_cyclically_invariant(seed, n):
    rng = np.random.default_rng(seed)
    P, Q = random_ncpoly(rng, n, 3), random_ncpoly(rng, n, 3)
    for i in range(n):
        assert TracePoly.from_poly(cyclic_grad(P * Q, i)) == TracePoly.from_poly(cyclic_grad(Q * P, i))


@given(seeds, letters)
def test_hessian_rho_symmetry(seed, n):
    V = random_self_adjoint(np.random.default_rng(seed), n, 4)
    H = hessian(V)
    for i in range(n):
        for j in range(n):
            assert rho(H[i][j]) == H[j][i]


@given(seeds, letters)
def test_adjoint_is_involution(seed, n):
    P = random_ncpoly(np.random.default_rng(seed), n, 4)
    assert P.adjoint().adjoint() == P
    assert P.symmetrize().is_self_adjoint()


@given(seeds, letters)
def test_serialization_roundtrip(seed, n):
    rng = np.random.default_rng(seed)
    for P in (random_ncpoly(rng, n, 4), random_tracepoly(rng, n, 3)):
        assert serialize.loads(serialize.dumps(P)) == P


@given(st.lists(st.integers(0, 2), min_size=1, max_size=6), st.integers(0, 5))
def test_cyclic_min_rotation_invariant(word, k):
    w = tuple(word)
    k %= len(w)
    assert cyclic_min(w[k:] + w[:k]) == cyclic_min(w)
    assert cyclic_min(cyclic_min(w)) == cyclic_min(w)


@given(seeds, letters)
def test_cyclic_gradient_matches_directional_derivative(seed, n):
    """d/dε τ̂(V(X+εH)) = Σ τ̂(𝒟_iV(X) H_i) at matrix level."""
    rng = np.random.default_rng(seed)
    V = random_self_adjoint(rng, n, 4)
    Xm = random_hermitian(rng, (n,), 4)
    H = random_hermitian(rng, (n,), 4)
    eps = 1e-6
    tv = TracePoly.from_poly(V)
    f = lambda Y: np.trace(Evaluator(Y).poly(tv)) / 4
    fd = (f(Xm + eps * H) - f(Xm - eps * H)) / (2 * eps)
    ev = Evaluator(Xm)
    an = sum(np.trace(ev.poly(g) @ H[i]) / 4 for i, g in enumerate(cyclic_gradient(V)))
    assert abs(fd - an) <= 1e-6 * max(1.0, abs(an))
