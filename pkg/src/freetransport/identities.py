"""Randomized verification of the calculus identities.

Each identity draws a random rational instance, builds both sides
symbolically and compares them exactly (canonical forms), then evaluates
both sides on random Hermitian tuples as an independent numeric check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from .matrep.evaluate import Evaluator, eval_tensor_elementary, random_hermitian
from .ncalg import calculus as C
from .ncalg.polys import NCPoly, TensorPoly, TracePoly
from .ncalg.randpoly import random_ncpoly, random_self_adjoint, random_tracepoly


@dataclass
class IdentityResult:
    name: str
    trials: int = 0
    symbolic_ok: int = 0
    numeric_ok: int = 0
    max_numeric_err: float = 0.0
    seconds: float = 0.0
    failures: List[str] = field(default_factory=list)
    eval_only: bool = False

    @property
    def passed(self) -> bool:
        # for the commutation identities a symbolic mismatch that evaluates to
        # zero is accepted; everywhere else both checks must hold
        symbolic = self.eval_only or self.symbolic_ok == self.trials
        return symbolic and self.numeric_ok == self.trials and not self.failures

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "symbolic_ok": self.symbolic_ok,
            "numeric_ok": self.numeric_ok,
            "max_numeric_err": self.max_numeric_err,
            "seconds": round(self.seconds, 3),
            "eval_only": self.eval_only,
            "passed": self.passed,
            "failures": self.failures[:5],
        }


def _numeric(obj, ev: Evaluator, probes) -> np.ndarray:
    if isinstance(obj, TensorPoly):
        if obj.legs == 2:
            return ev.tensor_apply(obj, probes[0])
        return eval_tensor_elementary(obj, ev.X, probes[: obj.legs - 1])
    if isinstance(obj, list):
        return np.stack([_numeric(o, ev, probes) for o in obj])
    return ev.poly(obj)


def _sym_equal(a, b) -> bool:
    if isinstance(a, list):
        return all(_sym_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, NCPoly) and isinstance(b, TracePoly) or isinstance(a, TracePoly) and isinstance(b, NCPoly):
        return TracePoly.from_poly(a) == TracePoly.from_poly(b)
    return a == b


# each builder returns (lhs, rhs, n)


def _derivation(rng, n, deg):
    P, Q = random_ncpoly(rng, n, deg // 2 + 1), random_ncpoly(rng, n, deg // 2 + 1)
    i = int(rng.integers(n))
    one = NCPoly.constant(1, n)
    lhs = C.fdq(P * Q, i)
    rhs = C.fdq(P, i) * TensorPoly.tensor(one, Q) + TensorPoly.tensor(P, one) * C.fdq(Q, i)
    return lhs, rhs, n


def _flip(rng, n, deg):
    P, Q = random_ncpoly(rng, n, deg), random_ncpoly(rng, n, deg)
    i = int(rng.integers(n))
    return C.hash_op(C.rho(C.fdq(P, i)), Q), C.cyclic_grad(P, i, Q), n


def _cyclic_derivation(rng, n, deg):
    P, Q = random_ncpoly(rng, n, deg // 2 + 1), random_ncpoly(rng, n, deg // 2 + 1)
    d = random_ncpoly(rng, n, 2)
    i = int(rng.integers(n))
    lhs = C.cyclic_grad(P * Q, i, d)
    rhs = C.cyclic_grad(P, i, Q * d) + C.cyclic_grad(Q, i, d * P)
    return lhs, rhs, n


def _comm_ddelta(rng, n, deg):
    # low degrees make both sides vanish, so bias towards degree ≥ 3
    P = random_tracepoly(rng, n, max(deg, 3), terms=5)
    i = int(rng.integers(n))
    return C.cyclic_grad(C.flat_total(P), i), C.flat_total(C.cyclic_grad(P, i)), n


def _derivcyclic(rng, n, deg):
    g = random_tracepoly(rng, n, deg)
    V = random_self_adjoint(rng, n, 4)
    i = int(rng.integers(n))
    lhs = C.cyclic_grad(C.total_V(g, V), i)
    rhs = TracePoly.from_poly(C.total_V(C.cyclic_grad(g, i), V))
    for j in range(n):
        rhs = rhs - TracePoly.from_poly(C.cyclic_grad(C.cyclic_grad(V, j), i, C.cyclic_grad(g, j)))
    return lhs, rhs, n


def _hessian_symmetry(rng, n, deg):
    V = random_self_adjoint(rng, n, deg)
    H = C.hessian(V)
    lhs = [H[i][j] for i in range(n) for j in range(n)]
    rhs = [C.rho(H[j][i]) for i in range(n) for j in range(n)]
    return lhs, rhs, n


def _random_subst(rng, n, deg):
    return [random_ncpoly(rng, n, max(1, deg // 2), terms=3) for _ in range(n)]


def _chain_order1(rng, n, deg):
    P = random_ncpoly(rng, n, 3)
    Qs = _random_subst(rng, n, deg)
    j = int(rng.integers(n))
    lhs = C.fdq(C.compose(P, Qs), j)
    rhs = TensorPoly.zero(n, 2)
    for k in range(n):
        rhs = rhs + C.sharp(C.compose_tensor(C.fdq(P, k), Qs), C.fdq(Qs[k], j), 0)
    return lhs, rhs, n


def _chain_order2(rng, n, deg):
    P = random_ncpoly(rng, n, 3)
    Qs = _random_subst(rng, n, deg)
    j1, j2 = (int(x) for x in rng.integers(n, size=2))
    lhs = C.fdq_iter(C.compose(P, Qs), (j1, j2))
    rhs = TensorPoly.zero(n, 3)
    for k in range(n):
        rhs = rhs + C.sharp(C.compose_tensor(C.fdq(P, k), Qs), C.fdq_iter(Qs[k], (j1, j2)), 0)
        for m in range(n):
            U = C.compose_tensor(C.fdq_iter(P, (k, m)), Qs)
            rhs = rhs + C.sharp_multi(U, [C.fdq(Qs[k], j1), C.fdq(Qs[m], j2)])
    return lhs, rhs, n


def _chain_cyclic(rng, n, deg):
    P = random_ncpoly(rng, n, 3)
    Qs = _random_subst(rng, n, deg)
    d = random_ncpoly(rng, n, 2)
    i = int(rng.integers(n))
    lhs = C.cyclic_grad(C.compose(P, Qs), i, d)
    rhs = NCPoly({}, n)
    for j in range(n):
        rhs = rhs + C.cyclic_grad(Qs[j], i, C.cyclic_grad_subst(P, j, d, Qs))
    return lhs, rhs, n


def _adjoint_compat(rng, n, deg):
    P = random_ncpoly(rng, n, deg)
    i = int(rng.integers(n))
    return C.fdq(P.adjoint(), i), C.fdq(P, i).adjoint_reversed(), n


# identities whose symbolic sides may differ by trace cyclicity alone
EVAL_ONLY = {"commutation_flat_laplacian", "commutation_generator"}

IDENTITIES: Dict[str, Callable] = {
    "derivation": _derivation,
    "flip": _flip,
    "cyclic_derivation": _cyclic_derivation,
    "commutation_flat_laplacian": _comm_ddelta,
    "commutation_generator": _derivcyclic,
    "hessian_symmetry": _hessian_symmetry,
    "chain_rule_order1": _chain_order1,
    "chain_rule_order2": _chain_order2,
    "chain_rule_cyclic": _chain_cyclic,
    "adjoint_compatibility": _adjoint_compat,
}


def check_identity(
    name: str,
    trials: int = 200,
    max_n: int = 3,
    max_deg: int = 5,
    seed: int = 0,
    N: int = 5,
    tuples: int = 20,
    tol: float = 1e-9,
) -> IdentityResult:
    builder = IDENTITIES[name]
    rng = np.random.default_rng([seed, sum(map(ord, name))])
    res = IdentityResult(name, eval_only=name in EVAL_ONLY)
    t0 = time.perf_counter()
    for t in range(trials):
        n = int(rng.integers(1, max_n + 1))
        deg = int(rng.integers(1, max_deg + 1))
        lhs, rhs, n = builder(rng, n, deg)
        res.trials += 1
        if _sym_equal(lhs, rhs):
            res.symbolic_ok += 1
        X = random_hermitian(rng, (tuples, n), N)
        probes = [random_hermitian(rng, (tuples,), N) for _ in range(3)]
        ev = Evaluator(X)
        a, b = _numeric(lhs, ev, probes), _numeric(rhs, ev, probes)
        scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
        err = float(np.max(np.abs(a - b))) / scale if a.size else 0.0
        res.max_numeric_err = max(res.max_numeric_err, err)
        if err <= tol:
            res.numeric_ok += 1
        else:
            res.failures.append(f"trial {t}: numeric error {err:.2e}; lhs={lhs} rhs={rhs}")
    res.seconds = time.perf_counter() - t0
    return res


def check_all(trials: int = 200, max_n: int = 3, max_deg: int = 5, seed: int = 0, names=None) -> List[IdentityResult]:
    return [check_identity(k, trials, max_n, max_deg, seed) for k in (names or IDENTITIES)]
