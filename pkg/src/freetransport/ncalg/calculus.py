"""Free difference quotients, cyclic gradients, Laplacians and generators.

Every operator accepts ``NCPoly`` or ``TracePoly``.  Trace factors are
scalars: the free difference quotient ignores them, the cyclic gradient and
``delta`` operators differentiate under them.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Sequence

from .polys import (
    NCPoly,
    TensorPoly,
    TracePoly,
    Traces,
    merge_traces,
    norm_traces,
    tau,
)
from .words import EMPTY, Word

HALF = Fraction(1, 2)


def _tp(P) -> TracePoly:
    return TracePoly.from_poly(P)


def _plain_out(tp: TracePoly, *inputs):
    """Return an NCPoly when every input was plain and the result is plain."""
    if all(isinstance(x, NCPoly) or x is None for x in inputs) and tp.is_plain():
        return tp.to_ncpoly()
    return tp


def _acc(out: Dict, key, c) -> None:
    out[key] = out.get(key, 0) + c


def _check_letter(P, i: int) -> None:
    if not 0 <= i < P.n:
        raise ValueError(f"letter index {i} outside 0..{P.n - 1}")


def fdq(P, i: int) -> TensorPoly:
    """Free difference quotient ∂_i, valued in two-leg tensors."""
    _check_letter(P, i)
    out: Dict = {}
    for (w, t), c in _tp(P).items():
        for pos, letter in enumerate(w):
            if letter == i:
                _acc(out, ((w[:pos], w[pos + 1:]), t), c)
    return TensorPoly._raw(out, P.n, 2)


def _fdq_first_leg(T: TensorPoly, i: int) -> TensorPoly:
    out: Dict = {}
    for (ws, t), c in T.items():
        w = ws[0]
        for pos, letter in enumerate(w):
            if letter == i:
                _acc(out, ((w[:pos], w[pos + 1:]) + ws[1:], t), c)
    return TensorPoly._raw(out, T.n, T.legs + 1)


def fdq_iter(P, idx: Sequence[int]) -> TensorPoly:
    """∂^k_{(i1..ik)} = (∂_{i1}⊗1^{k-1})∘...∘∂_{ik}."""
    if not idx:
        raise ValueError("need at least one index")
    for i in idx:
        _check_letter(P, i)
    T = fdq(P, idx[-1])
    for i in reversed(idx[:-1]):
        T = _fdq_first_leg(T, i)
    return T


def rho(T: TensorPoly) -> TensorPoly:
    """Cyclic rotation of legs: b0⊗...⊗bp ↦ bp⊗b0⊗...⊗b(p-1)."""
    out = {((ws[-1],) + ws[:-1], t): c for (ws, t), c in T.items()}
    return TensorPoly._raw(out, T.n, T.legs)


def _legs_items(H):
    if isinstance(H, TensorPoly):
        return H.items()
    return [(((b,), t), c) for (b, t), c in _tp(H).items()]


def sharp(T: TensorPoly, H, leg: int = 0):
    """Insert ``H`` between legs ``leg`` and ``leg+1`` of ``T``.

    For two-leg ``T`` and a polynomial ``H`` this is (a⊗b)#H = aHb.  For an
    m-leg tensor H = h1⊗...⊗hm it is the canonical extension
    a_i h1 ⊗ h2 ⊗ ... ⊗ hm a_{i+1}.
    """
    if not 0 <= leg < T.legs - 1:
        raise ValueError(f"leg {leg} out of range for a {T.legs}-leg tensor")
    if H.n != T.n:
        raise ValueError("letter count mismatch")
    out: Dict = {}
    h_legs = H.legs if isinstance(H, TensorPoly) else 1
    for (ws, t), c in T.items():
        for (hs, th), d in _legs_items(H):
            if len(hs) == 1:
                mid = (ws[leg] + hs[0] + ws[leg + 1],)
            else:
                mid = (ws[leg] + hs[0],) + hs[1:-1] + (hs[-1] + ws[leg + 1],)
            _acc(out, (ws[:leg] + mid + ws[leg + 2:], merge_traces(t, th)), c * d)
    legs = T.legs + h_legs - 2
    if legs >= 2:
        return TensorPoly._raw(out, T.n, legs)
    tp = TracePoly._raw({(ws[0], t): c for (ws, t), c in out.items()}, T.n)
    if T.is_plain() and not isinstance(H, TracePoly) and tp.is_plain():
        return tp.to_ncpoly()
    return tp


def hash_op(T: TensorPoly, h):
    """The # contraction (a⊗b)#h = a·h·b."""
    if T.legs != 2:
        raise ValueError("hash_op expects a two-leg tensor; use sharp for higher legs")
    return sharp(T, h, 0)


def sharp_multi(U: TensorPoly, Vs: Sequence):
    """U#(V1,...,Vk): insert Vj at position j, right to left so indices stay valid."""
    if len(Vs) != U.legs - 1:
        raise ValueError(f"{U.legs}-leg tensor takes {U.legs - 1} insertions")
    out = U
    for j in reversed(range(len(Vs))):
        out = sharp(out, Vs[j], j)
    return out


def tau_legs(T: TensorPoly) -> TracePoly:
    """τ⊗...⊗τ applied leg-wise, a scalar trace polynomial."""
    out: Dict = {}
    for (ws, t), c in T.items():
        _acc(out, (EMPTY, merge_traces(t, norm_traces(ws))), c)
    return TracePoly._raw(out, T.n)


def _rotations_at(u: Word, i: int):
    """Words b·a for every split u = a X_i b."""
    return [u[pos + 1:] + u[:pos] for pos, letter in enumerate(u) if letter == i]


def cyclic_grad(P, i: int, weight=None):
    """Weighted cyclic gradient 𝒟_{i,p}.

    On a term w·∏τ(u_k): the base contributes Σ_{w=aX_ib} b·p·a·∏τ(u_k) and
    each trace factor contributes τ(p·w)·∏_{l≠k}τ(u_l)·𝒟_i(u_k).
    """
    _check_letter(P, i)
    p = _tp(weight) if weight is not None else TracePoly.scalar(1, P.n)
    if p.n != P.n:
        raise ValueError("weight letter count mismatch")
    out: Dict = {}
    pitems = list(p.items())
    for (w, t), c in _tp(P).items():
        for pos, letter in enumerate(w):
            if letter != i:
                continue
            a, b = w[:pos], w[pos + 1:]
            for (pb, pt), pc in pitems:
                _acc(out, (b + pb + a, merge_traces(t, pt)), c * pc)
        for k, u in enumerate(t):
            du = _rotations_at(u, i)
            if not du:
                continue
            rest = t[:k] + t[k + 1:]
            for (pb, pt), pc in pitems:
                tr = merge_traces(rest, merge_traces(pt, norm_traces([pb + w])))
                for ba in du:
                    _acc(out, (ba, tr), c * pc)
    return _plain_out(TracePoly._raw(out, P.n), P, weight)


def cyclic_gradient(V) -> List:
    """The tuple (𝒟_1 V, ..., 𝒟_n V)."""
    return [cyclic_grad(V, i) for i in range(V.n)]


def _pairs(w: Word):
    for q in range(len(w)):
        for p in range(q):
            if w[p] == w[q]:
                yield p, q


def laplacian(P) -> TracePoly:
    """Flat Laplacian Δ = 2 Σ_i m∘(1⊗τ⊗1)(∂_i⊗1)∂_i on the base word."""
    out: Dict = {}
    for (w, t), c in _tp(P).items():
        for p, q in _pairs(w):
            _acc(out, (w[:p] + w[q + 1:], merge_traces(t, norm_traces([w[p + 1:q]]))), 2 * c)
    return TracePoly._raw(out, P.n)


def _tau_laplacian_word(u: Word):
    """τ(Δ u) for a plain word, as a list of (traces, coeff)."""
    res = []
    for p, q in _pairs(u):
        res.append((norm_traces([u[:p] + u[q + 1:], u[p + 1:q]]), 2))
    return res


def delta_flat(P) -> TracePoly:
    """δ_Δ: derivation vanishing on plain polynomials, δ_Δ(τ(u)) = τ(Δu)."""
    out: Dict = {}
    for (w, t), c in _tp(P).items():
        for k, u in enumerate(t):
            rest = t[:k] + t[k + 1:]
            for tr, m in _tau_laplacian_word(u):
                _acc(out, (w, merge_traces(rest, tr)), m * c)
    return TracePoly._raw(out, P.n)


def _grad_V(V) -> List[NCPoly]:
    if not isinstance(V, NCPoly):
        raise TypeError("potential must be a plain NCPoly")
    return [cyclic_grad(V, i) for i in range(V.n)]


def _drift_word(w: Word, DV: Sequence[NCPoly]):
    """Σ_i ∂_i(w)#𝒟_iV as (word, coeff) pairs."""
    res = []
    for pos, letter in enumerate(w):
        for v, cv in DV[letter].items():
            res.append((w[:pos] + v + w[pos + 1:], cv))
    return res


def laplacian_V(P, V) -> TracePoly:
    """Δ_V(P) = Δ(P) − Σ_i ∂_i(P)#𝒟_iV, acting on the base word."""
    if V.n != P.n:
        raise ValueError("letter count mismatch")
    DV = _grad_V(V)
    out: Dict = dict(laplacian(P).items())
    for (w, t), c in _tp(P).items():
        for v, cv in _drift_word(w, DV):
            _acc(out, (v, t), -c * cv)
    return TracePoly._raw(out, P.n)


def delta_V(P, V) -> TracePoly:
    """δ_V: derivation vanishing on plain polynomials, δ_V(τ(u)) = τ(Δ_V u)."""
    if V.n != P.n:
        raise ValueError("letter count mismatch")
    DV = _grad_V(V)
    out: Dict = {}
    for (w, t), c in _tp(P).items():
        for k, u in enumerate(t):
            rest = t[:k] + t[k + 1:]
            for tr, m in _tau_laplacian_word(u):
                _acc(out, (w, merge_traces(rest, tr)), m * c)
            for v, cv in _drift_word(u, DV):
                _acc(out, (w, merge_traces(rest, norm_traces([v]))), -c * cv)
    return TracePoly._raw(out, P.n)


def flat_total(P) -> TracePoly:
    """(Δ + δ_Δ)(P)."""
    return laplacian(P) + delta_flat(P)


def total_V(P, V) -> TracePoly:
    """(Δ_V + δ_V)(P)."""
    return laplacian_V(P, V) + delta_V(P, V)


def generator(P, V) -> TracePoly:
    """L = ½(Δ_V + δ_V), the generator of the free diffusion with potential V."""
    return total_V(P, V).scale(HALF)


def directional(P, H_offset: int | None = None) -> TracePoly:
    """Directional derivative D_H(P) = Σ_j ∂_j(P)#H_j, also under traces.

    The directions H_1..H_n are fresh letters ``n..2n-1``; the result lives
    over the doubled alphabet.
    """
    n = P.n
    off = n if H_offset is None else H_offset
    if off < n:
        raise ValueError("direction letters collide with variable letters")
    out: Dict = {}
    for (w, t), c in _tp(P).items():
        for pos, letter in enumerate(w):
            if letter < n:
                _acc(out, (w[:pos] + (off + letter,) + w[pos + 1:], t), c)
        for k, u in enumerate(t):
            rest = t[:k] + t[k + 1:]
            for pos, letter in enumerate(u):
                if letter < n:
                    hu = u[:pos] + (off + letter,) + u[pos + 1:]
                    _acc(out, (w, merge_traces(rest, norm_traces([hu]))), c)
    return TracePoly(out, off + n)


class _Substitution:
    """Memoized evaluation of words under X_i ↦ Q_i."""

    def __init__(self, Qs: Sequence):
        if not Qs:
            raise ValueError("empty substitution")
        self.Qs = [_tp(Q) for Q in Qs]
        self.m = self.Qs[0].n
        if any(Q.n != self.m for Q in self.Qs):
            raise ValueError("substituted polynomials must share a letter count")
        self.plain = all(isinstance(Q, NCPoly) for Q in Qs)
        self._memo: Dict[Word, TracePoly] = {EMPTY: TracePoly.scalar(1, self.m)}

    def word(self, w: Word) -> TracePoly:
        got = self._memo.get(w)
        if got is None:
            got = self.word(w[:-1]) * self.Qs[w[-1]]
            self._memo[w] = got
        return got


def compose(P, Qs: Sequence):
    """Substitution P(Q_1, ..., Q_n)."""
    if len(Qs) != P.n:
        raise ValueError(f"need {P.n} substitutions, got {len(Qs)}")
    sub = _Substitution(Qs)
    acc = TracePoly.scalar(0, sub.m)
    for (w, t), c in _tp(P).items():
        term = sub.word(w).scale(c)
        for u in t:
            term = term * tau(sub.word(u))
        acc = acc + term
    if isinstance(P, NCPoly) and sub.plain:
        return acc.to_ncpoly()
    return acc


def compose_tensor(T: TensorPoly, Qs: Sequence) -> TensorPoly:
    """Leg-wise substitution T(Q)."""
    if len(Qs) != T.n:
        raise ValueError(f"need {T.n} substitutions, got {len(Qs)}")
    sub = _Substitution(Qs)
    acc = TensorPoly.zero(sub.m, T.legs)
    for (ws, t), c in T.items():
        term = TensorPoly.tensor(*(sub.word(w) for w in ws)).scale(c)
        if t:
            s = TracePoly.scalar(1, sub.m)
            for u in t:
                s = s * tau(sub.word(u))
            term = _tensor_times_scalar(term, s)
        acc = acc + term
    return acc


def _tensor_times_scalar(T: TensorPoly, s: TracePoly) -> TensorPoly:
    if not s.is_scalar():
        raise ValueError("expected a scalar trace polynomial")
    out: Dict = {}
    for (ws, t), c in T.items():
        for (_, st), sc in s.items():
            _acc(out, (ws, merge_traces(t, st)), c * sc)
    return TensorPoly._raw(out, T.n, T.legs)


def cyclic_grad_subst(P: NCPoly, j: int, d, Qs: Sequence) -> NCPoly:
    """𝒟_{Q_j, d}(P): Σ_{P = a X_j b} b(Q)·d·a(Q), the weight is not substituted."""
    _check_letter(P, j)
    sub = _Substitution(Qs)
    dd = _tp(d)
    acc = TracePoly.scalar(0, sub.m)
    for (w, t), c in _tp(P).items():
        if t:
            raise ValueError("substituted cyclic gradient is defined for plain polynomials")
        for pos, letter in enumerate(w):
            if letter == j:
                acc = acc + (sub.word(w[pos + 1:]) * dd * sub.word(w[:pos])).scale(c)
    return _plain_out(acc, P, d) if sub.plain else acc


def hessian(V) -> List[List[TensorPoly]]:
    """H[i][j] = ∂_i 𝒟_j V."""
    DV = _grad_V(V)
    return [[fdq(DV[j], i) for j in range(V.n)] for i in range(V.n)]


def sd_residual_expr(P, V, i: int) -> TracePoly:
    """τ⊗τ(∂_i P) − τ(P·𝒟_i V), a scalar trace polynomial."""
    _check_letter(P, i)
    DV = _grad_V(V)
    return tau_legs(fdq(P, i)) - tau(_tp(P) * DV[i])
