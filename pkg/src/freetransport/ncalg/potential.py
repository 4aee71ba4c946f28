"""Potentials: generic self-adjoint polynomials or the structured quartic family.

The structured family is

    V = Σ_j μ_j υ_j(Σ_i λ_ij X_i) + Σ_ij A_ij X_i X_j,
    υ_j(x) = ν_j2 x²/2 + ν_j3 x³/3 + ν_j4 x⁴/4.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import sympy

from . import serialize
from .polys import NCPoly


def exact(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float literal."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a number")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {x!r} to a rational")


def _matrix(rows, shape=None) -> Tuple[Tuple[Fraction, ...], ...]:
    out = tuple(tuple(exact(v) for v in row) for row in rows)
    if shape is not None and (len(out) != shape[0] or any(len(r) != shape[1] for r in out)):
        raise ValueError(f"expected a {shape[0]}x{shape[1]} array")
    return out


def parse_poly(text: str, n: int) -> NCPoly:
    """Parse e.g. ``"1/2*X1**2 + 1/4*X1^4 - X1*X2"`` into an NCPoly."""
    syms = sympy.symbols(f"X1:{n + 1}", commutative=False)
    local = {f"X{i + 1}": s for i, s in enumerate(syms)}
    expr = sympy.expand(sympy.sympify(text.replace("^", "**"), locals=local, rational=True))
    index = {s: i for i, s in enumerate(syms)}
    terms = {}
    for term in sympy.Add.make_args(expr):
        coeff, factors = term.args_cnc()
        c = sympy.Mul(*coeff)
        if not c.is_Rational:
            raise ValueError(f"non-rational coefficient {c} in {text!r}")
        word = []
        for f in factors:
            base, k = (f.base, int(f.exp)) if f.is_Pow else (f, 1)
            if base not in index:
                raise ValueError(f"unknown symbol {base} in {text!r}")
            word.extend([index[base]] * k)
        key = tuple(word)
        terms[key] = terms.get(key, 0) + Fraction(int(c.p), int(c.q))
    return NCPoly(terms, n)


@dataclass(frozen=True)
class PotentialSpec:
    kind: str
    n: int
    poly: Optional[NCPoly] = None
    A: Tuple[Tuple[Fraction, ...], ...] = ()
    lam: Tuple[Tuple[Fraction, ...], ...] = ()
    mu: Tuple[Fraction, ...] = ()
    nu: Tuple[Tuple[Fraction, ...], ...] = ()
    c_claim: Optional[float] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind == "poly":
            if self.poly is None or self.poly.n != self.n:
                raise ValueError("generic potential needs an NCPoly with matching n")
        elif self.kind == "quartic":
            k = len(self.mu)
            if len(self.A) != self.n or any(len(r) != self.n for r in self.A):
                raise ValueError("A must be n x n")
            if any(self.A[i][j] != self.A[j][i] for i in range(self.n) for j in range(self.n)):
                raise ValueError("A must be symmetric")
            if len(self.lam) != self.n or any(len(r) != k for r in self.lam):
                raise ValueError("lambda must be n x k")
            if len(self.nu) != k or any(len(r) != 3 for r in self.nu):
                raise ValueError("nu must be k x 3")
            if any(m < 0 for m in self.mu):
                raise ValueError("mu must be non-negative")
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def from_poly(cls, P: NCPoly, c_claim=None, name="") -> "PotentialSpec":
        return cls(kind="poly", n=P.n, poly=P, c_claim=c_claim, name=name)

    @classmethod
    def quartic(cls, A, lam, mu, nu, c_claim=None, name="") -> "PotentialSpec":
        A = _matrix(A)
        n = len(A)
        mu = tuple(exact(m) for m in mu)
        return cls(
            kind="quartic",
            n=n,
            A=A,
            lam=_matrix(lam, (n, len(mu))),
            mu=mu,
            nu=_matrix(nu, (len(mu), 3)),
            c_claim=c_claim,
            name=name,
        )

    @classmethod
    def one_var(cls, nu2, nu3, nu4, a=0, c_claim=None, name="") -> "PotentialSpec":
        """υ(x) = ν2 x²/2 + ν3 x³/3 + ν4 x⁴/4 + a x² in one variable."""
        return cls.quartic([[a]], [[1]], [1], [[nu2, nu3, nu4]], c_claim=c_claim, name=name)

    def to_ncpoly(self) -> NCPoly:
        if self.kind == "poly":
            return self.poly
        n = self.n
        V = NCPoly({}, n)
        for i in range(n):
            for j in range(n):
                if self.A[i][j]:
                    V = V + NCPoly.monomial((i, j), n, self.A[i][j])
        for j, m in enumerate(self.mu):
            if m == 0:
                continue
            lin = NCPoly({(i,): self.lam[i][j] for i in range(n)}, n)
            sq = lin * lin
            nu2, nu3, nu4 = self.nu[j]
            ups = sq.scale(nu2 / 2) + (sq * lin).scale(nu3 / 3) + (sq * sq).scale(nu4 / 4)
            V = V + ups.scale(m)
        return V

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n": self.n}
        if self.name:
            d["name"] = self.name
        if self.c_claim is not None:
            d["c_claim"] = self.c_claim
        if self.kind == "poly":
            d["poly"] = serialize.to_dict(self.poly)
        else:
            d["A"] = [[str(v) for v in r] for r in self.A]
            d["lambda"] = [[str(v) for v in r] for r in self.lam]
            d["mu"] = [str(v) for v in self.mu]
            d["nu"] = [[str(v) for v in r] for r in self.nu]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        kind = d.get("kind", "poly")
        c_claim = d.get("c_claim")
        name = d.get("name", "")
        if kind == "poly":
            n = int(d["n"])
            p = d["poly"]
            P = parse_poly(p, n) if isinstance(p, str) else serialize.from_dict(p)
            return cls.from_poly(P, c_claim=c_claim, name=name)
        if kind == "quartic":
            return cls.quartic(d["A"], d["lambda"], d["mu"], d["nu"], c_claim=c_claim, name=name)
        raise ValueError(f"unknown potential kind {kind!r}")

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def quadratic(n: int = 1, c=1) -> NCPoly:
    """V = (c/2) Σ X_i²."""
    c = exact(c)
    return NCPoly({(i, i): c / 2 for i in range(n)}, n)


def quartic_1d(a2=Fraction(1, 2), a4=Fraction(1, 4)) -> NCPoly:
    """V = a2 x² + a4 x⁴ in one variable."""
    return NCPoly({(0, 0): exact(a2), (0, 0, 0, 0): exact(a4)}, 1)


def poly_coeffs_1d(V: NCPoly) -> Sequence[float]:
    """Ascending power coefficients of a one-variable potential."""
    if V.n != 1:
        raise ValueError("expected a one-variable potential")
    deg = max(V.degree(), 0)
    out = [0.0] * (deg + 1)
    for w, c in V.items():
        out[len(w)] += float(c.real if isinstance(c, complex) else c)
    return out
