"""Non-commutative polynomials, trace polynomials and tensor polynomials.

All three are immutable maps from a monomial key to a coefficient.  Zero
coefficients are never stored.  Integer coefficients are promoted to
``Fraction`` so that identity checks are exact; floats and complex numbers
are kept as given.
"""

from __future__ import annotations

import numbers
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple

from .words import EMPTY, Word, cyclic_min, reverse, word_str

Traces = Tuple[Word, ...]

_DEGREE_LIMIT = [16]


class DegreeError(ValueError):
    """Raised when a product would exceed the configured degree budget."""


def set_degree_limit(k: int) -> int:
    """Set the global degree budget and return the previous one."""
    old = _DEGREE_LIMIT[0]
    _DEGREE_LIMIT[0] = int(k)
    return old


def degree_limit() -> int:
    return _DEGREE_LIMIT[0]


def coerce(c):
    if isinstance(c, bool):
        raise TypeError("boolean coefficient")
    if isinstance(c, Fraction):
        return c
    if isinstance(c, numbers.Integral):
        return Fraction(int(c))
    if isinstance(c, numbers.Number):
        return c
    raise TypeError(f"unsupported coefficient {c!r}")


def conj(c):
    return c.conjugate() if isinstance(c, complex) else c


def merge_traces(a: Traces, b: Traces) -> Traces:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


def norm_traces(ts: Iterable[Word]) -> Traces:
    """Canonical multiset: cyclic-minimal words, empty words dropped (tau(1)=1)."""
    return tuple(sorted(cyclic_min(w) for w in ts if w))


def _check_degree(d: int) -> None:
    if d > _DEGREE_LIMIT[0]:
        raise DegreeError(f"degree {d} exceeds limit {_DEGREE_LIMIT[0]}")


class _Terms:
    __slots__ = ("_terms", "n")

    def __init__(self, terms: Mapping | None = None, n: int = 1):
        if n < 1:
            raise ValueError("need at least one letter")
        self.n = int(n)
        clean: Dict = {}
        for k, c in (terms or {}).items():
            k = self._norm_key(k)
            c = coerce(c)
            if c != 0:
                acc = clean.get(k, 0) + c
                if acc == 0:
                    clean.pop(k, None)
                else:
                    clean[k] = acc
        self._terms = clean

    @classmethod
    def _raw(cls, terms: Dict, n: int):
        # trusted constructor: keys normalized, zeros may still be present
        obj = cls.__new__(cls)
        obj.n = n
        obj._terms = {k: c for k, c in terms.items() if c != 0}
        return obj

    def _norm_key(self, k):
        return k

    @property
    def terms(self) -> Mapping:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __iter__(self) -> Iterator:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coeff(self, key):
        return self._terms.get(self._norm_key(key), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def _same(self, other) -> None:
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"letter count mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if isinstance(other, numbers.Number):
            other = self._const_like(other)
        if isinstance(self, NCPoly) and isinstance(other, TracePoly):
            return TracePoly.from_poly(self) + other
        other = self._lift(other)
        self._same(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return self._raw(out, self.n)

    __radd__ = __add__

    def __neg__(self):
        return self._raw({k: -c for k, c in self._terms.items()}, self.n)

    def __sub__(self, other):
        if isinstance(other, numbers.Number):
            return self + (-coerce(other))
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, a):
        a = coerce(a)
        return self._raw({k: a * c for k, c in self._terms.items()}, self.n)

    def __eq__(self, other):
        if isinstance(other, numbers.Number):
            other = self._const_like(other)
        if isinstance(self, NCPoly) and isinstance(other, TracePoly):
            return TracePoly.from_poly(self) == other
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return type(other) is type(self) and other.n == self.n and other._terms == self._terms

    def __hash__(self):
        return hash((type(self).__name__, self.n, frozenset(self._terms.items())))

    def _lift(self, other):
        return other

    def map_coeffs(self, f):
        return self._raw({k: f(c) for k, c in self._terms.items()}, self.n)

    def to_float(self):
        return self.map_coeffs(lambda c: complex(c) if isinstance(c, complex) else float(c))

    def is_real(self) -> bool:
        return all(not isinstance(c, complex) or c.imag == 0 for c in self._terms.values())

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def __repr__(self):
        return f"{type(self).__name__}({self})"


def _fmt_coeff(c) -> str:
    if isinstance(c, Fraction) and c.denominator == 1:
        return str(c.numerator)
    return str(c)


class NCPoly(_Terms):
    """Polynomial in non-commuting self-adjoint letters X1..Xn."""

    __slots__ = ()

    def _norm_key(self, k):
        return tuple(int(i) for i in k)

    @classmethod
    def var(cls, i: int, n: int) -> "NCPoly":
        if not 0 <= i < n:
            raise ValueError(f"letter {i} outside 0..{n - 1}")
        return cls._raw({(i,): Fraction(1)}, n)

    @classmethod
    def constant(cls, c, n: int = 1) -> "NCPoly":
        return cls({EMPTY: c}, n)

    @classmethod
    def monomial(cls, word: Sequence[int], n: int, c=1) -> "NCPoly":
        return cls({tuple(word): c}, n)

    def _const_like(self, c):
        return NCPoly({EMPTY: c}, self.n)

    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=-1)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return self.scale(other)
        if isinstance(other, TracePoly):
            return TracePoly.from_poly(self) * other
        self._same(other)
        _check_degree(self.degree() + other.degree())
        out: Dict[Word, object] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                k = a + b
                out[k] = out.get(k, 0) + ca * cb
        return NCPoly._raw(out, self.n)

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        out = self._const_like(1)
        for _ in range(int(k)):
            out = out * self
        return out

    def adjoint(self) -> "NCPoly":
        return NCPoly._raw({reverse(w): conj(c) for w, c in self._terms.items()}, self.n)

    def is_self_adjoint(self) -> bool:
        return self.adjoint() == self

    def symmetrize(self) -> "NCPoly":
        return (self + self.adjoint()).scale(Fraction(1, 2))

    def letters(self) -> set:
        return {i for w in self._terms for i in w}

    def with_n(self, n: int) -> "NCPoly":
        if any(i >= n for w in self._terms for i in w):
            raise ValueError("letters exceed new alphabet")
        return NCPoly._raw(dict(self._terms), n)

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for w in sorted(self._terms, key=lambda w: (len(w), w)):
            parts.append(f"{_fmt_coeff(self._terms[w])}*{word_str(w, self.n)}")
        return " + ".join(parts)


class TracePoly(_Terms):
    """Linear combination of ``base * prod tau(trace_k)`` terms.

    Keys are ``(base, traces)`` with ``traces`` a sorted tuple of cyclically
    minimal non-empty words.
    """

    __slots__ = ()

    def _norm_key(self, k):
        base, traces = k
        return tuple(int(i) for i in base), norm_traces(tuple(int(i) for i in t) for t in traces)

    @classmethod
    def from_poly(cls, P) -> "TracePoly":
        if isinstance(P, TracePoly):
            return P
        if not isinstance(P, NCPoly):
            raise TypeError(f"expected NCPoly, got {type(P).__name__}")
        return cls._raw({(w, ()): c for w, c in P.items()}, P.n)

    def _lift(self, other):
        if isinstance(other, NCPoly):
            return TracePoly.from_poly(other)
        return other

    def _const_like(self, c):
        return TracePoly({(EMPTY, ()): c}, self.n)

    @classmethod
    def scalar(cls, c, n: int) -> "TracePoly":
        return cls({(EMPTY, ()): c}, n)

    def degree(self) -> int:
        return max((len(b) + sum(map(len, t)) for b, t in self._terms), default=-1)

    def is_plain(self) -> bool:
        return all(not t for _, t in self._terms)

    def is_scalar(self) -> bool:
        return all(not b for b, _ in self._terms)

    def to_ncpoly(self) -> NCPoly:
        if not self.is_plain():
            raise ValueError("trace polynomial has trace factors")
        return NCPoly._raw({b: c for (b, _), c in self._terms.items()}, self.n)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return self.scale(other)
        other = self._lift(other)
        self._same(other)
        _check_degree(self.degree() + other.degree())
        out: Dict = {}
        for (b1, t1), c1 in self._terms.items():
            for (b2, t2), c2 in other._terms.items():
                k = (b1 + b2, merge_traces(t1, t2))
                out[k] = out.get(k, 0) + c1 * c2
        return TracePoly._raw(out, self.n)

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return self.scale(other)
        if isinstance(other, NCPoly):
            return TracePoly.from_poly(other) * self
        return NotImplemented

    def adjoint(self) -> "TracePoly":
        out = {}
        for (b, t), c in self._terms.items():
            k = (reverse(b), norm_traces(reverse(u) for u in t))
            out[k] = out.get(k, 0) + conj(c)
        return TracePoly._raw(out, self.n)

    def with_n(self, n: int) -> "TracePoly":
        return TracePoly._raw(dict(self._terms), n)

    def words(self) -> set:
        """Every base and trace word appearing in the polynomial."""
        out = set()
        for b, t in self._terms:
            out.add(b)
            out.update(t)
        return out

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (b, t) in sorted(self._terms, key=lambda k: (len(k[0]) + sum(map(len, k[1])), k)):
            s = _fmt_coeff(self._terms[(b, t)])
            if b:
                s += "*" + word_str(b, self.n)
            for u in t:
                s += f"*tau({word_str(u, self.n)})"
            parts.append(s)
        return " + ".join(parts)


def tau(P) -> TracePoly:
    """Formal normalized trace, flattening nested traces into scalar factors."""
    P = TracePoly.from_poly(P)
    out: Dict = {}
    for (b, t), c in P.items():
        k = (EMPTY, merge_traces(t, norm_traces([b])))
        out[k] = out.get(k, 0) + c
    return TracePoly._raw(out, P.n)


class TensorPoly(_Terms):
    """Element of the algebraic tensor power with ``legs`` factors.

    Keys are ``(legs_tuple, traces)``; trace factors are scalars attached to
    the whole tensor.
    """

    __slots__ = ("legs",)

    def __init__(self, terms: Mapping | None = None, n: int = 1, legs: int = 2):
        if legs < 2:
            raise ValueError("a tensor needs at least two legs")
        self.legs = int(legs)
        super().__init__(terms, n)
        for (ws, _) in self._terms:
            if len(ws) != self.legs:
                raise ValueError(f"term with {len(ws)} legs in a {self.legs}-leg tensor")

    @classmethod
    def _raw(cls, terms: Dict, n: int, legs: int = None):
        obj = super()._raw(terms, n)
        if legs is None:
            legs = len(next(iter(terms))[0]) if terms else 2
        obj.legs = legs
        return obj

    def _norm_key(self, k):
        ws, traces = k
        return tuple(tuple(int(i) for i in w) for w in ws), norm_traces(traces)

    def _same(self, other) -> None:
        super()._same(other)
        if other.legs != self.legs:
            raise ValueError(f"leg mismatch: {self.legs} vs {other.legs}")

    def __add__(self, other):
        self._same(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return TensorPoly._raw(out, self.n, self.legs)

    def __neg__(self):
        return TensorPoly._raw({k: -c for k, c in self._terms.items()}, self.n, self.legs)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a):
        a = coerce(a)
        return TensorPoly._raw({k: a * c for k, c in self._terms.items()}, self.n, self.legs)

    def map_coeffs(self, f):
        return TensorPoly._raw({k: f(c) for k, c in self._terms.items()}, self.n, self.legs)

    def __eq__(self, other):
        return (
            isinstance(other, TensorPoly)
            and other.n == self.n
            and (other.legs == self.legs or not (self._terms or other._terms))
            and other._terms == self._terms
        )

    def __hash__(self):
        return hash(("TensorPoly", self.n, self.legs, frozenset(self._terms.items())))

    @classmethod
    def zero(cls, n: int, legs: int = 2) -> "TensorPoly":
        return cls._raw({}, n, legs)

    @classmethod
    def tensor(cls, *factors) -> "TensorPoly":
        """Elementary tensor ``P1 ⊗ P2 ⊗ ...`` of (trace) polynomials."""
        if len(factors) < 2:
            raise ValueError("need at least two factors")
        n = factors[0].n
        fs = [TracePoly.from_poly(f) for f in factors]
        out: Dict = {}
        for combo in product(*(f.items() for f in fs)):
            ws = tuple(k[0] for k, _ in combo)
            tr: Traces = ()
            c = Fraction(1)
            for (k, ck) in combo:
                tr = merge_traces(tr, k[1])
                c = c * ck
            key = (ws, tr)
            out[key] = out.get(key, 0) + c
        return cls._raw(out, n, len(fs))

    def __mul__(self, other):
        """Leg-wise product ``(a⊗b)(c⊗d) = ac⊗bd``."""
        if isinstance(other, numbers.Number):
            return self.scale(other)
        self._same(other)
        out: Dict = {}
        for (w1, t1), c1 in self._terms.items():
            for (w2, t2), c2 in other._terms.items():
                k = (tuple(a + b for a, b in zip(w1, w2)), merge_traces(t1, t2))
                out[k] = out.get(k, 0) + c1 * c2
        return TensorPoly._raw(out, self.n, self.legs)

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return self.scale(other)
        return NotImplemented

    def adjoint_reversed(self) -> "TensorPoly":
        """Leg order reversed and each leg adjointed: (a⊗b)* = b*⊗a*."""
        out = {}
        for (ws, t), c in self._terms.items():
            k = (tuple(reverse(w) for w in reversed(ws)), norm_traces(reverse(u) for u in t))
            out[k] = out.get(k, 0) + conj(c)
        return TensorPoly._raw(out, self.n, self.legs)

    def is_plain(self) -> bool:
        return all(not t for _, t in self._terms)

    def degree(self) -> int:
        return max((sum(map(len, ws)) + sum(map(len, t)) for ws, t in self._terms), default=-1)

    def words(self) -> set:
        out = set()
        for ws, t in self._terms:
            out.update(ws)
            out.update(t)
        return out

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (ws, t) in sorted(self._terms):
            s = _fmt_coeff(self._terms[(ws, t)]) + "*(" + " ⊗ ".join(word_str(w, self.n) for w in ws) + ")"
            for u in t:
                s += f"*tau({word_str(u, self.n)})"
            parts.append(s)
        return " + ".join(parts)

    def __repr__(self):
        return f"TensorPoly[{self.legs}]({self})"


def X(i: int, n: int) -> NCPoly:
    """The letter X_{i+1} as a polynomial (0-based index)."""
    return NCPoly.var(i, n)


def as_trace(P) -> TracePoly:
    return TracePoly.from_poly(P)


def one(n: int) -> NCPoly:
    return NCPoly.constant(1, n)
