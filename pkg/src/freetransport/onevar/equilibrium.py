"""One-cut equilibrium measures of one-variable polynomial potentials.

The measure solves 2 P.V.∫ dμ(y)/(x − y) = V′(x) on its support [a, b] and
has density (1/2π) Q(x) √((b − x)(x − a)).  With x = m + r cos θ the one-cut
conditions become Chebyshev means of V′, which Gauss–Chebyshev quadrature
evaluates exactly for polynomial V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from ..ncalg.polys import NCPoly
from ..ncalg.potential import PotentialSpec, poly_coeffs_1d


class EquilibriumError(RuntimeError):
    """Newton failed or the candidate density went negative (two-cut regime)."""


def as_polynomial(V) -> Polynomial:
    """Coerce ascending coefficients, a Polynomial, a one-letter NCPoly or a PotentialSpec."""
    if isinstance(V, Polynomial):
        return V
    if isinstance(V, PotentialSpec):
        V = V.to_ncpoly()
    if isinstance(V, NCPoly):
        return Polynomial(poly_coeffs_1d(V))
    return Polynomial(np.asarray(V, dtype=float))


def _cheb_nodes(k: int):
    """Gauss–Chebyshev (first kind) angles; exact means of polynomials of degree < 2k."""
    return (np.arange(k) + 0.5) * np.pi / k


def _inv_sqrt_series(a: float, b: float, k: int) -> np.ndarray:
    """Coefficients of ((1 − a w)(1 − b w))^{−1/2} in powers of w."""
    j = np.arange(k)
    binom = np.array([math.comb(2 * i, i) for i in range(k)], dtype=float) / 4.0**j
    return np.convolve(binom * a**j, binom * b**j)[:k]


@dataclass
class EqMeasure:
    V: Polynomial
    a: float
    b: float
    Q: Polynomial
    newton_iterations: int = 0
    _moments: Dict[int, float] = field(default_factory=dict, repr=False)

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def radius(self) -> float:
        return 0.5 * (self.b - self.a)

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x > self.a) & (x < self.b)
        s = np.sqrt(np.clip((self.b - x) * (x - self.a), 0.0, None))
        return np.where(inside, self.Q(x) * s / (2 * np.pi), 0.0)

    def expect(self, f, nodes: int | None = None) -> float:
        """∫ f dμ by Gauss–Chebyshev of the second kind (exact for polynomial f of modest degree)."""
        k = nodes or (self.Q.degree() + 64)
        th = np.arange(1, k + 1) * np.pi / (k + 1)
        x = self.center + self.radius * np.cos(th)
        w = np.pi / (k + 1) * np.sin(th) ** 2
        return float(self.radius**2 / (2 * np.pi) * np.sum(w * self.Q(x) * f(x)))

    def moment(self, k: int) -> float:
        if k not in self._moments:
            self._moments[k] = self.expect(lambda x: x**k)
        return self._moments[k]

    def cdf(self, x) -> np.ndarray:
        """μ((−∞, x]) by Gauss–Legendre in the angle variable, accurate to rounding for smooth Q."""
        x = np.asarray(x, dtype=float)
        u = np.clip((x - self.center) / self.radius, -1.0, 1.0)
        th = np.arccos(u)  # mass lies on θ ∈ [th, π]
        g, gw = np.polynomial.legendre.leggauss(48 + self.Q.degree())
        phi = th[..., None] + (np.pi - th[..., None]) * 0.5 * (g + 1)
        vals = self.Q(self.center + self.radius * np.cos(phi)) * np.sin(phi) ** 2
        out = self.radius**2 / (2 * np.pi) * 0.5 * (np.pi - th) * np.sum(gw * vals, axis=-1)
        return np.clip(out, 0.0, 1.0)

    def quantile(self, u, tol: float = 1e-12) -> np.ndarray:
        return cdf_quantile(self, u, tol)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "Q": self.Q.coef.tolist(), "V": self.V.coef.tolist()}


def equilibrium_measure(V, tol: float = 1e-14, max_iter: int = 100, r0: float = 2.0) -> EqMeasure:
    """Solve the one-cut conditions mean(V′) = 0, mean(r cosθ V′) = 2 by damped Newton on (m, r)."""
    V = as_polynomial(V).trim()
    d1, d2 = V.deriv(), V.deriv(2)
    if V.degree() < 2 or V.coef[-1] <= 0 or V.degree() % 2:
        raise EquilibriumError("potential must have even degree ≥ 2 and positive leading coefficient")
    th = _cheb_nodes(V.degree() + 4)
    c = np.cos(th)

    def F(m, r):
        x = m + r * c
        return np.array([np.mean(d1(x)), np.mean(r * c * d1(x)) - 2.0])

    def J(m, r):
        x = m + r * c
        h = d2(x)
        return np.array([[np.mean(h), np.mean(c * h)], [np.mean(r * c * h), np.mean(c * d1(x) + r * c * c * h)]])

    m, r = 0.0, r0
    f = F(m, r)
    for it in range(1, max_iter + 1):
        try:
            step = np.linalg.solve(J(m, r), -f)
        except np.linalg.LinAlgError as e:
            raise EquilibriumError(f"singular Newton system at m={m}, r={r}") from e
        lam = 1.0
        while lam > 1e-8:
            m1, r1 = m + lam * step[0], r + lam * step[1]
            if r1 > 0:
                f1 = F(m1, r1)
                if np.linalg.norm(f1) < (1 - 1e-4 * lam) * np.linalg.norm(f) or np.linalg.norm(f1) < tol:
                    break
            lam *= 0.5
        else:
            raise EquilibriumError(f"Newton line search stalled at m={m}, r={r}, |F|={np.linalg.norm(f):.3g}")
        m, r, f = m1, r1, f1
        if np.linalg.norm(f) < tol or np.max(np.abs(lam * step)) < 1e-15 * max(1.0, r):
            break
    else:
        raise EquilibriumError(f"Newton did not converge in {max_iter} iterations (|F|={np.linalg.norm(f):.3g})")
    a, b = m - r, m + r
    Q = _q_factor(d1, a, b)
    grid = np.linspace(a, b, 401)
    if np.min(Q(grid)) < -1e-10 * max(1.0, np.max(np.abs(Q(grid)))):
        raise EquilibriumError("negative density factor Q on the support: the potential is not one-cut")
    return EqMeasure(V, float(a), float(b), Q, it)


def _q_factor(d1: Polynomial, a: float, b: float) -> Polynomial:
    """Polynomial part at infinity of V′(z)/√((z − a)(z − b))."""
    v = d1.coef
    D = len(v) - 1
    s = _inv_sqrt_series(a, b, D + 1)  # 1/√(...) = Σ s_k z^{−1−k}
    q = np.zeros(max(D, 1))
    for p in range(D):
        q[p] = sum(v[j] * s[j - 1 - p] for j in range(p + 1, D + 1))
    return Polynomial(q)


def sd_quadrature_residual(mu: EqMeasure, f) -> float:
    """∫∫ (f(x) − f(y))/(x − y) dμdμ − ∫ f V′ dμ by product Gauss quadrature.

    ``f`` is a Polynomial or ascending coefficients; the difference quotient is
    then a polynomial in (x, y) and the rule is exact up to rounding.
    """
    f = as_polynomial(f)
    k = f.degree() + mu.Q.degree() + 32
    th = np.arange(1, k + 1) * np.pi / (k + 1)
    x = mu.center + mu.radius * np.cos(th)
    w = mu.radius**2 / (2 * np.pi) * np.pi / (k + 1) * np.sin(th) ** 2 * mu.Q(x)
    X, Y = np.meshgrid(x, x, indexing="ij")
    dq = _difference_quotient(f, X, Y)
    lhs = float(w @ dq @ w)
    rhs = float(np.sum(w * f(x) * mu.V.deriv()(x)))
    return lhs - rhs


def _difference_quotient(f: Polynomial, X, Y):
    """(f(x) − f(y))/(x − y) = Σ_k c_k Σ_{i+j=k−1} x^i y^j, evaluated without cancellation."""
    out = np.zeros_like(X)
    for k, ck in enumerate(f.coef):
        if k == 0 or ck == 0:
            continue
        s = np.zeros_like(X)
        for i in range(k):
            s = s + X**i * Y ** (k - 1 - i)
        out = out + ck * s
    return out


def pv_residual(mu: EqMeasure, x) -> np.ndarray:
    """2 P.V.∫ dμ(y)/(x − y) − V′(x) at interior points.

    Q(y)(b−y)(y−a) − Q(x)(b−x)(x−a) = (y − x)·R(x, y) with R polynomial in y, and
    the Chebyshev principal value P.V.∫ dy/((x−y)√((b−y)(y−a))) vanishes on (a, b),
    so the principal value reduces to a regular Gauss–Chebyshev mean of −R.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    S = mu.Q * Polynomial([-mu.a * mu.b, mu.a + mu.b, -1.0])  # Q(y)(b−y)(y−a)
    k = S.degree() + 8
    th = _cheb_nodes(k)
    y = mu.center + mu.radius * np.cos(th)
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        R, _ = divmod(S - S(xi), Polynomial([-xi, 1.0]))  # (S(y) − S(x))/(y − x)
        pv = -np.pi * np.mean(R(y)) / (2 * np.pi)
        out[i] = 2 * pv - mu.V.deriv()(xi)
    return out


def cdf_quantile(mu, u, tol: float = 1e-12) -> np.ndarray:
    """Inverse CDF by vectorized bisection on the support; monotone in u."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("quantile levels must lie in [0, 1]")
    lo = np.full(u.shape, float(mu.a))
    hi = np.full(u.shape, float(mu.b))
    iters = int(math.ceil(math.log2(max(mu.b - mu.a, 1e-300) / tol))) + 1
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = mu.cdf(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def spectral_ks(ens, mu) -> float:
    """Kolmogorov–Smirnov distance between pooled eigenvalues and μ's CDF."""
    if getattr(ens, "n", 1) != 1:
        raise ValueError("spectral_ks needs a one-matrix ensemble")
    lam = np.sort(ens.spectrum(0) if hasattr(ens, "spectrum") else np.asarray(ens, dtype=float).ravel())
    if lam.size == 0:
        raise ValueError("empty ensemble")
    F = mu.cdf(lam)
    n = lam.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def quartic_endpoint(t: float) -> float:
    """Right endpoint b = (16/(3t))^{1/4} of the equilibrium measure of t x⁴/4."""
    return (16.0 / (3.0 * t)) ** 0.25


__all__ = [
    "EqMeasure",
    "EquilibriumError",
    "as_polynomial",
    "cdf_quantile",
    "equilibrium_measure",
    "pv_residual",
    "quartic_endpoint",
    "sd_quadrature_residual",
    "spectral_ks",
]
