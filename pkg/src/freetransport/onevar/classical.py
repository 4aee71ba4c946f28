"""Classical one-dimensional transport between Gibbs densities e^{−V}.

The flow velocity is g′_α with L_α g_α = W − μ_α(W), L_α = d²/dx² − V′_α d/dx, and
g_α = −∫₀^∞ P_s^α(W − μ_α(W)) ds.  The semigroup is advanced by Crank–Nicolson
on a reflecting grid; the map F is then integrated in α.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import splu

from .equilibrium import as_polynomial, cdf_quantile


class ClassicalTransportError(RuntimeError):
    """Semigroup blow-up, an unresolved tail, or the map leaving the grid."""


@dataclass
class GridFunc:
    """Values on a uniform grid, evaluated off-grid by cubic interpolation."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.ndim != 1 or self.x.shape != self.values.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        d = np.diff(self.x)
        if self.x.size < 2 or np.any(d <= 0) or np.ptp(d) > 1e-9 * max(1.0, abs(d[0])):
            raise ValueError("grid must be sorted and uniform")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def __call__(self, t) -> np.ndarray:
        return CubicSpline(self.x, self.values)(t)

    def is_monotone(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.values) >= -tol))

    def sup_diff(self, other, where: Optional[tuple] = None) -> float:
        v = other.values if isinstance(other, GridFunc) else np.asarray(other(self.x) if callable(other) else other)
        mask = np.ones_like(self.x, dtype=bool) if where is None else (self.x >= where[0]) & (self.x <= where[1])
        return float(np.max(np.abs(self.values - v)[mask]))

    def to_rows(self) -> List[dict]:
        return [{"x": float(a), "value": float(b)} for a, b in zip(self.x, self.values)]


def uniform_grid(lo: float, hi: float, points: int) -> np.ndarray:
    return np.linspace(lo, hi, points)


class GibbsDensity:
    """Probability density ∝ e^{−V} on [a, b] with composite Gauss–Legendre CDF."""

    def __init__(self, V, a: float = -12.0, b: float = 12.0, panels: int = 256, order: int = 24):
        self.V = as_polynomial(V)
        self.a, self.b = float(a), float(b)
        self.edges = np.linspace(self.a, self.b, panels + 1)
        self._g, self._w = np.polynomial.legendre.leggauss(order)
        xs = np.linspace(self.a, self.b, 20001)
        self._shift = float(np.min(self.V(xs)))
        masses = self._partial(self.edges[:-1], self.edges[1:])
        self.Z = float(masses.sum())
        self._cum = np.concatenate([[0.0], np.cumsum(masses)]) / self.Z

    def _partial(self, lo, hi) -> np.ndarray:
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        half = 0.5 * (hi - lo)
        x = 0.5 * (hi + lo)[..., None] + half[..., None] * self._g
        return half * np.sum(self._w * np.exp(-(self.V(x) - self._shift)), axis=-1)

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x >= self.a) & (x <= self.b)
        return np.where(inside, np.exp(-(self.V(x) - self._shift)) / self.Z, 0.0)

    def cdf(self, x) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        k = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.edges) - 2)
        return np.clip(self._cum[k] + self._partial(self.edges[k], x) / self.Z, 0.0, 1.0)

    def quantile(self, u, tol: float = 1e-13) -> np.ndarray:
        return cdf_quantile(self, u, tol)

    def expect(self, f) -> float:
        x = 0.5 * (self.edges[1:] + self.edges[:-1])[:, None] + 0.5 * np.diff(self.edges)[:, None] * self._g
        w = 0.5 * np.diff(self.edges)[:, None] * self._w
        return float(np.sum(w * f(x) * np.exp(-(self.V(x) - self._shift))) / self.Z)


def quantile_transport(mu, nu, grid=None, points: int = 1025) -> GridFunc:
    """Monotone map T = Q_ν ∘ F_μ tabulated on a grid (default: μ's support)."""
    x = np.linspace(mu.a, mu.b, points) if grid is None else np.asarray(grid, dtype=float)
    return GridFunc(x, nu.quantile(mu.cdf(x)))


@dataclass
class PoissonSolve:
    alpha: float
    velocity: np.ndarray  # g′_α on the working grid
    g: np.ndarray
    mean_W: float
    tail_bound: float
    steps: int


@dataclass
class ClassicalTransport:
    F: GridFunc
    solves: List[PoissonSolve] = field(default_factory=list)
    work_grid: Optional[np.ndarray] = None

    @property
    def max_tail_bound(self) -> float:
        return max((s.tail_bound for s in self.solves), default=0.0)


def _generator(Va: Polynomial, x: np.ndarray):
    """Reflecting, μ-symmetric discretization of h ↦ h″ − V′h′ in flux form.

    With κ_{i±½} = e^{−V(x_{i±½})} the rows are (κ_{i+½}(h_{i+1}−h_i) − κ_{i−½}(h_i−h_{i−1}))/(e^{−V(x_i)}dx²);
    only the ratios κ/e^{−V(x_i)} are formed, so far tails never underflow.
    """
    dx = x[1] - x[0]
    v = Va(x)
    half = Va(0.5 * (x[1:] + x[:-1]))
    up = np.exp(-(half - v[:-1])) / dx**2  # coupling i → i+1
    dn = np.exp(-(half - v[1:])) / dx**2  # coupling i+1 → i
    main = np.zeros_like(x)
    main[:-1] -= up
    main[1:] -= dn
    return sparse.diags([dn, main, up], [-1, 0, 1], format="csc")


def poisson_cn(V, W, alpha: float, x: np.ndarray, s_horizon: float = 20.0, ds: float = 0.01, tail_tol: float = 1e-6, rannacher: int = 4) -> PoissonSolve:
    """g_α = −∫₀^S P_s W̃ ds by Crank–Nicolson with implicit-Euler start-up steps.

    The trapezoid sum of CN iterates telescopes to L⁻¹(h_S − h_0), so the only
    truncation is the tail ∫_S^∞, bounded through the measured decay rate.
    """
    V, W = as_polynomial(V), as_polynomial(W)
    Va = V + alpha * W
    L = _generator(Va, x)
    n = x.size
    I = sparse.identity(n, format="csc")
    v = Va(x)
    p = np.exp(-(v - v.min()))
    Wx = W(x)
    mean_W = float(np.sum(p * Wx) / np.sum(p))
    h = Wx - mean_W
    norm0 = math.sqrt(np.sum(p * h * h) / np.sum(p))
    g = np.zeros(n)
    s = 0.0
    euler = splu((I - 0.5 * ds * L).tocsc())
    cn_lhs = splu((I - 0.5 * ds * L).tocsc())
    cn_rhs = (I + 0.5 * ds * L).tocsr()
    steps = int(math.ceil(s_horizon / ds))
    psum = np.sum(p)
    norms = []
    floor = 1e-13 * norm0
    taken = 0
    for k in range(steps):
        if k < rannacher:
            # two implicit half steps damp the stiff start-up modes
            for _ in range(2):
                h = euler.solve(h)
                g -= 0.5 * ds * h
        else:
            h_new = cn_lhs.solve(cn_rhs @ h)
            g -= 0.5 * ds * (h + h_new)
            h = h_new
        taken += 1
        # rounding leaves a constant in h; constants lie in ker L and do not move g′
        hc = h - np.sum(p * h) / psum
        nrm = math.sqrt(np.sum(p * hc * hc) / psum)
        if not np.isfinite(nrm) or nrm > 10 * norm0 + 1e-300:
            raise ClassicalTransportError(f"semigroup iterate grew to {nrm:.3g} at s={taken * ds:.3g} (α={alpha:.3g})")
        norms.append(nrm)
        if nrm <= floor:
            break
    # measured decay over the last unit of time bounds ∫_S^∞ ‖P_s W̃‖ ds
    w = min(len(norms), max(2, int(round(1.0 / ds))))
    last = norms[-w:]
    if last[-1] <= floor:
        tail = last[-1]
    else:
        rate = math.log(last[0] / last[-1]) / ((len(last) - 1) * ds) if len(last) > 1 and last[-1] > 0 else 0.0
        tail = last[-1] / rate if rate > 0 else float("inf")
    if tail > tail_tol * max(norm0, 1e-300):
        raise ClassicalTransportError(f"semigroup tail {tail:.3g} exceeds {tail_tol:g}·‖W̃‖ at α={alpha:.3g}; raise s_horizon")
    vel = np.gradient(g, x)
    return PoissonSolve(alpha, vel, g, mean_W, tail, taken)


def poisson_velocity_direct(V, W, alpha: float, x: np.ndarray) -> np.ndarray:
    """g′_α = e^{V_α}∫_{−∞}^x (W − μ_α(W))e^{−V_α}; independent oracle for the semigroup route."""
    V, W = as_polynomial(V), as_polynomial(W)
    Va = V + alpha * W
    v = Va(x)
    p = np.exp(-(v - v.min()))
    Wt = W(x) - np.sum(p * W(x)) / np.sum(p)
    dx = x[1] - x[0]
    f = Wt * p
    seg = 0.5 * dx * (f[1:] + f[:-1])
    left = np.concatenate([[0.0], np.cumsum(seg)])
    right = -np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    # integrate from the nearer tail so neither side suffers cancellation
    cum = np.where(x <= x[np.argmax(p)], left, right)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = cum / p
    return np.where(p > 1e-250, out, np.nan)


def classical_transport_1d(
    V,
    W,
    grid: np.ndarray,
    alpha_steps: int = 12,
    s_horizon: float = 20.0,
    ds: float = 0.01,
    pad: float = 6.0,
    tail_tol: float = 1e-6,
    scheme: str = "rk4",
    refine: int = 2,
    grid_power: float = 3.0,
) -> ClassicalTransport:
    """Transport map from e^{−V} to e^{−V−W}, tabulated on ``grid``.

    The Poisson problems are solved on the grid extended by ``pad`` on each side
    with the same spacing, so the reflecting boundary sits in the far tail.  That
    working grid is ``refine`` times finer than ``grid``: the flux-form drift is
    off by a factor sinh(z)/z with z = V′dx/2, which is large where V′ is.
    """
    x = np.asarray(grid, dtype=float)
    if scheme not in ("heun", "rk4"):
        raise ValueError("scheme must be 'heun' or 'rk4'")
    if refine < 1:
        raise ValueError("refine must be a positive integer")
    dx = (x[1] - x[0]) / refine
    extra = int(math.ceil(pad / dx))
    work = x[0] + dx * np.arange(-extra, refine * (x.size - 1) + 1 + extra)
    W = as_polynomial(W)
    if np.allclose(W.coef, 0.0):
        return ClassicalTransport(GridFunc(x, x.copy()), [], work)
    cache = {}

    def vel(alpha):
        key = round(alpha, 14)
        if key not in cache:
            cache[key] = poisson_cn(V, W, alpha, work, s_horizon, ds, tail_tol)
        return CubicSpline(work, cache[key].velocity)

    def at(alpha, F):
        if F.min() < work[0] or F.max() > work[-1]:
            raise ClassicalTransportError(f"map left the working grid at α={alpha:.3g}")
        return vel(alpha)(F)

    F = x.copy()
    # α_j = (j/m)^p; p > 1 crowds steps near α = 0, where far-tail velocities are largest
    alphas = np.linspace(0.0, 1.0, alpha_steps + 1) ** grid_power
    for a0, a1 in zip(alphas[:-1], alphas[1:]):
        a0, h = float(a0), float(a1 - a0)
        if scheme == "heun":
            k1 = at(a0, F)
            k2 = at(a0 + h, F + h * k1)
            F = F + 0.5 * h * (k1 + k2)
        else:
            k1 = at(a0, F)
            k2 = at(a0 + h / 2, F + 0.5 * h * k1)
            k3 = at(a0 + h / 2, F + 0.5 * h * k2)
            k4 = at(a0 + h, F + h * k3)
            F = F + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    solves = [cache[k] for k in sorted(cache)]
    return ClassicalTransport(GridFunc(x, F), solves, work)


__all__ = [
    "ClassicalTransport",
    "ClassicalTransportError",
    "GibbsDensity",
    "GridFunc",
    "PoissonSolve",
    "classical_transport_1d",
    "poisson_cn",
    "poisson_velocity_direct",
    "quantile_transport",
    "uniform_grid",
]
