"""Euler–Maruyama for the matrix free SDE dX = dS − ½𝒟V_α(X)dt and the semigroup it generates.

Every routine accepts a batch of starting tuples with shape (..., n, N, N);
batch axes are independent paths.  Noise for Monte-Carlo estimators is drawn
in blocks of paths, block b using the Philox stream keyed by (seed, b).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .matrep.evaluate import Evaluator, as_array, herm, tau_hat
from .matrep.field import PotentialField
from .ncalg import calculus as C
from .ncalg.polys import NCPoly, TracePoly
from .ncalg.potential import PotentialSpec, parse_poly
from .ncalg import serialize
from .noise import gue, stream


class BlowupError(RuntimeError):
    pass


def _as_poly(P, n=None) -> NCPoly:
    if isinstance(P, PotentialSpec):
        return P.to_ncpoly()
    if isinstance(P, str):
        return parse_poly(P, n)
    return P


@dataclass
class PotentialFamily:
    """V_α = V + αW for α ∈ [0, 1]."""

    V: NCPoly
    W: NCPoly
    V_spec: Optional[PotentialSpec] = None
    target_spec: Optional[PotentialSpec] = None
    name: str = ""
    _fields: Dict[object, PotentialField] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.V, PotentialSpec):
            self.V_spec = self.V_spec or self.V
            self.V = self.V.to_ncpoly()
        self.W = _as_poly(self.W, self.V.n)
        if self.W.n != self.V.n:
            self.W = self.W.with_n(self.V.n)
        if not (self.V.is_self_adjoint() and self.W.is_self_adjoint()):
            raise ValueError("V and W must be self-adjoint")

    @property
    def n(self) -> int:
        return self.V.n

    def V_alpha(self, alpha: float) -> NCPoly:
        return self.V + self.W.to_float().scale(float(alpha)) if alpha else self.V

    def field(self, alpha: float) -> PotentialField:
        key = float(alpha)
        if key not in self._fields:
            self._fields[key] = PotentialField(self.V.to_float() + self.W.to_float().scale(key))
        return self._fields[key]

    @property
    def W_field(self) -> PotentialField:
        if "W" not in self._fields:
            self._fields["W"] = PotentialField(self.W.to_float())
        return self._fields["W"]

    def is_affine_drift(self) -> bool:
        """True when 𝒟V_α is affine in X for every α (V and W of degree ≤ 2)."""
        return self.V.degree() <= 2 and self.W.degree() <= 2 and not _has_traces(self.V, self.W)

    def certificates(self) -> dict:
        """Certified constants for V and V+W where a symbolic certificate exists."""
        from .matrep.convexity import certify_convexity

        out = {}
        for key, spec in (("V", self.V_spec), ("V+W", self.target_spec)):
            if spec is not None:
                out[key] = certify_convexity(spec).to_dict()
        return out

    def c_alpha(self, alpha: float) -> Optional[float]:
        """Convexity constant of V_α, min of the endpoint constants (interpolation is convex)."""
        cs = []
        for spec in (self.V_spec, self.target_spec):
            if spec is None:
                return None
            from .matrep.convexity import certify_convexity

            cert = certify_convexity(spec)
            if not cert.certified:
                return None
            cs.append(cert.c)
        return (1 - alpha) * cs[0] + alpha * cs[1]

    def to_dict(self) -> dict:
        d = {"name": self.name}
        d["V"] = self.V_spec.to_dict() if self.V_spec else {"kind": "poly", "n": self.n, "poly": serialize.to_dict(self.V)}
        d["W"] = serialize.to_dict(self.W)
        if self.target_spec:
            d["target"] = self.target_spec.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialFamily":
        V = PotentialSpec.from_dict(d["V"])
        w = d.get("W", "0")
        W = parse_poly(w, V.n) if isinstance(w, str) else serialize.from_dict(w)
        target = PotentialSpec.from_dict(d["target"]) if d.get("target") else None
        return cls(V.to_ncpoly(), W, V_spec=V, target_spec=target, name=d.get("name", ""))


def _has_traces(*Ps) -> bool:
    return any(isinstance(P, TracePoly) and not P.is_plain() for P in Ps)


def quadratic_family(c: float, n: int = 1) -> PotentialFamily:
    """V = ½ΣX², W = ½(c−1)ΣX², so V_α is quadratic with constant c_α = 1 + α(c−1)."""
    V = PotentialSpec.quartic([[0.5 if i == j else 0 for j in range(n)] for i in range(n)], [[0] for _ in range(n)], [0], [[1, 0, 1]])
    T = PotentialSpec.quartic([[c / 2 if i == j else 0 for j in range(n)] for i in range(n)], [[0] for _ in range(n)], [0], [[1, 0, 1]])
    W = NCPoly({(i, i): (c - 1) / 2 for i in range(n)}, n)
    return PotentialFamily(V.to_ncpoly(), W, V_spec=V, target_spec=T, name=f"quadratic c={c}")


def brownian_increment(N: int, dt: float, rng: np.random.Generator, shape=()) -> np.ndarray:
    """√dt·W with W a GUE increment, so E τ̂(ΔS²) = dt."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    return math.sqrt(dt) * gue(rng, shape, N)


@dataclass
class SdePath:
    times: np.ndarray
    states: Optional[np.ndarray]  # (K+1, ..., n, N, N) or None when streamed
    noise: Optional[np.ndarray]  # (K, ..., n, N, N)
    alpha: float
    family: PotentialFamily
    final: np.ndarray = None

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


def _grid(T: float, dt: float):
    K = int(round(T / dt))
    if K < 0 or abs(K * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T={T} is not a multiple of dt={dt}")
    return K, np.arange(K + 1) * dt


def _stability_warn(F: PotentialField, X: np.ndarray, dt: float) -> None:
    # power iteration on the drift Jacobian at the first starting tuple
    X1 = X.reshape((-1,) + X.shape[-3:])[0]
    L = herm(np.random.default_rng(0).standard_normal(X1.shape) + 0j)
    lam = 0.0
    for _ in range(8):
        HL = F.hess_apply(X1, L)
        lam = float(np.sqrt(np.sum(np.abs(HL) ** 2) / np.sum(np.abs(L) ** 2)))
        if lam == 0:
            return
        L = HL / lam
    if 0.5 * lam * dt > 1.0:
        warnings.warn(f"dt={dt} exceeds the explicit stability bound 2/λ with λ≈{lam:.3g}", stacklevel=3)


def sde_path(
    X0,
    fam: PotentialFamily,
    alpha: float,
    T: float,
    dt: float,
    rng: np.random.Generator,
    store: bool = True,
    keep_noise: bool = False,
    noise_scale: float = 1.0,
    callback: Callable[[int, float, np.ndarray], None] | None = None,
    R_blowup: float = 1e3,
    noise: np.ndarray | None = None,
) -> SdePath:
    """Euler–Maruyama X ← X + ΔS − (dt/2)𝒟V_α(X), re-symmetrized each step.

    ``noise_scale=0`` gives the deterministic drift flow.  ``noise`` replays
    stored increments (shape (K, ..., n, N, N)) instead of drawing.
    ``callback(k, t_k, X_k)`` sees every state including k = 0.
    """
    X = herm(np.array(as_array(X0), dtype=complex))
    F = fam.field(alpha)
    K, times = _grid(T, dt)
    N = X.shape[-1]
    _stability_warn(F, X, dt)
    states = np.empty((K + 1,) + X.shape, dtype=complex) if store else None
    kept = np.empty((K,) + X.shape, dtype=complex) if keep_noise else None
    if store:
        states[0] = X
    if callback:
        callback(0, 0.0, X)
    for k in range(K):
        if noise is not None:
            dS = noise[k]
        elif noise_scale:
            dS = noise_scale * brownian_increment(N, dt, rng, X.shape[:-2])
        else:
            dS = 0.0
        if keep_noise:
            kept[k] = dS
        X = herm(X + dS - 0.5 * dt * F.grad(X))
        if (k + 1) % 50 == 0 or k == K - 1:
            if not np.all(np.isfinite(X)) or np.max(np.abs(X)) > R_blowup:
                raise BlowupError(f"path left the ball of radius {R_blowup} at t={times[k + 1]:.4g}")
        if store:
            states[k + 1] = X
        if callback:
            callback(k + 1, times[k + 1], X)
    return SdePath(times, states, kept, float(alpha), fam, X)


def _op_norm(D: np.ndarray) -> np.ndarray:
    return np.abs(np.linalg.eigvalsh(D)).max(axis=-1).max(axis=-1)


@dataclass
class Contraction:
    times: np.ndarray
    dist_fro: np.ndarray  # √(Σ Re Tr (X−Y)²)
    dist_op: np.ndarray  # max_i ‖X_i − Y_i‖
    slope_fro: float
    slope_op: float

    def to_dict(self) -> dict:
        return {"slope_fro": self.slope_fro, "slope_op": self.slope_op, "T": float(self.times[-1])}


def _slope(t, d) -> float:
    ok = d > 0
    return float(np.polyfit(t[ok], np.log(d[ok]), 1)[0])


def coupled_contraction(X0, Y0, fam: PotentialFamily, alpha: float, T: float, dt: float, seed: int = 0, record_every: int = 10) -> Contraction:
    """Run two paths on common noise and fit the log-distance slope over [0, T]."""
    X0, Y0 = as_array(X0), as_array(Y0)
    if np.allclose(X0, Y0, rtol=0, atol=0):
        raise ValueError("X0 and Y0 coincide; the contraction slope is undefined")
    rng = stream(seed, 0)
    N = X0.shape[-1]
    pair = np.stack([X0, Y0])
    ts, fro, op = [], [], []

    def rec(k, t, Z):
        if k % record_every == 0:
            D = Z[0] - Z[1]
            ts.append(t)
            fro.append(float(np.sqrt(np.sum(np.abs(D) ** 2))))
            op.append(float(_op_norm(D)))

    K, _ = _grid(T, dt)
    noise = _shared_noise(rng, K, X0.shape, N, dt)
    sde_path(pair, fam, alpha, T, dt, rng, store=False, callback=rec, noise=noise)
    t, f, o = np.array(ts), np.array(fro), np.array(op)
    return Contraction(t, f, o, _slope(t, f), _slope(t, o))


class _shared_noise:
    """Lazy (K, 2, ...) noise where both members of the pair get the same increment."""

    def __init__(self, rng, K, shape, N, dt):
        self.rng, self.K, self.shape, self.N, self.dt = rng, K, shape, N, dt

    def __getitem__(self, k):
        dS = brownian_increment(self.N, self.dt, self.rng, self.shape[:-2])
        return np.stack([dS, dS])


@dataclass
class SemigroupEstimate:
    times: np.ndarray
    mean: np.ndarray  # (len(times), ..., N, N)
    stderr: np.ndarray
    paths: int
    samples: Optional[np.ndarray] = None  # per-path values when requested
    tested_mean: Optional[np.ndarray] = None  # (len(times), len(tests)) for τ̂(φ_t(P)·A)
    tested_stderr: Optional[np.ndarray] = None

    def to_rows(self) -> List[dict]:
        rows = []
        for k, t in enumerate(self.times):
            m, s = self.mean[k], self.stderr[k]
            rows.append(
                {
                    "t": float(t),
                    "tau_mean": float(np.real(tau_hat(m))),
                    "tau_stderr": float(np.sqrt(np.mean(np.abs(s) ** 2))),
                    "diag0": float(np.real(m[..., 0, 0])),
                    "diag0_stderr": float(np.real(s[..., 0, 0])),
                }
            )
        return rows


def _evaluator_fn(P):
    if isinstance(P, NCPoly):
        P = TracePoly.from_poly(P)
    return lambda X: Evaluator(X).poly(P)


def semigroup_eval(
    P,
    X0,
    fam: PotentialFamily,
    alpha: float,
    t_grid: Sequence[float],
    paths: int,
    dt: float,
    seed: int = 0,
    richardson: bool = False,
    block: int = 256,
    keep_samples: bool = False,
    tests: Sequence[np.ndarray] | None = None,
) -> SemigroupEstimate:
    """Monte-Carlo φ_t(P)(X0) = E[P(X_t)] on one path per sample for all t in t_grid.

    With ``richardson=True`` each path is paired with a coarse path of step
    2dt driven by the summed fine increments, and 2·fine − coarse is
    averaged, removing the O(dt) weak bias.  ``tests`` are matrices A for
    which τ̂(φ_t(P)·A) is reported with its own standard error.
    """
    X0 = herm(np.asarray(as_array(X0), dtype=complex))
    if X0.ndim != 3:
        raise ValueError("semigroup_eval expects a single starting tuple (n, N, N)")
    ev = _evaluator_fn(P)
    t_grid = np.asarray(t_grid, dtype=float)
    T = float(t_grid.max()) if len(t_grid) else 0.0
    step = 2 * dt if richardson else dt
    K, _ = _grid(T, step) if T > 0 else (0, None)
    idx = {}
    for j, t in enumerate(t_grid):
        k = int(round(t / step))
        if abs(k * step - t) > 1e-9:
            raise ValueError(f"t={t} is not on the time grid of step {step}")
        idx.setdefault(k, []).append(j)
    F = fam.field(alpha)
    N = X0.shape[-1]
    P0 = ev(X0)
    out_shape = (len(t_grid),) + P0.shape
    s1 = np.zeros(out_shape, dtype=complex)
    s2 = np.zeros(out_shape)
    kept = [] if keep_samples else None
    A = None if tests is None else np.stack([np.asarray(a, dtype=complex) for a in tests])
    if A is not None:
        r1 = np.zeros((len(t_grid), len(A)))
        r2 = np.zeros((len(t_grid), len(A)))
    done = 0
    b = 0
    while done < paths:
        m = min(block, paths - done)
        rng = stream(seed, b)
        vals = np.zeros((len(t_grid), m) + P0.shape, dtype=complex)
        Xf = np.broadcast_to(X0, (m,) + X0.shape).copy()
        Xc = Xf.copy() if richardson else None

        def record(k):
            for j in idx.get(k, []):
                fine = ev(Xf)
                vals[j] = 2 * fine - ev(Xc) if richardson else fine

        record(0)
        for k in range(K):
            if richardson:
                d1 = brownian_increment(N, dt, rng, Xf.shape[:-2])
                d2 = brownian_increment(N, dt, rng, Xf.shape[:-2])
                Xf = herm(Xf + d1 - 0.5 * dt * F.grad(Xf))
                Xf = herm(Xf + d2 - 0.5 * dt * F.grad(Xf))
                Xc = herm(Xc + d1 + d2 - dt * F.grad(Xc))
            else:
                Xf = herm(Xf + brownian_increment(N, dt, rng, Xf.shape[:-2]) - 0.5 * dt * F.grad(Xf))
            record(k + 1)
        s1 += vals.sum(axis=1)
        s2 += (np.abs(vals) ** 2).sum(axis=1)
        if A is not None:
            red = np.real(np.einsum("tmij,aji->tma", vals, A)) / N
            r1 += red.sum(axis=1)
            r2 += (red**2).sum(axis=1)
        if keep_samples:
            kept.append(vals)
        done += m
        b += 1
    mean = s1 / paths
    var = np.maximum(s2 / paths - np.abs(mean) ** 2, 0.0) * paths / max(paths - 1, 1)
    for j, t in enumerate(t_grid):
        if t == 0:
            mean[j] = P0
            var[j] = 0.0
    samples = np.concatenate(kept, axis=1) if keep_samples else None
    est = SemigroupEstimate(t_grid, mean, np.sqrt(var / paths), paths, samples)
    if A is not None:
        tm = r1 / paths
        tv = np.maximum(r2 / paths - tm**2, 0.0) * paths / max(paths - 1, 1)
        est.tested_mean, est.tested_stderr = tm, np.sqrt(tv / paths)
    return est


@dataclass
class ItoResidual:
    times: np.ndarray
    M: np.ndarray  # (len(times), ..., N, N)

    def tested(self, A: np.ndarray) -> np.ndarray:
        """τ̂(M_t·A) per time and path."""
        return np.real(tau_hat(self.M @ A))


def ito_residual(P, path: SdePath, fam: PotentialFamily | None = None, alpha: float | None = None) -> ItoResidual:
    """M_t = P(X_t) − P(X_0) − ∫₀ᵗ L_αP(X_s) ds with the trapezoid rule on the stored grid."""
    if path.states is None:
        raise ValueError("ito_residual needs a path with stored states")
    fam = fam or path.family
    alpha = path.alpha if alpha is None else alpha
    ev, LP = _evaluator_fn(P), _evaluator_fn(C.generator(P, fam.V_alpha(alpha)))
    Pv = np.stack([ev(X) for X in path.states])
    Lv = np.stack([LP(X) for X in path.states])
    dt = path.dt
    integral = np.concatenate([np.zeros_like(Lv[:1]), np.cumsum(0.5 * dt * (Lv[1:] + Lv[:-1]), axis=0)])
    return ItoResidual(path.times, Pv - Pv[0] - integral)


class _ResidualTracker:
    """Running M_t = P(X_t) − P(X_0) − trapezoid ∫ L P(X_s) ds for a batch of paths."""

    def __init__(self, ev, LP, X, dt):
        self.ev, self.LP, self.dt = ev, LP, dt
        self.P0 = ev(X)
        self.L_prev = LP(X)
        self.integral = np.zeros_like(self.P0)

    def advance(self, X):
        L_now = self.LP(X)
        self.integral += 0.5 * self.dt * (self.L_prev + L_now)
        self.L_prev = L_now

    def value(self, X):
        return self.ev(X) - self.P0 - self.integral


def ito_residual_mc(
    P,
    X0,
    fam: PotentialFamily,
    alpha: float,
    t_grid: Sequence[float],
    paths: int,
    dt: float,
    tests: Sequence[np.ndarray],
    seed: int = 0,
    block: int = 250,
    richardson: bool = False,
) -> dict:
    """Streamed Itô residual over many paths, reduced to τ̂(M_t·A) for each test matrix A.

    ``P`` may be a list; all polynomials then share the same paths.  With
    ``richardson=True`` every path also runs at step 2dt on the summed fine
    increments and 2·M_fine − M_coarse is reported, cancelling the O(dt)
    bias of the Euler step and of the trapezoid rule.

    Returns mean and standard error arrays of shape (len(t_grid), len(tests)),
    one dict per polynomial when a list was given.
    """
    many = isinstance(P, (list, tuple))
    Ps = list(P) if many else [P]
    X0 = herm(np.asarray(as_array(X0), dtype=complex))
    N = X0.shape[-1]
    V_a = fam.V_alpha(alpha)
    fns = [(_evaluator_fn(Q), _evaluator_fn(C.generator(Q, V_a))) for Q in Ps]
    F = fam.field(alpha)
    t_grid = np.asarray(t_grid, dtype=float)
    step = 2 * dt if richardson else dt
    K, _ = _grid(float(t_grid.max()), step)
    want = {}
    for j, t in enumerate(t_grid):
        k = int(round(t / step))
        if abs(k * step - t) > 1e-9:
            raise ValueError(f"t={t} is not on the time grid of step {step}")
        want[k] = j
    A = np.stack([np.asarray(a, dtype=complex) for a in tests])
    vals = [[] for _ in Ps]
    done, b = 0, 0
    while done < paths:
        m = min(block, paths - done)
        rng = stream(seed, b)
        Xf = np.broadcast_to(X0, (m,) + X0.shape).copy()
        Xc = Xf.copy()
        fine = [_ResidualTracker(ev, LP, Xf, dt) for ev, LP in fns]
        coarse = [_ResidualTracker(ev, LP, Xc, 2 * dt) for ev, LP in fns] if richardson else None
        got = np.zeros((len(Ps), len(t_grid), m, len(A)))

        def record(k):
            if k not in want:
                return
            for q in range(len(Ps)):
                M = fine[q].value(Xf)
                if richardson:
                    M = 2 * M - coarse[q].value(Xc)
                got[q, want[k]] = np.real(np.einsum("mij,aji->ma", M, A)) / N

        record(0)
        for k in range(K):
            if richardson:
                d1 = brownian_increment(N, dt, rng, Xf.shape[:-2])
                d2 = brownian_increment(N, dt, rng, Xf.shape[:-2])
                Xf = herm(Xf + d1 - 0.5 * dt * F.grad(Xf))
                for tr in fine:
                    tr.advance(Xf)
                Xf = herm(Xf + d2 - 0.5 * dt * F.grad(Xf))
                for tr in fine:
                    tr.advance(Xf)
                Xc = herm(Xc + d1 + d2 - dt * F.grad(Xc))
                for tr in coarse:
                    tr.advance(Xc)
            else:
                Xf = herm(Xf + brownian_increment(N, dt, rng, Xf.shape[:-2]) - 0.5 * dt * F.grad(Xf))
                for tr in fine:
                    tr.advance(Xf)
            record(k + 1)
        for q in range(len(Ps)):
            vals[q].append(got[q])
        done += m
        b += 1
    out = []
    for q in range(len(Ps)):
        v = np.concatenate(vals[q], axis=1)
        se = v.std(axis=1, ddof=1) / np.sqrt(v.shape[1]) if v.shape[1] > 1 else np.full(v.shape[::2], np.nan)
        out.append({"poly": str(Ps[q]), "times": t_grid, "mean": v.mean(axis=1), "stderr": se, "paths": paths})
    return out if many else out[0]


def generator_check(P, X0, fam: PotentialFamily, alpha: float, t: float, paths: int = 2000, dt: float | None = None, seed: int = 0) -> dict:
    """Compare (φ_t(P) − P)/t with L_αP at X0; returns the gap, its MC error and the O(t) scale."""
    X0 = herm(np.asarray(as_array(X0), dtype=complex))
    dt = dt or t / 20
    est = semigroup_eval(P, X0, fam, alpha, [t], paths, dt, seed=seed, richardson=True)
    P0 = _evaluator_fn(P)(X0)
    LP = _evaluator_fn(C.generator(P, fam.V_alpha(alpha)))(X0)
    fd = (est.mean[0] - P0) / t
    err = fd - LP
    norm = lambda M: float(np.sqrt(np.mean(np.abs(M) ** 2)))
    return {
        "t": t,
        "generator": LP,
        "finite_difference": fd,
        "gap": norm(err),
        "mc_error": norm(est.stderr[0] / t),
        "max_entry_z": float(np.max(np.abs(err) / np.maximum(est.stderr[0] / t, 1e-300))),
    }


__all__ = [
    "BlowupError",
    "Contraction",
    "ItoResidual",
    "PotentialFamily",
    "SdePath",
    "SemigroupEstimate",
    "brownian_increment",
    "coupled_contraction",
    "generator_check",
    "ito_residual",
    "ito_residual_mc",
    "quadratic_family",
    "sde_path",
    "semigroup_eval",
]
