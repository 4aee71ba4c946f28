"""Transport by the interpolation flow dF/dα = 𝒟g_α(F), 𝒟g_α = −½∫₀^∞ 𝒟φ_t^α(W) dt.

The gradient 𝒟φ_t(W)(Y) = N·∇_Y E[τ̂(W(X_t(Y)))] is computed per path by
reverse accumulation through the Euler steps.  The step map
X ↦ X + ΔS − (dt/2)𝒟V_α(X) has Jacobian I − (dt/2)H(X) with H the Hessian
superoperator, which is self-adjoint for ⟨A,B⟩ = Σ Re Tr(AB); so the co-state
obeys λ_k = w_k𝒟W(X_k) + (I − (dt/2)H(X_k))λ_{k+1} and λ₀ is the gradient of
Σ w_k τ̂(W(X_k)) (times N).  States are recomputed segment by segment from
√K checkpoints, with step k's noise drawn from a stream keyed by
(seed, evaluation, chunk, k) so that replays are exact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .freesde import PotentialFamily
from .matrep.ensemble import Ensemble
from .matrep.evaluate import Evaluator, as_array, herm, tau_hat
from .matrep.hessian import HermBasis
from .matrep.sd import monomial_battery, sd_residual
from .ncalg.polys import TracePoly, tau
from .noise import gue, stream


class TransportError(RuntimeError):
    pass


@dataclass
class TransportConfig:
    fam: PotentialFamily
    T: float = 6.0
    dt: float = 0.05
    paths: int = 2
    d_alpha: float = 0.2
    alpha_max: float = 1.0
    mode: str = "adjoint"
    fd_step: float = 1e-4
    seed: int = 0
    antithetic: bool = True
    noise: str = "auto"  # "auto" | "on" | "off"
    tail_tol: float = 1e-2
    R_confine: Optional[float] = None
    mem_mb: float = 300.0
    snapshots: Sequence[float] = ()
    sd_degree: int = 4
    common_noise: bool = False
    reduce_affine: bool = True
    richardson: bool = False
    single: bool = False  # complex64 arithmetic for the Monte Carlo co-state runs
    scheme: str = "heun"  # "heun" | "rk4"
    grid: str = "uniform"  # "uniform" | "graded": α_j = α_max (j/m)^grid_power
    grid_power: float = 2.0

    def __post_init__(self):
        if self.d_alpha <= 0 or self.T <= 0 or self.dt <= 0:
            raise ValueError("d_alpha, T and dt must be positive")
        if self.mode not in ("adjoint", "fd"):
            raise ValueError("mode must be 'adjoint' or 'fd'")
        if self.noise not in ("auto", "on", "off"):
            raise ValueError("noise must be 'auto', 'on' or 'off'")
        if self.scheme not in ("heun", "rk4"):
            raise ValueError("scheme must be 'heun' or 'rk4'")
        if self.grid not in ("uniform", "graded") or self.grid_power < 1:
            raise ValueError("grid must be 'uniform' or 'graded' with grid_power ≥ 1")
        if self.antithetic and self.paths % 2:
            raise ValueError("antithetic sampling needs an even number of paths")

    @property
    def steps(self) -> int:
        K = int(round(self.T / self.dt))
        if abs(K * self.dt - self.T) > 1e-9 * self.T:
            raise ValueError("T must be a multiple of dt")
        return K

    def noise_on(self) -> bool:
        """Noise is dropped for affine drift with quadratic W, where the zero-noise path is exact."""
        if self.noise == "auto":
            return not self.fam.is_affine_drift()
        return self.noise == "on"

    def alpha_grid(self) -> np.ndarray:
        m = int(round(self.alpha_max / self.d_alpha))
        if m < 1 or abs(m * self.d_alpha - self.alpha_max) > 1e-9:
            raise ValueError("alpha_max must be a positive multiple of d_alpha")
        u = np.linspace(0.0, 1.0, m + 1)
        return self.alpha_max * (u if self.grid == "uniform" else u**self.grid_power)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "fam"}
        d["fam"] = self.fam.to_dict()
        d["snapshots"] = list(self.snapshots)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TransportConfig":
        d = dict(d)
        d["fam"] = PotentialFamily.from_dict(d["fam"])
        return cls(**d)


# ---------------------------------------------------------------------------
# reverse accumulation


class _Noise:
    """Per-step noise for a chunk of (batch, paths); antithetic pairs share draws with opposite signs."""

    def __init__(self, seed, key, shape, N, dt, paths, antithetic, on, common):
        self.seed, self.key, self.shape, self.N = seed, key, shape, N
        self.sq, self.paths, self.anti, self.on, self.common = math.sqrt(dt), paths, antithetic, on, common
        self.dtype = complex

    def __call__(self, k: int):
        if not self.on:
            return 0.0
        rng = stream(self.seed, *self.key, k)
        B, P = self.shape[0], self.paths
        rest = self.shape[2:-2]
        base_paths = P // 2 if self.anti else P
        lead = (base_paths,) if self.common else (B, base_paths)
        real = np.float32 if self.dtype == np.complex64 else np.float64
        z = gue(rng, lead + rest, self.N, real) * real(self.sq)
        if self.anti:
            z = np.concatenate([z, -z], axis=-4)
        if self.common:
            z = np.broadcast_to(z, (B,) + z.shape)
        return z


class _Coarse:
    """Step-2dt noise made of consecutive fine increments."""

    def __init__(self, fine):
        self.fine = fine

    def __call__(self, j: int):
        return self.fine(2 * j) + self.fine(2 * j + 1)


def _backprop(Y, fam: PotentialFamily, alpha, K, dt, weights, noise: _Noise, terminal_probe: bool = False):
    """Per-path co-state λ₀ for Σ_k weights[k]·N τ̂(W(X_k)), with Y of shape (B, P, n, N, N).

    Returns (λ₀, X_K, G_T) where G_T is the co-state of the terminal term
    alone, tracked for the first batch item when ``terminal_probe`` is set.
    """
    F = fam.field(alpha)
    Wf = fam.W_field

    def step(X, k, ev=None):
        # 𝒟V of a self-adjoint V is Hermitian up to rounding; symmetrize once per step
        return herm(X + noise(k) - 0.5 * dt * F.grad(X, ev, symmetrize=False))

    s = max(1, int(math.ceil(math.sqrt(K + 1))))
    checkpoints = {0: Y}
    X = Y
    for k in range(K):
        X = step(X, k)
        if (k + 1) % s == 0:
            checkpoints[k + 1] = X
    XK = X
    lam = np.zeros_like(Y)
    mu = Wf.grad(XK[:1]) if terminal_probe else None
    for a in sorted(checkpoints, reverse=True):
        b = min(a + s, K + 1)
        evs = [Evaluator(checkpoints[a])]
        for k in range(a, b - 1):
            evs.append(Evaluator(step(evs[-1].X, k, evs[-1])))
        for k in range(b - 1, a - 1, -1):
            ev = evs.pop()
            if k < K:
                lam = lam - 0.5 * dt * F.hess_apply(ev.X, lam, ev, symmetrize=False)
                if terminal_probe:
                    mu = mu - 0.5 * dt * F.hess_apply(ev.X[:1], mu, symmetrize=False)
            if weights[k]:
                lam = lam + float(weights[k]) * Wf.grad(ev.X, ev, symmetrize=False)
    lam = herm(lam)
    mu = herm(mu) if terminal_probe else None
    return lam, XK, mu


def _trapezoid_weights(K: int, dt: float) -> np.ndarray:
    w = np.full(K + 1, dt)
    w[0] = w[-1] = dt / 2
    return w


def _chunks(B: int, per_item_bytes: float, mem_mb: float):
    size = max(1, int(mem_mb * 2**20 // max(per_item_bytes, 1)))
    for start in range(0, B, size):
        yield start, min(B, start + size)


def _batch(Y) -> np.ndarray:
    Y = herm(np.asarray(as_array(Y), dtype=complex))
    return Y[None] if Y.ndim == 3 else Y


@dataclass
class GradientEstimate:
    mean: np.ndarray  # (B, n, N, N) or (n, N, N)
    stderr: float  # RMS entry standard error, NaN with fewer than two independent draws
    terminal_grad_rms: float = float("nan")  # RMS entry of the measured gradient at t = T


def _adjoint_estimate(Y, fam, alpha, K, dt, weights, paths, seed, key, antithetic, noise_on, mem_mb, common=False, coarse_weights=None, single=False):
    Yb = _batch(Y)
    B, n, N = Yb.shape[0], Yb.shape[1], Yb.shape[-1]
    P = paths if noise_on else 1
    anti = antithetic and noise_on
    s = int(math.ceil(math.sqrt(K + 1)))
    per_item = P * (K // s + 2 * s + 8) * n * N * N * 16
    out = np.empty_like(Yb)
    var_acc, var_count = 0.0, 0
    term = []
    for c, (lo, hi) in enumerate(_chunks(B, per_item, mem_mb)):
        Yc = np.broadcast_to(Yb[lo:hi, None], (hi - lo, P, n, N, N)).astype(np.complex64 if single else complex)
        nz = _Noise(seed, (*key, c), Yc.shape, N, dt, P, anti, noise_on, common)
        nz.dtype = Yc.dtype
        lam, XK, mu = _backprop(Yc, fam, alpha, K, dt, weights, nz, terminal_probe=True)
        if coarse_weights is not None:
            # same paths at step 2dt; 2·fine − coarse cancels the O(dt) bias
            lam_c = _backprop(Yc, fam, alpha, K // 2, 2 * dt, coarse_weights, _Coarse(nz))[0]
            lam = 2 * lam - lam_c
        draws = 0.5 * (lam[:, : P // 2] + lam[:, P // 2 :]) if anti else lam
        out[lo:hi] = draws.mean(axis=1)
        if draws.shape[1] > 1:
            var_acc += float(np.mean(np.var(draws, axis=1, ddof=1) / draws.shape[1]))
            var_count += 1
        term.append(np.sqrt(np.mean(np.abs(mu.mean(axis=1)) ** 2)))
    se = math.sqrt(var_acc / var_count) if var_count else float("nan")
    mean = out if np.ndim(as_array(Y)) == 4 else out[0]
    return GradientEstimate(mean, se, float(np.max(term)))


def _affine_reduced(Y, fam, alpha, K, dt, weights) -> GradientEstimate:
    """Zero-noise adjoint for affine drift and quadratic W, run on 1×1 probes.

    Every operation in the step and co-state recursions then acts on each
    matrix entry through the same n×n letter mixing (constants act through
    the identity), so the gradient is Y ↦ M·Y + m⊗I with M, m read off from
    the probes 0, e_1, …, e_n.  Identical arithmetic to the full run.
    """
    Yb = _batch(Y)
    n, N = Yb.shape[1], Yb.shape[-1]
    probes = np.zeros((n + 1, 1, n, 1, 1), dtype=complex)
    for j in range(n):
        probes[j + 1, 0, j] = 1.0
    lam, XK, mu = _backprop(probes, fam, alpha, K, dt, weights, _Noise(0, (), probes.shape, 1, dt, 1, False, False, False), terminal_probe=True)
    m = lam[0, 0, :, 0, 0].real
    M = (lam[1:, 0, :, 0, 0].real - m[None, :]).T  # M[i, j] = response of letter i to e_j
    out = np.einsum("ij,bjxy->bixy", M, Yb) + m[None, :, None, None] * np.eye(N)
    # the terminal gradient is affine in Y as well; evaluate it on the batch
    mu_all = _backprop(probes, fam, alpha, K, dt, np.eye(K + 1)[K], _Noise(0, (), probes.shape, 1, dt, 1, False, False, False))[0]
    m_T = mu_all[0, 0, :, 0, 0].real
    M_T = (mu_all[1:, 0, :, 0, 0].real - m_T[None, :]).T
    G_T = np.einsum("ij,bjxy->bixy", M_T, Yb[:1]) + m_T[None, :, None, None] * np.eye(N)
    term = float(np.sqrt(np.mean(np.abs(G_T) ** 2)))
    mean = out if np.ndim(as_array(Y)) == 4 else out[0]
    return GradientEstimate(mean, float("nan"), term)


def _fd_estimate(W_eval, Y, fam, alpha, K, dt, paths, seed, eps, antithetic=False, noise_on=True):
    """Central differences of N·E τ̂(Σ_k w_k W(X_k)) along the Hermitian basis, common noise across starts."""
    Y = herm(np.asarray(as_array(Y), dtype=complex))
    if Y.ndim != 3:
        raise ValueError("finite differences take a single tuple")
    n, N = Y.shape[0], Y.shape[-1]
    basis = HermBasis(n, N)
    E = np.stack([basis.from_vec(e) for e in np.eye(basis.dim)])
    starts = np.concatenate([Y + eps * E, Y - eps * E])
    F = fam.field(alpha)
    rng = stream(seed, 99)
    paths = paths if noise_on else 1
    X = np.broadcast_to(starts[:, None], (len(starts), paths, n, N, N)).copy()
    acc = W_eval(X, 0)
    for k in range(K):
        if noise_on:
            half = paths // 2 if antithetic else paths
            z = gue(rng, (half, n), N) * math.sqrt(dt)
            z = np.concatenate([z, -z]) if antithetic else z
            X = herm(X + z[None] - 0.5 * dt * F.grad(X))
        else:
            X = herm(X - 0.5 * dt * F.grad(X))
        acc = acc + W_eval(X, k + 1)
    vals = acc.mean(axis=1)
    g = N * (vals[: basis.dim] - vals[basis.dim :]) / (2 * eps)
    return basis.from_vec(g)


def semigroup_gradient(
    Y,
    fam: PotentialFamily,
    alpha: float,
    t: float,
    paths: int = 16,
    dt: float = 0.01,
    seed: int = 0,
    mode: str = "adjoint",
    fd_step: float = 1e-4,
    antithetic: bool = True,
    noise: bool = True,
) -> GradientEstimate:
    """G = N·∇_Y E[τ̂(W(X_t(Y)))], the finite-N 𝒟φ_t(W)(Y); adjoint or finite-difference mode."""
    K = int(round(t / dt)) if t > 0 else 0
    if K and abs(K * dt - t) > 1e-9:
        raise ValueError("t must be a multiple of dt")
    weights = np.zeros(K + 1)
    weights[K] = 1.0
    if mode == "adjoint":
        return _adjoint_estimate(Y, fam, alpha, K, dt, weights, paths, seed, (0,), antithetic, noise, 300.0)
    if mode != "fd":
        raise ValueError("mode must be 'adjoint' or 'fd'")
    Wt = _tau_W(fam)

    def W_eval(X, k):
        return np.real(Evaluator(X).scalar(Wt)) if k == K else 0.0

    g = _fd_estimate(W_eval, Y, fam, alpha, K, dt, paths, seed, fd_step, antithetic and noise, noise)
    return GradientEstimate(g, float("nan"))


def _tau_W(fam: PotentialFamily) -> TracePoly:
    return tau(TracePoly.from_poly(fam.W.to_float()))


def adjoint_fd_pair(Y, fam: PotentialFamily, alpha: float, t: float, paths: int = 4, dt: float = 0.01, seed: int = 0, eps: float = 1e-4):
    """Adjoint and FD gradients of N·E τ̂(W(X_t)) on the same noise (matched seeds)."""
    Y = herm(np.asarray(as_array(Y), dtype=complex))
    n, N = Y.shape[0], Y.shape[-1]
    K = int(round(t / dt))
    F = fam.field(alpha)
    rng = stream(seed, 98)
    Z = gue(rng, (K, paths, n), N) * math.sqrt(dt)
    weights = np.zeros(K + 1)
    weights[K] = 1.0

    class Replay:
        def __call__(self, k):
            return Z[k][None]

    lam = _backprop(np.broadcast_to(Y, (1, paths, n, N, N)).copy(), fam, alpha, K, dt, weights, Replay())[0]
    adj = lam[0].mean(axis=0)

    basis = HermBasis(n, N)
    E = np.stack([basis.from_vec(e) for e in np.eye(basis.dim)])
    X = np.broadcast_to(np.concatenate([Y + eps * E, Y - eps * E])[:, None], (2 * basis.dim, paths, n, N, N)).copy()
    for k in range(K):
        X = herm(X + Z[k][None] - 0.5 * dt * F.grad(X))
    f = np.real(Evaluator(X).scalar(_tau_W(fam))).mean(axis=1)
    fd = basis.from_vec(N * (f[: basis.dim] - f[basis.dim :]) / (2 * eps))
    rel = float(np.linalg.norm(adj - fd) / max(np.linalg.norm(fd), 1e-300))
    return adj, fd, rel


@dataclass
class DgEstimate:
    value: np.ndarray
    stderr: float
    tail_bound: float
    c_alpha: Optional[float]


def dg_eval(Y, fam: PotentialFamily, alpha: float, cfg: TransportConfig, eval_id: int = 0) -> DgEstimate:
    """−½∫₀^T 𝒟φ_t^α(W)(Y) dt by the trapezoid rule on one path bundle per sample."""
    K = cfg.steps
    w = _trapezoid_weights(K, cfg.dt)
    if cfg.mode == "fd":
        Yb = _batch(Y)
        Wt = _tau_W(fam)
        vals = []
        for y in Yb:
            g = _fd_estimate(lambda X, k: w[k] * np.real(Evaluator(X).scalar(Wt)), y, fam, alpha, K, cfg.dt, cfg.paths, cfg.seed + eval_id, cfg.fd_step, cfg.antithetic and cfg.noise_on(), cfg.noise_on())
            vals.append(g)
        value = -0.5 * np.stack(vals)
        value = value if np.ndim(as_array(Y)) == 4 else value[0]
        return DgEstimate(value, float("nan"), float("nan"), fam.c_alpha(alpha))
    if cfg.reduce_affine and not cfg.noise_on() and fam.is_affine_drift():
        est = _affine_reduced(Y, fam, alpha, K, cfg.dt, w)
        if cfg.richardson:
            if K % 2:
                raise ValueError("Richardson extrapolation needs an even number of steps")
            coarse = _affine_reduced(Y, fam, alpha, K // 2, 2 * cfg.dt, _trapezoid_weights(K // 2, 2 * cfg.dt))
            est = GradientEstimate(2 * est.mean - coarse.mean, est.stderr, est.terminal_grad_rms)
    else:
        wc = None
        if cfg.richardson:
            if K % 2:
                raise ValueError("Richardson extrapolation needs an even number of steps")
            wc = _trapezoid_weights(K // 2, 2 * cfg.dt)
        est = _adjoint_estimate(
            Y, fam, alpha, K, cfg.dt, w, cfg.paths, cfg.seed, (eval_id,), cfg.antithetic, cfg.noise_on(), cfg.mem_mb, cfg.common_noise, wc, cfg.single
        )
    c = fam.c_alpha(alpha)
    # ‖𝒟φ_{T+s}(W)‖ ≤ e^{−cs/2}‖𝒟φ_T(W)‖ bounds the truncated integral by (2/c)‖G_T‖
    tail = (2.0 / c) * est.terminal_grad_rms if c else float("nan")
    scale = float(np.sqrt(np.mean(np.abs(est.mean) ** 2)))
    if c and tail > cfg.tail_tol * max(scale, 1e-12):
        raise TransportError(f"semigroup tail bound {tail:.3g} exceeds tolerance at α={alpha}; increase T")
    return DgEstimate(-0.5 * est.mean, 0.5 * est.stderr, tail, c)


# ---------------------------------------------------------------------------
# flow


@dataclass
class AlphaDiagnostics:
    alpha: float
    moments: List[float]
    max_op_norm: float
    sd_max_abs: float
    dg_stderr: float
    tail_bound: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FlowResult:
    ensemble: Ensemble
    diagnostics: List[AlphaDiagnostics]
    snapshots: dict = field(default_factory=dict)


def _max_op(X: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(X)).max()) if X.size else 0.0


def _diagnose(alpha, X, fam, cfg, dg_se, tail, battery):
    ev = Evaluator(X)
    mom = [float(np.mean(np.real(ev.trace((0,) * k)))) for k in range(1, 5)]
    sd = sd_residual(X, fam.V_alpha(alpha), battery) if battery else []
    return AlphaDiagnostics(float(alpha), mom, _max_op(X), max((abs(r.mean) for r in sd), default=0.0), dg_se, tail)


def flow_transport(ens: Ensemble, cfg: TransportConfig, progress=None) -> FlowResult:
    """Integrate dX/dα = 𝒟g_α(X) over cfg.alpha_grid() with Heun or RK4; fresh noise for every evaluation."""
    X = np.array(ens.samples, dtype=complex)
    fam = cfg.fam
    battery = monomial_battery(fam.n, cfg.sd_degree) if cfg.sd_degree else []
    R = cfg.R_confine or 4.0 * max(_max_op(X), 1.0)
    grid = cfg.alpha_grid()
    diags = [_diagnose(0.0, X, fam, cfg, 0.0, 0.0, battery)]
    snaps = {}

    def snap(a, X):
        for t in cfg.snapshots:
            if abs(t - a) < 1e-9 and t not in snaps:
                snaps[t] = X.copy()

    snap(0.0, X)
    counter = iter(range(10**9))
    for a0, a1 in zip(grid[:-1], grid[1:]):
        h = float(a1 - a0)
        ds = []

        def vel(Z, a):
            d = dg_eval(Z, fam, float(a), cfg, next(counter))
            ds.append(d)
            return d.value

        if cfg.scheme == "heun":
            k1 = vel(X, a0)
            k2 = vel(herm(X + h * k1), a1)
            X = herm(X + 0.5 * h * (k1 + k2))
        else:
            k1 = vel(X, a0)
            k2 = vel(herm(X + 0.5 * h * k1), a0 + 0.5 * h)
            k3 = vel(herm(X + 0.5 * h * k2), a0 + 0.5 * h)
            k4 = vel(herm(X + h * k3), a1)
            X = herm(X + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))
        ses = [d.stderr for d in ds if not math.isnan(d.stderr)]
        se = max(ses) if ses else float("nan")
        diag = _diagnose(float(a1), X, fam, cfg, se, max(d.tail_bound for d in ds), battery)
        diags.append(diag)
        if progress:
            progress(diag)
        if diag.max_op_norm > R:
            raise TransportError(f"flowed samples left the confinement ball (‖X‖={diag.max_op_norm:.3g} > {R:.3g}) at α={a1:.3g}")
        snap(float(a1), X)
    meta = dict(ens.meta)
    meta["transport"] = cfg.to_dict()
    meta["diagnostics"] = [d.to_dict() for d in diags]
    return FlowResult(Ensemble(X, meta), diags, snaps)


def pushforward_check(flowed: Ensemble, V_alpha, battery=None, reference: Ensemble | None = None) -> dict:
    """SD residuals of the flowed ensemble and, if given, moment distances to a reference ensemble."""
    if battery is None:
        battery = monomial_battery(flowed.n, 4)
    report = {"sd": [r.to_dict() for r in sd_residual(flowed.samples, V_alpha, battery)] if battery else []}
    if reference is not None and battery:
        evf, evr = Evaluator(flowed.samples), Evaluator(reference.samples)
        rows = []
        for P in battery:
            (w, _), = P.items() if len(P) == 1 else (next(iter(P.items())),)
            f, r = np.real(evf.trace(w)), np.real(evr.trace(w))
            se = math.sqrt(np.var(f, ddof=1) / len(f) + np.var(r, ddof=1) / len(r))
            rows.append({"word": str(P), "flowed": float(f.mean()), "reference": float(r.mean()), "diff": float(f.mean() - r.mean()), "stderr": se})
        report["moments"] = rows
    return report


def jacobian_proxy(Y, cfg: TransportConfig, probe=None, eps: float = 1e-3, seed: int = 0) -> float:
    """‖(F(Y+εH) − F(Y))/ε − H‖/‖H‖ for one probe direction, both flows on common noise."""
    Y = herm(np.asarray(as_array(Y), dtype=complex))
    if probe is None:
        rng = np.random.default_rng(seed)
        probe = herm(rng.standard_normal(Y.shape) + 1j * rng.standard_normal(Y.shape))
    probe = probe / np.sqrt(np.sum(np.abs(probe) ** 2))
    c2 = TransportConfig(**{**{k: getattr(cfg, k) for k in cfg.__dataclass_fields__}, "common_noise": True, "sd_degree": 0})
    res = flow_transport(Ensemble(np.stack([Y, Y + eps * probe])), c2)
    D = (res.ensemble.samples[1] - res.ensemble.samples[0]) / eps
    return float(np.sqrt(np.sum(np.abs(D - probe) ** 2)))


__all__ = [
    "AlphaDiagnostics",
    "DgEstimate",
    "FlowResult",
    "GradientEstimate",
    "TransportConfig",
    "TransportError",
    "adjoint_fd_pair",
    "dg_eval",
    "flow_transport",
    "jacobian_proxy",
    "pushforward_check",
    "semigroup_gradient",
]
