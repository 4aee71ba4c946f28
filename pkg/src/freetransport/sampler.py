"""Langevin and Metropolis-adjusted Langevin sampling of μ_{V,N} ∝ exp(−N Tr V).

Directions are measured with ⟨A, B⟩ = Σᵢ Re Tr(AᵢBᵢ).  In these coordinates the
proposal Y = X − (h/2)𝒟V(X) + √h·W with W a GUE increment has density
∝ exp(−N‖Y − X + (h/2)𝒟V(X)‖²/(2h)), and the unadjusted chain is the
time-h Euler discretisation of the diffusion whose stationary law is μ_{V,N}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np

from .matrep.ensemble import Ensemble
from .matrep.evaluate import Evaluator, MatrixTuple, as_array, herm, retr, tau_hat
from .matrep.field import PotentialField
from .ncalg.polys import NCPoly
from .ncalg.potential import PotentialSpec
from .noise import gue, stream


class DivergenceError(RuntimeError):
    """A chain left the confinement ball."""


@dataclass
class ChainConfig:
    N: int
    n: int
    target: PotentialSpec
    step: float = 0.1
    burnin: int = 500
    thin: int = 10
    count: int = 100
    mala: bool = True
    seed: int = 0
    chains: Optional[int] = None
    init_scale: float = 1.0
    R_blowup: float = 50.0
    check_every: int = 10
    adapt: bool = True
    target_accept: float = 0.574

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step size h must be positive")
        if self.N < 1 or self.n < 1 or self.count < 1:
            raise ValueError("N, n and count must be positive")
        if self.burnin < 0 or self.thin < 1:
            raise ValueError("burnin must be ≥ 0 and thin ≥ 1")
        if isinstance(self.target, NCPoly):
            self.target = PotentialSpec.from_poly(self.target)
        if self.target.n != self.n:
            raise ValueError(f"target has {self.target.n} letters, config says n={self.n}")

    @property
    def n_chains(self) -> int:
        return min(self.count, self.chains or 32)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["target"] = self.target.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ChainConfig":
        d = dict(d)
        d["target"] = PotentialSpec.from_dict(d["target"])
        return cls(**d)


def _field(V) -> PotentialField:
    if isinstance(V, PotentialField):
        return V
    if isinstance(V, PotentialSpec):
        V = V.to_ncpoly()
    return PotentialField(V)


def langevin_step(X, V, h: float, rng: np.random.Generator) -> MatrixTuple:
    """One unadjusted step Xᵢ ← Xᵢ − (h/2)𝒟ᵢV(X) + √h·Wᵢ."""
    F = _field(V)
    X = as_array(X)
    W = gue(rng, X.shape[:-2], X.shape[-1])
    return MatrixTuple(herm(X - 0.5 * h * F.grad(X) + math.sqrt(h) * W))


def _log_q(Y, X, GX, h, N):
    """log proposal density of Y from X up to a constant."""
    D = Y - X + 0.5 * h * GX
    return -N * retr(D, D) / (2 * h)


def mala_step(X, V, h: float, rng: np.random.Generator) -> Tuple[MatrixTuple, bool]:
    """One Metropolis-adjusted step; on rejection X is returned unchanged."""
    F = _field(V)
    X = as_array(X)
    N = X.shape[-1]
    evx = Evaluator(X)
    GX, UX = F.grad(X, evx), F.energy(X, evx)
    Y = herm(X - 0.5 * h * GX + math.sqrt(h) * gue(rng, X.shape[:-2], N))
    evy = Evaluator(Y)
    GY, UY = F.grad(Y, evy), F.energy(Y, evy)
    log_a = -UY + UX + _log_q(X, Y, GY, h, N) - _log_q(Y, X, GX, h, N)
    ok = bool(np.log(rng.random()) < log_a)
    return MatrixTuple(Y if ok else X), ok


def integrated_time(x: np.ndarray, c: float = 5.0) -> float:
    """Integrated autocorrelation time with Sokal's automatic window.

    ``x`` is (steps,) or (steps, chains); chains share one pooled
    autocorrelation estimate.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    m = x.shape[0]
    if m < 4:
        return float("nan")
    y = x - x.mean(axis=0)
    nfft = 1 << (2 * m - 1).bit_length()
    f = np.fft.rfft(y, n=nfft, axis=0)
    acf = np.fft.irfft(f * np.conj(f), n=nfft, axis=0)[:m].mean(axis=1)
    if acf[0] <= 0:
        return float("nan")
    rho = acf / acf[0]
    taus = 2.0 * np.cumsum(rho) - 1.0
    window = np.arange(m) < c * taus
    M = int(np.argmin(window)) if not window.all() else m - 1
    return float(taus[M])


def _check_norms(X: np.ndarray, R: float, step: int) -> None:
    fro = np.sqrt(np.sum(np.abs(X) ** 2, axis=(-1, -2)))
    if np.all(fro <= R):
        return
    if not np.all(np.isfinite(fro)):
        c, i = np.unravel_index(int(np.argmax(~np.isfinite(fro))), fro.shape)
        raise DivergenceError(f"chain {c} matrix X{i + 1} became non-finite at step {step}")
    ops = np.abs(np.linalg.eigvalsh(X)).max(axis=-1)
    if np.any(ops > R):
        c, i = np.unravel_index(int(np.argmax(ops)), ops.shape)
        raise DivergenceError(
            f"chain {c} matrix X{i + 1} reached operator norm {ops[c, i]:.3g} > R_blowup={R} at step {step}"
        )


def _convexity_warning(spec: PotentialSpec) -> None:
    from .matrep.convexity import certify_convexity
    from .matrep.hessian import hessian_min_eig

    if spec.kind == "quartic":
        cert = certify_convexity(spec)
        if not cert.certified:
            warnings.warn(f"target potential is not certified convex: {cert.reason}", stacklevel=3)
        return
    rng = np.random.default_rng(0)
    from .matrep.evaluate import random_hermitian

    X = random_hermitian(rng, (spec.n,), 4)
    if hessian_min_eig(spec.to_ncpoly(), X).value < -1e-9:
        warnings.warn("target potential has a negative Hessian direction at a random tuple", stacklevel=3)


def sample_ensemble(cfg: ChainConfig) -> Ensemble:
    """Run cfg.n_chains vectorized chains and collect cfg.count thinned samples.

    Chain c draws from its own Philox stream keyed by (seed, c); successive
    steps advance that stream's counter, so the result depends only on cfg.
    """
    _convexity_warning(cfg.target)
    F = _field(cfg.target)
    C, n, N, h = cfg.n_chains, cfg.n, cfg.N, cfg.step
    per_chain = -(-cfg.count // C)
    rngs = [stream(cfg.seed, c) for c in range(C)]

    X = np.stack([gue(r, (n,), N) for r in rngs]) * cfg.init_scale
    ev = Evaluator(X)
    G, U = F.grad(X, ev), F.energy(X, ev)
    steps = cfg.burnin + cfg.thin * per_chain
    accepted = np.zeros(C)
    trace = np.empty((steps - cfg.burnin, C))
    draws = np.empty((per_chain, C, n, N, N), dtype=complex)
    adapting = cfg.mala and cfg.adapt
    for s in range(steps):
        if s == cfg.burnin:
            accepted[:] = 0
        noise = np.stack([gue(r, (n,), N) for r in rngs])
        Y = herm(X - 0.5 * h * G + math.sqrt(h) * noise)
        evy = Evaluator(Y)
        GY = F.grad(Y, evy)
        if cfg.mala:
            UY = F.energy(Y, evy)
            log_a = -UY + U + _log_q(X, Y, GY, h, N) - _log_q(Y, X, G, h, N)
            u = np.array([r.random() for r in rngs])
            acc = np.log(u) < log_a
            X = np.where(acc[:, None, None, None], Y, X)
            G = np.where(acc[:, None, None, None], GY, G)
            U = np.where(acc, UY, U)
        else:
            acc = np.ones(C, dtype=bool)
            X, G = Y, GY
        accepted += acc
        if adapting and s < cfg.burnin:
            # Robbins–Monro on log h; h is frozen once burn-in ends
            h *= math.exp((acc.mean() - cfg.target_accept) / math.sqrt(s + 1.0))
        if s % cfg.check_every == 0 or s == steps - 1:
            _check_norms(X, cfg.R_blowup, s)
        if s >= cfg.burnin:
            k = s - cfg.burnin
            trace[k] = np.sum(np.abs(X[:, 0]) ** 2, axis=(-1, -2)) / N
            if (k + 1) % cfg.thin == 0:
                draws[k // cfg.thin] = X

    samples = draws.reshape(per_chain * C, n, N, N)[: cfg.count]
    max_op = float(np.abs(np.linalg.eigvalsh(samples)).max()) if samples.size else 0.0
    meta = {
        "config": cfg.to_dict(),
        "potential": str(F.V),
        "acceptance": float(accepted.sum() / (C * (steps - cfg.burnin))),
        "acceptance_per_chain": (accepted / (steps - cfg.burnin)).tolist(),
        "step_used": h,
        "iat_tau_x1sq": integrated_time(trace),
        "max_op_norm": max_op,
        "steps": steps,
    }
    return Ensemble(samples, meta)


def gaussian_ensemble(N: int, n: int = 1, count: int = 100, seed: int = 0, c: float = 1.0) -> Ensemble:
    """Exact draws from μ_{V,N} for V = (c/2)ΣXᵢ²: independent GUE matrices scaled by c^{−1/2}."""
    if c <= 0:
        raise ValueError("c must be positive")
    X = np.stack([gue(stream(seed, k), (n,), N) for k in range(count)]) / math.sqrt(c)
    return Ensemble(X, {"exact": "gaussian", "c": c, "seed": seed})


def concentration_check(ens: Ensemble, P, Q) -> dict:
    """Sample covariance of τ̂(P) and τ̂(Q) across the ensemble, with N for scaling studies."""
    ev = Evaluator(ens.samples)
    p = np.real(tau_hat(ev.poly(P)))
    q = np.real(tau_hat(ev.poly(Q)))
    m = len(p)
    prod = (p - p.mean()) * (q - q.mean())
    cov = float(prod.sum() / (m - 1)) if m > 1 else float("nan")
    se = float(np.std(prod, ddof=1) / np.sqrt(m)) if m > 1 else float("nan")
    return {"N": ens.N, "count": m, "cov": cov, "abs_cov": abs(cov), "stderr": se, "N2_cov": ens.N**2 * cov}


__all__ = [
    "ChainConfig",
    "DivergenceError",
    "concentration_check",
    "gaussian_ensemble",
    "integrated_time",
    "langevin_step",
    "mala_step",
    "sample_ensemble",
]
