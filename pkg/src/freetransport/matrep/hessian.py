"""The Hessian superoperator of X ↦ Tr V(X) on (Herm_N)^n.

(H#Λ)_j = Σ_k ∂_k𝒟_jV(X) # Λ_k, symmetric for ⟨A,B⟩ = Σ_i Re Tr(A_i B_i).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from ..ncalg.calculus import hessian
from ..ncalg.polys import NCPoly
from .evaluate import Evaluator, as_array, herm, retr


class HermBasis:
    """Orthonormal real coordinates on (Herm_N)^n for Σ Re Tr(AB)."""

    def __init__(self, n: int, N: int):
        self.n, self.N = n, N
        self.iu = np.triu_indices(N, 1)
        self.dim = n * N * N

    def to_vec(self, H: np.ndarray) -> np.ndarray:
        d = np.diagonal(H, axis1=-2, axis2=-1).real
        up = H[..., self.iu[0], self.iu[1]]
        parts = [d, np.sqrt(2) * up.real, np.sqrt(2) * up.imag]
        return np.concatenate(parts, axis=-1).reshape(H.shape[:-3] + (self.dim,))

    def from_vec(self, v: np.ndarray) -> np.ndarray:
        N, m = self.N, len(self.iu[0])
        v = v.reshape(v.shape[:-1] + (self.n, N * N))
        d, re, im = v[..., :N], v[..., N:N + m], v[..., N + m:]
        H = np.zeros(v.shape[:-1] + (N, N), dtype=complex)
        idx = np.arange(N)
        H[..., idx, idx] = d
        z = (re + 1j * im) / np.sqrt(2)
        H[..., self.iu[0], self.iu[1]] = z
        H[..., self.iu[1], self.iu[0]] = np.conj(z)
        return H


class HessianOperator:
    """Action of the Hessian kernels ∂_k𝒟_jV evaluated at a fixed tuple."""

    def __init__(self, V: NCPoly, X):
        self.V = V
        self.X = as_array(X)
        self.n = self.X.shape[-3]
        if V.n != self.n:
            raise ValueError("potential and tuple disagree on n")
        self.kernels = hessian(V)  # kernels[k][j] = ∂_k 𝒟_j V
        self.ev = Evaluator(self.X)

    def apply(self, L: np.ndarray) -> np.ndarray:
        out = np.zeros(np.broadcast_shapes(self.X.shape, L.shape), dtype=complex)
        for j in range(self.n):
            acc = 0
            for k in range(self.n):
                T = self.kernels[k][j]
                if not T.is_zero():
                    acc = acc + self.ev.tensor_apply(T, L[..., k, :, :])
            out[..., j, :, :] = acc
        return herm(out)

    def symmetry_defect(self, rng: np.random.Generator, trials: int = 3) -> float:
        """max |⟨A,HB⟩ − ⟨HA,B⟩| / (‖A‖‖B‖‖H‖-scale) over random directions."""
        worst = 0.0
        for _ in range(trials):
            A = herm(rng.standard_normal(self.X.shape) + 1j * rng.standard_normal(self.X.shape))
            B = herm(rng.standard_normal(self.X.shape) + 1j * rng.standard_normal(self.X.shape))
            HA, HB = self.apply(A), self.apply(B)
            scale = np.sqrt(retr(A, A) * retr(B, B)) * max(1.0, np.sqrt(retr(HA, HA) / retr(A, A)))
            worst = max(worst, float(abs(retr(A, HB) - retr(HA, B)) / scale))
        return worst


@dataclass
class MinEig:
    value: float
    residual: float
    dim: int
    converged: bool


class NonConvergence(RuntimeError):
    pass


def hessian_min_eig(V: NCPoly, X, iters: int = 2000, tol: float = 1e-10, seed: int = 0) -> MinEig:
    """Smallest eigenvalue of the Hessian superoperator by Lanczos (ARPACK)."""
    op = HessianOperator(V, X)
    X = op.X
    if X.ndim != 3:
        raise ValueError("expected a single (n, N, N) tuple")
    rng = np.random.default_rng(seed)
    defect = op.symmetry_defect(rng)
    if defect > 1e-8:
        raise ValueError(f"Hessian superoperator is not symmetric (defect {defect:.2e})")
    basis = HermBasis(op.n, X.shape[-1])

    def mv(v):
        return basis.to_vec(op.apply(basis.from_vec(np.asarray(v).ravel())))

    if basis.dim <= 64:
        M = np.column_stack([mv(e) for e in np.eye(basis.dim)])
        w, U = np.linalg.eigh(0.5 * (M + M.T))
        return MinEig(float(w[0]), float(np.linalg.norm(mv(U[:, 0]) - w[0] * U[:, 0])), basis.dim, True)
    A = LinearOperator((basis.dim, basis.dim), matvec=mv, dtype=float)
    v0 = rng.standard_normal(basis.dim)
    try:
        w, U = eigsh(A, k=1, which="SA", maxiter=iters, tol=tol, v0=v0)
    except ArpackNoConvergence as exc:
        if len(exc.eigenvalues):
            u = exc.eigenvectors[:, 0]
            res = float(np.linalg.norm(mv(u) - exc.eigenvalues[0] * u))
            raise NonConvergence(f"Lanczos did not converge after {iters} iterations (residual {res:.2e})") from exc
        raise NonConvergence(f"Lanczos did not converge after {iters} iterations") from exc
    u = U[:, 0]
    return MinEig(float(w[0]), float(np.linalg.norm(mv(u) - w[0] * u)), basis.dim, True)
