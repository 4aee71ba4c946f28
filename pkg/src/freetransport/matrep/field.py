"""Batched evaluation of a potential: N·Tr V, the gradient 𝒟V and its Hessian action."""

from __future__ import annotations

from typing import List

import numpy as np

from ..ncalg.calculus import cyclic_gradient, hessian
from ..ncalg.polys import NCPoly, TracePoly
from .evaluate import Evaluator, herm


class PotentialField:
    """V evaluated on arrays (..., n, N, N); symbolic work happens once, here."""

    def __init__(self, V: NCPoly):
        if not V.is_self_adjoint():
            raise ValueError("potential must be self-adjoint")
        self.V = V
        self.n = V.n
        self._V = TracePoly.from_poly(V)
        self._grad: List[TracePoly] = [TracePoly.from_poly(g) for g in cyclic_gradient(V)]
        self._kernels = None

    def grad(self, X: np.ndarray, ev: Evaluator | None = None, symmetrize: bool = True) -> np.ndarray:
        """𝒟V(X), stacked over letters."""
        ev = ev or Evaluator(X)
        G = np.stack([ev.poly(g) for g in self._grad], axis=-3)
        return herm(G) if symmetrize else G

    def energy(self, X: np.ndarray, ev: Evaluator | None = None) -> np.ndarray:
        """N·Re Tr V(X) = N²·τ̂(V(X))."""
        ev = ev or Evaluator(X)
        N = X.shape[-1]
        out = np.zeros(X.shape[:-3])
        for (w, _), c in self._V.items():
            out = out + float(c.real if isinstance(c, complex) else c) * np.real(ev.trace(w))
        return N * N * out

    def hess_apply(self, X: np.ndarray, L: np.ndarray, ev: Evaluator | None = None, symmetrize: bool = True) -> np.ndarray:
        """Directional derivative of 𝒟V at X along L: (Σ_k ∂_k𝒟_jV # L_k)_j."""
        if self._kernels is None:
            self._kernels = hessian(self.V)
        ev = ev or Evaluator(X)
        out = np.zeros(np.broadcast_shapes(X.shape, L.shape), dtype=np.result_type(X.dtype, L.dtype, np.complex64))
        for j in range(self.n):
            for k in range(self.n):
                T = self._kernels[k][j]
                if not T.is_zero():
                    out[..., j, :, :] += ev.tensor_apply(T, L[..., k, :, :])
        return herm(out) if symmetrize else out
