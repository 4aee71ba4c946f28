"""Evaluation of symbolic objects on tuples of Hermitian matrices.

Matrix tuples are arrays of shape ``(..., n, N, N)``; any leading axes are
batch axes and are carried through every evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from ..ncalg.polys import NCPoly, TensorPoly, TracePoly
from ..ncalg.words import EMPTY, Word

HERM_TOL = 1e-12


def herm(M: np.ndarray) -> np.ndarray:
    """(M + M*)/2 over the last two axes."""
    return 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))


def tau_hat(M: np.ndarray) -> np.ndarray:
    """Normalized trace over the last two axes."""
    return np.trace(M, axis1=-2, axis2=-1) / M.shape[-1]


def retr(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Σ_i Re Tr(A_i B_i) over the tuple axis (third from last)."""
    return np.einsum("...ijk,...ikj->...", A, B).real


def hermitian_defect(M: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    return float(np.max(np.abs(M - np.conj(np.swapaxes(M, -1, -2))))) / scale if M.size else 0.0


def _coeff(c):
    return complex(c) if isinstance(c, complex) else float(c)


def _bcast(s, dtype):
    """Coefficient ready to scale (..., N, N) blocks without promoting their precision."""
    if np.ndim(s) == 0:
        return s
    return np.asarray(s, dtype=dtype)[..., None, None]


def check_tuple(X: np.ndarray, n: int | None = None) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim < 3 or X.shape[-1] != X.shape[-2]:
        raise ValueError(f"expected an array (..., n, N, N), got shape {X.shape}")
    if n is not None and X.shape[-3] != n:
        raise ValueError(f"polynomial has {n} letters but the tuple has {X.shape[-3]} matrices")
    return X


@dataclass(frozen=True)
class MatrixTuple:
    """n Hermitian N×N matrices, stored as one array of shape (n, N, N)."""

    mats: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.mats, dtype=complex)
        if M.ndim == 2:
            M = M[None]
        check_tuple(M)
        if M.ndim != 3:
            raise ValueError("a MatrixTuple holds a single (n, N, N) array")
        if hermitian_defect(M) > HERM_TOL:
            raise ValueError(f"matrices are not Hermitian (defect {hermitian_defect(M):.2e})")
        object.__setattr__(self, "mats", herm(M))

    @property
    def n(self) -> int:
        return self.mats.shape[0]

    @property
    def N(self) -> int:
        return self.mats.shape[1]

    def op_norms(self) -> np.ndarray:
        return np.abs(np.linalg.eigvalsh(self.mats)).max(axis=-1)


def as_array(X) -> np.ndarray:
    return X.mats if isinstance(X, MatrixTuple) else np.asarray(X)


class Evaluator:
    """Memoized word products on a (batched) matrix tuple."""

    def __init__(self, X):
        self.X = check_tuple(as_array(X))
        self.N = self.X.shape[-1]
        self._memo: Dict[Word, np.ndarray] = {}
        self._tr: Dict[Word, np.ndarray] = {}
        self._cdtype = np.result_type(self.X.dtype, np.complex64)

    @property
    def batch_shape(self):
        return self.X.shape[:-3]

    def word(self, w: Word) -> np.ndarray:
        if not w:
            eye = np.eye(self.N, dtype=self.X.dtype)
            return np.broadcast_to(eye, self.batch_shape + eye.shape)
        got = self._memo.get(w)
        if got is None:
            if len(w) == 1:
                got = self.X[..., w[0], :, :]
            else:
                # split in halves so that powers reuse squares
                h = len(w) // 2
                got = self.word(w[:h]) @ self.word(w[h:])
            self._memo[w] = got
        return got

    def trace(self, w: Word) -> np.ndarray:
        got = self._tr.get(w)
        if got is None:
            if not w:
                got = np.ones(self.batch_shape)
            elif len(w) >= 2:
                # τ̂(ab) without forming ab
                h = len(w) // 2
                A, B = self.word(w[:h]), self.word(w[h:])
                got = np.einsum("...ij,...ji->...", A, B) / self.N
            else:
                got = tau_hat(self.word(w))
            self._tr[w] = got
        return got

    def _scalar(self, traces, c):
        s = _coeff(c)
        for u in traces:
            s = s * self.trace(u)
        return s

    def poly(self, P) -> np.ndarray:
        if isinstance(P, NCPoly):
            P = TracePoly.from_poly(P)
        if P.n > self.X.shape[-3]:
            raise ValueError("polynomial uses more letters than the tuple provides")
        out = np.zeros(self.batch_shape + (self.N, self.N), dtype=self._cdtype)
        for (b, t), c in P.items():
            out = out + _bcast(self._scalar(t, c), out.dtype) * self.word(b)
        return out

    def scalar(self, P: TracePoly) -> np.ndarray:
        """Evaluate a pure-trace polynomial to (batched) numbers."""
        if not P.is_scalar():
            raise ValueError("expected a pure-trace polynomial")
        out = np.zeros(self.batch_shape, dtype=complex)
        for (_, t), c in P.items():
            out = out + self._scalar(t, c)
        return out

    def tensor_apply(self, T: TensorPoly, H) -> np.ndarray:
        """Σ c·a(X) H b(X) over two-leg terms (a⊗b)."""
        if T.legs != 2:
            raise ValueError("tensor_apply expects a two-leg tensor")
        H = np.asarray(H)
        out = np.zeros(np.broadcast_shapes(self.batch_shape, H.shape[:-2]) + (self.N, self.N), dtype=np.result_type(self._cdtype, H.dtype))
        for ((a, b), t), c in T.items():
            s = _bcast(self._scalar(t, c), out.dtype)
            left = H if not a else self.word(a) @ H
            out = out + s * (left if not b else left @ self.word(b))
        return out


def eval_poly(P, X) -> np.ndarray:
    return Evaluator(X).poly(P)


def eval_trace_poly(P: TracePoly, X) -> np.ndarray:
    return Evaluator(X).poly(P)


def eval_tensor_apply(T: TensorPoly, X, H) -> np.ndarray:
    return Evaluator(X).tensor_apply(T, H)


def eval_scalar(P: TracePoly, X) -> np.ndarray:
    return Evaluator(X).scalar(P)


def eval_tensor_elementary(T: TensorPoly, X, Hs: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate a k-leg tensor contracted with k−1 matrices: a0 H1 a1 H2 ... a(k−1)."""
    ev = Evaluator(X)
    if len(Hs) != T.legs - 1:
        raise ValueError(f"{T.legs}-leg tensor takes {T.legs - 1} matrices")
    shape = np.broadcast_shapes(ev.batch_shape, *(np.shape(H)[:-2] for H in Hs))
    out = np.zeros(shape + (ev.N, ev.N), dtype=complex)
    for (ws, t), c in T.items():
        M = ev.word(ws[0])
        for H, w in zip(Hs, ws[1:]):
            M = M @ H @ ev.word(w)
        out = out + np.asarray(ev._scalar(t, c))[..., None, None] * M
    return out


def random_hermitian(rng: np.random.Generator, shape, N: int, scale: float = 1.0) -> np.ndarray:
    """Hermitian matrices with GUE entries of variance scale²/N."""
    shape = tuple(np.atleast_1d(shape)) if shape != () else ()
    G = rng.standard_normal(shape + (N, N)) + 1j * rng.standard_normal(shape + (N, N))
    return herm(G) * (scale / np.sqrt(N))


__all__ = [
    "EMPTY",
    "Evaluator",
    "MatrixTuple",
    "as_array",
    "eval_poly",
    "eval_scalar",
    "eval_tensor_apply",
    "eval_tensor_elementary",
    "eval_trace_poly",
    "herm",
    "hermitian_defect",
    "random_hermitian",
    "retr",
    "tau_hat",
]
