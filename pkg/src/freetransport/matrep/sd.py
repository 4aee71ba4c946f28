"""Schwinger–Dyson residuals of finite-N ensembles and of deterministic laws."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from ..ncalg.calculus import sd_residual_expr
from ..ncalg.polys import NCPoly, TracePoly
from ..ncalg.words import Word, word_str
from .evaluate import Evaluator


@dataclass
class SDResidual:
    label: str
    letter: int
    mean: float
    stderr: float
    rms: float

    def to_dict(self) -> dict:
        return {"poly": self.label, "letter": self.letter, "mean": self.mean, "stderr": self.stderr, "rms": self.rms}


def monomial_battery(n: int, max_degree: int = 4, min_degree: int = 1) -> List[NCPoly]:
    """All words of length min_degree..max_degree up to cyclic-free duplicates kept."""
    out = []
    for d in range(min_degree, max_degree + 1):
        for idx in np.ndindex(*(n,) * d):
            out.append(NCPoly.monomial(idx, n))
    return out


def _pairs(test_polys, V: NCPoly):
    for P in test_polys:
        if isinstance(P, tuple):
            P, i = P
            yield P, i
        else:
            for i in range(V.n):
                yield P, i


def _label(P) -> str:
    if len(P) == 1:
        (w, c), = P.items()
        if c == 1:
            return word_str(w, P.n)
    return str(P)


def sd_residual(samples: np.ndarray, V: NCPoly, test_polys: Sequence, factorized: bool = False) -> List[SDResidual]:
    """Per-sample SD defects τ̂⊗τ̂(∂_iP) − τ̂(P𝒟_iV), averaged over samples.

    ``samples`` has shape (count, n, N, N).  With ``factorized=True`` each
    trace factor is averaged over the ensemble before products are formed,
    i.e. the residual of E[τ̂]⊗E[τ̂] rather than E[τ̂⊗τ̂]; ``stderr`` and
    ``rms`` are then not defined and reported as NaN.

    ``rms`` is the root-mean-square single-sample defect, whose size reflects
    the O(1/N) fluctuation of one matrix draw around the SD relation.
    """
    samples = np.asarray(samples)
    if samples.shape[0] == 0:
        raise ValueError("empty ensemble")
    ev = Evaluator(samples)
    out = []
    for P, i in _pairs(test_polys, V):
        expr = sd_residual_expr(P, V, i)
        if factorized:
            val = 0.0
            for (_, t), c in expr.items():
                term = complex(c)
                for u in t:
                    term *= np.mean(ev.trace(u))
                val += term
            out.append(SDResidual(_label(P), i, float(np.real(val)), float("nan"), float("nan")))
            continue
        r = np.real(ev.scalar(expr))
        m = len(r)
        se = float(np.std(r, ddof=1) / np.sqrt(m)) if m > 1 else float("nan")
        out.append(SDResidual(_label(P), i, float(np.mean(r)), se, float(np.sqrt(np.mean(r**2)))))
    return out


def sd_residual_law(tau: Callable[[Word], complex], V: NCPoly, test_polys: Sequence) -> List[Tuple[str, int, float]]:
    """SD residual of a deterministic law given by its trace functional on words."""
    out = []
    for P, i in _pairs(test_polys, V):
        expr = sd_residual_expr(P, V, i)
        val = 0.0
        for (_, t), c in expr.items():
            term = complex(c)
            for u in t:
                term *= tau(u)
            val += term
        out.append((_label(P), i, float(np.real(val))))
    return out


def moment_law_1d(moments: Callable[[int], float]) -> Callable[[Word], float]:
    """Trace functional of a one-variable law from its moment sequence."""
    return lambda w: moments(len(w))


def tracepoly_expectation(expr: TracePoly, samples: np.ndarray) -> Tuple[float, float]:
    """Mean and standard error of a scalar trace polynomial over samples."""
    r = np.real(Evaluator(samples).scalar(expr))
    return float(np.mean(r)), float(np.std(r, ddof=1) / np.sqrt(len(r)))
