"""Random rational polynomials for identity testing."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .polys import NCPoly, TracePoly


def _coeff(rng: np.random.Generator) -> Fraction:
    num = int(rng.integers(-5, 6)) or 1
    return Fraction(num, int(rng.integers(1, 4)))


def _word(rng, n, deg):
    return tuple(int(x) for x in rng.integers(0, n, size=int(rng.integers(0, deg + 1))))


def random_ncpoly(rng: np.random.Generator, n: int, deg: int, terms: int = 4) -> NCPoly:
    return NCPoly({_word(rng, n, deg): _coeff(rng) for _ in range(terms)}, n)


def random_self_adjoint(rng, n: int, deg: int, terms: int = 3) -> NCPoly:
    return random_ncpoly(rng, n, deg, terms).symmetrize()


def random_tracepoly(rng, n: int, deg: int, terms: int = 3, max_traces: int = 2) -> TracePoly:
    """Terms w·∏τ(u_k) whose total degree is at most ``deg``."""
    out = {}
    for _ in range(terms):
        budget = int(rng.integers(0, deg + 1))
        ntr = int(rng.integers(0, max_traces + 1))
        cuts = np.sort(rng.integers(0, budget + 1, size=ntr))
        lengths = np.diff(np.concatenate([[0], cuts, [budget]]))
        words = [tuple(int(x) for x in rng.integers(0, n, size=int(L))) for L in lengths]
        out[(words[-1], tuple(words[:-1]))] = _coeff(rng)
    return TracePoly(out, n)
