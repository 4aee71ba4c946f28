"""Convexity certificates for the structured quartic family, and the 2×2
example showing that the naive matrix monotonicity notion fails for X⁴.

For υ(x) = ν2 x²/2 + ν3 x³/3 + ν4 x⁴/4 the Hessian ∂𝒟υ(X) splits into a
positive part plus (ν2 − 3ν3²/(8ν4))·1⊗1, so υ is h-convex with constant
m = ν2 − 3ν3²/(8ν4) whenever ν4 > 0 and ν3² ≤ 8ν2ν4/3.  For
V = Σ_j μ_j υ_j(λ_j·X) + Σ_ij A_ij X_i X_j the Hessian is bounded below by
the scalar matrix 2A + Σ_j μ_j m_j λ_j λ_jᵀ.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np
import sympy

from ..ncalg.potential import PotentialSpec

CLAIM_TOL = 1e-12


@dataclass
class Certificate:
    certified: bool
    c: Optional[float] = None
    c_stated: Optional[float] = None
    reason: str = ""
    column_margins: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "c": self.c,
            "c_stated": self.c_stated,
            "reason": self.reason,
            "column_margins": self.column_margins,
        }


def column_constant(nu2: Fraction, nu3: Fraction, nu4: Fraction) -> Fraction:
    """m = ν2 − 3ν3²/(8ν4), the constant left over in the Hessian of υ."""
    return nu2 - Fraction(3, 8) * nu3 * nu3 / nu4


def certify_convexity(spec: PotentialSpec) -> Certificate:
    """Certify (c, R) h-convexity for every R, or reject with a reason."""
    if spec.kind != "quartic":
        return Certificate(False, reason="no symbolic certificate for generic potentials; use hessian_min_eig")
    margins = []
    for j, (nu2, nu3, nu4) in enumerate(spec.nu):
        if spec.mu[j] == 0:
            margins.append(0.0)
            continue
        if nu4 <= 0:
            return Certificate(False, reason=f"column {j}: quartic coefficient {nu4} is not positive")
        if nu3 * nu3 > Fraction(8, 3) * nu2 * nu4:
            return Certificate(
                False,
                reason=f"column {j}: cubic coefficient violates ν3² ≤ 8ν2ν4/3 ({nu3 * nu3} > {Fraction(8, 3) * nu2 * nu4})",
            )
        margins.append(float(column_constant(nu2, nu3, nu4)))
    A = np.array([[float(v) for v in r] for r in spec.A])
    lam = np.array([[float(v) for v in r] for r in spec.lam]).reshape(spec.n, len(spec.mu))
    S = 2.0 * A
    for j, m in enumerate(spec.mu):
        S = S + float(m) * margins[j] * np.outer(lam[:, j], lam[:, j])
    c = float(np.linalg.eigvalsh(S)[0])
    c_stated = float(np.linalg.eigvalsh(A)[0])
    if abs(c) < CLAIM_TOL:
        c = 0.0
    if c < 0:
        return Certificate(False, c=c, c_stated=c_stated, reason=f"lower Hessian bound {c:.6g} is negative", column_margins=margins)
    if spec.c_claim is not None and spec.c_claim > c + CLAIM_TOL:
        return Certificate(
            False, c=c, c_stated=c_stated, reason=f"claimed c={spec.c_claim} exceeds certified {c:.6g}", column_margins=margins
        )
    return Certificate(True, c=c, c_stated=c_stated, column_margins=margins)


def counterexample_pair():
    """The 2×2 pair X = diag(1, −6), Y = [[1, √11/4], [√11/4, −5]] (exact)."""
    r = sympy.sqrt(11) / 4
    X = sympy.Matrix([[1, 0], [0, -6]])
    Y = sympy.Matrix([[1, r], [r, -5]])
    return X, Y


def old_convexity_form_exact():
    """S = (𝒟V(X)−𝒟V(Y))(X−Y) + (X−Y)(𝒟V(X)−𝒟V(Y)) for V = X⁴, exactly."""
    X, Y = counterexample_pair()
    D = 4 * X**3 - 4 * Y**3
    S = sympy.simplify(D * (X - Y) + (X - Y) * D)
    eigs = [sympy.nsimplify(sympy.simplify(e)) for e in S.eigenvals()]
    return S, min(eigs, key=lambda e: float(e))


def old_convexity_counterexample():
    """Return (S as a float matrix, its minimum eigenvalue, exact minimum eigenvalue)."""
    S, lo = old_convexity_form_exact()
    Sf = np.array(S.evalf(30).tolist(), dtype=complex)
    w = np.linalg.eigvalsh(Sf)
    if not w[0] < 0:
        raise AssertionError("old convexity form is non-negative; counterexample broken")
    return Sf, float(w[0]), lo
