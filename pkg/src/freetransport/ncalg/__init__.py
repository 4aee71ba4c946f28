"""Exact symbolic calculus on non-commutative (trace) polynomials."""

from .calculus import (
    compose,
    compose_tensor,
    cyclic_grad,
    cyclic_grad_subst,
    cyclic_gradient,
    delta_flat,
    delta_V,
    directional,
    fdq,
    fdq_iter,
    flat_total,
    generator,
    hash_op,
    hessian,
    laplacian,
    laplacian_V,
    rho,
    sd_residual_expr,
    sharp,
    sharp_multi,
    tau_legs,
    total_V,
)
from .polys import (
    DegreeError,
    NCPoly,
    TensorPoly,
    TracePoly,
    X,
    as_trace,
    degree_limit,
    one,
    set_degree_limit,
    tau,
)
from .potential import PotentialSpec, parse_poly, quadratic, quartic_1d
from .words import Word, cyclic_min

__all__ = [
    "DegreeError",
    "NCPoly",
    "PotentialSpec",
    "TensorPoly",
    "TracePoly",
    "Word",
    "X",
    "as_trace",
    "compose",
    "compose_tensor",
    "cyclic_grad",
    "cyclic_grad_subst",
    "cyclic_gradient",
    "cyclic_min",
    "degree_limit",
    "delta_V",
    "delta_flat",
    "directional",
    "fdq",
    "fdq_iter",
    "flat_total",
    "generator",
    "hash_op",
    "hessian",
    "laplacian",
    "laplacian_V",
    "one",
    "parse_poly",
    "quadratic",
    "quartic_1d",
    "rho",
    "sd_residual_expr",
    "set_degree_limit",
    "sharp",
    "sharp_multi",
    "tau",
    "tau_legs",
    "total_V",
]
