"""Finite-N Hermitian representations of the symbolic calculus."""

from .convexity import Certificate, certify_convexity, old_convexity_counterexample, old_convexity_form_exact
from .ensemble import Ensemble, load_hmt1, save_hmt1
from .evaluate import (
    Evaluator,
    MatrixTuple,
    eval_poly,
    eval_scalar,
    eval_tensor_apply,
    eval_tensor_elementary,
    eval_trace_poly,
    herm,
    random_hermitian,
    retr,
    tau_hat,
)
from .field import PotentialField
from .hessian import HermBasis, HessianOperator, MinEig, NonConvergence, hessian_min_eig
from .sd import SDResidual, monomial_battery, moment_law_1d, sd_residual, sd_residual_law

__all__ = [
    "Certificate",
    "Ensemble",
    "Evaluator",
    "HermBasis",
    "HessianOperator",
    "MatrixTuple",
    "MinEig",
    "NonConvergence",
    "PotentialField",
    "SDResidual",
    "certify_convexity",
    "eval_poly",
    "eval_scalar",
    "eval_tensor_apply",
    "eval_tensor_elementary",
    "eval_trace_poly",
    "herm",
    "hessian_min_eig",
    "load_hmt1",
    "moment_law_1d",
    "monomial_battery",
    "old_convexity_counterexample",
    "old_convexity_form_exact",
    "random_hermitian",
    "retr",
    "save_hmt1",
    "sd_residual",
    "sd_residual_law",
    "tau_hat",
]
