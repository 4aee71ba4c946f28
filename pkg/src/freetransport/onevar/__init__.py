"""One-variable reference stack: equilibrium measures, quantile maps, classical grid transport."""

from .classical import (
    ClassicalTransport,
    ClassicalTransportError,
    GibbsDensity,
    GridFunc,
    PoissonSolve,
    classical_transport_1d,
    poisson_cn,
    poisson_velocity_direct,
    quantile_transport,
    uniform_grid,
)
from .equilibrium import (
    EqMeasure,
    EquilibriumError,
    as_polynomial,
    cdf_quantile,
    equilibrium_measure,
    pv_residual,
    quartic_endpoint,
    sd_quadrature_residual,
    spectral_ks,
)

__all__ = [
    "ClassicalTransport",
    "ClassicalTransportError",
    "EqMeasure",
    "EquilibriumError",
    "GibbsDensity",
    "GridFunc",
    "PoissonSolve",
    "as_polynomial",
    "cdf_quantile",
    "classical_transport_1d",
    "equilibrium_measure",
    "poisson_cn",
    "poisson_velocity_direct",
    "pv_residual",
    "quantile_transport",
    "quartic_endpoint",
    "sd_quadrature_residual",
    "spectral_ks",
    "uniform_grid",
]
