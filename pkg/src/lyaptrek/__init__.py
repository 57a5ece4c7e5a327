"""Stationary covariances of linear Gaussian SDEs: Lyapunov solves, trek series and acyclic trek sums."""

from .acyclic import (
    TopologicalOrder,
    bound_sweep,
    d_extension_identity_check,
    factor_model,
    factor_model_sigma,
    h_function,
    path_model,
    path_model_sigma,
    sigma_acyclic,
    sigma_acyclic_unit_diagonal,
    tetrad,
    topological_order,
    variance_lower_bound,
)
from .estimator import LyapunovCovariance
from .exceptions import *  # noqa: F401,F403
from .graph import MixedGraph, base_graph, from_matrices, is_stable, rescale_to_contraction, spectral_radius_estimate
from .lan import LanModel, lan_sigma, lan_variance_decomposition
from .lyapunov import SolveReport, integral_quadrature, residual, solve_lyapunov
from .modelfile import ModelFile, cyclic_example, parse_model, read_model, write_model
from .series import SeriesResult, d_coefficient, sigma_base_trek_series, sigma_series
from .treks import (
    BaseTrek,
    SelfLoopProfile,
    Trek,
    enumerate_base_treks,
    enumerate_treks,
    partial_sum,
    rho,
    trek_table,
    trek_term,
    trek_weight,
)

__version__ = "0.1.0"
