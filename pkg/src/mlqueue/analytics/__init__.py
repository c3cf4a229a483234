"""Transforms, inversion and time-domain laws of the fractional queue."""

from .inversion import CROSS_CHECK_ATOL, CROSS_CHECK_RTOL, TransformFn, invert_laplace, stehfest, talbot
from .kolmogorov import abm_solve, kolmogorov_matrix, solve_fractional_kolmogorov
from .renewal import arrival_prob, critical_rho
from .timedomain import (
    mixing_time,
    p00_asymptotic,
    p00_time_domain,
    p0n_time_domain,
    p0n_vector_time_domain,
    tv_distance_to_equilibrium,
)
from .transforms import (
    QueueAnalyticsParams,
    equilibrium_pmf,
    eulerian_numbers,
    fpp_mgf,
    lt_mgf,
    lt_moment,
    lt_p00,
    lt_p0n,
    lt_p0n_vector,
    roots_r,
)

__all__ = [
    "CROSS_CHECK_ATOL",
    "CROSS_CHECK_RTOL",
    "QueueAnalyticsParams",
    "TransformFn",
    "abm_solve",
    "arrival_prob",
    "critical_rho",
    "equilibrium_pmf",
    "eulerian_numbers",
    "fpp_mgf",
    "invert_laplace",
    "kolmogorov_matrix",
    "lt_mgf",
    "lt_moment",
    "lt_p00",
    "lt_p0n",
    "lt_p0n_vector",
    "mixing_time",
    "p00_asymptotic",
    "p00_time_domain",
    "p0n_time_domain",
    "p0n_vector_time_domain",
    "roots_r",
    "solve_fractional_kolmogorov",
    "stehfest",
    "talbot",
    "tv_distance_to_equilibrium",
]
