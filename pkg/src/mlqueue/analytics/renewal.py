"""Which of two competing Mittag-Leffler clocks rings first.

``arrival_prob(alpha, beta, rho) = P(X_alpha / rho < X_beta)`` for independent
standard ML variables, i.e. the chance that an arrival clock with tail index
``alpha`` and rate ``rho`` beats a service clock with index ``beta`` and rate
one.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate, optimize

from ..errors import DomainError, QuadratureError
from ..mlf import MLParams, ml_cdf, ml_pdf, ml_survival

__all__ = ["arrival_prob", "critical_rho", "QUAD_TOL", "TAIL_SURVIVAL"]

QUAD_TOL = 1e-6
# beyond the point where the service clock survives with probability below
# this, the remaining integral is taken from the tail asymptotics
TAIL_SURVIVAL = 1e-8
_HEAD = 1e-14


def _check(alpha: float, beta: float) -> None:
    for name, v in (("alpha", alpha), ("beta", beta)):
        if not (0.0 < v <= 1.0):
            raise DomainError(f"{name} must lie in (0, 1], got {v}")


def _upper_cut(beta: float) -> float:
    """``T`` with ``P(X_beta > T)`` about ``TAIL_SURVIVAL``."""
    if beta == 1.0:
        return -math.log(TAIL_SURVIVAL)
    # survival ~ T**-beta / Gamma(1 - beta)
    return (TAIL_SURVIVAL * math.gamma(1.0 - beta)) ** (-1.0 / beta)


def _lower_cut(alpha: float, beta: float, rho: float) -> float:
    # integrand ~ (rho t)**alpha / Gamma(1+alpha) * t**(beta-1) / Gamma(beta) near 0
    c = rho**alpha / (math.gamma(1 + alpha) * math.gamma(beta) * (alpha + beta))
    return (_HEAD / c) ** (1.0 / (alpha + beta))


def arrival_prob(alpha: float, beta: float, rho: float) -> float:
    """``int_0^inf F_alpha(rho t) f_beta(t) dt`` to absolute accuracy ``QUAD_TOL``.

    The integral is taken in ``y = log t`` between cut points where the
    integrand's head and tail are replaced by their leading asymptotics.
    """
    _check(alpha, beta)
    if not (rho > 0 and math.isfinite(rho)):
        raise DomainError(f"rho must be positive, got {rho}")
    fa = MLParams(alpha, rho)
    fb = MLParams(beta, 1.0)
    lo = _lower_cut(alpha, beta, rho)
    hi = max(_upper_cut(beta), 10.0 * lo)

    def integrand(y: float) -> float:
        t = math.exp(y)
        return ml_cdf(fa, t) * ml_pdf(fb, t) * t

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        body, err = integrate.quad(
            integrand, math.log(lo), math.log(hi), epsabs=1e-10, epsrel=1e-10, limit=400
        )
    if not err < 0.1 * QUAD_TOL:
        raise QuadratureError(f"quadrature error estimate {err:.2g} exceeds tolerance")
    head = float(ml_cdf(fa, lo) * ml_cdf(fb, lo)) * beta / (alpha + beta)
    surv_b = float(ml_survival(fb, hi))
    if alpha < 1.0 and beta < 1.0:
        # P(X_beta > T) minus int_T^inf S_alpha(rho t) f_beta(t) dt, both from tail asymptotics
        lost = (
            rho**-alpha * beta * hi ** (-alpha - beta)
            / (math.gamma(1 - alpha) * math.gamma(1 - beta) * (alpha + beta))
        )
        tail = surv_b - lost
    else:
        tail = surv_b * float(ml_cdf(fa, hi))
    return float(np.clip(head + body + tail, 0.0, 1.0))


def critical_rho(alpha: float, beta: float, xtol: float = 1e-7) -> float:
    """The rate ratio ``rho*`` at which ``arrival_prob`` equals one half."""
    _check(alpha, beta)

    def g(x: float) -> float:
        return arrival_prob(alpha, beta, math.exp(x)) - 0.5

    a, b = -1.0, 1.0
    while g(a) > 0:
        a *= 2.0
        if a < -200:
            raise DomainError("no sign change found for small rho")
    while g(b) < 0:
        b *= 2.0
        if b > 200:
            raise DomainError("no sign change found for large rho")
    return math.exp(optimize.brentq(g, a, b, xtol=xtol))
