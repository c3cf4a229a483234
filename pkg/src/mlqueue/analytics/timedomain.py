"""Time-domain laws of the single fractional queue started empty."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from .inversion import invert_laplace, talbot
from .transforms import QueueAnalyticsParams, equilibrium_pmf, lt_p00, lt_p0n, lt_p0n_vector

__all__ = [
    "p00_time_domain",
    "p0n_time_domain",
    "p0n_vector_time_domain",
    "p00_asymptotic",
    "tv_distance_to_equilibrium",
    "mixing_time",
    "MIN_EPS",
]

# TV values below this are within the reach of inversion error
MIN_EPS = 1e-6
_T_MAX = 1e15


def p00_time_domain(t, params: QueueAnalyticsParams, nodes: int = 32, cross_check: bool = True):
    """``P(L(t) = 0 | L(0) = 0)`` by Laplace inversion."""
    out = invert_laplace(lambda s: lt_p00(s, params), t, nodes, cross_check)
    return np.clip(out, 0.0, 1.0) if np.ndim(out) else min(max(out, 0.0), 1.0)


def p0n_time_domain(t, params: QueueAnalyticsParams, n: int, nodes: int = 32, cross_check: bool = True):
    """``P(L(t) = n | L(0) = 0)`` by Laplace inversion."""
    out = invert_laplace(lambda s: lt_p0n(s, params, n), t, nodes, cross_check)
    return np.clip(out, 0.0, 1.0) if np.ndim(out) else min(max(out, 0.0), 1.0)


def p0n_vector_time_domain(t, params: QueueAnalyticsParams, nmax: int, nodes: int = 32) -> np.ndarray:
    """``P(L(t) = n)`` for ``n = 0..nmax`` along the last axis (Talbot only)."""
    return np.clip(talbot(lambda s: lt_p0n_vector(s, params, nmax), t, nodes), 0.0, 1.0)


def p00_asymptotic(t, params: QueueAnalyticsParams):
    """Leading large-``t`` behaviour of ``p00`` in each recurrence regime."""
    p, a = params.p, params.alpha
    tt = params.lam * np.asarray(t, dtype=float)
    if p < 0.5:
        out = np.full_like(tt, (1 - 2 * p) / (1 - p))
    elif a == 1.0:
        raise DomainError("the power-law regimes need alpha < 1")
    elif p > 0.5:
        out = tt**-a / ((2 * p - 1) * math.gamma(1 - a))
    else:
        out = math.sqrt(2) * tt ** (-a / 2) / math.gamma(1 - a / 2)
    return float(out) if out.ndim == 0 else out


def _check_trunc(params: QueueAnalyticsParams, trunc: int) -> float:
    if params.p >= 0.5:
        raise DomainError("an equilibrium exists only for p < 1/2")
    tail = (params.p / (1 - params.p)) ** (trunc + 1)
    if tail >= 1e-8:
        raise DomainError(f"trunc={trunc} leaves equilibrium tail mass {tail:.3g} >= 1e-8")
    return tail


def tv_distance_to_equilibrium(t, params: QueueAnalyticsParams, trunc: int = 200, nodes: int = 32):
    """Total variation distance between ``L(t)`` (started at 0) and equilibrium.

    States ``0..trunc`` are summed exactly; the mass beyond ``trunc`` enters
    through the bound ``|a - b| <= a + b``, so the value errs on the high side
    by at most the two tail masses.
    """
    pi_tail = _check_trunc(params, trunc)
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 0):
        raise DomainError("t must be nonnegative")
    pi = equilibrium_pmf(params.p, np.arange(trunc + 1))
    out = np.empty(ta.shape)
    flat = out.reshape(-1)
    tf = ta.reshape(-1)
    zero = tf == 0
    flat[zero] = 1.0 - pi[0]
    if np.any(~zero):
        probs = p0n_vector_time_domain(tf[~zero], params, trunc, nodes)
        head = np.abs(probs - pi).sum(axis=-1)
        tail = np.clip(1.0 - probs.sum(axis=-1), 0.0, None) + pi_tail
        flat[~zero] = np.minimum(0.5 * (head + tail), 1.0)
    return float(out) if out.ndim == 0 else out


def mixing_time(eps: float, params: QueueAnalyticsParams, trunc: int = 200, rtol: float = 1e-6) -> float:
    """Smallest ``t`` with ``tv_distance_to_equilibrium(t) <= eps``.

    Geometric bracketing followed by bisection in ``log t``; relies on the
    distance being nonincreasing in ``t``.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    _check_trunc(params, trunc)
    if eps >= 1.0 or eps >= 1.0 - equilibrium_pmf(params.p, 0):
        return 0.0
    if eps < MIN_EPS:
        raise DomainError(f"eps={eps} is below the inversion accuracy {MIN_EPS}")

    def tv(x: float) -> float:
        return tv_distance_to_equilibrium(x, params, trunc)

    hi = 1.0 / params.lam
    while tv(hi) > eps:
        hi *= 4.0
        if hi > _T_MAX:
            raise DomainError(f"distance does not fall below eps={eps} before t={_T_MAX:g}")
    lo = hi / 4.0
    if tv(lo) <= eps:
        # the bracket started too late; walk down
        while lo > 1e-12 / params.lam and tv(lo) <= eps:
            hi, lo = lo, lo / 4.0
    while hi / lo - 1.0 > rtol:
        mid = math.sqrt(lo * hi)
        if tv(mid) > eps:
            lo = mid
        else:
            hi = mid
    return hi
