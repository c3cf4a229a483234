"""Closed-form Laplace transforms for the single fractional queue.

All transforms accept real ``s > 0``, complex numpy arrays (for contour
inversion, principal branch of ``s**alpha``) and mpmath numbers (for
multiprecision inversion). They are written for ``lam = 1``; a general
scale enters through ``F_lam(s) = F_1(s / lam) / lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import SimpleNamespace

import mpmath
import numpy as np

from ..errors import DivergenceError, DomainError
from ..mlf import ml_e

__all__ = [
    "QueueAnalyticsParams",
    "equilibrium_pmf",
    "roots_r",
    "lt_p00",
    "lt_p0n",
    "lt_p0n_vector",
    "lt_mgf",
    "lt_moment",
    "eulerian_numbers",
    "fpp_mgf",
]

_NP = SimpleNamespace(power=np.power, sqrt=np.sqrt, exp=np.exp)
_MP = SimpleNamespace(power=mpmath.power, sqrt=mpmath.sqrt, exp=mpmath.exp)


def _lib(x):
    return _MP if isinstance(x, (mpmath.mpf, mpmath.mpc)) else _NP


@dataclass(frozen=True)
class QueueAnalyticsParams:
    """Up-step probability ``p``, tail index ``alpha`` and scale ``lam``."""

    p: float
    alpha: float
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.p < 1.0):
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"lam must be positive, got {self.lam}")


def equilibrium_pmf(p: float, j):
    """Stationary law ``(1-2p)/(1-p) * (p/(1-p))**j`` of the lazy chain."""
    if not (0.0 < p < 0.5):
        raise DomainError(f"an equilibrium exists only for 0 < p < 1/2, got p={p}")
    ja = np.asarray(j)
    if np.any(ja < 0):
        raise DomainError("j must be nonnegative")
    out = (1 - 2 * p) / (1 - p) * np.power(p / (1 - p), ja.astype(float))
    return float(out) if out.ndim == 0 else out


def _check_s(s) -> None:
    if isinstance(s, (mpmath.mpf, float, int, np.floating, np.integer)):
        if not s > 0:
            raise DomainError(f"s must be positive, got {s}")
    elif isinstance(s, np.ndarray) and np.isrealobj(s):
        if np.any(~(s > 0)):
            raise DomainError("s must be positive")


def _roots(s, p: float, alpha: float):
    lib = _lib(s)
    u = 1 + lib.power(s, alpha)
    # u * sqrt(1 - 4p(1-p)/u**2) is analytic on the slit plane and equals the
    # positive root for real s
    w = u * lib.sqrt(1 - 4 * p * (1 - p) / (u * u))
    r1 = (u + w) / (2 * p)
    r2 = ((1 - p) / p) / r1
    return r1, r2


def roots_r(s, p: float, alpha: float):
    """Roots ``r1 > 1 > r2 > 0`` of ``p r**2 - (1 + s**alpha) r + (1 - p)``."""
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    _check_s(s)
    return _roots(s, p, alpha)


def _p00_unit(s, p, alpha):
    _, r2 = _roots(s, p, alpha)
    return (1 - p / (1 - p) * r2) / s


def _scaled(fn, s, params: QueueAnalyticsParams, *args):
    _check_s(s)
    if params.lam == 1.0:
        return fn(s, params.p, params.alpha, *args)
    return fn(s / params.lam, params.p, params.alpha, *args) / params.lam


def lt_p00(s, params: QueueAnalyticsParams):
    """Transform of ``P(L(t) = 0)`` for the queue started empty."""
    return _scaled(_p00_unit, s, params)


def _p0n_unit(s, p, alpha, n):
    r1, r2 = _roots(s, p, alpha)
    return (1 - p / (1 - p) * r2) / s * (1 / r1) ** n


def lt_p0n(s, params: QueueAnalyticsParams, n: int):
    """Transform of ``P(L(t) = n)``: ``lt_p00 / r1**n``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    return _scaled(_p0n_unit, s, params, n)


def _p0n_vec_unit(s, p, alpha, nmax):
    r1, r2 = _roots(s, p, alpha)
    base = (1 - p / (1 - p) * r2) / s
    n = np.arange(nmax + 1)
    return base[..., None] * np.exp(-n * np.log(r1)[..., None])


def lt_p0n_vector(s, params: QueueAnalyticsParams, nmax: int):
    """Transforms of ``P(L(t) = n)`` for ``n = 0..nmax`` along a trailing axis."""
    return _scaled(_p0n_vec_unit, np.asarray(s), params, nmax)


def _mgf_unit(s, p, alpha, z):
    r1, r2 = _roots(s, p, alpha)
    lib = _lib(s)
    if not isinstance(r1, (mpmath.mpc,)) and np.isrealobj(r1):
        if np.any(math.exp(z) >= r1):
            raise DivergenceError(f"exp(z) = {math.exp(z)} is not below r1(s)")
    return -lib.power(s, alpha - 1) / (p * (lib.exp(z) - r1) * (1 - r2))


def lt_mgf(z: float, s, params: QueueAnalyticsParams):
    """Transform of ``E exp(z L(t))``; needs ``exp(z) < r1(s)``."""
    return _scaled(_mgf_unit, s, params, z)


def eulerian_numbers(k: int) -> list[int]:
    """Row ``k`` of the Eulerian triangle, ``A(k, 0..k-1)``."""
    return [
        sum((-1) ** j * math.comb(k + 1, j) * (i + 1 - j) ** k for j in range(i + 2))
        for i in range(k)
    ]


def _moment_unit(s, p, alpha, k):
    r1, r2 = _roots(s, p, alpha)
    x = 1 / r1
    # sum_n n**k x**n = x A_k(x) / (1 - x)**(k+1) with A_k the Eulerian polynomial
    poly = 0
    for i, a in enumerate(eulerian_numbers(k)):
        poly = poly + a * x ** (i + 1)
    return (1 - p / (1 - p) * r2) / s * poly / (1 - x) ** (k + 1)


def lt_moment(k: int, s, params: QueueAnalyticsParams):
    """Transform of ``E L(t)**k`` for ``k >= 1``."""
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    return _scaled(_moment_unit, s, params, int(k))


def fpp_mgf(s: float, alpha: float, lam: float, t: float) -> float:
    """``E exp(s N(t)) = E_{alpha,1}((e**s - 1) (lam t)**alpha)`` for the FPP."""
    if not (0.0 < alpha <= 1.0) or not lam > 0 or t < 0:
        raise DomainError("need 0 < alpha <= 1, lam > 0 and t >= 0")
    z = math.expm1(s) * (lam * t) ** alpha
    # E_{alpha,1}(z) grows like exp(z**(1/alpha)) / alpha
    if z > 0 and z ** (1.0 / alpha) > 700.0:
        raise DomainError(f"E_(alpha,1) overflows at argument {z}")
    return ml_e(alpha, 1.0, z)
