"""Mittag-Leffler function and the Mittag-Leffler distribution.

The two-parameter function ``E_{a,b}(z) = sum_l z**l / Gamma(b + a*l)`` is
evaluated on the real line by one of three routes:

* the power series, wherever its largest term is small enough that
  cancellation cannot cost more than a few digits (always for ``z >= 0``);
* the asymptotic expansion ``-sum_k z**-k / Gamma(b - a*k)`` for ``z < 0``
  and ``0 < a < 1`` once ``|z|**(1/a) >= 40``, where the optimally truncated
  expansion is accurate to double precision;
* a real integral along the Hankel contour for the remaining negative
  arguments (plus the two pole residues when ``1 < a < 2``). When ``b`` is
  too large for the integrand to be integrable at the origin, the contour
  is closed around the origin by a circular arc (``a < 1``) or ``b`` is
  lowered by the recurrence ``E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a))/z``.

The Mittag-Leffler law with tail index ``alpha`` and scale ``lam`` has
survival function ``E_{alpha,1}(-(lam*x)**alpha)``; ``alpha = 1`` is the
exponential law with rate ``lam``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError

__all__ = [
    "MLParams",
    "ml_e",
    "ml_pdf",
    "ml_cdf",
    "ml_survival",
    "ml_tail_asymptotic",
    "tail_constant",
]

# |z|**(1/alpha) above which the asymptotic expansion is used
ASYMPTOTIC_THRESHOLD = 40.0
# largest admissible series term for negative arguments
SERIES_MAX_TERM = 10.0
# upper end of the Hankel integral in the variable v = r**alpha is V_CUT**alpha
V_CUT = 46.0


@dataclass(frozen=True)
class MLParams:
    """Tail index ``alpha`` in (0, 1] and time scale ``lam`` > 0."""

    alpha: float
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise DomainError(f"lam must be positive and finite, got {self.lam}")


def _check_ab(alpha: float, beta: float) -> None:
    if not (0.0 < alpha < 2.0):
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    if not (beta > 0.0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive, got {beta}")


def _log_max_term(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """log of max_l x**l / Gamma(beta + alpha*l) for x > 0."""
    # the maximiser sits near alpha*l ~ x**(1/alpha); scan a bracket around it
    lpeak = np.power(x, 1.0 / alpha) / alpha
    span = np.arange(-3, 4)[:, None]
    ls = np.maximum(np.floor(lpeak)[None, :] + span, 0.0)
    logs = ls * np.log(x)[None, :] - special.gammaln(beta + alpha * ls)
    return np.maximum(logs.max(axis=0), -special.gammaln(beta))


def _series(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    ax = np.abs(z)
    xmax = float(ax.max()) if ax.size else 0.0
    # enough terms to pass the peak and decay below 1e-18 of it
    n = 30
    while True:
        l = np.arange(n, dtype=float)
        last = n * math.log(xmax) - special.gammaln(beta + alpha * n) if xmax > 0 else -np.inf
        peak = (xmax ** (1.0 / alpha)) / alpha if xmax > 0 else 0.0
        lmax = float(_log_max_term(alpha, beta, np.array([max(xmax, 1e-300)]))[0])
        if n > peak and last < lmax - 42.0:
            break
        n *= 2
    with np.errstate(divide="ignore"):
        logx = np.log(ax)
    logs = l[None, :] * logx[:, None] - special.gammaln(beta + alpha * l)[None, :]
    logs[:, 0] = -special.gammaln(beta)
    terms = np.exp(logs)
    neg = z < 0
    if np.any(neg):
        sign = np.where(l.astype(int) % 2 == 0, 1.0, -1.0)
        terms[neg] *= sign[None, :]
    return terms.sum(axis=1)


def _asymptotic(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    x = -z
    with np.errstate(over="ignore"):
        kopt = np.floor(np.minimum(np.power(x, 1.0 / alpha) / alpha, 2000.0)).astype(int)
    kmax = int(kopt.max())
    k = np.arange(1, kmax + 1, dtype=float)
    arg = beta - alpha * k
    pole = (arg <= 0) & (arg == np.round(arg))
    arg = np.where(pole, 0.5, arg)
    # (-1)**k from z**-k times the sign of 1/Gamma
    sign = np.where(k.astype(int) % 2 == 0, 1.0, -1.0) * special.gammasgn(arg)
    sign[pole] = 0.0
    logs = -k[None, :] * np.log(x)[:, None] - special.gammaln(arg)[None, :]
    logs[k[None, :] > kopt[:, None]] = -np.inf
    with np.errstate(under="ignore"):
        terms = sign[None, :] * np.exp(logs)
    return -terms.sum(axis=1)


def _hankel_scalar(alpha: float, beta: float, x: float) -> float:
    """E_{alpha,beta}(-x) for x > 0, beta < 1 + alpha, alpha != 1."""
    sab = math.sin(math.pi * (alpha - beta))
    sb = math.sin(math.pi * beta)
    ca = math.cos(math.pi * alpha)
    power = (1.0 - beta) / alpha

    def integrand(v: float) -> float:
        if v == 0.0:
            if power > 0:
                return 0.0
            if power == 0:
                return (x * sab) / (x * x)
        den = v * v + 2.0 * v * x * ca + x * x
        return math.exp(-(v ** (1.0 / alpha))) * v**power * (x * sab - v * sb) / den

    vmax = V_CUT**alpha
    points = [x] if x < vmax else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(
            integrand, 0.0, vmax, points=points, limit=400, epsabs=1e-15, epsrel=1e-13
        )
    out = -val / (math.pi * alpha)
    if alpha > 1.0:
        s = x ** (1.0 / alpha) * complex(math.cos(math.pi / alpha), math.sin(math.pi / alpha))
        out += (2.0 / alpha) * (s ** (1.0 - beta) * np.exp(s)).real
    return out


def _hankel_loop_scalar(alpha: float, beta: float, x: float) -> float:
    """E_{alpha,beta}(-x) for 0 < alpha < 1 and any beta.

    The contour runs along the two rays down to radius ``eps`` and closes
    around the origin on an arc, so no integrability condition on ``beta``
    is needed.
    """
    # radius 1 keeps eps**(1/alpha) and eps**power harmless; only for alpha
    # near 1 does the arc come close to the singularity at -x
    eps = 0.5 * x if alpha > 0.9 and abs(x - 1.0) <= 0.5 else 1.0
    sab = math.sin(math.pi * (alpha - beta))
    sb = math.sin(math.pi * beta)
    ca = math.cos(math.pi * alpha)
    power = (1.0 - beta) / alpha

    def ray(v: float) -> float:
        den = v * v + 2.0 * v * x * ca + x * x
        return math.exp(-(v ** (1.0 / alpha))) * v**power * (x * sab - v * sb) / den

    def arc(phi: float) -> float:
        w = eps ** (1.0 / alpha) * math.sin(phi / alpha) + phi * (1.0 + power)
        num = eps ** (1.0 + power) * math.exp(eps ** (1.0 / alpha) * math.cos(phi / alpha))
        return (num * cmath.exp(1j * w) / (eps * cmath.exp(1j * phi) + x)).real

    vmax = max(V_CUT**alpha, 2.0 * eps)
    points = [x] if eps < x < vmax else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        a, _ = integrate.quad(ray, eps, vmax, points=points, limit=400, epsabs=1e-15, epsrel=1e-13)
        b, _ = integrate.quad(arc, 0.0, math.pi * alpha, limit=200, epsabs=1e-15, epsrel=1e-13)
    return (b - a) / (math.pi * alpha)


def _hankel(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    if alpha < 1.0 and beta >= 1.0 + alpha:
        return np.array([_hankel_loop_scalar(alpha, beta, float(-zi)) for zi in z])
    if beta >= 1.0 + alpha:
        inner = _hankel(alpha, beta - alpha, z)
        return (inner - special.rgamma(beta - alpha)) / z
    return np.array([_hankel_scalar(alpha, beta, float(-zi)) for zi in z])


def ml_e(alpha: float, beta: float, z):
    """Two-parameter Mittag-Leffler function on the real line.

    Parameters
    ----------
    alpha : float
        In (0, 2).
    beta : float
        Positive.
    z : float or array_like
        Real argument(s).

    Returns
    -------
    float or ndarray
        ``E_{alpha,beta}(z)``, matching the shape of ``z``.
    """
    _check_ab(alpha, beta)
    zarr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(zarr)):
        raise DomainError("z must be finite")
    flat = zarr.ravel()
    out = np.empty_like(flat)

    if alpha == 1.0:
        if beta == 1.0:
            out = np.exp(flat)
        else:
            out = special.hyp1f1(1.0, beta, flat) * special.rgamma(beta)
        return out.reshape(zarr.shape)[()] if zarr.ndim else float(out[0])

    done = np.zeros(flat.shape, dtype=bool)
    zero = flat == 0.0
    out[zero] = special.rgamma(beta)
    done |= zero

    neg = flat < 0.0
    if alpha < 1.0:
        asym = neg & (np.power(np.abs(flat), 1.0 / alpha) >= ASYMPTOTIC_THRESHOLD)
        if np.any(asym):
            out[asym] = _asymptotic(alpha, beta, flat[asym])
        done |= asym

    rest = ~done
    if np.any(rest):
        ax = np.abs(flat[rest])
        ok = (flat[rest] > 0.0) | (_log_max_term(alpha, beta, ax) <= math.log(SERIES_MAX_TERM))
        idx = np.flatnonzero(rest)
        if np.any(ok):
            out[idx[ok]] = _series(alpha, beta, flat[idx[ok]])
        if np.any(~ok):
            out[idx[~ok]] = _hankel(alpha, beta, flat[idx[~ok]])

    out = out.reshape(zarr.shape)
    return out[()] if zarr.ndim else float(out)


def _as_params(params) -> MLParams:
    if isinstance(params, MLParams):
        return params
    alpha, lam = params
    return MLParams(alpha, lam)


def _check_x(x) -> np.ndarray:
    xa = np.asarray(x, dtype=float)
    if np.any(np.isnan(xa)) or np.any(xa < 0):
        raise DomainError("x must be nonnegative")
    return xa


def ml_survival(params: MLParams, x):
    """``P(X > x) = E_{alpha,1}(-(lam*x)**alpha)``."""
    params = _as_params(params)
    xa = _check_x(x)
    y = params.lam * xa
    if params.alpha == 1.0:
        out = np.exp(-y)
    else:
        out = np.where(np.isinf(y), 0.0, 1.0)
        fin = np.isfinite(y)
        if np.any(fin):
            out = np.asarray(out, dtype=float)
            out[fin] = np.clip(ml_e(params.alpha, 1.0, -np.power(y[fin], params.alpha)), 0.0, 1.0)
    return out[()] if np.ndim(out) else float(out)


def ml_cdf(params: MLParams, x):
    """Distribution function ``1 - E_{alpha,1}(-(lam*x)**alpha)``."""
    s = ml_survival(params, x)
    return 1.0 - s


def ml_pdf(params: MLParams, x):
    """Density ``lam**alpha x**(alpha-1) E_{alpha,alpha}(-(lam*x)**alpha)``.

    For ``alpha < 1`` the density is infinite at ``x = 0`` and ``inf`` is
    returned there.
    """
    params = _as_params(params)
    xa = _check_x(x)
    a, lam = params.alpha, params.lam
    if a == 1.0:
        out = lam * np.exp(-lam * xa)
        return out[()] if out.ndim else float(out)
    out = np.zeros(xa.shape, dtype=float)
    pos = (xa > 0) & np.isfinite(xa)
    out[xa == 0] = np.inf
    if np.any(pos):
        y = lam * xa[pos]
        ya = np.power(y, a)
        out[pos] = np.maximum(lam * ya / y * ml_e(a, a, -ya), 0.0)
    return out[()] if out.ndim else float(out)


def tail_constant(alpha: float) -> float:
    """``sin(alpha*pi) Gamma(alpha) / pi``, the survival tail constant."""
    return math.sin(alpha * math.pi) * math.gamma(alpha) / math.pi


def ml_tail_asymptotic(params: MLParams, x):
    """Leading-order survival ``tail_constant(alpha) * (lam*x)**-alpha``."""
    params = _as_params(params)
    if params.alpha >= 1.0:
        raise DomainError("the power-law tail asymptote needs alpha < 1")
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("x must be positive")
    out = tail_constant(params.alpha) * np.power(params.lam * xa, -params.alpha)
    return out[()] if out.ndim else float(out)
