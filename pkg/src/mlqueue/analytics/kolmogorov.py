"""Fractional forward equations of the lazy birth-death queue.

On states ``0..trunc`` the probabilities solve the Caputo system
``D^alpha p = lam**alpha (1 - beta) A p`` with ``A`` the generator of the
lazy-at-zero walk (up ``p``, down ``1 - p``). Mass that steps above ``trunc``
is lost; its size is reported and checked.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, SolverError
from .transforms import QueueAnalyticsParams

__all__ = ["kolmogorov_matrix", "abm_solve", "solve_fractional_kolmogorov", "STEP_TOL", "DEFICIT_TOL"]

STEP_TOL = 1e-4
DEFICIT_TOL = 1e-4
_MAX_STEPS = 1 << 15


def kolmogorov_matrix(p: float, trunc: int) -> np.ndarray:
    """Truncated generator (columns are source states) of the lazy walk."""
    n = trunc + 1
    a = np.zeros((n, n))
    i = np.arange(n)
    a[i, i] = -1.0
    a[0, 0] = -p
    a[i[1:], i[:-1]] = p
    a[i[:-1], i[1:]] = 1.0 - p
    return a


def abm_solve(a: np.ndarray, y0: np.ndarray, alpha: float, horizon: float, n_steps: int) -> np.ndarray:
    """Adams-Bashforth-Moulton predictor-corrector for ``D^alpha y = a y``.

    Uniform step ``horizon / n_steps``; returns the ``(n_steps + 1, d)``
    solution on the grid.
    """
    h = horizon / n_steps
    d = y0.size
    y = np.empty((n_steps + 1, d))
    f = np.empty((n_steps + 1, d))
    y[0] = y0
    f[0] = a @ y0
    k = np.arange(n_steps + 2, dtype=float)
    ka = k**alpha
    kb = k ** (alpha + 1)
    pred_w = ka[1:] - ka[:-1]  # indexed by lag m = n - j
    corr_w = np.zeros(n_steps + 1)
    corr_w[:n_steps] = kb[2:] + kb[:-2] - 2.0 * kb[1:-1]
    cp = h**alpha / math.gamma(alpha + 1)
    cc = h**alpha / math.gamma(alpha + 2)
    for n in range(n_steps):
        lags = slice(n, None, -1)
        hist = f[: n + 1]
        pred = y0 + cp * (pred_w[lags] @ hist)
        cw = corr_w[lags].copy()
        # the j = 0 corrector weight differs from the generic lag formula
        cw[0] = n ** (alpha + 1) - (n - alpha) * (n + 1) ** alpha
        y[n + 1] = y0 + cc * (a @ pred + cw @ hist)
        f[n + 1] = a @ y[n + 1]
        if not np.all(np.isfinite(y[n + 1])):
            raise SolverError(f"non-finite solution at step {n + 1}")
    return y


def _on_grid(sol: np.ndarray, horizon: float, t: np.ndarray) -> np.ndarray:
    grid = np.linspace(0.0, horizon, sol.shape[0])
    return np.stack([np.interp(t, grid, sol[:, i]) for i in range(sol.shape[1])], axis=1)


def solve_fractional_kolmogorov(
    params: QueueAnalyticsParams,
    beta_lazy: float,
    trunc: int,
    t_grid,
    step_tol: float = STEP_TOL,
) -> np.ndarray:
    """``p_i(t)`` for ``i = 0..trunc`` at the times in ``t_grid``, from ``L(0) = 0``.

    The step is halved until the values at ``t_grid`` move by less than
    ``step_tol``. Raises ``DomainError`` if more than ``DEFICIT_TOL`` of the
    mass escapes above ``trunc`` and ``SolverError`` if no step size settles.
    """
    if trunc < 10:
        raise DomainError("trunc must be at least 10")
    if not (0.0 <= beta_lazy < 1.0):
        raise DomainError("beta_lazy must lie in [0, 1)")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise DomainError("t_grid must be a nonempty increasing sequence of nonnegative times")
    y0 = np.zeros(trunc + 1)
    y0[0] = 1.0
    horizon = float(t[-1])
    if horizon == 0:
        return y0[None, :].copy()
    rate = params.lam**params.alpha * (1.0 - beta_lazy)
    a = rate * kolmogorov_matrix(params.p, trunc)
    # explicit predictor needs h**alpha * |A| well below one
    h_max = (0.25 / (2.0 * rate)) ** (1.0 / params.alpha)
    n = max(256, int(math.ceil(horizon / h_max)))
    prev = _on_grid(abm_solve(a, y0, params.alpha, horizon, n), horizon, t)
    while True:
        n *= 2
        if n > _MAX_STEPS:
            raise SolverError(f"step halving did not settle within {_MAX_STEPS} steps")
        cur = _on_grid(abm_solve(a, y0, params.alpha, horizon, n), horizon, t)
        if np.max(np.abs(cur - prev)) < step_tol:
            break
        prev = cur
    deficit = 1.0 - cur.sum(axis=1)
    if np.max(deficit) >= DEFICIT_TOL:
        raise DomainError(f"trunc={trunc} loses mass {np.max(deficit):.3g} above the top state")
    return np.clip(cur, 0.0, None)
