"""Random variates and path simulation.

Stable draws use the Kanter (Chambers-Mallows-Stuck) representation,
Mittag-Leffler draws the product ``W**(1/alpha) * S``. Counting paths of the
fractional Poisson process come either from renewal with ML gaps or from a
Poisson process run on the clock of an inverse stable subordinator.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EventCapError
from .mlf import MLParams

__all__ = [
    "DEFAULT_EVENT_CAP",
    "RngStream",
    "CountingPath",
    "SubordinatorPath",
    "event_cap",
    "sample_positive_stable",
    "sample_ml",
    "simulate_fpp_renewal",
    "simulate_inverse_subordinator",
    "simulate_fpp_timechange",
]

DEFAULT_EVENT_CAP = 10**8


def event_cap(cap: int | None = None) -> int:
    """Resolve the event cap: explicit value, else ``MLQ_EVENT_CAP``, else 1e8."""
    if cap is not None:
        return int(cap)
    env = os.environ.get("MLQ_EVENT_CAP")
    if env:
        try:
            return int(float(env))
        except ValueError as exc:
            raise DomainError(f"MLQ_EVENT_CAP is not a number: {env!r}") from exc
    return DEFAULT_EVENT_CAP


class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    Streams with different ``stream_id`` under the same seed are spawned
    children of one ``SeedSequence`` and hence independent.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise DomainError("seed and stream_id must be nonnegative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


@dataclass(frozen=True, eq=False)
class CountingPath:
    """Event times of a counting process on ``[0, horizon]``."""

    horizon: float
    events: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        ev = np.asarray(self.events, dtype=float).ravel()
        if not (self.horizon >= 0 and math.isfinite(self.horizon)):
            raise DomainError(f"horizon must be finite and nonnegative, got {self.horizon}")
        if ev.size:
            if ev[0] <= 0 or ev[-1] > self.horizon:
                raise DomainError("events must lie in (0, horizon]")
            if np.any(np.diff(ev) <= 0):
                raise DomainError("events must be strictly increasing")
        ev.setflags(write=False)
        object.__setattr__(self, "events", ev)

    def __len__(self) -> int:
        return self.events.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, CountingPath):
            return NotImplemented
        return self.horizon == other.horizon and np.array_equal(self.events, other.events)

    def count(self, t):
        """``N(t) = #{events <= t}``."""
        out = np.searchsorted(self.events, t, side="right")
        return int(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class SubordinatorPath:
    """Values of a nondecreasing process on the grid ``k * grid_step``."""

    grid_step: float
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float).ravel()
        if not self.grid_step > 0:
            raise DomainError("grid_step must be positive")
        if v.size and (v[0] < 0 or np.any(np.diff(v) < 0)):
            raise DomainError("values must be nonnegative and nondecreasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SubordinatorPath):
            return NotImplemented
        return self.grid_step == other.grid_step and np.array_equal(self.values, other.values)

    @property
    def times(self) -> np.ndarray:
        return self.grid_step * np.arange(self.values.size)

    def at(self, t):
        """Value at the last grid point not after ``t``."""
        k = np.floor(np.asarray(t, dtype=float) / self.grid_step + 1e-12).astype(int)
        k = np.clip(k, 0, self.values.size - 1)
        out = self.values[k]
        return float(out) if np.ndim(out) == 0 else out


def _check_stable_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _stable(alpha: float, gen: np.random.Generator, n):
    u = np.pi * (1.0 - gen.random(n))  # (0, pi]
    w = gen.standard_exponential(n)
    a = np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
    b = (np.sin((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)
    return a * b


def sample_positive_stable(alpha: float, rng: RngStream, size=None):
    """Draw from the positive stable law with ``E exp(-w S) = exp(-w**alpha)``."""
    _check_stable_alpha(alpha)
    out = _stable(alpha, rng.generator, size)
    return float(out) if size is None else out


def _ml(params: MLParams, gen: np.random.Generator, n):
    if params.alpha == 1.0:
        return gen.standard_exponential(n) / params.lam
    w = gen.standard_exponential(n)
    return w ** (1.0 / params.alpha) * _stable(params.alpha, gen, n) / params.lam


def sample_ml(params: MLParams, rng: RngStream, size=None):
    """Draw from the Mittag-Leffler law with survival ``E_alpha(-(lam x)**alpha)``."""
    out = _ml(params, rng.generator, size)
    return float(out) if size is None else out


def _separate_ties(times: np.ndarray) -> np.ndarray:
    # Gaps far below one ulp of the current time (common for small alpha)
    # collapse partial sums onto each other; move such events up by one ulp.
    bad = np.flatnonzero(np.diff(times) <= 0)
    if bad.size == 0:
        return times
    times = times.copy()
    for i in range(bad[0] + 1, times.size):
        if times[i] <= times[i - 1]:
            times[i] = np.nextafter(times[i - 1], np.inf)
    return times


def _check_horizon(horizon: float) -> None:
    if not (horizon >= 0 and math.isfinite(horizon)):
        raise DomainError(f"horizon must be finite and nonnegative, got {horizon}")


def simulate_fpp_renewal(
    params: MLParams, horizon: float, rng: RngStream, cap: int | None = None
) -> CountingPath:
    """Renewal process with i.i.d. ML gaps observed on ``(0, horizon]``."""
    _check_horizon(horizon)
    limit = event_cap(cap)
    if horizon == 0:
        return CountingPath(0.0)
    gen = rng.generator
    mean_count = (params.lam * horizon) ** params.alpha / math.gamma(1 + params.alpha)
    batch = int(min(max(32, 1.5 * mean_count + 10), 1 << 20))
    chunks = []
    last = 0.0
    total = 0
    while True:
        times = last + np.cumsum(_ml(params, gen, batch))
        inside = times <= horizon
        k = int(np.count_nonzero(inside))
        total += k
        if total > limit:
            raise EventCapError(f"renewal path exceeds the event cap of {limit}")
        chunks.append(times[:k])
        if k < batch:
            break
        last = times[-1]
        batch = min(batch * 2, 1 << 22)
    events = np.concatenate(chunks) if chunks else np.empty(0)
    events = _separate_ties(events)
    return CountingPath(float(horizon), events[events <= horizon])


def _subordinator_grid(alpha: float, horizon: float, du: float, gen, limit: int) -> np.ndarray:
    """L on the u-grid ``0, du, 2 du, ...`` up to the first value above horizon."""
    scale = du ** (1.0 / alpha)
    expected = horizon**alpha / math.gamma(1 + alpha) / du
    batch = int(min(max(64, 1.2 * expected + 16), 1 << 22))
    chunks = [np.zeros(1)]
    last = 0.0
    steps = 0
    while True:
        vals = last + np.cumsum(scale * _stable(alpha, gen, batch))
        k = int(np.searchsorted(vals, horizon, side="right"))
        steps += min(k + 1, batch)
        if steps > limit:
            raise EventCapError(f"subordinator grid exceeds the event cap of {limit}")
        if k < batch:
            chunks.append(vals[: k + 1])
            break
        chunks.append(vals)
        last = vals[-1]
        batch = min(batch * 2, 1 << 22)
    return np.concatenate(chunks)


def _default_step(horizon: float) -> float:
    return horizon / 1e4


def simulate_inverse_subordinator(
    alpha: float,
    horizon: float,
    grid_step: float | None,
    rng: RngStream,
    cap: int | None = None,
) -> SubordinatorPath:
    """Inverse stable subordinator ``Y(t) = inf{u : L(u) > t}`` on a grid.

    ``L`` is simulated on the u-grid with step ``grid_step`` using
    self-similar increments ``grid_step**(1/alpha) * S``. ``Y`` is reported on
    the t-grid with the same step as ``grid_step * #{k >= 1 : L(k grid_step) <= t}``,
    which undershoots the exact inverse by less than one u-step.
    """
    _check_stable_alpha(alpha)
    _check_horizon(horizon)
    if horizon == 0:
        return SubordinatorPath(grid_step or 1.0, np.zeros(1))
    du = _default_step(horizon) if grid_step is None else float(grid_step)
    if not du > 0:
        raise DomainError("grid_step must be positive")
    limit = event_cap(cap)
    n_t = int(math.floor(horizon / du + 1e-9)) + 1
    if n_t > limit:
        raise EventCapError(f"t-grid exceeds the event cap of {limit}")
    ell = _subordinator_grid(alpha, horizon, du, rng.generator, limit)
    t = du * np.arange(n_t)
    counts = np.searchsorted(ell[1:], t, side="right")
    return SubordinatorPath(du, du * counts)


def simulate_fpp_timechange(
    params: MLParams,
    horizon: float,
    grid_step: float | None,
    rng: RngStream,
    cap: int | None = None,
) -> CountingPath:
    """Fractional Poisson process as ``N_{lam**alpha}(Y_alpha(t))``.

    Poisson points of rate ``lam**alpha`` on the u-axis are carried to real
    time through ``L``, linearly interpolated between grid points.
    """
    _check_horizon(horizon)
    if horizon == 0:
        return CountingPath(0.0)
    limit = event_cap(cap)
    gen = rng.generator
    if params.alpha == 1.0:
        return _poisson_on(horizon, params.lam, gen, limit)
    du = _default_step(horizon) if grid_step is None else float(grid_step)
    if not du > 0:
        raise DomainError("grid_step must be positive")
    ell = _subordinator_grid(params.alpha, horizon, du, gen, limit)
    u_end = du * (ell.size - 1)
    rate = params.lam**params.alpha
    n = gen.poisson(rate * u_end)
    if n > limit:
        raise EventCapError(f"time-changed path exceeds the event cap of {limit}")
    u = np.sort(gen.uniform(0.0, u_end, n))
    grid = du * np.arange(ell.size)
    times = np.interp(u, grid, ell)
    times = times[(times > 0) & (times <= horizon)]
    times = _separate_ties(times)
    return CountingPath(float(horizon), times[times <= horizon])


def _poisson_on(horizon: float, rate: float, gen, limit: int) -> CountingPath:
    n = gen.poisson(rate * horizon)
    if n > limit:
        raise EventCapError(f"Poisson path exceeds the event cap of {limit}")
    times = np.sort(gen.uniform(0.0, horizon, n))
    times = _separate_ties(times[times > 0])
    return CountingPath(float(horizon), times[times <= horizon])
