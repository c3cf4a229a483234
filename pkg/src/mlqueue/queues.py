"""Queue-length processes driven by Mittag-Leffler clocks.

Three constructions are provided:

* Model 1, a birth-death chain observed at the events of a single
  fractional Poisson process;
* Model 2, a renewal queue where each event is decided by two competing
  ML clocks, the arrival clock winning giving an arrival;
* Model 3, independent arrival and departure fractional Poisson processes
  combined through the reflection map.

Paths record every jump with a mark. A departure that finds the queue
empty is an *unused service* and leaves the level at zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EventCapError
from .mlf import MLParams
from .sampling import CountingPath, RngStream, _ml, event_cap, simulate_fpp_renewal

__all__ = [
    "ARRIVAL",
    "DEPARTURE",
    "UNUSED",
    "Boundary",
    "Model",
    "EmbeddedChainParams",
    "QueuePath",
    "QueueModelConfig",
    "reflect",
    "step_embedded_chain",
    "simulate_model1",
    "simulate_model2",
    "simulate_model3",
    "simulate",
    "competing_clocks",
    "unused_service_times",
    "coupled_speedup",
    "first_unused_after",
    "sign_change_count",
]

ARRIVAL = "A"
DEPARTURE = "D"
UNUSED = "U"


class Boundary(enum.Enum):
    LAZY_AT_ZERO = "lazy"
    FORCED_UP_AT_ZERO = "forced"


class Model(enum.Enum):
    M1 = 1
    M2 = 2
    M3 = 3


@dataclass(frozen=True)
class EmbeddedChainParams:
    """Birth-death chain with up-probability ``p`` and holding ``beta_lazy``.

    Away from zero the chain moves up with probability ``(1-beta) p``, down
    with ``(1-beta)(1-p)`` and holds with ``beta``. At zero,
    ``LAZY_AT_ZERO`` turns the down move into a hold, while
    ``FORCED_UP_AT_ZERO`` moves up with probability ``1-beta``.
    """

    p: float
    beta_lazy: float = 0.0
    boundary: Boundary = Boundary.LAZY_AT_ZERO

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0):
            raise DomainError(f"p must lie in [0, 1], got {self.p}")
        if not (0.0 <= self.beta_lazy <= 1.0):
            raise DomainError(f"beta_lazy must lie in [0, 1], got {self.beta_lazy}")
        if not isinstance(self.boundary, Boundary):
            object.__setattr__(self, "boundary", Boundary(self.boundary))

    def up_probability(self, level: int) -> float:
        if level == 0 and self.boundary is Boundary.FORCED_UP_AT_ZERO:
            return 1.0 - self.beta_lazy
        return (1.0 - self.beta_lazy) * self.p

    def down_probability(self, level: int) -> float:
        if level == 0:
            return 0.0
        return (1.0 - self.beta_lazy) * (1.0 - self.p)


@dataclass(frozen=True, eq=False)
class QueuePath:
    """Piecewise-constant queue length with marked jumps.

    ``times`` may repeat when arrivals and departures coincide; such events
    are stored arrival-first. ``levels[k]`` is the level just after the k-th
    event.
    """

    horizon: float
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    levels: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    marks: np.ndarray = field(default_factory=lambda: np.empty(0, dtype="<U1"))
    initial_level: int = 0

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float).ravel()
        lv = np.asarray(self.levels, dtype=np.int64).ravel()
        mk = np.asarray(self.marks, dtype="<U1").ravel()
        if not (t.size == lv.size == mk.size):
            raise DomainError("times, levels and marks must have equal length")
        if self.initial_level < 0 or int(self.initial_level) != self.initial_level:
            raise DomainError("initial_level must be a nonnegative integer")
        if not (self.horizon >= 0 and math.isfinite(self.horizon)):
            raise DomainError("horizon must be finite and nonnegative")
        if t.size:
            if t[0] <= 0 or t[-1] > self.horizon or np.any(np.diff(t) < 0):
                raise DomainError("jump times must be nondecreasing in (0, horizon]")
            if np.any(lv < 0):
                raise DomainError("levels must be nonnegative")
            prev = np.concatenate(([self.initial_level], lv[:-1]))
            step = lv - prev
            ok = ((mk == ARRIVAL) & (step == 1)) | ((mk == DEPARTURE) & (step == -1))
            ok |= (mk == UNUSED) & (prev == 0) & (lv == 0)
            if not np.all(ok):
                k = int(np.flatnonzero(~ok)[0])
                raise DomainError(f"jump {k} with mark {mk[k]!r} is inconsistent with levels")
        for arr in (t, lv, mk):
            arr.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "levels", lv)
        object.__setattr__(self, "marks", mk)
        object.__setattr__(self, "initial_level", int(self.initial_level))

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, QueuePath):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and self.initial_level == other.initial_level
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.levels, other.levels)
            and np.array_equal(self.marks, other.marks)
        )

    def level_at(self, t):
        """Right-continuous level at time(s) ``t``."""
        k = np.searchsorted(self.times, t, side="right")
        full = np.concatenate(([self.initial_level], self.levels))
        out = full[k]
        return int(out) if np.ndim(out) == 0 else out

    @property
    def final_level(self) -> int:
        return int(self.levels[-1]) if self.levels.size else self.initial_level

    def unused_marks(self) -> np.ndarray:
        return self.times[self.marks == UNUSED]

    def visits_zero(self, a: float, b: float) -> bool:
        """Whether the level is 0 at some time in ``(a, b]``."""
        if self.level_at(a) == 0 and a < b:
            return True
        window = (self.times > a) & (self.times <= b)
        return bool(np.any(self.levels[window] == 0))


def _reflect_steps(steps: np.ndarray, initial_level: int):
    """Levels and unused flags for a +1/-1 step sequence reflected at zero."""
    net = initial_level + np.cumsum(steps)
    floor = np.minimum.accumulate(np.minimum(net, 0))
    levels = net - floor
    prev_floor = np.concatenate(([0], floor[:-1]))
    unused = floor < prev_floor
    return levels.astype(np.int64), unused


def _marks(steps: np.ndarray, unused: np.ndarray) -> np.ndarray:
    marks = np.where(steps > 0, ARRIVAL, DEPARTURE).astype("<U1")
    marks[unused] = UNUSED
    return marks


def _check_initial(initial_level) -> int:
    if int(initial_level) != initial_level or initial_level < 0:
        raise DomainError("initial_level must be a nonnegative integer")
    return int(initial_level)


def reflect(arrivals: CountingPath, departures: CountingPath, initial_level: int = 0) -> QueuePath:
    """Queue length ``Z(t) - min(0, inf_{s<=t} Z(s))`` with ``Z = i0 + N_a - N_d``.

    Coincident arrival and departure times are processed arrival-first.
    A departure is marked unused exactly when the running infimum drops.
    """
    if arrivals.horizon != departures.horizon:
        raise DomainError(
            f"horizons differ: arrivals {arrivals.horizon}, departures {departures.horizon}"
        )
    i0 = _check_initial(initial_level)
    times = np.concatenate((arrivals.events, departures.events))
    is_dep = np.concatenate(
        (np.zeros(arrivals.events.size, dtype=bool), np.ones(departures.events.size, dtype=bool))
    )
    order = np.lexsort((is_dep, times))
    times = times[order]
    steps = np.where(is_dep[order], -1, 1)
    levels, unused = _reflect_steps(steps, i0)
    return QueuePath(arrivals.horizon, times, levels, _marks(steps, unused), i0)


def step_embedded_chain(level: int, params: EmbeddedChainParams, rng: RngStream) -> int:
    """One transition of the embedded chain from ``level``."""
    if level < 0:
        raise DomainError("level must be nonnegative")
    u = rng.generator.random()
    up = params.up_probability(level)
    if u < up:
        return level + 1
    if u < up + params.down_probability(level):
        return level - 1
    return level


@dataclass(frozen=True)
class QueueModelConfig:
    """Parameters for one of the three queue models.

    Model 1 reads ``alpha1, lam, p`` (plus ``beta_lazy`` and ``boundary``);
    Models 2 and 3 read ``alpha1, alpha2, lam, mu``.
    """

    model: Model
    alpha1: float
    alpha2: float = 1.0
    lam: float = 1.0
    mu: float = 1.0
    p: float = 0.5
    horizon: float = 1.0
    initial_level: int = 0
    beta_lazy: float = 0.0
    boundary: Boundary = Boundary.LAZY_AT_ZERO

    def __post_init__(self) -> None:
        if not isinstance(self.model, Model):
            object.__setattr__(self, "model", Model(self.model))
        if not isinstance(self.boundary, Boundary):
            object.__setattr__(self, "boundary", Boundary(self.boundary))
        # validate through the parameter types
        self.arrival_params
        if self.model is not Model.M1:
            self.departure_params
        else:
            self.chain
        _check_initial(self.initial_level)
        if not (self.horizon >= 0 and math.isfinite(self.horizon)):
            raise DomainError("horizon must be finite and nonnegative")

    @property
    def arrival_params(self) -> MLParams:
        return MLParams(self.alpha1, self.lam)

    @property
    def departure_params(self) -> MLParams:
        return MLParams(self.alpha2, self.mu)

    @property
    def chain(self) -> EmbeddedChainParams:
        return EmbeddedChainParams(self.p, self.beta_lazy, self.boundary)


def _require(config: QueueModelConfig, model: Model) -> None:
    if config.model is not model:
        raise DomainError(f"expected a {model.name} configuration, got {config.model.name}")


def simulate_model1(config: QueueModelConfig, rng: RngStream, cap: int | None = None) -> QueuePath:
    """Embedded chain run at the events of a fractional Poisson process.

    Events at which the chain holds (probability ``beta_lazy``) are not
    recorded; under ``LAZY_AT_ZERO`` a down move at zero is recorded as an
    unused departure.
    """
    _require(config, Model.M1)
    i0 = config.initial_level
    clock = simulate_fpp_renewal(config.arrival_params, config.horizon, rng, cap)
    n = len(clock)
    if n == 0:
        return QueuePath(config.horizon, initial_level=i0)
    gen = rng.generator
    chain = config.chain
    times = clock.events
    if chain.beta_lazy > 0:
        keep = gen.random(n) >= chain.beta_lazy
        times = times[keep]
        n = times.size
    up = gen.random(n) < chain.p
    if chain.boundary is Boundary.LAZY_AT_ZERO:
        steps = np.where(up, 1, -1)
        levels, unused = _reflect_steps(steps, i0)
        return QueuePath(config.horizon, times, levels, _marks(steps, unused), i0)
    # forced-up boundary: every non-holding event at zero is an arrival
    levels = np.empty(n, dtype=np.int64)
    marks = np.empty(n, dtype="<U1")
    level = i0
    for k in range(n):
        if level == 0 or up[k]:
            level += 1
            marks[k] = ARRIVAL
        else:
            level -= 1
            marks[k] = DEPARTURE
        levels[k] = level
    return QueuePath(config.horizon, times, levels, marks, i0)


def competing_clocks(config: QueueModelConfig, n_events: int, rng: RngStream):
    """``n_events`` i.i.d. Model-2 renewals.

    Returns the inter-event times ``min(X_a, X_d)`` and a boolean array that
    is true where the arrival clock rang first.
    """
    _require(config, Model.M2)
    gen = rng.generator
    xa = _ml(config.arrival_params, gen, n_events)
    xd = _ml(config.departure_params, gen, n_events)
    return np.minimum(xa, xd), xa < xd


def simulate_model2(config: QueueModelConfig, rng: RngStream, cap: int | None = None) -> QueuePath:
    """Renewal queue in which the faster of two ML clocks decides each event."""
    _require(config, Model.M2)
    limit = event_cap(cap)
    i0 = config.initial_level
    if config.horizon == 0:
        return QueuePath(0.0, initial_level=i0)
    batch = 256
    time_chunks, arr_chunks = [], []
    last, total = 0.0, 0
    while True:
        gaps, arrival = competing_clocks(config, batch, rng)
        times = last + np.cumsum(gaps)
        k = int(np.searchsorted(times, config.horizon, side="right"))
        total += k
        if total > limit:
            raise EventCapError(f"model-2 path exceeds the event cap of {limit}")
        time_chunks.append(times[:k])
        arr_chunks.append(arrival[:k])
        if k < batch:
            break
        last = times[-1]
        batch = min(2 * batch, 1 << 22)
    times = np.concatenate(time_chunks)
    steps = np.where(np.concatenate(arr_chunks), 1, -1)
    keep = times > 0
    times, steps = times[keep], steps[keep]
    levels, unused = _reflect_steps(steps, i0)
    return QueuePath(config.horizon, times, levels, _marks(steps, unused), i0)


def simulate_model3(config: QueueModelConfig, rng: RngStream, cap: int | None = None) -> QueuePath:
    """Independent arrival and departure FPPs combined by :func:`reflect`."""
    _require(config, Model.M3)
    arrivals = simulate_fpp_renewal(config.arrival_params, config.horizon, rng, cap)
    departures = simulate_fpp_renewal(config.departure_params, config.horizon, rng, cap)
    return reflect(arrivals, departures, config.initial_level)


def simulate(config: QueueModelConfig, rng: RngStream, cap: int | None = None) -> QueuePath:
    return {Model.M1: simulate_model1, Model.M2: simulate_model2, Model.M3: simulate_model3}[
        config.model
    ](config, rng, cap)


def unused_service_times(path: QueuePath) -> np.ndarray:
    """Times at which the running infimum of the net input decreases.

    The net input counts every departure attempt, used or not, so this does
    not consult which departures were marked unused.
    """
    steps = np.where(path.marks == ARRIVAL, 1, -1)
    net = path.initial_level + np.cumsum(steps)
    floor = np.minimum.accumulate(np.minimum(net, 0))
    prev = np.concatenate(([0], floor[:-1]))
    return path.times[floor < prev]


def coupled_speedup(
    arrivals: CountingPath, departures: CountingPath, T0: float, initial_level: int = 0
) -> tuple[QueuePath, QueuePath]:
    """Original queue and the queue with arrivals sped up after ``T0``.

    With ``eta`` the gap from ``T0`` to the next arrival, the sped-up queue
    receives one extra arrival at ``T0`` and every arrival at or after ``T0``
    moved earlier by ``eta``; it is then reflected like any other queue.
    Before the first unused service of the original after ``T0`` it
    dominates the original.
    """
    deps = departures.events
    k = np.searchsorted(deps, T0)
    if k == deps.size or deps[k] != T0:
        raise DomainError(f"T0={T0} is not a departure time")
    original = reflect(arrivals, departures, initial_level)
    arr = arrivals.events
    j = np.searchsorted(arr, T0, side="left")
    eta = arr[j] - T0 if j < arr.size else 0.0
    shifted = np.concatenate((arr[:j], [T0], arr[j:] - eta))
    # arrivals moved onto T0 coincide with the extra one; counts matter, not
    # distinct times, so merge them through the step sequence directly
    times = np.concatenate((shifted, deps))
    is_dep = np.concatenate((np.zeros(shifted.size, bool), np.ones(deps.size, bool)))
    order = np.lexsort((is_dep, times))
    steps = np.where(is_dep[order], -1, 1)
    levels, unused = _reflect_steps(steps, _check_initial(initial_level))
    sped = QueuePath(
        arrivals.horizon, times[order], levels, _marks(steps, unused), int(initial_level)
    )
    return original, sped


def first_unused_after(path: QueuePath, T0: float) -> float:
    """First unused-service time strictly after ``T0`` (``inf`` if none)."""
    u = path.unused_marks()
    u = u[u > T0]
    return float(u[0]) if u.size else math.inf


def sign_change_count(alpha: float, lam: float, n_steps: int, rng: RngStream) -> int:
    """Sign changes of ``S_k = sum_{i<=k} (X_i - Y_i)``, ``k = 1..n_steps``.

    ``X_i, Y_i`` are i.i.d. ML(alpha, lam). ``S_0 = 0`` has no sign and is
    not counted.
    """
    if n_steps < 1:
        raise DomainError("n_steps must be at least 1")
    p = MLParams(alpha, lam)
    gen = rng.generator
    s = np.cumsum(_ml(p, gen, n_steps) - _ml(p, gen, n_steps))
    sg = np.sign(s)
    sg = sg[sg != 0]
    return int(np.count_nonzero(sg[1:] != sg[:-1]))
