"""Registered experiments and their built-in checks.

Every experiment writes its per-replica records to ``records.csv`` and a
``report.json`` with the config echo, summary statistics and checks. Replica
``i`` always draws from ``RngStream(seed, i)``, so results do not depend on
the number of worker processes.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from ..analytics import (
    QueueAnalyticsParams,
    arrival_prob,
    mixing_time,
    p00_time_domain,
    solve_fractional_kolmogorov,
)
from ..errors import SchemaError
from ..queues import Model, QueueModelConfig, simulate
from ..sampling import RngStream
from .config import ExperimentConfig
from .io import emit_path_csv, emit_series_csv, write_json

__all__ = ["ExperimentReport", "run_experiment", "queue_records", "EXPERIMENTS"]


@dataclass
class ExperimentReport:
    name: str
    config: dict
    records: list[dict]
    summary: dict
    checks: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    workers: int = 1
    files: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "config": self.config,
            "summary": self.summary,
            "checks": self.checks,
            "passed": self.passed,
            "wall_clock": self.wall_clock,
            "workers": self.workers,
            "records_file": "records.csv",
            "n_records": len(self.records),
            "files": self.files,
        }


def _check(passed: bool, value, threshold, detail: str = "", vacuous: bool = False) -> dict:
    return {"passed": bool(passed), "value": value, "threshold": threshold, "detail": detail, "vacuous": vacuous}


# replica workers (top level so that they pickle)


def queue_records(spec: dict, seed: int, ids) -> list[dict]:
    """Simulate one queue path per id and summarise it.

    ``spec`` holds the ``QueueModelConfig`` fields plus ``times`` (levels are
    read there) and ``window_start`` (zero visits are looked for in
    ``(window_start * horizon, horizon]``).
    """
    times = spec.get("times", [])
    w = spec.get("window_start", 0.5)
    cfg = QueueModelConfig(
        Model(spec["model"]),
        spec["alpha1"],
        spec.get("alpha2", 1.0),
        spec.get("lam", 1.0),
        spec.get("mu", 1.0),
        spec.get("p", 0.5),
        spec["horizon"],
    )
    out = []
    for i in ids:
        path = simulate(cfg, RngStream(seed, i))
        rec = {
            "replica": int(i),
            "final_level": path.final_level,
            "hit_zero": path.visits_zero(w * cfg.horizon, cfg.horizon) if cfg.horizon > 0 else path.initial_level == 0,
            "unused": int(path.unused_marks().size),
        }
        for k, t in enumerate(times):
            rec[f"level_{k}"] = int(path.level_at(t))
        out.append(rec)
    return out


def _map_replicas(spec: dict, seed: int, ids, threads: int) -> list[dict]:
    ids = list(ids)
    if threads <= 1 or len(ids) < 2 * threads:
        return queue_records(spec, seed, ids)
    chunks = [ids[k::threads] for k in range(threads)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(queue_records, [spec] * threads, [seed] * threads, chunks))
    merged = [r for part in parts for r in part]
    merged.sort(key=lambda r: r["replica"])
    return merged


def _fit_power(t, y):
    """Least-squares slope and intercept of log y on log t, with slope standard error."""
    x, ly = np.log(np.asarray(t, float)), np.log(np.asarray(y, float))
    if x.size >= 4:
        coef, cov = np.polyfit(x, ly, 1, cov=True)
        se = float(math.sqrt(cov[0, 0]))
    else:
        coef = np.polyfit(x, ly, 1)
        se = float("nan")
    return float(coef[0]), float(math.exp(coef[1])), se


# experiments


def _pgrid(cfg: ExperimentConfig, threads: int, out: Path):
    records = [
        {"alpha": a, "beta": b, "rho": cfg["rho"], "p": arrival_prob(a, b, cfg["rho"])}
        for a in cfg["alphas"]
        for b in cfg["betas"]
    ]
    dev = max(abs(r["p"] - 0.5) for r in records)
    summary = {"max_abs_dev": dev, "n_pairs": len(records)}
    checks = {}
    if cfg["rho"] == 1.0:
        checks["half_at_unit_rho"] = _check(dev < cfg["tol"], dev, cfg["tol"], "max |p - 1/2| over the grid")
    return records, summary, checks, []


def _recurrence(cfg: ExperimentConfig, threads: int, out: Path):
    a1, a2, T = cfg["alpha1"], cfg["alpha2"], cfg["horizon"]
    spec = {
        "model": 3,
        "alpha1": a1,
        "alpha2": a2,
        "lam": cfg["lam"],
        "mu": cfg["mu"],
        "horizon": T,
        "window_start": cfg["window_start"],
    }
    records = _map_replicas(spec, cfg.seed, range(cfg["replicas"]), threads)
    finals = np.array([r["final_level"] for r in records])
    hits = np.array([r["hit_zero"] for r in records])
    gamma = cfg["exceed_exponent"] if cfg["exceed_exponent"] is not None else max(a1 - a2, 0.0)
    level = T**gamma
    exceed = finals > level
    summary = {
        "hit_zero_fraction": float(hits.mean()),
        "exceed_fraction": float(exceed.mean()),
        "exceed_level": level,
        "window": [cfg["window_start"] * T, T],
        "final_level_quantiles": dict(zip(["q10", "q50", "q90"], np.quantile(finals, [0.1, 0.5, 0.9]).tolist())),
        "mean_unused": float(np.mean([r["unused"] for r in records])),
    }
    vacuous = T == 0
    checks = {}
    if a1 > a2:
        checks["transient_exceedance"] = _check(
            vacuous or exceed.mean() >= cfg["exceed_threshold"],
            float(exceed.mean()),
            cfg["exceed_threshold"],
            f"fraction with L(T) > T**{gamma:g}",
            vacuous,
        )
    else:
        checks["returns_to_zero"] = _check(
            vacuous or hits.mean() >= cfg["return_threshold"],
            float(hits.mean()),
            cfg["return_threshold"],
            "fraction visiting 0 in the late window",
            vacuous,
        )
    return records, summary, checks, []


def _scaling_limit(cfg: ExperimentConfig, threads: int, out: Path):
    a1, a2, R = cfg["alpha1"], cfg["alpha2"], cfg["replicas"]
    shrink = a1 < a2
    times = cfg["times"] or ([1e3, 1e4] if shrink else [1e3, 4e3])
    if len(times) != 2:
        raise SchemaError("scaling-limit needs exactly two times")
    gamma = max(a1, a2) if shrink else a1
    base = {"model": 3, "alpha1": a1, "alpha2": a2, "lam": cfg["lam"], "mu": cfg["mu"]}
    records = []
    if shrink:
        # the same replicas observed at both times
        spec = {**base, "horizon": max(times), "times": times}
        for r in _map_replicas(spec, cfg.seed, range(R), threads):
            for k, t in enumerate(times):
                records.append({"replica": r["replica"], "time": t, "scaled": r[f"level_{k}"] / t**gamma})
    else:
        # independent replica sets so that the two samples are independent
        for k, t in enumerate(times):
            spec = {**base, "horizon": t}
            for r in _map_replicas(spec, cfg.seed, range(k * R, (k + 1) * R), threads):
                records.append({"replica": r["replica"], "time": t, "scaled": r["final_level"] / t**gamma})
    samples = [np.array([r["scaled"] for r in records if r["time"] == t]) for t in times]
    summary = {
        "gamma": gamma,
        "times": times,
        "means": [float(s.mean()) for s in samples],
        "maxima": [float(s.max()) for s in samples],
    }
    if shrink:
        ratio = summary["maxima"][1] / summary["maxima"][0] if summary["maxima"][0] > 0 else 0.0
        summary["max_ratio"] = ratio
        checks = {
            "degenerate_limit": _check(
                ratio <= 1.0 / cfg["shrink_factor"], ratio, 1.0 / cfg["shrink_factor"], "max ratio later/earlier"
            )
        }
    else:
        ks = stats.ks_2samp(samples[0], samples[1])
        summary["ks_statistic"] = float(ks.statistic)
        summary["ks_pvalue"] = float(ks.pvalue)
        checks = {
            "stable_law": _check(ks.pvalue > cfg["ks_level"], float(ks.pvalue), cfg["ks_level"], "two-sample KS p-value")
        }
    return records, summary, checks, []


def _mixing(cfg: ExperimentConfig, threads: int, out: Path):
    params = QueueAnalyticsParams(cfg["p"], cfg["alpha"], cfg["lam"])
    eps = np.asarray(cfg["eps"], float)
    T = np.array([mixing_time(e, params, cfg["trunc"]) for e in eps])
    records = [{"eps": float(e), "mixing_time": float(t)} for e, t in zip(eps, T)]
    slope, const, se = _fit_power(1 / eps, T)
    target = 1 / cfg["alpha"]
    summary = {"slope": slope, "slope_se": se, "constant": const, "expected_slope": target}
    checks = {
        "slope": _check(
            abs(slope / target - 1) <= cfg["rel_tol"], slope, [target * (1 - cfg["rel_tol"]), target * (1 + cfg["rel_tol"])]
        )
    }
    return records, summary, checks, []


def _consistency(cfg: ExperimentConfig, threads: int, out: Path):
    times = list(cfg["times"])
    R = cfg["replicas"]
    records, rows = [], []
    checks = {}
    for p in cfg["ps"]:
        for a in cfg["alphas"]:
            spec = {"model": 1, "alpha1": a, "p": p, "horizon": max(times), "times": times}
            reps = _map_replicas(spec, cfg.seed, range(R), threads)
            for r in reps:
                records.append({"p": p, "alpha": a, **{f"level_{k}": r[f"level_{k}"] for k in range(len(times))}, "replica": r["replica"]})
            params = QueueAnalyticsParams(p, a)
            inv = np.atleast_1d(p00_time_domain(np.array(times), params))
            ode = solve_fractional_kolmogorov(params, 0.0, cfg["trunc"], times)[:, 0]
            for k, t in enumerate(times):
                empty = np.array([r[f"level_{k}"] == 0 for r in reps], float)
                mc = float(empty.mean())
                se = float(math.sqrt(max(mc * (1 - mc), 1e-300) / R))
                tol_mc = max(3 * se, cfg["floor"])
                row = {"p": p, "alpha": a, "t": t, "mc": mc, "mc_se": se, "inversion": float(inv[k]), "ode": float(ode[k])}
                rows.append(row)
                key = f"p={p},alpha={a},t={t:g}"
                d1, d2, d3 = abs(mc - inv[k]), abs(mc - ode[k]), abs(inv[k] - ode[k])
                checks[key] = _check(
                    d1 <= tol_mc and d2 <= tol_mc and d3 <= cfg["floor"],
                    [float(d1), float(d2), float(d3)],
                    [tol_mc, tol_mc, cfg["floor"]],
                    "|mc-inv|, |mc-ode|, |inv-ode|",
                )
    return records, {"table": rows}, checks, []


def _moments(cfg: ExperimentConfig, threads: int, out: Path):
    a, times, R = cfg["alpha"], list(cfg["times"]), cfg["replicas"]
    records, fits, checks = [], [], {}
    for p in cfg["ps"]:
        spec = {"model": 1, "alpha1": a, "lam": cfg["lam"], "p": p, "horizon": max(times), "times": times}
        reps = _map_replicas(spec, cfg.seed, range(R), threads)
        levels = np.array([[r[f"level_{k}"] for k in range(len(times))] for r in reps], float)
        for r in reps:
            records.append({"p": p, **r})
        mean, var = levels.mean(axis=0), levels.var(axis=0, ddof=1)
        m_slope, m_const, m_se = _fit_power(times, mean)
        v_slope, v_const, v_se = _fit_power(times, var)
        expected = 0.0 if p < 0.5 else (a / 2 if p == 0.5 else a)
        expected_var = 0.0 if p < 0.5 else (a if p == 0.5 else 2 * a)
        fits.append(
            {
                "p": p,
                "mean": mean.tolist(),
                "variance": var.tolist(),
                "mean_exponent": m_slope,
                "mean_exponent_se": m_se,
                "mean_constant": m_const,
                "expected_mean_exponent": expected,
                "variance_exponent": v_slope,
                "variance_exponent_se": v_se,
                "variance_constant": v_const,
                "expected_variance_exponent": expected_var,
            }
        )
        checks[f"mean_exponent_p={p}"] = _check(
            abs(m_slope - expected) <= cfg["abs_tol"], m_slope, [expected - cfg["abs_tol"], expected + cfg["abs_tol"]]
        )
    return records, {"times": times, "fits": fits}, checks, []


def _fig_regimes(cfg: ExperimentConfig, threads: int, out: Path):
    records, files = [], []
    for a1, a2 in cfg["pairs"]:
        qc = QueueModelConfig(Model.M3, a1, a2, cfg["lam"], cfg["mu"], horizon=cfg["horizon"])
        for i in range(cfg["replicas"]):
            path = simulate(qc, RngStream(cfg.seed, i))
            name = f"path_a1={a1}_a2={a2}_{i}.csv"
            emit_path_csv(path, out / name)
            files.append(name)
            records.append({"alpha1": a1, "alpha2": a2, "replica": i, "final_level": path.final_level, "file": name})
    return records, {"n_paths": len(files)}, {}, files


def _fig_limit(cfg: ExperimentConfig, threads: int, out: Path):
    a, T = cfg["alpha"], cfg["horizon"]
    qc = QueueModelConfig(Model.M3, a, a, cfg["lam"], cfg["mu"], horizon=T)
    tau = np.linspace(0.0, 1.0, cfg["grid"] + 1)
    records, files = [], []
    for i in range(cfg["replicas"]):
        path = simulate(qc, RngStream(cfg.seed, i))
        scaled = path.level_at(tau * T) / T**a if T > 0 else np.zeros_like(tau)
        name = f"scaled_{i}.csv"
        emit_series_csv(["tau", "value"], [tau, scaled], out / name)
        files.append(name)
        records.append({"replica": i, "final_scaled": float(scaled[-1]), "file": name})
    return records, {"n_paths": len(files)}, {}, files


def _fig_balanced(cfg: ExperimentConfig, threads: int, out: Path):
    a, T = cfg["alpha"], cfg["horizon"]
    spec = {"model": 3, "alpha1": a, "alpha2": a, "lam": cfg["lam"], "mu": cfg["mu"], "horizon": T, "window_start": cfg["window_start"]}
    records = _map_replicas(spec, cfg.seed, range(cfg["replicas"]), threads)
    qc = QueueModelConfig(Model.M3, a, a, cfg["lam"], cfg["mu"], horizon=T)
    files = []
    for i in range(min(cfg["paths"], cfg["replicas"])):
        name = f"path_{i}.csv"
        emit_path_csv(simulate(qc, RngStream(cfg.seed, i)), out / name)
        files.append(name)
    summary = {"hit_zero_fraction": float(np.mean([r["hit_zero"] for r in records]))}
    return records, summary, {}, files


def _model_compare(cfg: ExperimentConfig, threads: int, out: Path):
    a, T, R = cfg["alpha"], cfg["horizon"], cfg["replicas"]
    m1 = _map_replicas({"model": 1, "alpha1": a, "p": cfg["p"], "horizon": T}, cfg.seed, range(R), threads)
    m3 = _map_replicas({"model": 3, "alpha1": a, "alpha2": a, "horizon": T}, cfg.seed, range(R, 2 * R), threads)
    records = [{"model": 1, **r} for r in m1] + [{"model": 3, **r} for r in m3]
    x1 = [r["final_level"] for r in m1]
    x3 = [r["final_level"] for r in m3]
    ks = stats.ks_2samp(x1, x3)
    summary = {
        "ks_statistic": float(ks.statistic),
        "ks_pvalue": float(ks.pvalue),
        "mean_model1": float(np.mean(x1)),
        "mean_model3": float(np.mean(x3)),
    }
    return records, summary, {}, []


EXPERIMENTS = {
    "pgrid": _pgrid,
    "recurrence": _recurrence,
    "scaling-limit": _scaling_limit,
    "mixing": _mixing,
    "consistency": _consistency,
    "moments": _moments,
    "fig-regimes": _fig_regimes,
    "fig-limit": _fig_limit,
    "fig-balanced": _fig_balanced,
    "model-compare": _model_compare,
}


def _write_records(records: list[dict], file: Path) -> None:
    keys: list[str] = []
    for r in records:
        for k in r:
            if k not in keys:
                keys.append(k)
    emit_series_csv(keys, [[r.get(k, "") for r in records] for k in keys], file)


def run_experiment(config: ExperimentConfig, threads: int = 1, write: bool = True) -> ExperimentReport:
    """Run a registered experiment and (optionally) write its outputs."""
    if config.name not in EXPERIMENTS:
        raise SchemaError(f"unknown experiment {config.name!r}")
    out = config.out
    if write:
        out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    records, summary, checks, files = EXPERIMENTS[config.name](config, max(1, threads), out)
    report = ExperimentReport(
        name=config.name,
        config={"name": config.name, "seed": config.seed, "output_dir": str(out), "parameters": config.parameters},
        records=records,
        summary=summary,
        checks=checks,
        wall_clock=time.perf_counter() - start,
        workers=max(1, threads),
        files=files,
    )
    if write:
        _write_records(records, out / "records.csv")
        write_json(report.to_dict(), out / "report.json")
    return report
