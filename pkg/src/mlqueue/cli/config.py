"""Experiment configurations and their schemas."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import SchemaError

__all__ = ["DEFAULT_SEED", "SCHEMAS", "ExperimentConfig", "parse_config", "parse_config_text", "serialize_config"]

DEFAULT_SEED = 20261015

_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]

# every parameter an experiment reads, with its default
SCHEMAS: dict[str, dict[str, Any]] = {
    "pgrid": {"alphas": _GRID, "betas": _GRID, "rho": 1.0, "tol": 1e-3},
    "recurrence": {
        "alpha1": 0.6,
        "alpha2": 0.9,
        "lam": 1.0,
        "mu": 1.0,
        "horizon": 1e4,
        "replicas": 1000,
        "window_start": 0.5,
        "return_threshold": 0.95,
        "exceed_exponent": None,
        "exceed_threshold": 0.9,
    },
    "scaling-limit": {
        "alpha1": 0.7,
        "alpha2": 0.7,
        "lam": 1.0,
        "mu": 1.0,
        "times": None,
        "replicas": 10000,
        "ks_level": 0.01,
        "shrink_factor": 2.0,
    },
    "mixing": {
        "p": 0.3,
        "alpha": 0.7,
        "lam": 1.0,
        "eps": [0.1, 0.05, 0.02, 0.01],
        "trunc": 200,
        "rel_tol": 0.15,
    },
    "consistency": {
        "ps": [0.3, 0.5, 0.7],
        "alphas": [0.6, 0.9],
        "times": [10.0, 100.0],
        "replicas": 10000,
        "trunc": 200,
        "floor": 1e-3,
    },
    "moments": {
        "ps": [0.3, 0.5, 0.7],
        "alpha": 0.7,
        "lam": 1.0,
        "times": [1e2, 10**2.5, 1e3, 10**3.5, 1e4],
        "replicas": 1000,
        "abs_tol": 0.1,
    },
    "fig-regimes": {
        "pairs": [[0.9, 0.6], [0.7, 0.7], [0.6, 0.9]],
        "lam": 1.0,
        "mu": 1.0,
        "horizon": 1e3,
        "replicas": 1,
    },
    "fig-limit": {"alpha": 0.7, "lam": 1.0, "mu": 1.0, "horizon": 1e4, "replicas": 3, "grid": 1000},
    "fig-balanced": {
        "alpha": 0.7,
        "lam": 1.0,
        "mu": 2.0,
        "horizon": 1e4,
        "replicas": 200,
        "paths": 3,
        "window_start": 0.5,
    },
    "model-compare": {"alpha": 0.5, "p": 0.5, "horizon": 1e3, "replicas": 10000},
}

_TOP = {"name", "seed", "output_dir", "parameters"}


@dataclass(frozen=True)
class ExperimentConfig:
    """A named experiment, its parameters (defaults filled in), seed and output directory."""

    name: str
    parameters: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    output_dir: str | None = None

    def __post_init__(self) -> None:
        if self.name not in SCHEMAS:
            raise SchemaError(f"unknown experiment {self.name!r}; known: {', '.join(sorted(SCHEMAS))}")
        schema = SCHEMAS[self.name]
        for key in self.parameters:
            if key not in schema:
                raise SchemaError(f"unknown parameter {key!r} for experiment {self.name!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not (0 <= self.seed < 2**64):
            raise SchemaError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        merged = {**schema, **self.parameters}
        if "replicas" in merged and (not isinstance(merged["replicas"], int) or merged["replicas"] < 1):
            raise SchemaError(f"replicas must be a positive integer, got {merged['replicas']!r}")
        if "horizon" in merged and not (isinstance(merged["horizon"], (int, float)) and merged["horizon"] >= 0):
            raise SchemaError(f"horizon must be a nonnegative number, got {merged['horizon']!r}")
        object.__setattr__(self, "parameters", merged)

    def __getitem__(self, key: str):
        return self.parameters[key]

    @property
    def out(self) -> Path:
        return Path(self.output_dir) if self.output_dir else Path("results") / self.name


def serialize_config(config: ExperimentConfig) -> str:
    body = {
        "name": config.name,
        "seed": config.seed,
        "output_dir": config.output_dir,
        "parameters": config.parameters,
    }
    return json.dumps(body, indent=2)


def _from_mapping(doc: dict, source: str) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise SchemaError(f"{source}: top level must be a JSON object")
    if "name" not in doc:
        raise SchemaError(f"{source}: missing key 'name'")
    params = dict(doc.get("parameters") or {})
    # parameters may also sit at top level
    for key, value in doc.items():
        if key not in _TOP:
            params[key] = value
    return ExperimentConfig(
        name=doc["name"],
        parameters=params,
        seed=doc.get("seed", DEFAULT_SEED),
        output_dir=doc.get("output_dir"),
    )


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise SchemaError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {context}") from exc
    return _from_mapping(doc, source)


def parse_config(file) -> ExperimentConfig:
    """Read and validate a JSON experiment configuration."""
    try:
        text = Path(file).read_text()
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read {file}: {exc.strerror}") from exc
    return parse_config_text(text, str(file))
