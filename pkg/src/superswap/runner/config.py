"""Experiment configuration: a flat ``key = value`` file plus command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

MODES = ("analytic", "monte_carlo", "both")
MODE_ALIASES = {"mc": "monte_carlo", "montecarlo": "monte_carlo"}
D_MAX = 0.45

DEFAULT_D_GRID = tuple(float(x) for x in np.round(np.arange(0.02, 0.45 + 1e-9, 0.01), 2))
DEFAULT_T_GRID = tuple(float(x) for x in np.geomspace(0.1, 10.0, 40))
DEFAULT_ETA_GRID = tuple(float(x) for x in np.round(np.arange(1.0, 0.0, -0.05), 2))
DISTANCE_SWEEP_T = 5.0
TIME_SWEEP_D = 0.1
DEFAULT_SEED = 20130412


class ConfigError(ValueError):
    pass


def parse_grid(text) -> tuple[float, ...]:
    """Parse ``0.1``, ``0.6,0.8``, ``start:stop:step`` (inclusive) or ``log:start:stop:count``."""
    if isinstance(text, (int, float)):
        return (float(text),)
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    s = str(text).strip()
    try:
        if s.startswith("log:"):
            a, b, n = s[4:].split(":")
            return tuple(float(x) for x in np.geomspace(float(a), float(b), int(n)))
        if ":" in s:
            a, b, step = (float(x) for x in s.split(":"))
            if step <= 0:
                raise ConfigError(f"grid step must be positive: {s!r}")
            n = int(np.floor((b - a) / step + 1e-9)) + 1
            return tuple(float(x) for x in np.round(a + step * np.arange(n), 12))
        return tuple(float(x) for x in s.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {s!r}: {exc}") from None


@dataclass
class ExperimentConfig:
    gamma: float = 1.0
    d_over_lambda: Optional[tuple[float, ...]] = None
    T: Optional[tuple[float, ...]] = None
    eta: tuple[float, ...] = DEFAULT_ETA_GRID
    n_trajectories: int = 100_000
    master_seed: int = DEFAULT_SEED
    mode: str = "analytic"
    workers: int = 1

    def __post_init__(self):
        self.mode = MODE_ALIASES.get(self.mode, self.mode)
        for name in ("d_over_lambda", "T", "eta"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, parse_grid(v))
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive")
        if self.d_over_lambda is not None:
            if not self.d_over_lambda:
                raise ConfigError("d_over_lambda range is empty")
            if any(not 0 < d <= D_MAX + 1e-12 for d in self.d_over_lambda):
                raise ConfigError(f"d_over_lambda must lie in (0, {D_MAX}]")
        if self.T is not None:
            if not self.T:
                raise ConfigError("T range is empty")
            if any(not t > 0 for t in self.T):
                raise ConfigError("waiting times must be positive")
        if not self.eta:
            raise ConfigError("eta list is empty")
        if any(not 0.0 <= e <= 1.0 for e in self.eta):
            raise ConfigError("eta values must lie in [0, 1]")
        if int(self.n_trajectories) < 1:
            raise ConfigError("n_trajectories must be positive")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if int(self.workers) < 1:
            raise ConfigError("workers must be positive")

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_CASTS = {
    "gamma": float,
    "d_over_lambda": parse_grid,
    "T": parse_grid,
    "eta": parse_grid,
    "n_trajectories": int,
    "master_seed": int,
    "mode": str,
    "workers": int,
}


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CASTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = _CASTS[key](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return out


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Build a config from an optional file; non-None overrides win over the file."""
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        values.update(parse_config_text(text))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)
