"""Flat ``key = value`` run configuration.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines are
ignored.  Lists are comma separated; inclusive ranges are written
``start:stop`` or ``start:stop:step``.  Recognised keys:

model        n_sites, coordination (integer or ``max`` for N-1), falloff,
             anisotropy, field, coupling_scale
metrics      epsilon, t_max (``none`` for 5 N / J), dt
sweep        axis.N, axis.z, axis.alpha, axis.lambda, axis.g (declaration
             order is the row-major order), outputs, time_budget, cache_dir
fit          input, fix_a
oracle-check samples, seed, randomize
general      out, parallelism
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .metrics import MetricsConfig
from .model import ModelParams

AXIS_KEYS = ("N", "z", "alpha", "lambda", "g")

DEFAULTS = {
    "n_sites": 10,
    "coordination": 1,
    "falloff": 0.0,
    "anisotropy": 0.0,
    "field": 0.0,
    "coupling_scale": 1.0,
    "epsilon": 1e-4,
    "t_max": None,
    "dt": 0.05,
    "outputs": ["t_q", "f_star", "t_star"],
    "time_budget": None,
    "cache_dir": None,
    "input": None,
    "fix_a": True,
    "samples": 5,
    "seed": 0,
    "randomize": True,
    "out": None,
    "parallelism": 1,
}

_INT_KEYS = {"n_sites", "samples", "seed", "parallelism"}
_FLOAT_KEYS = {"falloff", "anisotropy", "field", "coupling_scale", "epsilon", "dt"}
_OPT_FLOAT_KEYS = {"t_max", "time_budget"}
_BOOL_KEYS = {"fix_a", "randomize"}
_STR_KEYS = {"cache_dir", "input", "out"}


class ConfigError(ValueError):
    pass


def _number(text: str, key: str):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite, got {text!r}")
    return int(value) if value.is_integer() and "." not in text and "e" not in text.lower() else value


def parse_axis(text: str, key: str) -> list:
    text = text.strip()
    if ":" in text and "," not in text:
        parts = [_number(p.strip(), key) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise ConfigError(f"{key}: range must be start:stop[:step], got {text!r}")
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1
        if step <= 0:
            raise ConfigError(f"{key}: range step must be positive")
        count = math.floor((stop - start) / step + 1e-9) + 1
        values = [start + i * step for i in range(count)]
        if all(isinstance(v, int) for v in (start, stop, step)):
            return values
        return [round(v, 12) for v in values]
    values = [_number(v.strip(), key) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError(f"{key}: axis needs at least one value")
    return values


def _parse_value(key: str, text: str):
    text = text.strip()
    if key.startswith("axis."):
        name = key[5:]
        if name not in AXIS_KEYS:
            raise ConfigError(f"{key}: unknown axis {name!r} (choose from {', '.join(AXIS_KEYS)})")
        return parse_axis(text, key)
    if key not in DEFAULTS:
        raise ConfigError(f"unknown config key {key!r}")
    low = text.lower()
    if key == "coordination":
        return "max" if low == "max" else int(_number(text, key))
    if key in _INT_KEYS:
        value = _number(text, key)
        if not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {text!r}")
        return value
    if key in _FLOAT_KEYS:
        return float(_number(text, key))
    if key in _OPT_FLOAT_KEYS:
        return None if low in ("none", "") else float(_number(text, key))
    if key in _BOOL_KEYS:
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(f"{key}: expected true/false, got {text!r}")
    if key == "outputs":
        items = [v.strip() for v in text.split(",") if v.strip()]
        bad = [v for v in items if v not in ("t_q", "f_star", "t_star")]
        if bad or not items:
            raise ConfigError(f"outputs: unknown metric(s) {bad}")
        return items
    return None if low == "none" else text


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: dict(DEFAULTS))
    axes: dict = field(default_factory=dict)   # insertion order is the sweep order

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "RunConfig":
        cfg = cls()
        seen = set()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in seen:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
            seen.add(key)
            try:
                parsed = _parse_value(key, value)
            except ConfigError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from None
            if key.startswith("axis."):
                cfg.axes[key[5:]] = parsed
            else:
                cfg.values[key] = parsed
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.parse(text, str(path))

    def set(self, key: str, value) -> None:
        """Override with a raw string (as from a command-line flag) or a typed value."""
        if isinstance(value, str):
            value = _parse_value(key, value)
        if key.startswith("axis."):
            self.axes[key[5:]] = value
        elif key in DEFAULTS:
            self.values[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")

    def dump(self) -> str:
        lines = [f"{k} = {_format_value(v)}" for k, v in self.values.items()]
        lines += [f"axis.{k} = {_format_value(v)}" for k, v in self.axes.items()]
        return "\n".join(lines) + "\n"

    def __getitem__(self, key):
        return self.values[key]

    def model_params(self) -> ModelParams:
        v = self.values
        n = v["n_sites"]
        z = n - 1 if v["coordination"] == "max" else v["coordination"]
        return ModelParams(n, z, v["falloff"], v["anisotropy"], v["field"], v["coupling_scale"])

    def metrics_config(self) -> MetricsConfig:
        v = self.values
        return MetricsConfig(epsilon=v["epsilon"], t_max=v["t_max"], dt=v["dt"])

    def config_hash(self) -> str:
        # where results go and how many workers compute them does not change the results
        values = {k: v for k, v in self.values.items() if k not in ("out", "parallelism", "cache_dir")}
        payload = json.dumps({"values": values, "axes": self.axes}, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]
