"""Deterministic, resumable evaluation of metric grids.

Cells are enumerated row-major with axes in declaration order.  Each cell is
a pure function of its parameters, so the result does not depend on how many
worker processes run it or in which order they finish.  With a cache
directory every finished cell is stored under ``<cache>/<config hash>/`` and
reused on the next run.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import AXIS_KEYS, RunConfig
from .metrics import (FAILED, INVALID, TIMED_OUT, CellTimeout, MetricsConfig, MetricsRecord, evaluate,
                      read_records_csv, read_records_jsonl, write_records_csv, write_records_jsonl)
from .model import InvalidModelError, ModelParams

AXIS_FIELDS = {"N": "n_sites", "z": "coordination", "alpha": "falloff", "lambda": "anisotropy", "g": "field"}
_INT_FIELDS = {"n_sites", "coordination"}
METRIC_NAMES = ("t_q", "f_star", "t_star")


@dataclass(frozen=True)
class SweepGrid:
    """Axes (ordered), fixed parameters, metric settings and requested outputs.

    ``fixed`` uses the model field names (``n_sites``, ``coordination`` ...);
    ``coordination="max"`` ties ``z`` to ``N - 1`` in every cell.
    """

    axes: tuple
    fixed: dict = field(default_factory=dict)
    config: MetricsConfig = MetricsConfig()
    outputs: tuple = METRIC_NAMES
    time_budget: float | None = None

    def __post_init__(self):
        axes = tuple((name, tuple(values)) for name, values in self.axes)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "outputs", tuple(self.outputs))
        names = [name for name, _ in axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis names in {names}")
        for name, values in axes:
            if name not in AXIS_FIELDS:
                raise ValueError(f"unknown axis {name!r}; choose from {', '.join(AXIS_KEYS)}")
            if not values:
                raise ValueError(f"axis {name!r} has no values")
            if not all(np.isfinite(float(v)) for v in values):
                raise ValueError(f"axis {name!r} has non-finite values")
            if AXIS_FIELDS[name] in self.fixed:
                raise ValueError(f"{AXIS_FIELDS[name]} is both an axis and fixed")
        unknown = set(self.fixed) - set(AXIS_FIELDS.values()) - {"coupling_scale"}
        if unknown:
            raise ValueError(f"unknown fixed parameters {sorted(unknown)}")
        if "n_sites" not in self.fixed and "N" not in names:
            raise ValueError("the grid must fix n_sites or sweep the N axis")
        bad = set(self.outputs) - set(METRIC_NAMES)
        if bad or not self.outputs:
            raise ValueError(f"unknown outputs {sorted(bad)}")

    @property
    def shape(self) -> tuple:
        return tuple(len(v) for _, v in self.axes)

    def cells(self) -> list[dict]:
        """Raw parameter dictionaries, row-major."""
        names = [AXIS_FIELDS[name] for name, _ in self.axes]
        out = []
        for combo in itertools.product(*(values for _, values in self.axes)):
            raw = {"coordination": 1, "falloff": 0.0, "anisotropy": 0.0, "field": 0.0, "coupling_scale": 1.0}
            raw.update(self.fixed)
            raw.update(zip(names, combo))
            for key in _INT_FIELDS:
                if raw.get(key) != "max" and key in raw:
                    value = raw[key]
                    raw[key] = int(value) if float(value).is_integer() else value
            for key in ("falloff", "anisotropy", "field", "coupling_scale"):
                raw[key] = float(raw[key])
            if raw["coordination"] == "max":
                raw["coordination"] = raw["n_sites"] - 1
            out.append(raw)
        return out

    def as_dict(self) -> dict:
        return {
            "axes": [[name, list(values)] for name, values in self.axes],
            "fixed": dict(sorted(self.fixed.items())),
            "config": self.config.as_dict(),
            "outputs": list(self.outputs),
            "time_budget": self.time_budget,
        }

    def config_hash(self) -> str:
        payload = json.dumps(self.as_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @classmethod
    def from_run_config(cls, cfg: RunConfig) -> "SweepGrid":
        if not cfg.axes:
            raise ValueError("a sweep needs at least one axis.<name> entry")
        swept = {AXIS_FIELDS[name] for name in cfg.axes}
        fixed = {k: cfg[k] for k in ("n_sites", "coordination", "falloff", "anisotropy", "field", "coupling_scale")
                 if k not in swept}
        return cls(axes=tuple(cfg.axes.items()), fixed=fixed, config=cfg.metrics_config(),
                   outputs=tuple(cfg["outputs"]), time_budget=cfg["time_budget"])


@dataclass(frozen=True)
class SweepResult:
    grid: SweepGrid
    records: list
    provenance: dict


def _flat_record(raw: dict, status: str) -> MetricsRecord:
    return MetricsRecord(raw["n_sites"], raw["coordination"], raw["falloff"], raw["anisotropy"],
                         raw["field"], status=status, coupling_scale=raw.get("coupling_scale", 1.0))


def run_cell(raw: dict, config: MetricsConfig, outputs=METRIC_NAMES, time_budget=None) -> MetricsRecord:
    """Evaluate one cell; model errors become statuses instead of exceptions."""
    try:
        params = ModelParams(**raw)
    except (InvalidModelError, TypeError):
        return _flat_record(raw, INVALID)
    try:
        return evaluate(params, config, outputs=outputs, time_budget=time_budget)
    except CellTimeout:
        return _flat_record(raw, TIMED_OUT)
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError):
        return _flat_record(raw, FAILED)


def _cell_task(args):
    index, raw, config, outputs, time_budget = args
    return index, run_cell(raw, config, outputs, time_budget)


def _cache_path(cache_dir: Path, index: int) -> Path:
    return cache_dir / f"cell_{index:06d}.json"


def _store(cache_dir: Path, index: int, record: MetricsRecord) -> None:
    path = _cache_path(cache_dir, index)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(record.as_json()))
    os.replace(tmp, path)


def _load(cache_dir: Path, index: int) -> MetricsRecord | None:
    path = _cache_path(cache_dir, index)
    if not path.exists():
        return None
    try:
        return MetricsRecord.from_row(json.loads(path.read_text()))
    except (json.JSONDecodeError, KeyError, ValueError):
        return None


def resolve_parallelism(parallelism) -> int:
    if parallelism in (None, "max", 0):
        return os.cpu_count() or 1
    parallelism = int(parallelism)
    if parallelism < 1:
        raise ValueError("parallelism must be a positive integer")
    return parallelism


def run_sweep(grid: SweepGrid, parallelism: int = 1, cache_dir=None) -> SweepResult:
    """Evaluate every cell of ``grid``.

    ``cache_dir`` enables resumption: completed cells are written as they
    finish and picked up again by a later run with the same config hash.
    """
    workers = resolve_parallelism(parallelism)
    cells = grid.cells()
    config_hash = grid.config_hash()
    slots: list[MetricsRecord | None] = [None] * len(cells)
    store = None
    if cache_dir is not None:
        store = Path(cache_dir) / config_hash
        try:
            store.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create cache directory {store}: {exc}") from exc
        for i in range(len(cells)):
            slots[i] = _load(store, i)
    todo = [(i, cells[i], grid.config, grid.outputs, grid.time_budget) for i, rec in enumerate(slots) if rec is None]

    def finish(index, record):
        slots[index] = record
        if store is not None:
            _store(store, index, record)

    if workers == 1 or len(todo) <= 1:
        for task in todo:
            finish(*_cell_task(task))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_cell_task, task) for task in todo]
            for fut in as_completed(futures):
                finish(*fut.result())

    provenance = {
        "tool": "xyqst",
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config_hash": config_hash,
        "grid": grid.as_dict(),
    }
    return SweepResult(grid, list(slots), provenance)


def export(result: SweepResult, path, format: str = "csv") -> Path:
    path = Path(path)
    if format == "csv":
        write_records_csv(result.records, path)
    elif format == "jsonl":
        write_records_jsonl(result.records, path, header=result.provenance)
    else:
        raise ValueError(f"unknown export format {format!r}")
    return path


def load(path, format: str | None = None):
    """Read exported records back; returns ``(provenance or None, records)``."""
    path = Path(path)
    format = format or ("jsonl" if path.suffix == ".jsonl" else "csv")
    if format == "jsonl":
        return read_records_jsonl(path)
    return None, read_records_csv(path)
