"""Figures of merit extracted from fidelity-versus-time curves.

* ``t_q``: first time with ``f - 2/3 > epsilon``.
* ``f*``, ``t*``: value and time of the first local maximum of ``f`` after ``t_q``.
* family aggregates over the coordination number or the fall-off exponent.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize

from .fidelity import CLASSICAL_LIMIT, fidelity_at
from .freefermion import BogoliubovSolution, diagonalize
from .model import InvalidModelError, ModelParams, build_quadratic_form

FOUND = "found"
NO_ADVANTAGE = "no-advantage-within-horizon"
INVALID = "invalid-cell"
FAILED = "failed"
TIMED_OUT = "timed-out"
STATUSES = (FOUND, NO_ADVANTAGE, INVALID, FAILED, TIMED_OUT)

CSV_COLUMNS = ("N", "z", "alpha", "lambda", "g", "t_q", "f_star", "t_star", "status")

BISECTION_TOL = 1e-6


class NoAdvantageError(RuntimeError):
    """No member of a parameter family beats the classical limit."""


class CellTimeout(RuntimeError):
    pass


@dataclass(frozen=True)
class MetricsConfig:
    """Search settings.

    ``t_max=None`` means the default horizon ``5 N / J``.
    """

    epsilon: float = 1e-4
    t_max: float | None = None
    dt: float = 0.05
    classical_limit: float = CLASSICAL_LIMIT
    chunk: int = 20000

    def __post_init__(self):
        if not 0 < self.epsilon < 1.0 / 3.0:
            raise ValueError(f"epsilon must lie in (0, 1/3), got {self.epsilon!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.t_max is not None and not self.dt < self.t_max:
            raise ValueError(f"dt={self.dt!r} must be smaller than t_max={self.t_max!r}")
        if self.chunk < 2:
            raise ValueError("chunk must be at least 2")

    def horizon(self, params: ModelParams) -> float:
        if self.t_max is not None:
            return float(self.t_max)
        return 5.0 * params.n_sites / params.coupling_scale

    @property
    def threshold(self) -> float:
        return self.classical_limit + self.epsilon

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MetricsRecord:
    """One cell's figures of merit.  Parameters are stored flat so invalid cells fit too."""

    n_sites: int
    coordination: int
    falloff: float
    anisotropy: float
    field: float
    t_q: float | None = None
    f_star: float | None = None
    t_star: float | None = None
    status: str = NO_ADVANTAGE
    coupling_scale: float = 1.0

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.n_sites, self.coordination, self.falloff,
                           self.anisotropy, self.field, self.coupling_scale)

    @classmethod
    def from_params(cls, params: ModelParams, **values) -> "MetricsRecord":
        return cls(params.n_sites, params.coordination, params.falloff,
                   params.anisotropy, params.field, coupling_scale=params.coupling_scale, **values)

    def as_row(self) -> dict:
        return {
            "N": self.n_sites, "z": self.coordination, "alpha": self.falloff,
            "lambda": self.anisotropy, "g": self.field, "t_q": self.t_q,
            "f_star": self.f_star, "t_star": self.t_star, "status": self.status,
        }

    def as_json(self) -> dict:
        row = self.as_row()
        row["J"] = self.coupling_scale
        return row

    @classmethod
    def from_row(cls, row: dict) -> "MetricsRecord":
        def opt(key):
            value = row.get(key)
            return None if value in (None, "") else float(value)

        return cls(
            n_sites=int(row["N"]), coordination=int(row["z"]), falloff=float(row["alpha"]),
            anisotropy=float(row["lambda"]), field=float(row["g"]),
            t_q=opt("t_q"), f_star=opt("f_star"), t_star=opt("t_star"),
            status=row["status"], coupling_scale=float(row.get("J") or 1.0),
        )


@dataclass
class _Crossing:
    t_q: float
    index: int          # first grid index above threshold
    values: np.ndarray  # grid values from index-1 onwards (may be short)


def _solution(params: ModelParams, solution: BogoliubovSolution | None) -> BogoliubovSolution:
    return solution if solution is not None else diagonalize(build_quadratic_form(params))


def _scan(sol, config, horizon, deadline=None) -> _Crossing | None:
    dt, threshold = config.dt, config.threshold
    last_index = math.floor(horizon / dt + 1e-9)
    start = 0
    while start <= last_index:
        if deadline is not None and time.monotonic() > deadline:
            raise CellTimeout(f"time budget exhausted at t={start * dt:g}")
        stop = min(start + config.chunk, last_index + 1)
        # one point of overlap so a crossing at a chunk boundary is bracketed
        lo = max(start - 1, 0)
        values = fidelity_at(sol, dt * np.arange(lo, stop))
        above = np.flatnonzero(values[start - lo:] > threshold)
        if above.size:
            k = start + int(above[0])
            if k == 0:
                return _Crossing(0.0, 0, values[k - lo:])
            t_q = optimize.bisect(lambda t: fidelity_at(sol, [t])[0] - threshold,
                                  (k - 1) * dt, k * dt, xtol=BISECTION_TOL / 4)
            return _Crossing(float(t_q), k, values[k - 1 - lo:])
        start = stop
    return None


def find_tq(params: ModelParams, config: MetricsConfig = MetricsConfig(),
            solution: BogoliubovSolution | None = None) -> float | None:
    """Smallest ``t <= horizon`` with ``f(t) > 2/3 + epsilon``; ``None`` if there is none."""
    crossing = _scan(_solution(params, solution), config, config.horizon(params))
    return None if crossing is None else crossing.t_q


def _first_peak(sol, config, crossing: _Crossing, horizon, deadline=None):
    dt = config.dt
    k = crossing.index
    values = crossing.values
    offset = k - 1 if k > 0 else 0       # grid index of values[0]
    # the climb may run past the search horizon; allow it a generous margin
    limit = math.floor(2 * horizon / dt + 1e-9) + config.chunk
    j = k
    while True:
        while j + 1 - offset >= len(values):
            if j + 1 > limit:
                return None
            if deadline is not None and time.monotonic() > deadline:
                raise CellTimeout("time budget exhausted while locating f*")
            more = fidelity_at(sol, dt * np.arange(offset + len(values), offset + len(values) + config.chunk))
            values = np.concatenate([values, more])
        if values[j + 1 - offset] < values[j - offset]:
            break
        j += 1
    lo = max((j - 1) * dt, crossing.t_q)
    hi = (j + 1) * dt
    res = optimize.minimize_scalar(lambda t: -fidelity_at(sol, [t])[0], bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-10})
    grid_f = float(values[j - offset])
    if -res.fun >= grid_f:
        return float(-res.fun), float(res.x)
    return grid_f, j * dt


def find_fstar(params: ModelParams, config: MetricsConfig = MetricsConfig(),
               solution: BogoliubovSolution | None = None):
    """``(f_star, t_star)`` of the first fidelity peak after ``t_q``, or ``None``."""
    sol = _solution(params, solution)
    horizon = config.horizon(params)
    crossing = _scan(sol, config, horizon)
    if crossing is None:
        return None
    return _first_peak(sol, config, crossing, horizon)


def evaluate(params: ModelParams, config: MetricsConfig = MetricsConfig(),
             outputs=("t_q", "f_star", "t_star"), time_budget: float | None = None) -> MetricsRecord:
    """All requested figures of merit for one parameter cell, from one diagonalization."""
    deadline = None if time_budget is None else time.monotonic() + time_budget
    sol = diagonalize(build_quadratic_form(params))
    horizon = config.horizon(params)
    crossing = _scan(sol, config, horizon, deadline)
    if crossing is None:
        return MetricsRecord.from_params(params, status=NO_ADVANTAGE)
    f_star = t_star = None
    if "f_star" in outputs or "t_star" in outputs:
        peak = _first_peak(sol, config, crossing, horizon, deadline)
        if peak is not None:
            f_star, t_star = peak
            if "f_star" not in outputs:
                f_star = None
            if "t_star" not in outputs:
                t_star = None
    t_q = crossing.t_q if "t_q" in outputs else None
    return MetricsRecord.from_params(params, t_q=t_q, f_star=f_star, t_star=t_star, status=FOUND)


# ----------------------------------------------------------------------------
# families

def z_family(base: ModelParams) -> list[ModelParams]:
    return [base.with_(coordination=z) for z in range(1, base.n_sites)]


def tq_over_z(base: ModelParams, config: MetricsConfig = MetricsConfig()) -> list[MetricsRecord]:
    return [evaluate(p, config, outputs=("t_q",)) for p in z_family(base)]


@dataclass(frozen=True)
class SaturationResult:
    t_q_sat: float | None
    saturated: bool
    partial: bool
    records: list = field(repr=False)


def tq_saturation_in_z(base: ModelParams, config: MetricsConfig = MetricsConfig(),
                       records: list[MetricsRecord] | None = None) -> SaturationResult:
    """``t_q`` at ``z = N - 1`` plus a flag telling whether the tail of the z-family is flat.

    The tail is the last ``ceil(N/5)`` coordination numbers; it counts as saturated
    when its spread is below 2% of its mean.  Cells without an advantage are left
    out and reported through ``partial``.
    """
    records = records if records is not None else tq_over_z(base, config)
    found = [r for r in records if r.status == FOUND]
    partial = len(found) < len(records)
    tail_len = math.ceil(base.n_sites / 5)
    tail = [r.t_q for r in records[-tail_len:] if r.status == FOUND]
    saturated = False
    if len(tail) >= 2:
        spread = max(tail) - min(tail)
        saturated = spread < 0.02 * float(np.mean(tail))
    last = records[-1]
    return SaturationResult(last.t_q if last.status == FOUND else None, saturated, partial, records)


tq_saturation = tq_saturation_in_z


def mean_tq_over_z(base: ModelParams, config: MetricsConfig = MetricsConfig(),
                   records: list[MetricsRecord] | None = None) -> float:
    records = records if records is not None else tq_over_z(base, config)
    found = [r.t_q for r in records if r.status == FOUND]
    if not found:
        raise NoAdvantageError(f"no coordination number beats the classical limit for {base}")
    return float(np.mean(found))


def default_alpha_family() -> np.ndarray:
    """0.05 steps on [0.5, 4), then 0.5 steps up to 10."""
    return np.round(np.concatenate([np.arange(0.5, 4.0, 0.05), np.arange(4.0, 10.0 + 1e-9, 0.5)]), 10)


def _check_alpha_family(alphas: np.ndarray) -> None:
    if alphas.min() > 0.5 + 1e-9 or alphas.max() < 8.0:
        raise ValueError("alpha family must span at least [0.5, 8]")
    near = alphas[(alphas >= 1.5) & (alphas <= 2.5)]
    if len(near) < 2 or np.diff(np.concatenate([[1.5], near, [2.5]])).max() > 0.1 + 1e-9:
        raise ValueError("alpha family needs a resolution of 0.1 or better on [1.5, 2.5]")


@dataclass(frozen=True)
class DeltaFstar:
    f_star_max: float
    alpha_at_max: float
    f_star_sat: float
    alpha_sat: float
    delta: float
    records: list = field(repr=False)


def delta_fstar(base: ModelParams, config: MetricsConfig = MetricsConfig(), alphas=None) -> DeltaFstar:
    """``f*`` over a fall-off family at ``z = N - 1``: its maximum, its large-alpha value, and the gap."""
    alphas = np.sort(np.asarray(default_alpha_family() if alphas is None else alphas, dtype=float))
    _check_alpha_family(alphas)
    base = base.with_(coordination=base.n_sites - 1)
    records = [evaluate(base.with_(falloff=float(a)), config, outputs=("t_q", "f_star", "t_star"))
               for a in alphas]
    values = np.array([np.nan if r.f_star is None else r.f_star for r in records])
    if np.all(np.isnan(values)):
        raise NoAdvantageError(f"no fall-off exponent beats the classical limit for {base}")
    if np.isnan(values[-1]):
        raise NoAdvantageError(f"no advantage at the largest fall-off exponent {alphas[-1]}")
    k = int(np.nanargmax(values))
    return DeltaFstar(float(values[k]), float(alphas[k]), float(values[-1]), float(alphas[-1]),
                      float(values[k] - values[-1]), records)


# ----------------------------------------------------------------------------
# record I/O

def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_records(records, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        row = rec.as_row()
        writer.writerow([_csv_cell(row[c]) for c in CSV_COLUMNS])


def write_records_csv(records, path) -> None:
    """CSV with columns ``N,z,alpha,lambda,g,t_q,f_star,t_star,status`` to a path or stream."""
    if hasattr(path, "write"):
        _write_records(records, path)
        return
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            _write_records(records, fh)
    except OSError as exc:
        raise OSError(f"could not write records to {path}: {exc}") from exc


def read_records_csv(path) -> list[MetricsRecord]:
    with Path(path).open(newline="") as fh:
        return [MetricsRecord.from_row(row) for row in csv.DictReader(fh)]


def write_records_jsonl(records, path, header: dict | None = None) -> None:
    path = Path(path)
    try:
        with path.open("w") as fh:
            if header is not None:
                fh.write(json.dumps({"provenance": header}, sort_keys=True) + "\n")
            for rec in records:
                fh.write(json.dumps(rec.as_json()) + "\n")
    except OSError as exc:
        raise OSError(f"could not write records to {path}: {exc}") from exc


def read_records_jsonl(path) -> tuple[dict | None, list[MetricsRecord]]:
    header, records = None, []
    with Path(path).open() as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if "provenance" in obj:
                header = obj["provenance"]
            else:
                records.append(MetricsRecord.from_row(obj))
    return header, records


def safe_params(raw: dict) -> ModelParams | None:
    try:
        return ModelParams(**raw)
    except (InvalidModelError, TypeError):
        return None
