"""Transfer amplitudes and the receiver-optimised average fidelity.

For sender site 1 and receiver site N the Bloch-sphere averaged fidelity,
maximised over a local unitary at the receiver, is

    f = 1/2 + |p^2 - q^2| / 6 + max(p, q) / 3,

with ``p = |Phi_{N,1}(t)|`` and ``q = |Psi_{N,1}(t)|``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .freefermion import BogoliubovSolution, Propagators, diagonalize, endpoint_amplitudes
from .model import ModelParams, build_quadratic_form

CLASSICAL_LIMIT = 2.0 / 3.0
_AMPLITUDE_SLACK = 1e-12


@dataclass(frozen=True)
class FidelityPoint:
    time: float
    p: float
    q: float
    f: float


@dataclass(frozen=True)
class FidelityTrace:
    """Fidelity sampled on ``times = k * dt``; stored column-wise."""

    params: ModelParams
    times: np.ndarray
    p: np.ndarray
    q: np.ndarray
    f: np.ndarray

    def __len__(self):
        return len(self.times)

    @property
    def points(self) -> list[FidelityPoint]:
        return [FidelityPoint(*map(float, row)) for row in zip(self.times, self.p, self.q, self.f)]

    def to_csv(self, path) -> None:
        write_trace_csv(self, path)


def transfer_amplitudes(prop: Propagators) -> tuple[float, float]:
    """``(|Phi[N, 1]|, |Psi[N, 1]|)`` for sender site 1 and receiver site N."""
    p = float(abs(prop.phi[-1, 0]))
    q = float(abs(prop.psi[-1, 0]))
    return min(p, 1.0), min(q, 1.0)


def average_fidelity(p, q):
    """Closed-form average fidelity; accepts scalars or arrays."""
    p_arr, q_arr = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    lo, hi = -_AMPLITUDE_SLACK, 1.0 + _AMPLITUDE_SLACK
    if np.any((p_arr < lo) | (p_arr > hi) | (q_arr < lo) | (q_arr > hi)) or np.any(np.isnan(p_arr + q_arr)):
        raise ValueError("transfer amplitudes must lie in [0, 1]")
    f = 0.5 + np.abs(p_arr**2 - q_arr**2) / 6.0 + np.maximum(p_arr, q_arr) / 3.0
    return float(f) if f.ndim == 0 else f


def fidelity_at(sol: BogoliubovSolution, times) -> np.ndarray:
    """Vectorised ``f(t)`` straight from a cached diagonalization."""
    phi, psi = endpoint_amplitudes(sol, times)
    p = np.minimum(np.abs(phi), 1.0)
    q = np.minimum(np.abs(psi), 1.0)
    return average_fidelity(p, q)


def time_grid(t_max: float, dt: float) -> np.ndarray:
    """``{0, dt, 2 dt, ...}`` up to and including ``t_max`` (with round-off slack)."""
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max!r}")
    if not 0 < dt <= t_max:
        raise ValueError(f"dt must satisfy 0 < dt <= t_max, got {dt!r}")
    count = math.floor(t_max / dt + 1e-9) + 1
    return dt * np.arange(count)


def fidelity_trace(params: ModelParams, t_max: float, dt: float = 0.05,
                   solution: BogoliubovSolution | None = None) -> FidelityTrace:
    times = time_grid(t_max, dt)
    sol = solution if solution is not None else diagonalize(build_quadratic_form(params))
    phi, psi = endpoint_amplitudes(sol, times)
    p = np.minimum(np.abs(phi), 1.0)
    q = np.minimum(np.abs(psi), 1.0)
    return FidelityTrace(params, times, p, q, average_fidelity(p, q))


def _write_trace(trace: FidelityTrace, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["t", "p", "q", "f"])
    for row in zip(trace.times, trace.p, trace.q, trace.f):
        writer.writerow([repr(float(x)) for x in row])


def write_trace_csv(trace: FidelityTrace, path) -> None:
    """Write ``t,p,q,f`` at full precision to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_trace(trace, path)
        return
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            _write_trace(trace, fh)
    except OSError as exc:
        raise OSError(f"could not write trace to {path}: {exc}") from exc


def read_trace_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {key: np.array([float(r[key]) for r in rows]) for key in ("t", "p", "q", "f")}
