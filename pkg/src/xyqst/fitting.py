"""Least-squares fit of the size dependence ``f*(N) = a exp(-b N**eta)``.

``eta`` is left free in sign so both ``exp(-b N**eta)`` and ``exp(-b N**-eta)``
readings are representable; the reported ``eta`` is the signed exponent in
the first form.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import optimize

B_GRID = np.concatenate([[0.0], np.logspace(-8, 2, 201)])
ETA_GRID = np.linspace(-3.0, 3.0, 241)


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    eta: float
    residual: float      # root-mean-square error
    fixed_a: bool
    converged: bool = True
    degenerate: bool = False   # model is flat over the data (b -> 0 limit)

    def predict(self, n) -> np.ndarray:
        return self.a * np.exp(-self.b * np.asarray(n, dtype=float) ** self.eta)

    def as_dict(self) -> dict:
        return asdict(self)


def _validate(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (N, f_star) pairs")
    if len(pts) < 4:
        raise ValueError(f"need at least 4 points, got {len(pts)}")
    n, f = pts[:, 0], pts[:, 1]
    if np.any(np.diff(n) <= 0):
        raise ValueError("N must be strictly increasing")
    if np.any(n <= 0):
        raise ValueError("N must be positive")
    if np.any((f <= 0) | (f > 1)):
        raise ValueError("f_star values must lie in (0, 1]")
    return n, f


def _coarse(n, f, fix_a):
    # shape (b, eta, point)
    powers = n[None, :] ** ETA_GRID[:, None]
    model = np.exp(-B_GRID[:, None, None] * powers[None, :, :])
    if fix_a:
        a = np.ones(model.shape[:2])
    else:
        norm = (model * model).sum(-1)
        # cells where the model underflows everywhere cannot be rescaled; drop them
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(norm > 1e-200, (model * f).sum(-1) / norm, np.nan)
    sse = ((a[..., None] * model - f) ** 2).sum(-1)
    sse = np.where(np.isfinite(sse), sse, np.inf)
    i, j = np.unravel_index(np.argmin(sse), sse.shape)
    return float(a[i, j]), float(B_GRID[i]), float(ETA_GRID[j])


def _refine(n, f, a0, b0, eta0, fix_a):
    if fix_a:
        res = optimize.least_squares(lambda x: np.exp(-x[0] * n ** x[1]) - f, [b0, eta0],
                                     bounds=([0.0, -np.inf], [np.inf, np.inf]),
                                     xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
        b, eta = res.x
        return 1.0, float(b), float(eta), res
    res = optimize.least_squares(lambda x: x[0] * np.exp(-x[1] * n ** x[2]) - f, [a0, b0, eta0],
                                 bounds=([-np.inf, 0.0, -np.inf], [np.inf, np.inf, np.inf]),
                                 xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
    a, b, eta = res.x
    return float(a), float(b), float(eta), res


def _rms(n, f, a, b, eta) -> float:
    return float(np.sqrt(np.mean((a * np.exp(-b * n**eta) - f) ** 2)))


def fit_scaling(points, fix_a_to_one: bool = True) -> FitResult:
    """Coarse grid over ``(b, eta)`` followed by local least-squares refinement.

    Deterministic for given input.  If the refinement fails to improve on
    the grid optimum a ``RuntimeWarning`` is issued and the best result found
    is returned with ``converged=False``.
    """
    n, f = _validate(points)
    a0, b0, eta0 = _coarse(n, f, fix_a_to_one)
    grid_rms = _rms(n, f, a0, b0, eta0)
    candidates = [(a0, b0, eta0)]
    a, b, eta, res = _refine(n, f, a0, b0, eta0, fix_a_to_one)
    converged = bool(res.success)
    candidates.append((a, b, eta))
    if not fix_a_to_one:
        # the a = 1 optimum is a valid start for the free fit; keeps residual(free) <= residual(a = 1)
        fixed = fit_scaling(points, fix_a_to_one=True)
        a2, b2, eta2, _ = _refine(n, f, 1.0, fixed.b, fixed.eta, False)
        candidates += [(1.0, fixed.b, fixed.eta), (a2, b2, eta2)]
    a, b, eta = min(candidates, key=lambda c: _rms(n, f, *c))
    rms = _rms(n, f, a, b, eta)
    if rms > grid_rms + 1e-15:
        converged = False
    if not converged:
        warnings.warn("scaling fit did not converge; returning best-so-far parameters", RuntimeWarning,
                      stacklevel=2)
    span = abs(n[-1] ** eta - n[0] ** eta)
    degenerate = bool(b * span < 1e-8)
    return FitResult(a, b, eta, rms, fix_a_to_one, converged, degenerate)


def read_points_csv(path) -> list[tuple[float, float]]:
    """``(N, f_star)`` pairs from a CSV with those two columns (others ignored, blanks skipped)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"N", "f_star"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: CSV needs 'N' and 'f_star' columns")
        points = [(float(r["N"]), float(r["f_star"])) for r in reader if r["f_star"] not in ("", None)]
    return sorted(points)


def write_fit_json(result: FitResult, path, provenance: dict | None = None) -> None:
    payload = result.as_dict()
    if provenance is not None:
        payload = {"provenance": provenance, **payload}
    try:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"could not write fit result to {path}: {exc}") from exc
