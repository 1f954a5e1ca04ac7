"""Quantum state transfer through the long-range extended XY chain, solved as free fermions."""

__version__ = "0.1.0"

from .fidelity import (CLASSICAL_LIMIT, FidelityPoint, FidelityTrace, average_fidelity, fidelity_at,
                       fidelity_trace, transfer_amplitudes)
from .fitting import FitResult, fit_scaling
from .freefermion import BogoliubovSolution, Propagators, diagonalize, propagators
from .metrics import (MetricsConfig, MetricsRecord, delta_fstar, evaluate, find_fstar, find_tq, mean_tq_over_z,
                      tq_saturation_in_z)
from .model import (CouplingTable, InvalidModelError, ModelParams, QuadraticForm, build_couplings,
                    build_quadratic_form)

__all__ = [
    "CLASSICAL_LIMIT", "BogoliubovSolution", "CouplingTable", "FidelityPoint", "FidelityTrace", "FitResult",
    "InvalidModelError", "MetricsConfig", "MetricsRecord", "ModelParams", "Propagators", "QuadraticForm",
    "average_fidelity",
    "build_couplings", "build_quadratic_form", "delta_fstar", "diagonalize", "evaluate", "fidelity_at",
    "fidelity_trace", "find_fstar", "find_tq", "fit_scaling", "mean_tq_over_z", "propagators",
    "tq_saturation_in_z", "transfer_amplitudes",
]
