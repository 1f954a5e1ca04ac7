"""Extended XY chain parameters, power-law couplings and the quadratic fermionic form.

The spin Hamiltonian on an open chain of ``N`` sites is

    H = - sum_j sum_{d=1..z} J_d [ (1+lam)/4 X_j S X_{j+d} + (1-lam)/4 Y_j S Y_{j+d} ]
        - (g J / 2) sum_j Z_j,

with ``J_d = J / d**alpha`` and ``S`` the Jordan-Wigner parity string
``prod_{j<l<j+d} (-Z_l)`` between the two coupled sites.  With the mapping
``Z_j = 2 n_j - 1`` (spin up is an occupied mode) every bond becomes exactly
quadratic, giving

    H = sum_ij P_ij f_i^+ f_j + 1/2 sum_ij (Q_ij f_i^+ f_j^+ + h.c.) + constant

with ``P_jj = -g J``, ``P_{j,j+d} = -J_d / 2`` and ``Q_{j,j+d} = -lam J_d / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


class InvalidModelError(ValueError):
    """Raised when a parameter tuple does not describe a valid chain."""


@dataclass(frozen=True)
class ModelParams:
    """One instance of the extended XY chain.

    Attributes
    ----------
    n_sites : int
        Chain length ``N``.
    coordination : int
        Interaction range ``z`` (1 is nearest neighbour, ``N - 1`` all-to-all).
    falloff : float
        Power-law exponent ``alpha`` of the couplings.
    anisotropy : float
        XY anisotropy ``lambda``.
    field : float
        Dimensionless transverse field ``g = g'/J``.
    coupling_scale : float
        ``J``; fixes the energy unit and therefore the time unit ``1/J``.
    """

    n_sites: int
    coordination: int = 1
    falloff: float = 0.0
    anisotropy: float = 0.0
    field: float = 0.0
    coupling_scale: float = 1.0

    def __post_init__(self):
        validate_params(self)

    def with_(self, **changes) -> "ModelParams":
        """Return a copy with some fields replaced (validated again)."""
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "coordination": self.coordination,
            "falloff": self.falloff,
            "anisotropy": self.anisotropy,
            "field": self.field,
            "coupling_scale": self.coupling_scale,
        }


def validate_params(params: ModelParams) -> None:
    n, z = params.n_sites, params.coordination
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise InvalidModelError(f"n_sites must be an integer >= 2, got {n!r}")
    if isinstance(z, bool) or int(z) != z or z < 1 or z > n - 1:
        raise InvalidModelError(f"coordination must satisfy 1 <= z <= N-1 = {n - 1}, got {z!r}")
    for name in ("falloff", "anisotropy", "field", "coupling_scale"):
        value = getattr(params, name)
        if not np.isfinite(value):
            raise InvalidModelError(f"{name} must be finite, got {value!r}")
    if params.falloff < 0:
        raise InvalidModelError(f"falloff must be non-negative, got {params.falloff!r}")
    if params.anisotropy < 0:
        raise InvalidModelError(f"anisotropy must be non-negative, got {params.anisotropy!r}")
    if params.coupling_scale <= 0:
        raise InvalidModelError(f"coupling_scale must be positive, got {params.coupling_scale!r}")


@dataclass(frozen=True)
class CouplingTable:
    """Coupling strengths ``J_d`` for distances ``d = 1..z``.

    ``strengths[d - 1]`` holds ``J / d**alpha``.
    """

    strengths: np.ndarray

    def __len__(self):
        return len(self.strengths)

    def __getitem__(self, distance: int) -> float:
        """Coupling at distance ``distance`` (1-based, as in the Hamiltonian)."""
        if distance < 1 or distance > len(self.strengths):
            raise IndexError(f"distance {distance} outside 1..{len(self.strengths)}")
        return float(self.strengths[distance - 1])


@dataclass(frozen=True)
class QuadraticForm:
    """Real symmetric hopping ``P``, real antisymmetric pairing ``Q`` and the scalar offset."""

    hopping: np.ndarray
    pairing: np.ndarray
    constant: float = 0.0

    @property
    def n_modes(self) -> int:
        return self.hopping.shape[0]

    def bdg_matrix(self) -> np.ndarray:
        """The 2N x 2N matrix ``[[P, Q], [-Q, -P]]`` acting on ``(f, f^+)``."""
        P, Q = self.hopping, self.pairing
        return np.block([[P, Q], [-Q, -P]])


def build_couplings(params: ModelParams) -> CouplingTable:
    validate_params(params)
    distances = np.arange(1, params.coordination + 1, dtype=float)
    strengths = params.coupling_scale / distances**params.falloff
    strengths.setflags(write=False)
    return CouplingTable(strengths)


def build_quadratic_form(params: ModelParams) -> QuadraticForm:
    """Jordan-Wigner image of the spin Hamiltonian on an open chain."""
    couplings = build_couplings(params).strengths
    n = params.n_sites
    field = params.field * params.coupling_scale
    P = np.diag(np.full(n, -field))
    Q = np.zeros((n, n))
    for d, J_d in enumerate(couplings, start=1):
        idx = np.arange(n - d)
        P[idx, idx + d] = P[idx + d, idx] = -0.5 * J_d
        Q[idx, idx + d] = -0.5 * params.anisotropy * J_d
        Q[idx + d, idx] = 0.5 * params.anisotropy * J_d
    # -g'/2 sum (2 n_j - 1) leaves + g' N / 2 behind
    constant = 0.5 * field * n
    for m in (P, Q):
        m.setflags(write=False)
    return QuadraticForm(P, Q, constant)
