"""Bogoliubov diagonalization and Heisenberg-picture propagators.

Quasiparticles are ``eta = A f + B f^+`` with real ``A``, ``B``.  Writing
``phi = A + B`` and ``psi = A - B`` the eigenproblem reduces to the singular
value decomposition ``P - Q = U diag(eps) V^T`` with ``phi = U^T`` and
``psi = V^T``, which yields non-negative energies and an exactly canonical
transformation.  The evolved annihilators are

    f(t) = Phi(t) f + Psi(t) f^+,
    Phi(t) = A^T e^{-i eps t} A + B^T e^{+i eps t} B,
    Psi(t) = A^T e^{-i eps t} B + B^T e^{+i eps t} A.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import QuadraticForm

ZERO_MODE_TOL = 1e-12


class DiagonalizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class BogoliubovSolution:
    """Canonical transformation ``(A, B)`` and quasiparticle energies (ascending)."""

    amp_a: np.ndarray
    amp_b: np.ndarray
    energies: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.energies)

    def canonicity_error(self) -> float:
        A, B = self.amp_a, self.amp_b
        eye = np.eye(self.n_modes)
        e1 = np.abs(A @ A.T + B @ B.T - eye).max()
        e2 = np.abs(A @ B.T + B @ A.T).max()
        return float(max(e1, e2))

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        """Recover ``(P, Q)`` from the diagonal form.

        ``P = A^T E A - B^T E B`` and ``Q = A^T E B - B^T E A`` with ``E = diag(eps)``.
        """
        A, B, E = self.amp_a, self.amp_b, np.diag(self.energies)
        return A.T @ E @ A - B.T @ E @ B, A.T @ E @ B - B.T @ E @ A


@dataclass(frozen=True)
class Propagators:
    time: float
    phi: np.ndarray
    psi: np.ndarray

    def unitarity_error(self) -> float:
        n = self.phi.shape[0]
        gram = self.phi @ self.phi.conj().T + self.psi @ self.psi.conj().T
        return float(np.abs(gram - np.eye(n)).max())

    def full_matrix(self) -> np.ndarray:
        """``[[Phi, Psi], [Psi*, Phi*]]``, the map ``(f, f^+) -> (f(t), f^+(t))``."""
        return np.block([[self.phi, self.psi], [self.psi.conj(), self.phi.conj()]])


def diagonalize(form: QuadraticForm) -> BogoliubovSolution:
    try:
        U, s, Vt = np.linalg.svd(form.hopping - form.pairing)
    except np.linalg.LinAlgError as exc:
        raise DiagonalizationError(f"SVD of P - Q did not converge: {exc}") from exc
    # svd returns descending singular values
    order = np.argsort(s, kind="stable")
    s, phi, psi = s[order], U.T[order], Vt[order]
    s = np.where(s < ZERO_MODE_TOL, 0.0, s)
    A = 0.5 * (phi + psi)
    B = 0.5 * (phi - psi)
    for m in (A, B, s):
        m.setflags(write=False)
    return BogoliubovSolution(A, B, s)


def _spectral_propagators(sol: BogoliubovSolution, t: float) -> Propagators:
    A, B = sol.amp_a, sol.amp_b
    if t == 0:
        # exact identity rather than the round-off of A^T A + B^T B
        n = sol.n_modes
        return Propagators(0.0, np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex))
    minus = np.exp(-1j * sol.energies * t)[:, None]
    plus = minus.conj()
    phi = A.T @ (minus * A) + B.T @ (plus * B)
    psi = A.T @ (minus * B) + B.T @ (plus * A)
    return Propagators(float(t), phi, psi)


def propagators(sol: BogoliubovSolution, t: float) -> Propagators:
    if not t >= 0:
        raise ValueError(f"time must be non-negative, got {t!r}")
    return _spectral_propagators(sol, t)


def propagator_derivative(sol: BogoliubovSolution, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Analytic ``(dPhi/dt, dPsi/dt)`` from the spectral form."""
    A, B, eps = sol.amp_a, sol.amp_b, sol.energies
    minus = (-1j * eps * np.exp(-1j * eps * t))[:, None]
    plus = (1j * eps * np.exp(1j * eps * t))[:, None]
    return A.T @ (minus * A) + B.T @ (plus * B), A.T @ (minus * B) + B.T @ (plus * A)


def endpoint_amplitudes(sol: BogoliubovSolution, times, receiver: int = -1, sender: int = 0):
    """``Phi[receiver, sender](t)`` and ``Psi[receiver, sender](t)`` for many times at once.

    Only one row of the propagators is needed for transfer, so this costs
    ``O(N)`` per time instead of ``O(N^3)``.
    """
    A, B, eps = sol.amp_a, sol.amp_b, sol.energies
    times = np.asarray(times, dtype=float)
    w_phi_m = A[:, receiver] * A[:, sender]
    w_phi_p = B[:, receiver] * B[:, sender]
    w_psi_m = A[:, receiver] * B[:, sender]
    w_psi_p = B[:, receiver] * A[:, sender]
    phase = np.exp(-1j * np.multiply.outer(times, eps))
    phi = phase @ w_phi_m + phase.conj() @ w_phi_p
    psi = phase @ w_psi_m + phase.conj() @ w_psi_p
    at_zero = times == 0
    if at_zero.any():
        n = sol.n_modes
        phi[at_zero] = 1.0 if receiver % n == sender % n else 0.0
        psi[at_zero] = 0.0
    return phi, psi


def ground_energy(sol: BogoliubovSolution, form: QuadraticForm) -> float:
    """Energy of the quasiparticle vacuum, ``c + tr(P)/2 - sum(eps)/2``."""
    return float(form.constant + 0.5 * np.trace(form.hopping) - 0.5 * sol.energies.sum())


def many_body_spectrum(sol: BogoliubovSolution, form: QuadraticForm, max_modes: int = 20) -> np.ndarray:
    """All ``2**N`` levels ``E0 + sum_q n_q eps_q``, sorted."""
    n = sol.n_modes
    if n > max_modes:
        raise ValueError(f"refusing to enumerate 2**{n} levels (max_modes={max_modes})")
    occupations = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)
    return np.sort(ground_energy(sol, form) + occupations @ sol.energies)
