"""Brute-force dense simulation of the transfer protocol on the full 2**N Hilbert space.

Nothing here touches the fermionic machinery: the Hamiltonian is assembled
term by term from Pauli strings, the channel is the ground state of the
``(N-1)``-site chain, evolution is exact via ``eigh``, and the receiver
state is obtained by a partial trace.  Basis ordering: site 1 is the most
significant qubit, ``|0>`` is spin up (``Z = +1``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse

from .model import ModelParams, build_couplings

MAX_SITES = 12

_I = sparse.identity(2, format="csr", dtype=complex)
PAULI = {
    "X": sparse.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    "Y": sparse.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    "Z": sparse.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex)),
}
_DENSE_PAULI = {k: v.toarray() for k, v in PAULI.items()}

# input states for the six-point (2-design) average: +z, -z, +x, -x, +y, -y
CARDINAL_STATES = (
    (0.0, 0.0), (np.pi, 0.0),
    (np.pi / 2, 0.0), (np.pi / 2, np.pi),
    (np.pi / 2, np.pi / 2), (np.pi / 2, 3 * np.pi / 2),
)


class DegenerateGroundStateError(RuntimeError):
    def __init__(self, gap: float):
        super().__init__(f"channel ground state is (nearly) degenerate: gap = {gap:.3e}")
        self.gap = gap


@dataclass(frozen=True)
class DenseOperator:
    dim: int
    matrix: np.ndarray

    def hermiticity_error(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())


@dataclass(frozen=True)
class ChannelSample:
    input_bloch: tuple[float, float]
    output_state: np.ndarray

    def fidelity(self) -> float:
        psi = bloch_ket(*self.input_bloch)
        return float(np.real(psi.conj() @ self.output_state @ psi))


def bloch_ket(theta: float, phi: float) -> np.ndarray:
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def _pauli_string(k: int, ops: dict[int, sparse.spmatrix]):
    out = sparse.identity(1, format="csr", dtype=complex)
    for site in range(k):
        out = sparse.kron(out, ops.get(site, _I), format="csr")
    return out


def build_dense_hamiltonian(params: ModelParams, sites: int | None = None) -> DenseOperator:
    """The chain Hamiltonian on the first ``sites`` sites, built from Pauli strings.

    Bonds at distance ``d`` carry the string ``prod (-Z)`` over the ``d - 1``
    intermediate sites.
    """
    k = params.n_sites if sites is None else sites
    if k < 1:
        raise ValueError("need at least one site")
    if k > MAX_SITES:
        raise ValueError(f"dense simulation limited to {MAX_SITES} sites, got {k}")
    couplings = build_couplings(params).strengths
    lam = params.anisotropy
    field = params.field * params.coupling_scale
    minus_z = -PAULI["Z"]
    H = sparse.csr_matrix((2**k, 2**k), dtype=complex)
    for d, J_d in enumerate(couplings[: max(k - 1, 0)], start=1):
        for j in range(k - d):
            string = {l: minus_z for l in range(j + 1, j + d)}
            xx = _pauli_string(k, {**string, j: PAULI["X"], j + d: PAULI["X"]})
            yy = _pauli_string(k, {**string, j: PAULI["Y"], j + d: PAULI["Y"]})
            H = H - J_d * ((1 + lam) / 4 * xx + (1 - lam) / 4 * yy)
    for j in range(k):
        H = H - field / 2 * _pauli_string(k, {j: PAULI["Z"]})
    return DenseOperator(2**k, H.toarray())


def dense_spectrum(params: ModelParams) -> np.ndarray:
    return np.linalg.eigvalsh(build_dense_hamiltonian(params).matrix)


def fermion_operators(k: int) -> list[np.ndarray]:
    """Annihilators ``f_j = prod_{i<j}(-Z_i) sigma^-_j`` with ``sigma^-`` taking up to down."""
    lower = sparse.csr_matrix(np.array([[0, 0], [1, 0]], dtype=complex))
    minus_z = -PAULI["Z"]
    return [_pauli_string(k, {**{i: minus_z for i in range(j)}, j: lower}).toarray() for j in range(k)]


def heisenberg_amplitudes(params: ModelParams, t: float, receiver: int = -1, sender: int = 0):
    """``Phi[r, s](t)`` and ``Psi[r, s](t)`` from dense Heisenberg evolution of ``f_r``.

    Uses ``{f_r(t), f_s^+} = Phi[r, s]`` and ``{f_r(t), f_s} = Psi[r, s]`` (both c-numbers).
    """
    H = build_dense_hamiltonian(params).matrix
    w, v = np.linalg.eigh(H)
    U = (v * np.exp(-1j * w * t)) @ v.conj().T
    f = fermion_operators(params.n_sites)
    fr = U.conj().T @ f[receiver] @ U
    fs = f[sender]
    dim = H.shape[0]
    phi = np.trace(fr @ fs.conj().T + fs.conj().T @ fr) / dim
    psi = np.trace(fr @ fs + fs @ fr) / dim
    return complex(phi), complex(psi)


class DenseProtocol:
    """Exact state-transfer protocol for one parameter set.

    The channel (sites 2..N) starts in the ground state of the ``(N-1)``-site
    chain; the whole chain then evolves under the ``N``-site Hamiltonian.
    """

    def __init__(self, params: ModelParams, degeneracy_tol: float = 1e-8, allow_degenerate: bool = False):
        n = params.n_sites
        if n > MAX_SITES:
            raise ValueError(f"dense simulation limited to {MAX_SITES} sites, got {n}")
        self.params = params
        channel = build_dense_hamiltonian(params, n - 1).matrix
        cw, cv = np.linalg.eigh(channel)
        self.gap = float(cw[1] - cw[0]) if len(cw) > 1 else np.inf
        if self.gap < degeneracy_tol and not allow_degenerate:
            raise DegenerateGroundStateError(self.gap)
        self.channel_state = cv[:, 0]
        self.energies, self.vectors = np.linalg.eigh(build_dense_hamiltonian(params).matrix)

    def _evolve(self, state: np.ndarray, t: float) -> np.ndarray:
        v = self.vectors
        return v @ (np.exp(-1j * self.energies * t) * (v.conj().T @ state))

    def receiver_blocks(self, t: float) -> np.ndarray:
        """``R[a, b] = tr_{1..N-1} |psi_a(t)><psi_b(t)|`` for inputs ``|0>``, ``|1>``."""
        rest = self.channel_state.size
        evolved = []
        for bit in (0, 1):
            ket = np.zeros(2, dtype=complex)
            ket[bit] = 1.0
            evolved.append(self._evolve(np.kron(ket, self.channel_state), t).reshape(rest, 2))
        blocks = np.empty((2, 2, 2, 2), dtype=complex)
        for a in range(2):
            for b in range(2):
                blocks[a, b] = evolved[a].T @ evolved[b].conj()
        return blocks

    def receiver_state(self, psi_in: np.ndarray, t: float, blocks=None) -> np.ndarray:
        """Receiver density matrix for the input qubit ``psi_in`` (by linearity in the input)."""
        blocks = self.receiver_blocks(t) if blocks is None else blocks
        return np.einsum("a,b,abij->ij", psi_in, psi_in.conj(), blocks)

    def channel_samples(self, t: float, inputs=CARDINAL_STATES) -> list[ChannelSample]:
        blocks = self.receiver_blocks(t)
        return [ChannelSample((th, ph), self.receiver_state(bloch_ket(th, ph), t, blocks)) for th, ph in inputs]

    def bloch_map(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Affine map ``r_out = M r_in + c`` of the qubit channel at time ``t``."""
        outs = np.array([bloch_vector(s.output_state) for s in self.channel_samples(t)])
        M = np.column_stack([(outs[2] - outs[3]) / 2, (outs[4] - outs[5]) / 2, (outs[0] - outs[1]) / 2])
        c = (outs[0] + outs[1]) / 2
        return M, c

    def fidelity(self, t: float, quadrature="cardinal", receiver: str = "optimal") -> float:
        """Bloch-sphere average of ``<psi| rho_N(t) |psi>``.

        ``receiver="optimal"`` first applies the best local rotation at the
        receiver; ``"none"`` averages the raw output.  ``quadrature`` is
        ``"cardinal"`` (exact six-state average) or ``("grid", n_theta, n_phi)``.
        """
        if receiver not in ("optimal", "none"):
            raise ValueError(f"unknown receiver mode {receiver!r}")
        R = optimal_rotation(self.bloch_map(t)[0]) if receiver == "optimal" else np.eye(3)
        if quadrature == "cardinal":
            samples = self.channel_samples(t)
            values = [0.5 * (1 + bloch_in(*s.input_bloch) @ R @ bloch_vector(s.output_state)) for s in samples]
            return float(np.mean(values))
        if isinstance(quadrature, (tuple, list)) and quadrature[0] == "grid":
            _, n_theta, n_phi = quadrature
            return _grid_average(self, t, R, int(n_theta), int(n_phi))
        raise ValueError(f"unknown quadrature {quadrature!r}")


def _grid_average(protocol: DenseProtocol, t: float, R: np.ndarray, n_theta: int, n_phi: int) -> float:
    # Gauss-Legendre in theta on [0, pi], uniform (periodic trapezoid) in phi
    x, w = np.polynomial.legendre.leggauss(n_theta)
    thetas = 0.5 * np.pi * (x + 1)
    w_theta = 0.5 * np.pi * w * np.sin(thetas)
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    blocks = protocol.receiver_blocks(t)
    total = 0.0
    for th, wt in zip(thetas, w_theta):
        for ph in phis:
            psi = bloch_ket(th, ph)
            r_out = R @ bloch_vector(protocol.receiver_state(psi, t, blocks))
            total += wt * 0.5 * (1 + bloch_in(th, ph) @ r_out)
    return float(total * (2 * np.pi / n_phi) / (4 * np.pi))


def bloch_in(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array([np.real(np.trace(rho @ _DENSE_PAULI[k])) for k in "XYZ"])


def optimal_rotation(M: np.ndarray) -> np.ndarray:
    """Proper rotation ``R`` maximising ``tr(R M)`` (orthogonal Procrustes restricted to SO(3))."""
    U, _, Vt = np.linalg.svd(M)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt)) or 1.0])
    return Vt.T @ D @ U.T


@lru_cache(maxsize=8)
def _protocol(params: ModelParams, allow_degenerate: bool) -> DenseProtocol:
    return DenseProtocol(params, allow_degenerate=allow_degenerate)


def protocol_fidelity(params: ModelParams, t: float, quadrature="cardinal",
                      receiver: str = "optimal", allow_degenerate: bool = False) -> float:
    if params.n_sites > MAX_SITES:
        raise ValueError(f"dense simulation limited to {MAX_SITES} sites, got {params.n_sites}")
    return _protocol(params, allow_degenerate).fidelity(t, quadrature, receiver)
