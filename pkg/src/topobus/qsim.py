"""Dense state-vector simulation for small registers (n <= 8).

Convention: list index = qubit index and basis index = sum_i b_i 2**i, so
qubit 0 is the least significant bit. A two-qubit ket ``|ab>`` on a pair
``(i, j)`` lists qubit ``i`` first. States are immutable; every operation
returns a new ``StateVector``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np

MAX_QUBITS = 8
NORM_TOL = 1e-10
IMPOSSIBLE_TOL = 1e-12

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class Parity(IntEnum):
    EVEN = 0
    ODD = 1

    def __str__(self):
        return self.name.lower()


class ImpossibleOutcomeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).ravel()
        n = amp.size.bit_length() - 1
        if amp.size < 2 or 2**n != amp.size:
            raise ValueError(f"amplitude count {amp.size} is not a power of two >= 2")
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: norm = {norm:.12g}")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def __repr__(self):
        return f"StateVector(n={self.num_qubits}, amplitudes={np.array2string(self.amplitudes, precision=4)})"


def basis_state(bits: Sequence[int]) -> StateVector:
    idx = sum(int(b) << q for q, b in enumerate(bits))
    amp = np.zeros(2 ** len(bits), dtype=complex)
    amp[idx] = 1.0
    return StateVector(amp)


def init_product_state(qubit_amplitudes: Sequence[tuple[complex, complex]]) -> StateVector:
    amp = np.ones(1, dtype=complex)
    for q, (a, b) in enumerate(qubit_amplitudes):
        norm = np.hypot(abs(a), abs(b))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"qubit {q} amplitudes are not normalized: norm = {norm:.12g}")
        # new qubit is more significant than all previous ones
        amp = np.concatenate([a * amp, b * amp])
    return StateVector(amp)


def _check_qubit(s: StateVector, q: int):
    if not 0 <= q < s.num_qubits:
        raise IndexError(f"qubit {q} out of range for a {s.num_qubits}-qubit register")


def apply_single_qubit(s: StateVector, q: int, gate: np.ndarray) -> StateVector:
    _check_qubit(s, q)
    n = s.num_qubits
    psi = s.amplitudes.reshape([2] * n)
    axis = n - 1 - q
    out = np.moveaxis(np.tensordot(gate, psi, axes=([1], [axis])), 0, axis)
    return StateVector(out.reshape(-1))


def apply_hadamard(s: StateVector, q: int) -> StateVector:
    return apply_single_qubit(s, q, HADAMARD)


def apply_pauli(s: StateVector, q: int, mu: int) -> StateVector:
    if mu not in (0, 1, 2, 3):
        raise ValueError(f"Pauli index must be 0..3, got {mu}")
    return apply_single_qubit(s, q, PAULI[mu])


def _bit(num_qubits: int, q: int) -> np.ndarray:
    return (np.arange(2**num_qubits) >> q) & 1


def joint_parity_projectors(i: int, j: int, num_qubits: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Even/odd joint-parity projectors on qubits (i, j), identity elsewhere."""
    if i == j:
        raise ValueError("joint parity needs two distinct qubits")
    for q in (i, j):
        if not 0 <= q < num_qubits:
            raise IndexError(f"qubit {q} out of range for {num_qubits} qubits")
    odd = (_bit(num_qubits, i) ^ _bit(num_qubits, j)).astype(float)
    return np.diag(1.0 - odd).astype(complex), np.diag(odd).astype(complex)


def single_qubit_operator(gate: np.ndarray, q: int, num_qubits: int) -> np.ndarray:
    """Embed a 2x2 gate on qubit q into the full register."""
    op = np.ones((1, 1), dtype=complex)
    for k in reversed(range(num_qubits)):
        op = np.kron(op, gate if k == q else np.eye(2))
    return op


def rotated_parity_projectors(i: int, j: int, num_qubits: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Parity projectors conjugated by H on both qubits."""
    hh = single_qubit_operator(HADAMARD, i, num_qubits) @ single_qubit_operator(HADAMARD, j, num_qubits)
    p0, p1 = joint_parity_projectors(i, j, num_qubits)
    return hh @ p0 @ hh, hh @ p1 @ hh


def project(s: StateVector, P: np.ndarray, tol: float = 1e-10) -> tuple[float, StateVector | None]:
    """Born probability and normalized post-state; post-state is None when impossible."""
    P = np.asarray(P)
    dim = s.amplitudes.size
    if P.shape != (dim, dim):
        raise ValueError(f"projector shape {P.shape} does not match state dimension {dim}")
    if np.max(np.abs(P - P.conj().T)) > tol or np.max(np.abs(P @ P - P)) > tol:
        raise ValueError("operator is not a Hermitian idempotent projector")
    v = P @ s.amplitudes
    prob = float(np.real(np.vdot(v, v)))
    if prob <= IMPOSSIBLE_TOL:
        return prob, None
    return prob, StateVector(v / np.sqrt(prob))


@dataclass(frozen=True)
class ParityOutcome:
    parity: Parity
    probability: float
    post_state: StateVector


def make_rng(seed=None, *key: int) -> np.random.Generator:
    """Generator for ``seed`` split along ``key`` (one counter per measurement)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def parity_probabilities(s: StateVector, i: int, j: int) -> tuple[float, float]:
    _check_qubit(s, i)
    _check_qubit(s, j)
    if i == j:
        raise ValueError("joint parity needs two distinct qubits")
    odd = (_bit(s.num_qubits, i) ^ _bit(s.num_qubits, j)).astype(bool)
    w = np.abs(s.amplitudes) ** 2
    p_odd = float(w[odd].sum())
    return 1.0 - p_odd, p_odd


def sample_parity_measurement(s: StateVector, i: int, j: int, rng_seed=None, force: int | None = None) -> ParityOutcome:
    """Joint-parity measurement with Born sampling; ``force`` selects a branch."""
    probs = parity_probabilities(s, i, j)
    if force is None:
        u = make_rng(rng_seed).random()
        outcome = Parity.EVEN if u < probs[0] else Parity.ODD
    else:
        outcome = Parity(force)
    P = joint_parity_projectors(i, j, s.num_qubits)[outcome]
    prob, post = project(s, P)
    if post is None:
        raise ImpossibleOutcomeError(f"{outcome} parity has probability {prob:.3e}")
    return ParityOutcome(outcome, prob, post)


_SINGLET = np.array([0, -1, 1, 0], dtype=complex) / np.sqrt(2)  # (|01> - |10>)/sqrt2, index = a + 2b


def bell_state(mu: int) -> StateVector:
    """(1 x sigma_mu)(|01> - |10>)/sqrt2, sigma acting on the second qubit (qubit 1)."""
    return apply_pauli(StateVector(_SINGLET), 1, mu)


def embed_pair_state(pair_state: StateVector, i: int, j: int, num_qubits: int) -> np.ndarray:
    """Projector |phi><phi| of a two-qubit state on (i, j), identity elsewhere."""
    if pair_state.num_qubits != 2:
        raise ValueError("pair_state must be a two-qubit state")
    dim = 2**num_qubits
    bi, bj = _bit(num_qubits, i), _bit(num_qubits, j)
    rest = np.arange(dim) & ~((1 << i) | (1 << j))
    local = bi + 2 * bj
    amp = pair_state.amplitudes
    op = np.zeros((dim, dim), dtype=complex)
    same_rest = rest[:, None] == rest[None, :]
    op[same_rest] = (amp[local][:, None] * amp[local].conj()[None, :])[same_rest]
    return op


def bell_projector(mu: int, i: int, j: int, num_qubits: int) -> np.ndarray:
    return embed_pair_state(bell_state(mu), i, j, num_qubits)


# Outcome table from the Bell-basis decomposition of the parity projectors:
#   P0 = |F1><F1| + |F2><F2|,  P1 = |F0><F0| + |F3><F3|
#   P~0 = |F2><F2| + |F3><F3|, P~1 = |F0><F0| + |F1><F1|
# so (first parity, rotated parity) -> the unique shared Bell index.
BELL_TABLE = {
    (Parity.ODD, Parity.ODD): 0,
    (Parity.EVEN, Parity.ODD): 1,
    (Parity.EVEN, Parity.EVEN): 2,
    (Parity.ODD, Parity.EVEN): 3,
}


@dataclass(frozen=True)
class BellOutcome:
    mu: int
    parity_results: tuple[Parity, Parity]
    probability: float
    post_state: StateVector


def bell_measurement(s: StateVector, i: int, j: int, rng_seed=None, force: int | None = None) -> BellOutcome:
    """Bell measurement as parity, H x H, parity, H x H.

    ``force`` pins the outcome to a given Bell index (branch enumeration).
    """
    rng = make_rng(rng_seed) if force is None else None
    forced = None
    if force is not None:
        forced = next(k for k, v in BELL_TABLE.items() if v == force)
    first = sample_parity_measurement(s, i, j, rng, None if forced is None else forced[0])
    rotated = apply_hadamard(apply_hadamard(first.post_state, i), j)
    second = sample_parity_measurement(rotated, i, j, rng, None if forced is None else forced[1])
    post = apply_hadamard(apply_hadamard(second.post_state, i), j)
    key = (first.parity, second.parity)
    return BellOutcome(BELL_TABLE[key], key, first.probability * second.probability, post)


def concurrence(s: StateVector) -> float:
    if s.num_qubits != 2:
        raise ValueError(f"concurrence needs a 2-qubit state, got {s.num_qubits}")
    a = s.amplitudes
    return float(min(1.0, 2.0 * abs(a[0] * a[3] - a[1] * a[2])))


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def reduced_pure_state(s: StateVector, qubits: Sequence[int], tol: float = 1e-9) -> StateVector:
    """Pure state of ``qubits`` (in the given order) when they factor out of ``s``."""
    n = s.num_qubits
    qubits = list(qubits)
    for q in qubits:
        _check_qubit(s, q)
    rest = [q for q in range(n) if q not in qubits]
    # tensor axis of qubit q is n-1-q; put the kept qubits last so qubits[0] is the LSB
    axes = [n - 1 - q for q in reversed(rest)] + [n - 1 - q for q in reversed(qubits)]
    m = np.transpose(s.amplitudes.reshape([2] * n), axes).reshape(2 ** len(rest), 2 ** len(qubits))
    u, sv, vh = np.linalg.svd(m)
    if sv.size > 1 and sv[1] > tol:
        raise ValueError(f"qubits {qubits} are entangled with the rest (second Schmidt value {sv[1]:.3e})")
    v = vh[0]
    k = int(np.argmax(np.abs(v)))
    v = v * np.exp(-1j * np.angle(v[k]))
    return StateVector(v / np.linalg.norm(v))
