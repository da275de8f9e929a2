"""Dense state vectors for small spin registers.

Basis convention: qubit 0 is the most significant bit of the basis index;
bit value 0 is spin up, 1 is spin down.  Registers are capped at 16 qubits
(1 MiB of amplitudes).  All operations return new ``StateVector`` values;
nothing mutates in place, so values can be shared freely across threads.

The two-qubit parity projectors are *signed*: the even projector keeps the
up-up component with ``+`` and the down-down component with ``-``, the odd
projector keeps up-down with ``+`` and down-up with ``-``.  Those signs
are exactly what the heralded gate imprints, so downstream feedback
operations never need to patch phases.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 16
NORM_ATOL = 1e-10
_ZERO_PROB = 1e-24

_SQRT_HALF = 1.0 / math.sqrt(2.0)

_GATES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


class SpinOutcome(enum.IntEnum):
    UP = 0
    DOWN = 1


class ZeroProbabilityError(ValueError):
    """Projection onto a branch that carries no amplitude."""


class EntangledCutError(ValueError):
    """Requested factorization across a cut that carries entanglement."""


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitudes over an n-spin register (immutable by convention)."""

    n: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"register size must be in [1, {MAX_QUBITS}], got {self.n}")
        if self.amps.shape != (2 ** self.n,):
            raise ValueError("amplitude array length must be 2**n")

    @staticmethod
    def from_amplitudes(amps) -> "StateVector":
        """Validating constructor: copies, checks size and normalization."""
        arr = np.asarray(amps, dtype=complex).reshape(-1).copy()
        n = int(arr.size).bit_length() - 1
        if arr.size < 2 or arr.size != 2 ** n:
            raise ValueError("amplitude count must be a power of two >= 2")
        if abs(np.linalg.norm(arr) - 1.0) > NORM_ATOL:
            raise ValueError("amplitudes are not normalized")
        return StateVector(n, arr)

    @staticmethod
    def basis(n: int, index: int) -> "StateVector":
        if not 0 <= index < 2 ** n:
            raise ValueError("basis index out of range")
        arr = np.zeros(2 ** n, dtype=complex)
        arr[index] = 1.0
        return StateVector(n, arr)

    @staticmethod
    def single(alpha: complex, beta: complex) -> "StateVector":
        """One spin in alpha|up> + beta|down>."""
        return StateVector.from_amplitudes([alpha, beta])

    @staticmethod
    def plus() -> "StateVector":
        return StateVector.single(_SQRT_HALF, _SQRT_HALF)

    @staticmethod
    def minus() -> "StateVector":
        return StateVector.single(_SQRT_HALF, -_SQRT_HALF)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.n:
        raise IndexError(f"qubit {qubit} out of range for {state.n}-qubit register")


def _as_tensor(state: StateVector) -> np.ndarray:
    return state.amps.reshape((2,) * state.n)


def apply_1q(state: StateVector, qubit: int, gate: str) -> StateVector:
    """Apply H, X or Z to one qubit.

    H maps up -> (up + down)/sqrt(2) and down -> (up - down)/sqrt(2).
    """
    _check_qubit(state, qubit)
    try:
        mat = _GATES[gate]
    except KeyError:
        raise ValueError(f"unknown gate {gate!r}; expected one of {sorted(_GATES)}") from None
    t = np.moveaxis(_as_tensor(state), qubit, -1)
    t = t @ mat.T
    t = np.moveaxis(t, -1, qubit)
    return StateVector(state.n, np.ascontiguousarray(t).reshape(-1))


def parity_weights(state: StateVector, q1: int, q2: int) -> tuple[float, float]:
    """Squared norms of the even and odd parity components on (q1, q2)."""
    _check_qubit(state, q1)
    _check_qubit(state, q2)
    if q1 == q2:
        raise ValueError("parity weights need two distinct qubits")
    t = np.moveaxis(_as_tensor(state), (q1, q2), (0, 1)).reshape(2, 2, -1)
    w = np.sum(np.abs(t) ** 2, axis=-1)
    return float(w[0, 0] + w[1, 1]), float(w[0, 1] + w[1, 0])


def project_parity(state: StateVector, q1: int, q2: int,
                   outcome: Parity) -> tuple[StateVector, float]:
    """Apply the signed parity projector on (q1, q2) and renormalize.

    Returns the collapsed state and the pre-normalization squared norm
    (the probability of the outcome).  Raises ZeroProbabilityError when
    that probability vanishes instead of returning a NaN state.
    """
    _check_qubit(state, q1)
    _check_qubit(state, q2)
    if q1 == q2:
        raise ValueError("parity projection needs two distinct qubits")
    t = np.moveaxis(_as_tensor(state), (q1, q2), (0, 1)).copy()
    if outcome is Parity.EVEN:
        t[0, 1] = 0.0
        t[1, 0] = 0.0
        t[1, 1] *= -1.0
    elif outcome is Parity.ODD:
        t[0, 0] = 0.0
        t[1, 1] = 0.0
        t[1, 0] *= -1.0
    else:
        raise TypeError(f"outcome must be a Parity, got {outcome!r}")
    prob = float(np.sum(np.abs(t) ** 2))
    if prob < _ZERO_PROB:
        raise ZeroProbabilityError(f"{outcome.value}-parity branch has zero probability")
    t = np.moveaxis(t / math.sqrt(prob), (0, 1), (q1, q2))
    return StateVector(state.n, np.ascontiguousarray(t).reshape(-1)), prob


def collapse_z(state: StateVector, qubit: int,
               outcome: SpinOutcome) -> tuple[StateVector, float]:
    """Project one qubit onto a Z eigenstate and renormalize.

    Returns (collapsed state, branch probability); errors on a
    zero-probability branch.
    """
    _check_qubit(state, qubit)
    t = np.moveaxis(_as_tensor(state), qubit, 0).copy()
    prob = float(np.sum(np.abs(t[int(outcome)]) ** 2))
    if prob < _ZERO_PROB:
        raise ZeroProbabilityError(f"branch {SpinOutcome(outcome).name} has zero probability")
    t[1 - int(outcome)] = 0.0
    t = np.moveaxis(t / math.sqrt(prob), 0, qubit)
    return StateVector(state.n, np.ascontiguousarray(t).reshape(-1)), prob


def measure_z(state: StateVector, qubit: int,
              rng: np.random.Generator) -> tuple[SpinOutcome, StateVector]:
    """Born-rule Z measurement: one uniform draw per call (outcome UP when
    the draw falls below the up-branch probability)."""
    _check_qubit(state, qubit)
    t = np.moveaxis(_as_tensor(state), qubit, 0)
    p_up = float(np.sum(np.abs(t[0]) ** 2))
    outcome = SpinOutcome.UP if rng.random() < p_up else SpinOutcome.DOWN
    collapsed, _ = collapse_z(state, qubit, outcome)
    return outcome, collapsed


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|**2, global-phase invariant, clipped to [0, 1]."""
    if a.n != b.n:
        raise ValueError(f"register sizes differ: {a.n} != {b.n}")
    return min(1.0, float(abs(np.vdot(a.amps, b.amps)) ** 2))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Join two registers; a's qubits become the most significant ones."""
    if a.n + b.n > MAX_QUBITS:
        raise ValueError(f"combined register would exceed {MAX_QUBITS} qubits")
    return StateVector(a.n + b.n, np.kron(a.amps, b.amps))


def permute(state: StateVector, order) -> StateVector:
    """Reorder qubits so new qubit i is old qubit order[i]."""
    order = list(order)
    if sorted(order) != list(range(state.n)):
        raise ValueError("order must be a permutation of all qubits")
    t = _as_tensor(state).transpose(order)
    return StateVector(state.n, np.ascontiguousarray(t).reshape(-1))


def split(state: StateVector, part) -> tuple[StateVector, StateVector]:
    """Factor the register across a product cut.

    Returns (subsystem over `part` in the given order, complement in
    ascending order).  Raises EntangledCutError when the cut carries
    entanglement; intended for peeling off measured or never-entangled
    qubits.
    """
    part = list(part)
    if len(set(part)) != len(part):
        raise ValueError("part must not repeat qubits")
    for q in part:
        _check_qubit(state, q)
    if not 0 < len(part) < state.n:
        raise ValueError("part must be a proper non-empty subset of the register")
    rest = [q for q in range(state.n) if q not in part]
    mat = _as_tensor(state).transpose(part + rest).reshape(2 ** len(part), -1)
    u, sv, vh = np.linalg.svd(mat, full_matrices=False)
    if 1.0 - sv[0] ** 2 > NORM_ATOL:
        raise EntangledCutError("subsystem is entangled with its complement")
    sub = u[:, 0]
    comp = vh[0]
    return (StateVector(len(part), sub / np.linalg.norm(sub)),
            StateVector(len(rest), comp / np.linalg.norm(comp)))


def subsystem_fidelity(state: StateVector, qubits, target: StateVector) -> float:
    """<target| rho |target> for the reduced state of `qubits` (in order).

    Equals the plain fidelity when the subsystem is in a pure product with
    the rest of the register.
    """
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError("qubits must be distinct")
    for q in qubits:
        _check_qubit(state, q)
    if target.n != len(qubits):
        raise ValueError("target size must match the subsystem")
    rest = [q for q in range(state.n) if q not in qubits]
    mat = _as_tensor(state).transpose(qubits + rest).reshape(2 ** len(qubits), -1)
    v = target.amps.conj() @ mat
    return min(1.0, float(np.real(np.vdot(v, v))))
