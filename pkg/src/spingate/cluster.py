"""Linear cluster-state assembly driven by the heralded gate.

A length-n chain is the state

    (up_1 + down_1 Z_2)(up_2 + down_2 Z_3) ... (up_n + down_n) / 2**(n/2),

the usual 1D cluster.  Growth appends a fresh spin prepared in
(up - down)/sqrt(2): run the gate on (last chain spin, fresh spin), then
apply H (even herald) or H*X (odd herald) to the fresh spin; either way
the chain is one spin longer.  The success feedback must target the fresh
spin: a Hadamard on the old chain end would turn the bond to its
predecessor into an X-type link (HZ = XH), and for chains longer than one
the result would no longer be a cluster state of this form.  A failed
gate costs one spin: measure the last chain spin in Z and, on the down
outcome, apply Z to its predecessor.

Connecting chains M (length m) and N (length n) applies Z to M_m, runs
the gate on (M_m, N_1), then applies the same H / H*X feedback to the
boundary spin whose chain is a single qubit (N_1 when n == 1, else M_m).
When either chain has length one this yields a linear cluster of the full
length m + n.  When both chains have two or more spins, the parity
projection fuses M_m and N_1 into one vertex carrying three bonds, and
any local feedback splits it into a star junction: the result is an
(m+n)-qubit graph state with one degree-3 vertex, not a linear cluster (a
path state has no weight-2 stabilizer on the boundary pair, so no local
operation can linearize it).  A failed connection damages both boundary
spins; each end recovers by the measure-and-correct rule (for N_1, the
mirror image: measure it and apply Z to N_2 on the down outcome), leaving
chains of lengths m-1 and n-1.

``canonical_cluster`` builds the reference state by direct expansion and
is the oracle every grow/connect path is checked against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gate import GateConfig, GateOutcome, GateResult, run_gate
from .qstate import (MAX_QUBITS, SpinOutcome, StateVector, apply_1q, collapse_z,
                     measure_z, permute, split, subsystem_fidelity, tensor)

MAX_FACTORY_TARGET = 10
_MAX_OPS_PER_TRIAL = 1_000_000


class GrowthStrategy(enum.Enum):
    SEQUENTIAL = "sequential_growth"
    PAIRWISE = "pairwise_doubling"


@dataclass(frozen=True)
class ChainState:
    """A register plus the ordered qubit labels that form the chain.

    The register may hold extra qubits (measured-out remnants, stale fresh
    spins); only ``labels`` are part of the chain.
    """

    register: StateVector
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("chain labels must be distinct")
        for q in self.labels:
            if not 0 <= q < self.register.n:
                raise ValueError(f"label {q} outside the register")

    @property
    def length(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class GrowResult:
    """Chain after one growth attempt (grown on success, shrunk on failure)."""

    chain: ChainState
    gate: GateResult


@dataclass(frozen=True)
class ConnectResult:
    """Either the joined chain or the two degraded parts after a failure."""

    chain: Optional[ChainState]
    parts: Optional[tuple[ChainState, ChainState]]
    gate: GateResult


def new_chain() -> ChainState:
    """A length-1 chain: one spin in (up + down)/sqrt(2)."""
    return ChainState(StateVector.plus(), (0,))


def add_fresh(chain: ChainState) -> tuple[ChainState, int]:
    """Append a fresh spin in (up - down)/sqrt(2); returns its index."""
    return (ChainState(tensor(chain.register, StateVector.minus()), chain.labels),
            chain.register.n)


def canonical_cluster(n: int) -> StateVector:
    """The 1D cluster state of n spins, by direct expansion.

    Basis amplitudes are (-1)**(number of adjacent down-down pairs),
    normalized; the oracle for all growth and connection tests.
    """
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"cluster size must be in [1, {MAX_QUBITS}]")
    idx = np.arange(2 ** n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    adjacent = np.sum(bits[:, :-1] & bits[:, 1:], axis=1)
    amps = np.where(adjacent % 2 == 0, 1.0, -1.0) / 2 ** (n / 2)
    return StateVector(n, amps.astype(complex))


def chain_fidelity(chain: ChainState) -> float:
    """Fidelity of the chain qubits against the canonical cluster state."""
    if chain.length == 0:
        return 1.0
    return subsystem_fidelity(chain.register, chain.labels,
                              canonical_cluster(chain.length))


def _measure(state: StateVector, qubit: int, rng,
             forced: Optional[SpinOutcome]) -> tuple[SpinOutcome, StateVector]:
    if forced is not None:
        collapsed, _ = collapse_z(state, qubit, forced)
        return forced, collapsed
    if rng is None:
        raise ValueError("rng is required unless the measurement outcome is forced")
    return measure_z(state, qubit, rng)


def grow_chain(chain: ChainState, fresh: int, config: GateConfig,
               rng: Optional[np.random.Generator] = None, *,
               force: Optional[GateOutcome] = None,
               force_measure: Optional[SpinOutcome] = None) -> GrowResult:
    """Attempt to extend the chain by the fresh spin.

    On failure the chain shrinks by one (a length-1 chain becomes the
    empty chain); the measured spin and the untouched fresh spin stay in
    the register as non-chain qubits.
    """
    if chain.length == 0:
        raise ValueError("cannot grow an empty chain")
    if not 0 <= fresh < chain.register.n or fresh in chain.labels:
        raise ValueError("fresh qubit must be a non-chain register qubit")
    last = chain.labels[-1]
    result = run_gate(config, chain.register, last, fresh, rng, force=force)
    if result.outcome is GateOutcome.EVEN:
        state = apply_1q(result.state, fresh, "H")
        return GrowResult(ChainState(state, chain.labels + (fresh,)), result)
    if result.outcome is GateOutcome.ODD:
        state = apply_1q(apply_1q(result.state, fresh, "X"), fresh, "H")
        return GrowResult(ChainState(state, chain.labels + (fresh,)), result)
    outcome, state = _measure(result.state, last, rng, force_measure)
    labels = chain.labels[:-1]
    if outcome is SpinOutcome.DOWN and labels:
        state = apply_1q(state, labels[-1], "Z")
    return GrowResult(ChainState(state, labels), result)


def connect_chains(m_chain: ChainState, n_chain: ChainState, config: GateConfig,
                   rng: Optional[np.random.Generator] = None, *,
                   force: Optional[GateOutcome] = None,
                   force_measure: tuple[Optional[SpinOutcome],
                                        Optional[SpinOutcome]] = (None, None),
                   ) -> ConnectResult:
    """Join two chains end to start with one gate.

    Success yields a chain of length m + n.  Failure measures out both
    boundary spins (with the per-end Z feedback) and returns the two
    shortened chains, each over its own register.
    """
    if m_chain.length == 0 or n_chain.length == 0:
        raise ValueError("cannot connect an empty chain")
    offset = m_chain.register.n
    register = tensor(m_chain.register, n_chain.register)
    m_labels = m_chain.labels
    n_labels = tuple(q + offset for q in n_chain.labels)
    m_last, n_first = m_labels[-1], n_labels[0]
    register = apply_1q(register, m_last, "Z")
    result = run_gate(config, register, m_last, n_first, rng, force=force)
    if result.outcome is not GateOutcome.FAILURE:
        # the feedback spin must be the one without a further chain bond,
        # otherwise that bond turns X-type under the Hadamard
        target = n_first if n_chain.length == 1 else m_last
        state = result.state
        if result.outcome is GateOutcome.ODD:
            state = apply_1q(state, target, "X")
        state = apply_1q(state, target, "H")
        return ConnectResult(ChainState(state, m_labels + n_labels), None, result)
    forced_m, forced_n = force_measure
    out_m, state = _measure(result.state, m_last, rng, forced_m)
    if out_m is SpinOutcome.DOWN and len(m_labels) >= 2:
        state = apply_1q(state, m_labels[-2], "Z")
    out_n, state = _measure(state, n_first, rng, forced_n)
    if out_n is SpinOutcome.DOWN and len(n_labels) >= 2:
        state = apply_1q(state, n_labels[1], "Z")
    m_register, n_register = split(state, tuple(range(offset)))
    part_m = ChainState(m_register, m_labels[:-1])
    part_n = ChainState(n_register, n_chain.labels[1:])
    return ConnectResult(None, (part_m, part_n), result)


@dataclass(frozen=True)
class FactoryStats:
    """Resource counts over repeated full builds of a target chain."""

    strategy: GrowthStrategy
    target_length: int
    photons: np.ndarray
    gate_ops: np.ndarray

    @property
    def trials(self) -> int:
        return self.photons.size

    @property
    def mean_photons(self) -> float:
        return float(np.mean(self.photons))

    @property
    def var_photons(self) -> float:
        return float(np.var(self.photons, ddof=1)) if self.trials > 1 else 0.0

    @property
    def stderr_photons(self) -> float:
        return math.sqrt(self.var_photons / self.trials) if self.trials > 1 else 0.0

    @property
    def mean_gate_ops(self) -> float:
        return float(np.mean(self.gate_ops))

    @property
    def var_gate_ops(self) -> float:
        return float(np.var(self.gate_ops, ddof=1)) if self.trials > 1 else 0.0

    def to_table(self):
        """One-row table in the CLI's CSV schema."""
        from .sweep import Table, quantize
        columns = ("strategy", "target_length", "trials", "mean_photons",
                   "var_photons", "mean_gate_ops", "var_gate_ops")
        row = {"strategy": self.strategy.value,
               "target_length": float(self.target_length),
               "trials": float(self.trials),
               "mean_photons": quantize(self.mean_photons),
               "var_photons": quantize(self.var_photons),
               "mean_gate_ops": quantize(self.mean_gate_ops),
               "var_gate_ops": quantize(self.var_gate_ops)}
        return Table(columns=columns, rows=(row,))


def _compact(chain: ChainState) -> ChainState:
    """Shrink the register to exactly the chain qubits, relabeled 0..L-1."""
    n = chain.register.n
    if chain.labels == tuple(range(n)):
        return chain
    if chain.length == n:
        return ChainState(permute(chain.register, chain.labels), tuple(range(n)))
    sub, _ = split(chain.register, chain.labels)
    return ChainState(sub, tuple(range(chain.length)))


class _Budget:
    """Per-trial op counter; bails out of runaway configurations."""

    def __init__(self):
        self.ops = 0
        self.photons = 0

    def charge(self, result: GateResult) -> None:
        self.ops += 1
        self.photons += result.attempts
        if self.ops > _MAX_OPS_PER_TRIAL:
            raise RuntimeError("factory trial exceeded the gate-operation budget")


def _grow_to(chain: ChainState, target: int, config: GateConfig,
             rng: np.random.Generator, budget: _Budget) -> ChainState:
    while chain.length < target:
        if chain.length == 0:
            chain = new_chain()
            continue
        extended, fresh = add_fresh(chain)
        result = grow_chain(extended, fresh, config, rng)
        budget.charge(result.gate)
        chain = result.chain if result.chain.length > chain.length else _safe_compact(result.chain)
    return chain


def _safe_compact(chain: ChainState) -> ChainState:
    if chain.length == 0:
        return ChainState(StateVector.plus(), ())  # placeholder register, no chain
    return _compact(chain)


def _build_pairwise(target: int, config: GateConfig, rng: np.random.Generator,
                    budget: _Budget) -> ChainState:
    if target == 1:
        return new_chain()
    left_target = (target + 1) // 2
    right_target = target // 2
    left = _build_pairwise(left_target, config, rng, budget)
    right = _build_pairwise(right_target, config, rng, budget)
    while True:
        result = connect_chains(left, right, config, rng)
        budget.charge(result.gate)
        if result.chain is not None:
            return _compact(result.chain)
        part_left, part_right = result.parts
        left = _grow_to(_safe_compact(part_left), left_target, config, rng, budget)
        right = _grow_to(_safe_compact(part_right), right_target, config, rng, budget)


def simulate_factory(target_length: int, config: GateConfig,
                     strategy: GrowthStrategy, rng: np.random.Generator,
                     trials: int) -> FactoryStats:
    """Monte Carlo resource counts for building chains of a target length.

    SEQUENTIAL grows one chain spin by spin, re-preparing a single spin
    whenever failures wipe the chain out.  PAIRWISE builds two half-length
    chains recursively and connects them, regrowing the damaged halves
    after a failed connection.  Photons and gate operations are counted
    until the target length is first reached.

    Interior connections produce branched graph states rather than linear
    clusters (see the module docstring); that does not affect resource
    counts, because the gate's outcome probabilities are independent of
    the register state.
    """
    if not 1 <= target_length <= MAX_FACTORY_TARGET:
        raise ValueError(f"target length must be in [1, {MAX_FACTORY_TARGET}]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    photons = np.zeros(trials, dtype=np.int64)
    ops = np.zeros(trials, dtype=np.int64)
    for i in range(trials):
        budget = _Budget()
        if strategy is GrowthStrategy.SEQUENTIAL:
            _grow_to(new_chain(), target_length, config, rng, budget)
        elif strategy is GrowthStrategy.PAIRWISE:
            _build_pairwise(target_length, config, rng, budget)
        else:
            raise TypeError(f"unknown strategy {strategy!r}")
        photons[i] = budget.photons
        ops[i] = budget.ops
    return FactoryStats(strategy, target_length, photons, ops)
