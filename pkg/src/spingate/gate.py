"""The heralded entangling gate: outcome statistics, projection, recycling.

One probe photon interrogates two spins sitting in separate (pre-balanced,
effectively identical) single-sided cavities.  A click on one of the two
success detectors projects the pair onto a signed parity subspace; a click
on either recycle detector heralds a harmless miss that leaves the
register provably untouched, so the gate retries immediately with a fresh
photon; no click at all is photon loss, which aborts the round and leaves
the (unprojected) register pending reinitialization.

Single-attempt probabilities, with detector efficiency ``eta_det`` and
input-coupling amplitude ``eta_in``:

    p_even    = eta_det * eta_in**2 * |d|**2 * w_even
    p_odd     = eta_det * eta_in**2 * |d|**2 * w_odd
    p_recycle = eta_det * |eta_in * s + sqrt(1 - eta_in**2)|**2
    p_loss    = 1 - (all of the above)

where (d, s) are the cavity reflection combinations and w_even/w_odd are
the parity weights of the current two-spin state.  For ``eta_in = 1`` and
a perfect detector these reduce to the analytic efficiencies

    eta_H = |r1 - r0|**2 / 4         single-shot success
    eta_V = |r1 + r0|**2 / 4         heralded recycle
    eta_S = eta_H / (1 - eta_V)      success with unbounded recycling

Two modelling notes:

* Dephasing is a trajectory channel: on every attempt each of the two
  spins independently suffers a Z flip with probability p/2, the phase-flip
  unravelling of a t_gate/T2 ratio p.  Whether dephasing should tick
  differently during the recycle photon's flight is not resolved here; one
  channel application per attempt is used uniformly.
* The mode-mismatch amplitude sqrt(1 - eta_in**2) adds coherently to the
  recycle amplitude.  That extrapolation is normalizable only while the
  branch probabilities sum to at most one; outside that domain (strongly
  reflective, far-detuned systems probed with eta_in < 1)
  ``single_shot_distribution`` raises ModelDomainError rather than
  fabricating a negative loss probability.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .cavity import ReflectionPair
from .qstate import Parity, StateVector, apply_1q, parity_weights, project_parity

_SUM_ATOL = 1e-12
_DEGENERATE_ATOL = 1e-15


class GateOutcome(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    FAILURE = "failure"

    @property
    def parity(self) -> Parity:
        if self is GateOutcome.EVEN:
            return Parity.EVEN
        if self is GateOutcome.ODD:
            return Parity.ODD
        raise ValueError("a failed gate has no parity")


class Etas(NamedTuple):
    """Analytic single-shot, recycle, and total success probabilities."""

    eta_h: float
    eta_v: float
    eta_s: float


class DegenerateRecycleError(ArithmeticError):
    """eta_V = 1: every attempt recycles and the total efficiency diverges.

    Physically requires |r1 + r0| = 2, i.e. both coefficients unity and in
    phase (an empty lossless mirror on both arms).
    """


class ModelDomainError(ValueError):
    """Branch probabilities exceed one: the coherent mode-mismatch
    extrapolation does not apply to these parameters."""


@dataclass(frozen=True)
class GateConfig:
    """Everything the gate needs besides the register itself."""

    pair: ReflectionPair
    eta_in: float = 1.0
    detector_efficiency: float = 1.0
    max_recycles: int = 50
    dephasing_per_attempt: float = 0.0

    def __post_init__(self) -> None:
        for name in ("eta_in", "detector_efficiency", "dephasing_per_attempt"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.max_recycles < 0:
            raise ValueError("max_recycles must be >= 0")


@dataclass(frozen=True)
class OutcomeDistribution:
    """Single-shot probabilities of the four detector outcomes."""

    p_even: float
    p_odd: float
    p_recycle: float
    p_loss: float

    @property
    def p_success(self) -> float:
        return self.p_even + self.p_odd

    def as_array(self) -> np.ndarray:
        return np.array([self.p_even, self.p_odd, self.p_recycle, self.p_loss])


@dataclass(frozen=True)
class GateResult:
    """Outcome of one repeat-until-success gate run.

    ``attempts`` counts photons consumed.  On FAILURE the state is the
    unprojected register, pending reinitialization by the caller.
    """

    outcome: GateOutcome
    attempts: int
    state: StateVector


def analytic_etas(pair: ReflectionPair) -> Etas:
    """Monochromatic gate efficiencies from one reflection pair.

    The identity eta_S = eta_H / (1 - eta_V) holds exactly; raises
    DegenerateRecycleError when the denominator vanishes.
    """
    eta_h = abs(pair.r1 - pair.r0) ** 2 / 4
    eta_v = abs(pair.r1 + pair.r0) ** 2 / 4
    if 1.0 - eta_v <= _DEGENERATE_ATOL:
        raise DegenerateRecycleError("eta_V = 1: recycling never terminates")
    return Etas(eta_h, eta_v, eta_h / (1.0 - eta_v))


def single_shot_distribution(config: GateConfig, state: StateVector,
                             q1: int, q2: int) -> OutcomeDistribution:
    """Probabilities of the four single-photon outcomes for the current state."""
    if abs(state.norm() - 1.0) > 1e-9:
        raise ValueError("state must be normalized")
    w_even, w_odd = parity_weights(state, q1, q2)
    eta_det = config.detector_efficiency
    eta_in = config.eta_in
    p_unit = eta_det * eta_in ** 2 * abs(config.pair.d) ** 2
    amp_v = eta_in * config.pair.s + math.sqrt(max(0.0, 1.0 - eta_in ** 2))
    p_even = p_unit * w_even
    p_odd = p_unit * w_odd
    p_recycle = eta_det * abs(amp_v) ** 2
    p_loss = 1.0 - (p_even + p_odd + p_recycle)
    if p_loss < -_SUM_ATOL:
        raise ModelDomainError(
            "branch probabilities sum to "
            f"{p_even + p_odd + p_recycle:.6f} > 1; the coherent mode-mismatch "
            "model does not cover these parameters")
    return OutcomeDistribution(p_even, p_odd, p_recycle, max(0.0, p_loss))


def _apply_dephasing(state: StateVector, qubits, p: float,
                     rng: Optional[np.random.Generator]) -> StateVector:
    # Z flip with probability p/2 per spin; draws nothing when p == 0 so
    # transcripts are unchanged by a disabled channel.
    if p == 0.0:
        return state
    if rng is None:
        raise ValueError("dephasing requires a random generator")
    for q in qubits:
        if rng.random() < p / 2:
            state = apply_1q(state, q, "Z")
    return state


def run_gate(config: GateConfig, state: StateVector, q1: int, q2: int,
             rng: Optional[np.random.Generator] = None,
             force: Optional[GateOutcome] = None) -> GateResult:
    """Repeat-until-success gate on qubits (q1, q2) of the register.

    Samples a detector outcome per attempt: success projects and returns,
    a recycle click leaves the register untouched (dephasing channel
    aside) and retries up to ``max_recycles`` times, photon loss aborts
    with FAILURE and the unprojected register.  The dephasing channel is
    applied once per attempt, including the successful one.

    ``force`` is a test hook that deterministically selects one heralded
    branch (one attempt, no sampling); ``rng`` may then be omitted unless
    dephasing is enabled.
    """
    if force is not None:
        if force is GateOutcome.FAILURE:
            return GateResult(GateOutcome.FAILURE, 1, state)
        projected, _ = project_parity(state, q1, q2, force.parity)
        projected = _apply_dephasing(projected, (q1, q2), config.dephasing_per_attempt, rng)
        return GateResult(force, 1, projected)

    if rng is None:
        raise ValueError("rng is required unless the outcome is forced")
    current = state
    attempts = 0
    # the distribution is identical on every attempt: a recycle leaves the
    # register untouched and Z errors change phases only, so the parity
    # weights cannot move until a projection ends the loop
    dist = single_shot_distribution(config, state, q1, q2)
    for _ in range(config.max_recycles + 1):
        attempts += 1
        u = rng.random()
        if u < dist.p_even:
            outcome = GateOutcome.EVEN
        elif u < dist.p_even + dist.p_odd:
            outcome = GateOutcome.ODD
        elif u < dist.p_even + dist.p_odd + dist.p_recycle:
            outcome = None  # recycle: register provably unchanged, retry
        else:
            return GateResult(GateOutcome.FAILURE, attempts, current)
        if outcome is not None:
            projected, _ = project_parity(current, q1, q2, outcome.parity)
            projected = _apply_dephasing(projected, (q1, q2),
                                         config.dephasing_per_attempt, rng)
            return GateResult(outcome, attempts, projected)
        current = _apply_dephasing(current, (q1, q2),
                                   config.dephasing_per_attempt, rng)
    return GateResult(GateOutcome.FAILURE, attempts, current)
