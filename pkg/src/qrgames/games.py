"""Correlation functionals and exact payoff evaluation for the refereed games.

The quantum-refereed steering game: in each round the referee draws a
setting j in {1,2,3} and a sign s = +-1, tells Alice j, and hands Bob the
qubit eigenstate (1/2)(1 + s sigma_j).  Alice replies a = +-1, Bob replies
b in {0,1}, and the average payoff aggregates the six conditional
expectations as

    payoff = 2 * sum_{j,s} ( s <ab>_{j,s} - (r/sqrt(3)) <b>_{j,s} ),

where r >= 1 scales the penalty term (r = 1 for a perfectly calibrated
referee).  The game is won when the payoff is strictly positive.

This module knows nothing about how strategies are parameterised; exact
evaluation only requires each strategy to expose conditional
expectations per signal (duck-typed ``conditional_expectations``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    DensityOperator,
    QuantumChannel,
    apply_channel,
    pauli,
    signal_state,
    tensor,
)

SQRT3 = math.sqrt(3.0)
SQRT2 = math.sqrt(2.0)

#: Canonical ordering of the referee's six signal conditions (j, s).
SIGNALS = ((1, 1), (1, -1), (2, 1), (2, -1), (3, 1), (3, -1))


def ideal_signal_ensemble() -> dict:
    """The calibrated signal table {(j, s): (1/2)(1 + s sigma_j)}."""
    return {(j, s): signal_state(j, s) for (j, s) in SIGNALS}


def single_axis_ensemble(axis: int = 1) -> dict:
    """An uncalibrated referee that prepares every signal along one axis.

    Regardless of the announced j, the delivered state is the sigma_axis
    eigenstate with the announced sign.  Against such a referee the
    no-state cheat discriminates the sign perfectly.
    """
    return {(j, s): signal_state(axis, s) for (j, s) in SIGNALS}


def uniform_input_distribution() -> dict:
    return {sig: 1.0 / 6.0 for sig in SIGNALS}


@dataclass(frozen=True, eq=False)
class SteeringGameSpec:
    """Complete rules of one steering game.

    ``signal_ensemble`` maps (j, s) to the state the referee actually
    sends; ``input_distribution`` is the sampling distribution over the
    six conditions; ``r`` scales the penalty term and ``payoff_bound``
    is the steering bound the penalty is calibrated against (sqrt(3)
    for the three-axis game; lowering it below sqrt(3) makes the game
    winnable by hidden-state models, which the verification suite uses
    to demonstrate tightness).
    """

    signal_ensemble: dict = field(default_factory=ideal_signal_ensemble)
    input_distribution: dict = field(default_factory=uniform_input_distribution)
    r: float = 1.0
    payoff_bound: float = SQRT3

    def __post_init__(self):
        ens = dict(self.signal_ensemble)
        if set(ens) != set(SIGNALS):
            raise ValueError("signal ensemble must cover exactly the six (j, s) pairs")
        for key, state in ens.items():
            if not isinstance(state, DensityOperator):
                raise ValueError(f"signal for {key} must be a DensityOperator")
            if state.dim != 2:
                raise ValueError("referee signals must be qubit states")
        dist = {k: float(v) for k, v in dict(self.input_distribution).items()}
        if set(dist) != set(SIGNALS):
            raise ValueError("input distribution must cover exactly the six (j, s) pairs")
        if any(p < 0.0 for p in dist.values()):
            raise ValueError("input probabilities must be nonnegative")
        if abs(sum(dist.values()) - 1.0) > 1e-10:
            raise ValueError("input probabilities must sum to 1")
        r = float(self.r)
        if r < 1.0:
            raise ValueError(f"preparation-quality parameter r must be >= 1, got {r}")
        bound = float(self.payoff_bound)
        if bound <= 0.0:
            raise ValueError("payoff bound must be positive")
        object.__setattr__(self, "signal_ensemble", ens)
        object.__setattr__(self, "input_distribution", dist)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "payoff_bound", bound)

    @classmethod
    def ideal(cls, r: float = 1.0, payoff_bound: float = SQRT3) -> "SteeringGameSpec":
        return cls(r=r, payoff_bound=payoff_bound)

    @property
    def penalty_coefficient(self) -> float:
        """Coefficient of the <b> term: r * payoff_bound / 3 (= r/sqrt(3) by default)."""
        return self.r * self.payoff_bound / 3.0

    def delivered_signal(self, j: int, s: int, channel: QuantumChannel | None = None):
        """The state Bob receives for condition (j, s), after an optional channel."""
        omega = self.signal_ensemble[(j, s)]
        if channel is not None:
            omega = apply_channel(channel, omega)
        return omega


@dataclass(frozen=True, eq=False)
class CorrelationTable:
    """Conditional expectations <ab> and <b> for each of the six conditions."""

    e_ab: dict
    e_b: dict

    def __post_init__(self):
        e_ab = {k: float(v) for k, v in dict(self.e_ab).items()}
        e_b = {k: float(v) for k, v in dict(self.e_b).items()}
        if set(e_ab) != set(SIGNALS) or set(e_b) != set(SIGNALS):
            raise ValueError("correlation table must cover exactly the six (j, s) pairs")
        for sig in SIGNALS:
            if not -1e-9 <= e_b[sig] <= 1.0 + 1e-9:
                raise ValueError(f"<b> for {sig} outside [0, 1]: {e_b[sig]}")
            if abs(e_ab[sig]) > e_b[sig] + 1e-9:
                raise ValueError(
                    f"|<ab>| exceeds <b> for {sig}: {e_ab[sig]} vs {e_b[sig]}"
                )
        object.__setattr__(self, "e_ab", e_ab)
        object.__setattr__(self, "e_b", e_b)

    def payoff(self, spec: SteeringGameSpec) -> float:
        """Aggregate the table into the game's average payoff."""
        coeff = spec.penalty_coefficient
        total = 0.0
        for (j, s) in SIGNALS:
            total += s * self.e_ab[(j, s)] - coeff * self.e_b[(j, s)]
        return 2.0 * total


def _check_expectation_range(name, value):
    if abs(value) > 1.0 + 1e-9:
        raise ValueError(f"{name} must lie in [-1, 1], got {value}")


def chsh_value(e11: float, e12: float, e21: float, e22: float) -> float:
    """|<a1 b1> + <a1 b2> + <a2 b1> - <a2 b2>|, bounded by 2 for local models."""
    for name, v in (("e11", e11), ("e12", e12), ("e21", e21), ("e22", e22)):
        _check_expectation_range(name, v)
    return abs(e11 + e12 + e21 - e22)


def steering2_value(c1: float, c2: float) -> float:
    """|<a1 sigma_1> + <a2 sigma_2>|, bounded by sqrt(2) for hidden-state models."""
    _check_expectation_range("c1", c1)
    _check_expectation_range("c2", c2)
    return abs(c1 + c2)


def steering3_value(c1: float, c2: float, c3: float) -> float:
    """<a1 sigma_1> + <a2 sigma_2> + <a3 sigma_3> (signed), bounded by sqrt(3)
    for hidden-state models."""
    for name, v in (("c1", c1), ("c2", c2), ("c3", c3)):
        _check_expectation_range(name, v)
    return c1 + c2 + c3


def witness2_value(state: DensityOperator) -> float:
    """|Tr[(sigma_1 x sigma_1) rho] + Tr[(sigma_2 x sigma_2) rho]|.

    Exceeding 1 witnesses entanglement of the two-qubit state.
    """
    if state.dim != 4:
        raise ValueError("witness is defined for two-qubit states")
    total = 0.0
    for j in (1, 2):
        total += state.expectation(tensor(pauli(j), pauli(j)))
    return abs(total)


def classical_witness_payoff(e11: float, e22: float) -> float:
    """Payoff of the classically refereed witness game: |<ab>_11 + <ab>_22| - 1.

    ``e11`` and ``e22`` are the outcome-product expectations when both
    players were told the same setting (1,1) or (2,2).  Positive payoff
    certifies nothing when players may share classical randomness: a
    predetermined identical answer list reaches the maximum +1.
    """
    _check_expectation_range("e11", e11)
    _check_expectation_range("e22", e22)
    return abs(e11 + e22) - 1.0


def correlator(state: DensityOperator, op_a, op_b) -> float:
    """Tr[(op_a x op_b) rho] for a bipartite state."""
    return state.expectation(tensor(op_a, op_b))


def canonical_chsh_settings():
    """Observables (A1, A2, B1, B2) reaching CHSH = 2 sqrt(2) w on Werner states.

    Bob measures sigma_1 and sigma_3; Alice measures -(sigma_1 + sigma_3)/sqrt(2)
    and -(sigma_1 - sigma_3)/sqrt(2).
    """
    a1 = -(pauli(1) + pauli(3)) / SQRT2
    a2 = -(pauli(1) - pauli(3)) / SQRT2
    return (a1, a2, pauli(1), pauli(3))


def chsh_from_state(state: DensityOperator, settings=None) -> float:
    """Evaluate the CHSH combination on a two-qubit state at given settings."""
    if settings is None:
        settings = canonical_chsh_settings()
    a1, a2, b1, b2 = settings
    return chsh_value(
        correlator(state, a1, b1),
        correlator(state, a1, b2),
        correlator(state, a2, b1),
        correlator(state, a2, b2),
    )


def correlation_table(
    spec: SteeringGameSpec,
    strategy,
    shared_state: DensityOperator | None = None,
    channel: QuantumChannel | None = None,
) -> CorrelationTable:
    """Exact per-condition expectations for a strategy under a game spec.

    The strategy object supplies ``conditional_expectations(omega, j, s,
    shared_state)`` returning (<ab>, <b>) for the delivered signal state
    ``omega``; this function only routes signals and assembles the table.
    """
    if getattr(strategy, "needs_shared_state", False) and shared_state is None:
        raise ValueError("this strategy requires a shared state")
    e_ab = {}
    e_b = {}
    for (j, s) in SIGNALS:
        omega = spec.delivered_signal(j, s, channel)
        ab, b = strategy.conditional_expectations(omega, j, s, shared_state)
        e_ab[(j, s)] = ab
        e_b[(j, s)] = b
    return CorrelationTable(e_ab, e_b)


def qrs_payoff_exact(
    spec: SteeringGameSpec,
    strategy,
    shared_state: DensityOperator | None = None,
    channel: QuantumChannel | None = None,
) -> float:
    """Exact average payoff of a strategy in the quantum-refereed steering game."""
    return correlation_table(spec, strategy, shared_state, channel).payoff(spec)


def per_round_payoff(
    a: int, b: int, j: int, s: int, r: float = 1.0, payoff_bound: float = SQRT3
) -> float:
    """Single-round payoff 12 (s a b - (r/sqrt(3)) b) under uniform sampling.

    With the referee drawing (j, s) uniformly (probability 1/6 each), the
    expectation of this quantity equals the aggregate average payoff; the
    simulator uses it to attach a diagnostic payoff to every transcript row.
    """
    if a not in (1, -1):
        raise ValueError(f"Alice's outcome must be +1 or -1, got {a!r}")
    if b not in (0, 1):
        raise ValueError(f"Bob's outcome must be 0 or 1, got {b!r}")
    if j not in (1, 2, 3) or s not in (1, -1):
        raise ValueError(f"invalid signal condition ({j!r}, {s!r})")
    coeff = float(r) * float(payoff_bound) / 3.0
    return 12.0 * (s * a * b - coeff * b)
