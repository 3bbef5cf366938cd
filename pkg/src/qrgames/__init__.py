"""Quantum-refereed steering games: exact evaluation, simulation, verification.

A referee announces a measurement axis to Alice and sends Bob a qubit
that encodes a sign along that axis; the pair tries to certify their
shared entangled state through the referee's payoff.  This package
evaluates strategies exactly (honest partial-Bell measurements,
no-state cheats, hidden-state models, one-way-communication cheats),
simulates rounds reproducibly, and brute-force verifies that no cheat
wins an honestly calibrated game.
"""

from .games import (
    SIGNALS,
    SQRT2,
    SQRT3,
    CorrelationTable,
    SteeringGameSpec,
    canonical_chsh_settings,
    chsh_from_state,
    chsh_value,
    classical_witness_payoff,
    correlation_table,
    correlator,
    ideal_signal_ensemble,
    per_round_payoff,
    qrs_payoff_exact,
    single_axis_ensemble,
    steering2_value,
    steering3_value,
    uniform_input_distribution,
    witness2_value,
)
from .qcore import (
    BlochVector,
    DensityOperator,
    Povm,
    QuantumChannel,
    amplitude_damping_channel,
    apply_channel,
    bloch_operator,
    depolarizing_channel,
    dual_channel,
    identity_channel,
    partial_trace,
    pauli,
    signal_state,
    singlet_projector,
    tensor,
    werner_state,
)
from .simulator import (
    PayoffEstimate,
    RoundRecord,
    RunConfig,
    modified_povm,
    noisy_equivalence_check,
    run_game,
    sample_outcome,
    write_summary_json,
    write_transcript_csv,
)
from .strategies import (
    CommCheat,
    HonestStrategy,
    LhsStrategy,
    NoStateCheat,
    best_estimator,
    cheat_payoff_no_state,
    comm_cheat_payoff,
    discrimination_stats,
    honest_strategy,
    lhs_payoff_exact,
    partial_bell_povm,
    programmed_povm,
)

__version__ = "0.1.0"

__all__ = [
    "SIGNALS",
    "SQRT2",
    "SQRT3",
    "BlochVector",
    "CommCheat",
    "CorrelationTable",
    "DensityOperator",
    "HonestStrategy",
    "LhsStrategy",
    "NoStateCheat",
    "PayoffEstimate",
    "Povm",
    "QuantumChannel",
    "RoundRecord",
    "RunConfig",
    "SteeringGameSpec",
    "amplitude_damping_channel",
    "apply_channel",
    "best_estimator",
    "bloch_operator",
    "canonical_chsh_settings",
    "cheat_payoff_no_state",
    "chsh_from_state",
    "chsh_value",
    "classical_witness_payoff",
    "comm_cheat_payoff",
    "correlation_table",
    "correlator",
    "depolarizing_channel",
    "discrimination_stats",
    "dual_channel",
    "honest_strategy",
    "ideal_signal_ensemble",
    "identity_channel",
    "lhs_payoff_exact",
    "modified_povm",
    "noisy_equivalence_check",
    "partial_bell_povm",
    "partial_trace",
    "pauli",
    "per_round_payoff",
    "programmed_povm",
    "qrs_payoff_exact",
    "run_game",
    "sample_outcome",
    "signal_state",
    "single_axis_ensemble",
    "singlet_projector",
    "steering2_value",
    "steering3_value",
    "tensor",
    "uniform_input_distribution",
    "werner_state",
    "witness2_value",
    "write_summary_json",
    "write_transcript_csv",
]
