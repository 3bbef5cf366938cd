"""Round-by-round protocol engine for the refereed steering game.

Outcomes are sampled from the exact conditional distributions implied by
the configured strategy — there is no trajectory-level simulation — so a
finite run is an unbiased Monte Carlo estimate of the exact payoff.

Randomness and reproducibility
------------------------------
A run owns one Philox counter-based stream keyed by ``rng_seed``.  Round
``i`` consumes exactly the two 64-bit words ``2i`` and ``2i+1`` of that
stream: the first word picks the referee's condition (j, s), the second
picks the outcome pair (a, b).  Because the word positions are fixed,
rounds can be sharded across workers by advancing the stream to
``2 * first_round`` per shard, and any sharding reproduces the serial
transcript bit for bit.

Communication discipline
------------------------
Strategies declare the one-way channel they consume; the run config must
enable exactly that channel or construction fails.  Samplers are wired
so Alice's reply can depend only on her setting j and — when Bob-to-Alice
communication is enabled — on Bob's transmitted message, never on the
referee's sign s directly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import serialize
from .games import SIGNALS, SteeringGameSpec
from .qcore import (
    DensityOperator,
    Povm,
    QuantumChannel,
    apply_channel,
    random_density,
    signal_state,
    tensor,
)

#: Fixed (a, b) ordering used by all sampling tables.
OUTCOMES = ((1, 0), (1, 1), (-1, 0), (-1, 1))

TRANSCRIPT_FIELDS = ("round", "j", "s", "a", "b", "payoff")

_COMM_MODES = (None, "alice_to_bob", "bob_to_alice")


def _philox_uniforms(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Uniform doubles from the run's Philox stream, starting at word ``offset``.

    Philox emits 64-bit words in counter blocks of four, and ``advance``
    steps whole blocks; arbitrary word offsets skip the block remainder
    by drawing and discarding.
    """
    bg = np.random.Philox(key=int(seed))
    blocks, rem = divmod(int(offset), 4)
    if blocks:
        bg.advance(blocks)
    raw = bg.random_raw(int(count) + rem)
    if rem:
        raw = raw[rem:]
    return (raw >> np.uint64(11)) * (2.0 ** -53)


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Everything a simulation run depends on."""

    spec: SteeringGameSpec
    strategy: object
    rounds: int
    rng_seed: int
    shared_state: DensityOperator | None = None
    channel: QuantumChannel | None = None
    communication: str | None = None
    preparation: dict | None = None
    keep_transcript: bool = True

    def __post_init__(self):
        if not isinstance(self.spec, SteeringGameSpec):
            raise ValueError("config needs a SteeringGameSpec")
        rounds = int(self.rounds)
        if rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds!r}")
        seed = int(self.rng_seed)
        if not 0 <= seed < 2 ** 64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        if self.communication not in _COMM_MODES:
            raise ValueError(f"unknown communication mode {self.communication!r}")
        needed = getattr(self.strategy, "required_communication", None)
        if needed != self.communication:
            raise ValueError(
                f"strategy requires communication={needed!r} but the run "
                f"configures {self.communication!r}"
            )
        if getattr(self.strategy, "needs_shared_state", False):
            if self.shared_state is None:
                raise ValueError("this strategy requires a shared state")
        elif self.shared_state is not None:
            raise ValueError("this strategy does not consume a shared state")
        if self.preparation is not None:
            prep = dict(self.preparation)
            if set(prep) != set(SIGNALS):
                raise ValueError("preparation table must cover exactly the six (j, s) pairs")
            for key, st in prep.items():
                if not isinstance(st, DensityOperator) or st.dim != 2:
                    raise ValueError(f"preparation for {key} must be a qubit state")
            object.__setattr__(self, "preparation", prep)
        object.__setattr__(self, "rounds", rounds)
        object.__setattr__(self, "rng_seed", seed)


@dataclass(frozen=True, slots=True)
class RoundRecord:
    """One transcript row."""

    index: int
    j: int
    s: int
    a: int
    b: int
    payoff: float


@dataclass(frozen=True, eq=False)
class PayoffEstimate:
    """Monte Carlo aggregate of a run.

    ``std_error`` is the sample standard deviation of the per-round
    payoffs divided by sqrt(rounds).  The tallies are empirical
    conditional means of a*b and b per condition (zero where a condition
    was never drawn; see ``counts``).
    """

    mean: float
    std_error: float
    rounds: int
    seed: int
    counts: dict
    e_ab: dict
    e_b: dict


def referee_prepare(
    spec: SteeringGameSpec,
    j: int,
    s: int,
    preparation: dict | None = None,
    channel: QuantumChannel | None = None,
) -> DensityOperator:
    """The state Bob receives for condition (j, s).

    ``preparation`` overrides the spec's signal table (modelling an
    imperfect referee); ``channel`` models the transmission line.
    """
    if (j, s) not in dict.fromkeys(SIGNALS):
        raise ValueError(f"invalid signal condition ({j!r}, {s!r})")
    if preparation is not None:
        omega = preparation[(j, s)]
    else:
        omega = spec.signal_ensemble[(j, s)]
    if channel is not None:
        omega = apply_channel(channel, omega)
    return omega


def _delivered_signals(config: RunConfig) -> list:
    return [
        referee_prepare(config.spec, j, s, config.preparation, config.channel)
        for (j, s) in SIGNALS
    ]


def _sampling_tables(config: RunConfig, delivered: list):
    """Per-condition outcome CDFs over the fixed (a, b) ordering.

    Returns (cdf, n_variants): ``cdf[k * n_variants + v]`` is the
    cumulative distribution for condition index k and list-variant v.
    Strategies without an answer list have a single variant; list-based
    strategies get one variant per list value (+1 then -1).
    """
    round_list = getattr(config.strategy, "round_list", None)
    variants = (None,) if round_list is None else (1, -1)
    rows = []
    for k, (j, s) in enumerate(SIGNALS):
        for v in variants:
            dist = config.strategy.outcome_distribution(
                delivered[k], j, s, config.shared_state, list_value=v
            )
            probs = np.array([dist.get(out, 0.0) for out in OUTCOMES])
            cdf = np.cumsum(probs)
            cdf[-1] = max(cdf[-1], 1.0)
            rows.append(cdf)
    return np.array(rows), len(variants)


def run_game(config: RunConfig):
    """Simulate a run; returns (PayoffEstimate, transcript records).

    The transcript list is empty when ``keep_transcript`` is false (the
    estimate is unaffected); otherwise it holds one record per round in
    order.
    """
    spec = config.spec
    n = config.rounds
    delivered = _delivered_signals(config)
    cdf_table, n_var = _sampling_tables(config, delivered)

    probs = np.array([spec.input_distribution[sig] for sig in SIGNALS])
    js_cdf = np.cumsum(probs)
    js_cdf[-1] = max(js_cdf[-1], 1.0)

    u = _philox_uniforms(config.rng_seed, 2 * n)
    u_js = u[0::2]
    u_out = u[1::2]

    js_idx = np.searchsorted(js_cdf, u_js, side="right")

    if n_var == 1:
        table_idx = js_idx
    else:
        round_list = np.array(config.strategy.round_list, dtype=np.int64)
        list_vals = round_list[np.arange(n) % round_list.size]
        table_idx = js_idx * n_var + (list_vals == -1).astype(np.int64)

    cdf_rows = cdf_table[table_idx]
    out_idx = (u_out[:, None] >= cdf_rows).sum(axis=1)

    a_of = np.array([out[0] for out in OUTCOMES])
    b_of = np.array([out[1] for out in OUTCOMES])
    a = a_of[out_idx]
    b = b_of[out_idx]

    j_of = np.array([sig[0] for sig in SIGNALS])
    s_of = np.array([sig[1] for sig in SIGNALS])
    # Inverse-probability weight per condition: the per-round payoff
    # w * (s a b - coeff * b) is an unbiased estimator of the aggregate
    # payoff; under the uniform distribution w = 12.
    weights = np.where(probs > 0.0, 2.0 / np.where(probs > 0.0, probs, 1.0), 0.0)
    coeff = spec.penalty_coefficient
    payoffs = weights[js_idx] * (s_of[js_idx] * a * b - coeff * b)

    counts = np.bincount(js_idx, minlength=6)
    sum_ab = np.bincount(js_idx, weights=(a * b).astype(np.float64), minlength=6)
    sum_b = np.bincount(js_idx, weights=b.astype(np.float64), minlength=6)
    safe = np.where(counts > 0, counts, 1)
    estimate = PayoffEstimate(
        mean=float(payoffs.mean()),
        std_error=float(payoffs.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
        rounds=n,
        seed=config.rng_seed,
        counts={sig: int(counts[k]) for k, sig in enumerate(SIGNALS)},
        e_ab={sig: float(sum_ab[k] / safe[k]) for k, sig in enumerate(SIGNALS)},
        e_b={sig: float(sum_b[k] / safe[k]) for k, sig in enumerate(SIGNALS)},
    )

    records = []
    if config.keep_transcript:
        j_col = j_of[js_idx].tolist()
        s_col = s_of[js_idx].tolist()
        a_col = a.tolist()
        b_col = b.tolist()
        p_col = payoffs.tolist()
        records = [
            RoundRecord(i, j_col[i], s_col[i], a_col[i], b_col[i], p_col[i])
            for i in range(n)
        ]
    return estimate, records


def sample_outcome(
    strategy,
    shared_state: DensityOperator | None,
    j: int,
    s: int,
    delivered_signal: DensityOperator,
    rng: np.random.Generator,
    round_index: int = 0,
):
    """Sample one (a, b) pair from a strategy's exact conditional distribution.

    Consumes exactly one uniform draw from ``rng``.  ``round_index``
    selects the entry of a preagreed answer list when the strategy uses
    one; it is ignored otherwise.
    """
    round_list = getattr(strategy, "round_list", None)
    list_value = None
    if round_list is not None:
        list_value = round_list[round_index % len(round_list)]
    dist = strategy.outcome_distribution(
        delivered_signal, j, s, shared_state, list_value=list_value
    )
    u = float(rng.random())
    acc = 0.0
    for out in OUTCOMES:
        acc += dist.get(out, 0.0)
        if u < acc:
            return out
    return OUTCOMES[-1]


def modified_povm(channel: QuantumChannel, e_bc: Povm) -> Povm:
    """Pull a transmission channel on C into Bob's joint POVM.

    With phi* the dual map, E~_b = (1_B x phi*)(E_b) satisfies
    Tr[E_b (rho x phi(omega))] = Tr[E~_b (rho x omega)], so playing E~
    against a clean line reproduces playing E behind the channel.
    """
    if channel.input_dim != channel.output_dim:
        raise ValueError("signal channel must preserve dimension")
    d_c = channel.input_dim
    if e_bc.dim % d_c != 0:
        raise ValueError("POVM dimension incompatible with the channel")
    d_b = e_bc.dim // d_c
    elements = []
    for el in e_bc:
        acc = np.zeros_like(el)
        for k in channel.kraus_operators:
            lift = tensor(np.eye(d_b), k)
            acc = acc + lift.conj().T @ el @ lift
        elements.append((acc + acc.conj().T) / 2.0)
    return Povm(tuple(elements))


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of a channel/dual-POVM equivalence check."""

    passed: bool
    max_deviation: float
    povm_valid: bool
    message: str = ""

    def __bool__(self):
        return self.passed


def noisy_equivalence_check(
    channel: QuantumChannel,
    e_bc: Povm,
    samples: int = 20,
    rng_seed: int = 0,
    tol: float = 1e-12,
) -> EquivalenceReport:
    """Verify the dual-map identity behind :func:`modified_povm` numerically.

    Checks that the modified POVM is valid and that both evaluation
    orders agree on ``samples`` random states on B against all six
    calibrated signals.  Never raises on failure; inspect the report.
    """
    try:
        modified = modified_povm(channel, e_bc)
    except ValueError as exc:
        return EquivalenceReport(False, float("nan"), False, f"invalid modified POVM: {exc}")
    d_b = e_bc.dim // channel.input_dim
    rng = np.random.default_rng(rng_seed)
    max_dev = 0.0
    for _ in range(samples):
        rho = random_density(rng, d_b)
        for (j, s) in SIGNALS:
            omega = signal_state(j, s)
            noisy = channel.apply_to_matrix(omega.matrix)
            for b in range(e_bc.n_outcomes):
                lhs = np.trace(e_bc[b] @ tensor(rho.matrix, noisy)).real
                rhs = np.trace(modified[b] @ tensor(rho.matrix, omega.matrix)).real
                max_dev = max(max_dev, float(abs(lhs - rhs)))
    passed = max_dev <= tol
    msg = "" if passed else f"evaluation orders deviate by {max_dev:.3e} (tol {tol:.1e})"
    return EquivalenceReport(passed, max_dev, True, msg)


def config_to_json(config: RunConfig) -> dict:
    """Self-describing echo of a run config (matrices included)."""

    def _sig_key(sig):
        return f"{sig[0]},{sig[1]}"

    spec = config.spec
    out = {
        "rounds": config.rounds,
        "rng_seed": config.rng_seed,
        "communication": config.communication,
        "keep_transcript": config.keep_transcript,
        "game": {
            "r": spec.r,
            "payoff_bound": spec.payoff_bound,
            "input_distribution": {
                _sig_key(sig): spec.input_distribution[sig] for sig in SIGNALS
            },
            "signal_ensemble": {
                _sig_key(sig): serialize.density_to_json(spec.signal_ensemble[sig])
                for sig in SIGNALS
            },
        },
        "strategy": serialize.strategy_to_json(config.strategy),
        "shared_state": (
            None
            if config.shared_state is None
            else serialize.density_to_json(config.shared_state)
        ),
        "channel": (
            None if config.channel is None else serialize.channel_to_json(config.channel)
        ),
        "preparation": (
            None
            if config.preparation is None
            else {
                _sig_key(sig): serialize.density_to_json(config.preparation[sig])
                for sig in SIGNALS
            }
        ),
    }
    return out


def write_transcript_csv(path, records) -> None:
    """Write transcript rows with the fixed header round,j,s,a,b,payoff."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRANSCRIPT_FIELDS)
        for rec in records:
            writer.writerow([rec.index, rec.j, rec.s, rec.a, rec.b, repr(rec.payoff)])


def write_summary_json(path, estimate: PayoffEstimate, config: RunConfig) -> None:
    """Write the run summary with the full resolved config and seed."""

    def _sig_key(sig):
        return f"{sig[0]},{sig[1]}"

    payload = {
        "mean": estimate.mean,
        "std_error": estimate.std_error,
        "rounds": estimate.rounds,
        "seed": estimate.seed,
        "counts": {_sig_key(sig): estimate.counts[sig] for sig in SIGNALS},
        "e_ab": {_sig_key(sig): estimate.e_ab[sig] for sig in SIGNALS},
        "e_b": {_sig_key(sig): estimate.e_b[sig] for sig in SIGNALS},
        "config": config_to_json(config),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
