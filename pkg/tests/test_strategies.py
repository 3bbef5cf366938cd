"""Strategy families: honest pair, no-state cheats, hidden-state models,
one-way-communication cheats."""

import numpy as np
import pytest

from qrgames.games import (
    SIGNALS,
    SQRT3,
    SteeringGameSpec,
    qrs_payoff_exact,
    single_axis_ensemble,
)
from qrgames.qcore import (
    BlochVector,
    DensityOperator,
    Povm,
    mats_close,
    pauli,
    random_density,
    random_povm,
    signal_state,
    singlet_projector,
    werner_state,
)
from qrgames.strategies import (
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
    lhs_payoff_routes,
    lhs_reduction,
    partial_bell_povm,
    programmed_povm,
)

M_STAR = np.full(3, 1.0 / SQRT3)


def _random_lhs(rng, dim, n_lambda):
    weights = rng.dirichlet(np.ones(n_lambda))
    states = tuple(random_density(rng, dim) for _ in range(n_lambda))
    responses = rng.uniform(-1.0, 1.0, size=(n_lambda, 3))
    return LhsStrategy(weights, states, responses, random_povm(rng, 2 * dim, 2))


def test_partial_bell_povm_structure():
    povm = partial_bell_povm()
    assert povm.n_outcomes == 2
    # b=1 is the singlet projector, b=0 the complement
    assert mats_close(povm[1], singlet_projector(), 1e-15)
    assert mats_close(povm[0], np.eye(4) - singlet_projector(), 1e-15)


def test_programmed_povm_on_calibrated_signals():
    """Tr_C[E_b (1 x omega_{j,s})] = (1/4)(1 - s sigma_j) for b=1, all six signals."""
    bell = partial_bell_povm()
    for (j, s) in SIGNALS:
        eff = programmed_povm(bell, signal_state(j, s))
        want = (np.eye(2) - s * pauli(j)) / 4.0
        assert mats_close(eff[1], want, 1e-12)
        assert mats_close(eff[0] + eff[1], np.eye(2), 1e-12)


def test_programmed_povm_depolarized_signal():
    """A fully mixed signal programs the constant measurement 1/4."""
    bell = partial_bell_povm()
    eff = programmed_povm(bell, DensityOperator(np.eye(2) / 2))
    assert mats_close(eff[1], np.eye(2) / 4.0, 1e-12)


def test_programmed_povm_dimension_check():
    bell = partial_bell_povm()
    with pytest.raises(ValueError):
        programmed_povm(bell, DensityOperator(np.eye(3) / 3))


def test_honest_strategy_components():
    h = honest_strategy()
    for j in (1, 2, 3):
        povm = h.alice_povms[j]
        # ordered (+1, -1): first element is the +sigma_j eigenprojector
        assert mats_close(povm[0], (np.eye(2) + pauli(j)) / 2.0, 1e-15)
        assert mats_close(povm[1], (np.eye(2) - pauli(j)) / 2.0, 1e-15)
    assert mats_close(h.bob_joint_povm[1], singlet_projector(), 1e-15)
    assert h.needs_shared_state
    assert h.required_communication is None


def test_honest_strategy_validation():
    good = honest_strategy()
    with pytest.raises(ValueError):
        HonestStrategy({1: good.alice_povms[1]}, good.bob_joint_povm)
    with pytest.raises(ValueError):
        HonestStrategy(good.alice_povms, Povm((np.eye(4),)))
    # shared state of the wrong dimension is rejected at evaluation time
    with pytest.raises(ValueError):
        good.outcome_distribution(
            signal_state(1, 1), 1, 1, DensityOperator(np.eye(2) / 2)
        )


def test_honest_distribution_is_normalized():
    h = honest_strategy()
    state = werner_state(0.7)
    for (j, s) in SIGNALS:
        dist = h.outcome_distribution(signal_state(j, s), j, s, state)
        assert abs(sum(dist.values()) - 1.0) < 1e-12
        assert all(p >= 0.0 for p in dist.values())


def test_no_state_cheat_closed_form(rng):
    """Exact cheat payoff equals 4 mu (sum_j m_j - r sqrt(3)) on the ideal game."""
    for r in (1.0, 1.081, 1.3):
        spec = SteeringGameSpec.ideal(r=r)
        for _ in range(10):
            m = rng.uniform(-1, 1, 3)
            m = m / max(1.0, np.linalg.norm(m) + 1e-9)
            mu = rng.uniform(0.05, 1.0 / (1.0 + np.linalg.norm(m)))
            cheat = NoStateCheat(BlochVector(m, mu), "constant")
            want = 4.0 * mu * (m.sum() - r * SQRT3)
            assert abs(cheat_payoff_no_state(cheat, spec) - want) < 1e-10


def test_no_state_cheat_tops_out_at_zero(ideal_spec):
    best = NoStateCheat(best_estimator(), "constant")
    assert abs(cheat_payoff_no_state(best, ideal_spec)) < 1e-12
    # an uninformative estimator just pays the penalty term
    blind = NoStateCheat(BlochVector(np.zeros(3), 0.35), "constant")
    assert cheat_payoff_no_state(blind, ideal_spec) == pytest.approx(
        -4 * 0.35 * SQRT3, abs=1e-12
    )


def test_no_state_cheat_list_rule(ideal_spec):
    """A balanced answer list changes nothing at mu=1/2 and hurts otherwise."""
    est = best_estimator()
    const = cheat_payoff_no_state(NoStateCheat(est, "constant"), ideal_spec)
    listed = cheat_payoff_no_state(NoStateCheat(est, (1, -1)), ideal_spec)
    assert abs(const - listed) < 1e-12
    small = BlochVector(M_STAR * 0.9, 0.3)
    p_const = cheat_payoff_no_state(NoStateCheat(small, "constant"), ideal_spec)
    p_list = cheat_payoff_no_state(NoStateCheat(small, (1, -1)), ideal_spec)
    assert p_list < p_const  # the -1 rounds turn the mismatch term against them


def test_no_state_cheat_list_plumbing():
    cheat = NoStateCheat(best_estimator(), (1, -1, -1))
    assert cheat.round_list == (1, -1, -1)
    assert cheat.plus_fraction == pytest.approx(1 / 3)
    omega = signal_state(1, 1)
    d_plus = cheat.outcome_distribution(omega, 1, 1, list_value=1)
    d_minus = cheat.outcome_distribution(omega, 1, 1, list_value=-1)
    assert set(d_plus) == {(1, 0), (1, 1)}
    assert set(d_minus) == {(-1, 0), (-1, 1)}
    with pytest.raises(ValueError):
        NoStateCheat(best_estimator(), (1, 0))
    with pytest.raises(ValueError):
        NoStateCheat(best_estimator(), ())


def test_discrimination_ratio_values(ideal_spec):
    """Frozen: ratio 2 for a single-axis estimator, (sqrt(3)+1)/(sqrt(3)-1) at m*."""
    single = discrimination_stats(BlochVector(np.array([1.0, 0, 0]), 0.5), ideal_spec)
    assert single.ratio == pytest.approx(2.0, abs=1e-12)
    at_star = discrimination_stats(best_estimator(), ideal_spec)
    bound = (SQRT3 + 1) / (SQRT3 - 1)
    assert at_star.ratio == pytest.approx(bound, abs=1e-12)
    assert at_star.true_positive == pytest.approx(0.5 * (1 + 1 / SQRT3), abs=1e-12)


def test_discrimination_perfect_on_single_axis_referee():
    """Against the all-sigma_1 referee the x estimator separates signs exactly."""
    spec = SteeringGameSpec(signal_ensemble=single_axis_ensemble())
    stats = discrimination_stats(BlochVector(np.array([1.0, 0, 0]), 0.5), spec)
    assert stats.false_positive == pytest.approx(0.0, abs=1e-12)
    assert stats.ratio == np.inf


def test_lhs_strategy_validation(rng):
    good = _random_lhs(rng, 2, 3)
    with pytest.raises(ValueError):
        LhsStrategy(
            np.array([0.5, 0.6]),  # doesn't sum to 1
            good.hidden_states[:2],
            good.alice_responses[:2],
            good.bob_joint_povm,
        )
    with pytest.raises(ValueError):
        LhsStrategy(
            good.weights,
            good.hidden_states,
            np.full((3, 3), 1.5),  # biases out of range
            good.bob_joint_povm,
        )
    with pytest.raises(ValueError):
        LhsStrategy(
            good.weights,
            good.hidden_states,
            good.alice_responses,
            random_povm(rng, 6, 2),  # wrong joint dimension
        )


def test_lhs_routes_agree_and_never_win(rng, ideal_spec):
    for t in range(25):
        strategy = _random_lhs(rng, (t % 3) + 2, (t % 4) + 1)
        direct, reduced = lhs_payoff_routes(strategy, ideal_spec)
        assert abs(direct - reduced) < 1e-10
        assert direct <= 1e-9
        assert lhs_payoff_exact(strategy, ideal_spec) == direct


def test_lhs_zero_responses_pay_only_the_penalty(rng, ideal_spec):
    """With all response biases zero the payoff is exactly -2 N sqrt(3)."""
    base = _random_lhs(rng, 3, 4)
    strategy = LhsStrategy(
        base.weights, base.hidden_states, np.zeros((4, 3)), base.bob_joint_povm
    )
    red = lhs_reduction(strategy)
    payoff = lhs_payoff_exact(strategy, ideal_spec)
    assert payoff == pytest.approx(-2.0 * red.normalization * SQRT3, abs=1e-12)


def test_lhs_saturates_bound_with_trivial_hidden_space(ideal_spec):
    """d_B = 1, E_1 projecting along (1,1,1)/sqrt(3), matched responses: payoff 0."""
    proj = (np.eye(2) + (pauli(1) + pauli(2) + pauli(3)) / SQRT3) / 2.0
    strategy = LhsStrategy(
        np.array([1.0]),
        (DensityOperator(np.eye(1)),),
        np.ones((1, 3)),
        Povm((np.eye(2) - proj, proj)),
    )
    direct, reduced = lhs_payoff_routes(strategy, ideal_spec)
    assert abs(direct) < 1e-12
    assert abs(reduced) < 1e-12


def test_lhs_reduction_drops_zero_trace_terms(ideal_spec):
    """A hidden state that never triggers b=1 is removed from the reduction."""
    proj_up = signal_state(3, 1).matrix  # |0><0| on C
    e1 = np.kron(np.diag([1.0, 0.0]), proj_up)  # fires only for hidden |0>
    povm = Povm((np.eye(4) - e1, e1))
    states = (
        DensityOperator(np.diag([1.0, 0.0])),
        DensityOperator(np.diag([0.0, 1.0])),  # orthogonal: Tr[X] = 0
    )
    strategy = LhsStrategy(
        np.array([0.5, 0.5]), states, np.zeros((2, 3)), povm
    )
    red = lhs_reduction(strategy)
    assert red.kept_indices == (0,)
    assert red.normalization == pytest.approx(0.5)
    direct, reduced = lhs_payoff_routes(strategy, ideal_spec)
    assert abs(direct - reduced) < 1e-12


def test_lhs_requires_calibrated_ensemble(rng):
    spec = SteeringGameSpec(signal_ensemble=single_axis_ensemble())
    with pytest.raises(ValueError):
        lhs_payoff_routes(_random_lhs(rng, 2, 2), spec)


def test_comm_cheat_alice_to_bob_breaks_the_game():
    """Perfect sign knowledge scores 2(3 - r sqrt(3)) = 6 - 2 r sqrt(3)."""
    for r in (1.0, 1.081, 1.5):
        spec = SteeringGameSpec.ideal(r=r)
        payoff = comm_cheat_payoff(CommCheat("alice_to_bob"), spec)
        assert payoff == pytest.approx(2 * (3 - r * SQRT3), abs=1e-12)
    # positive below r = sqrt(3), negative above
    assert comm_cheat_payoff(
        CommCheat("alice_to_bob"), SteeringGameSpec.ideal(r=1.7)
    ) > 0
    assert comm_cheat_payoff(
        CommCheat("alice_to_bob"), SteeringGameSpec.ideal(r=1.75)
    ) < 0


def test_comm_cheat_bob_to_alice_capped_at_zero(ideal_spec):
    """No reply rule beats the trivial b = 0 strategy, which scores exactly 0."""
    silent = CommCheat("bob_to_alice", best_estimator(), bob_outputs_one_when=())
    assert comm_cheat_payoff(silent, ideal_spec) == 0.0
    follow = CommCheat("bob_to_alice", best_estimator())
    assert comm_cheat_payoff(follow, ideal_spec) <= 1e-12
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = rng.uniform(-1, 1, 3)
        m = m / max(1.0, np.linalg.norm(m) + 1e-12)
        mu = rng.uniform(0.05, 1.0 / (1.0 + np.linalg.norm(m)))
        est = BlochVector(m, mu)
        for ones in ((), (1,), (-1,), (1, -1)):
            for rule in (
                "follow_estimate",
                "negate_estimate",
                "constant_plus",
                "constant_minus",
            ):
                cheat = CommCheat("bob_to_alice", est, ones, rule)
                assert comm_cheat_payoff(cheat, ideal_spec) <= 1e-9


def test_comm_cheat_validation():
    with pytest.raises(ValueError):
        CommCheat("sideways")
    with pytest.raises(ValueError):
        CommCheat("bob_to_alice")  # needs an estimator
    with pytest.raises(ValueError):
        CommCheat("bob_to_alice", best_estimator(), alice_rule="psychic")
    with pytest.raises(ValueError):
        CommCheat("bob_to_alice", best_estimator(), bob_outputs_one_when=(2,))
    assert CommCheat("alice_to_bob").required_communication == "alice_to_bob"


def test_comm_cheat_expectations_consistent(ideal_spec):
    cheat = CommCheat("bob_to_alice", best_estimator(), (1, -1), "negate_estimate")
    for (j, s) in SIGNALS:
        dist = cheat.outcome_distribution(signal_state(j, s), j, s)
        assert abs(sum(dist.values()) - 1.0) < 1e-12
        e_ab, e_b = cheat.conditional_expectations(signal_state(j, s), j, s)
        assert abs(e_ab - sum(a * b * p for (a, b), p in dist.items())) < 1e-12
        assert abs(e_b - sum(b * p for (a, b), p in dist.items())) < 1e-12


def test_best_estimator_is_the_diagonal_direction():
    b = best_estimator()
    assert np.allclose(b.m, M_STAR, atol=1e-15)
    assert b.mu == pytest.approx(0.5)
    b.povm_pair()  # valid POVM


def test_cheat_payoff_helpers_type_check(ideal_spec):
    with pytest.raises(ValueError):
        cheat_payoff_no_state(honest_strategy(), ideal_spec)
    with pytest.raises(ValueError):
        comm_cheat_payoff(honest_strategy(), ideal_spec)
