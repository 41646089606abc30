import numpy as np
import pytest

from conftest import assert_graph_sound, make_state
from delens.classifier import LinearModel
from delens.ensemble import EnsembleState
from delens.mechanisms import apply_delegation


def force_prediction(state, i, cls):
    """Pin voter i's prediction on x=[1.0] to cls (w = +/-1, b = 0)."""
    state.voters[i].model.w[:] = [1.0 if cls == 1 else -1.0]
    state.voters[i].model.b = 0.0


def test_representative_of_fixed_point():
    state = make_state([0.5, 0.6])
    assert state.representative_of(0) == 0


def test_representative_of_two_hops():
    state = make_state([0.5, 0.6, 0.7, 0.8])
    apply_delegation(state, 2, 3, t=1)
    apply_delegation(state, 1, 2, t=1)  # 1 -> 2 -> 3
    assert state.representative_of(1) == 3
    assert state.voters[3].weight == 3


def test_representative_cycle_aborts():
    state = make_state([0.5, 0.6], delegate_overrides={0: 1, 1: 0})
    with pytest.raises(RuntimeError, match="cycle"):
        state.representative_of(0)


def test_weight_recount_after_delegations(rng):
    state = make_state(list(rng.random(12)))
    for _ in range(8):
        reps = state.representatives()
        if len(reps) <= 1:
            break
        i = int(rng.choice(reps))
        targets = [j for j in range(state.n)
                   if j != i and state.representative_of(j) != i]
        apply_delegation(state, i, int(rng.choice(targets)), t=1)
        assert_graph_sound(state)


def test_weighted_vote_majority():
    # weights [3,1,1] from two real delegations into voter 0
    state = make_state([0.9, 0.5, 0.6, 0.2, 0.3], dim=1)
    apply_delegation(state, 3, 0, t=1)
    apply_delegation(state, 4, 0, t=1)
    force_prediction(state, 0, 0)
    force_prediction(state, 1, 1)
    force_prediction(state, 2, 1)
    assert state.weighted_vote(np.array([[1.0]])) == 0  # 3 vs 2


def test_weighted_vote_dictatorship():
    state = make_state([0.5, 0.6], weight_overrides={0: 2, 1: 0},
                       delegate_overrides={1: 0})
    force_prediction(state, 0, 1)
    assert state.weighted_vote(np.array([[1.0]])) == 1


def test_weighted_vote_tie_goes_to_zero():
    state = make_state([0.5, 0.6], dim=1)
    force_prediction(state, 0, 0)
    force_prediction(state, 1, 1)
    assert state.weighted_vote(np.array([[1.0]])) == 0


def test_record_accuracy_running_mean():
    state = make_state([1.0], dim=1)
    v = state.voters[0]
    force_prediction(state, 0, 1)  # predicts 1 on x=1
    X = np.ones((5, 1))
    state.record_increment_accuracy(X, np.array([1, 1, 1, 0, 0]))  # a=0.6
    state.record_increment_accuracy(X, np.array([1, 1, 1, 1, 0]))  # a=0.8
    assert v.acc_history == [0.6, 0.8]
    assert v.q == pytest.approx(0.7)


def test_record_accuracy_skips_pruned_voter():
    state = make_state([0.5, 0.9], dim=1)
    apply_delegation(state, 0, 1, t=1)
    frozen_q = state.voters[0].q
    force_prediction(state, 1, 1)
    state.record_increment_accuracy(np.ones((2, 1)), np.array([1, 1]))
    assert state.voters[0].acc_history == []
    assert state.voters[0].q == frozen_q
    assert state.voters[1].acc_history == [1.0]


def test_q_matches_independent_recount(rng):
    state = make_state([1.0], dim=1)
    accs = []
    for _ in range(7):
        X = rng.standard_normal((10, 1))
        y = rng.integers(0, 2, 10)
        state.record_increment_accuracy(X, y)
        accs.append(state.voters[0].model.accuracy(X, y))
    assert state.voters[0].q == pytest.approx(np.mean(accs), abs=1e-12)


@pytest.mark.parametrize("weights,expected", [
    ({}, 3),                      # [1,1,1,1,1]: 3 voters > 2.5
    ({0: 4, 1: 1, 2: 0, 3: 0, 4: 0}, 1),   # near-dictatorship
])
def test_min_majority_size_uniform_and_dictator(weights, expected):
    state = make_state([0.5] * 5, weight_overrides=weights)
    if weights:
        for i in (2, 3, 4):
            state.voters[i].delegate_to = 0
    assert state.min_majority_size() == expected


def test_min_majority_size_sorted_prefix():
    # weights [2,2,1] of total 5: 2+2=4 > 2.5, one 2 alone is not
    state = make_state([0.5] * 5,
                       weight_overrides={0: 2, 1: 2, 2: 1, 3: 0, 4: 0},
                       delegate_overrides={3: 0, 4: 1})
    assert state.min_majority_size() == 2


def test_evaluate_metrics_perfect():
    state = make_state([1.0], dim=1)
    force_prediction(state, 0, 1)
    X = np.array([[1.0], [1.0]])
    assert state.evaluate_metrics(X, np.array([1, 1])) == (1.0, 1.0)


def test_evaluate_metrics_no_positive_predictions():
    state = make_state([1.0], dim=1)
    force_prediction(state, 0, 0)
    acc, f1 = state.evaluate_metrics(np.ones((4, 1)), np.array([1, 1, 0, 0]))
    assert acc == 0.5 and f1 == 0.0  # recall 0 forces F1 to 0


def test_evaluate_metrics_hand_confusion():
    # predictions [1,1,0,0] vs labels [1,0,1,0]: tp=1 fp=1 fn=1 -> P=R=F1=0.5
    state = make_state([1.0], dim=1)
    state.voters[0].model.w[:] = [1.0]
    X = np.array([[1.0], [1.0], [-1.0], [-1.0]])
    acc, f1 = state.evaluate_metrics(X, np.array([1, 0, 1, 0]))
    assert acc == 0.5 and f1 == 0.5


def test_metrics_reject_empty():
    state = make_state([1.0], dim=1)
    with pytest.raises(ValueError):
        state.evaluate_metrics(np.zeros((0, 1)), np.array([]))


def test_no_active_voters_rejected():
    state = make_state([0.5, 0.9])
    apply_delegation(state, 0, 1, t=1)
    state.voters[1].weight = 0          # corrupt on purpose
    state.voters[1].delegate_to = 0
    with pytest.raises((ValueError, RuntimeError)):
        state.weighted_vote(np.array([[1.0]]))


def test_ensemble_requires_voters():
    with pytest.raises(ValueError):
        EnsembleState([])


def test_state_construction_defaults():
    state = EnsembleState([LinearModel(1, seed=i) for i in range(4)])
    assert state.total_weight == 4
    assert state.representatives() == [0, 1, 2, 3]
    assert all(v.q == 1.0 for v in state.voters)  # prior before any data
    assert_graph_sound(state)
