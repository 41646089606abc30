import numpy as np
import pytest

from conftest import assert_graph_sound
from delens.analysis import min_increments, simulate_incremental_cost
from delens.data import shuffle_split, synthetic_gaussians
from delens.mechanisms import Mechanism
from delens.trainer import (CostLedger, TrainConfig, measure_relative_cost,
                            run_training, run_trials)


def split_gaussians(m, seed=0, test_fraction=0.2, sep=2.0):
    ds = synthetic_gaussians(m, seed=seed, separation=sep)
    return shuffle_split(ds, test_fraction, seed=seed + 1)


def test_direct_ledger_arithmetic():
    # 100 train rows, u=25 -> 4 increments; 5 voters, no pruning, no full
    # fit: exactly 5*4*25 = 500 examples-seen
    train, test = split_gaussians(125)
    config = TrainConfig(n=5, n_final=2, u=25, mechanism=Mechanism.DIRECT,
                         final_full_fit=False, seed=3)
    report = run_training(train, test, config)
    assert report.ledger.total_cost == 500
    assert report.ledger.per_voter_epochs.tolist() == [4] * 5
    assert [row.active for row in report.trace] == [5, 5, 5, 5]
    assert report.fully_delegated is False
    assert len(report.events) == 0


def test_direct_every_voter_sees_every_increment():
    train, test = split_gaussians(200)
    config = TrainConfig(n=4, n_final=1, u=20, mechanism=Mechanism.DIRECT,
                         final_full_fit=False, seed=0)
    report = run_training(train, test, config)
    T = train.m // 20
    assert np.all(report.ledger.per_voter_epochs == T)
    assert report.increments_run == T


def test_pruning_increment_count_matches_removal_loop():
    # n=350 -> 10 at r=0.95: the formula floor gives ceil(z)=70, but whole-
    # voter removal needs 76 pruning increments (independent loop recount),
    # plus the final increment that finds nothing to prune.
    assert int(np.ceil(min_increments(350, 10, 0.95))) == 70
    train, test = split_gaussians(500)
    config = TrainConfig(n=350, n_final=10, r=0.95, u=5,
                         mechanism=Mechanism.PROP_WEIGHTED,
                         final_full_fit=False, seed=11)
    report = run_training(train, test, config)
    assert report.increments_run == 77
    assert report.fully_delegated is True
    assert report.final_active == 10
    # ledger dual-route: every increment bills u examples per active voter
    assert report.ledger.total_cost == 5 * simulate_incremental_cost(350, 10, 0.95)


def test_active_counts_never_increase_and_respect_floor():
    train, test = split_gaussians(400)
    config = TrainConfig(n=40, n_final=10, r=0.7, u=10,
                         mechanism=Mechanism.MAX, final_full_fit=False, seed=5)
    report = run_training(train, test, config)
    actives = [row.active for row in report.trace]
    assert all(a >= b for a, b in zip(actives, actives[1:]))
    assert all(a >= 10 for a in actives)
    assert actives[-1] == 10


def test_invariants_hold_at_every_increment():
    train, test = split_gaussians(300)
    config = TrainConfig(n=20, n_final=4, r=0.6, u=12,
                         mechanism=Mechanism.PROP_BETTER,
                         final_full_fit=False, seed=9)
    seen = []

    def check(t, state):
        seen.append(t)
        assert_graph_sound(state)

    report = run_training(train, test, config, on_increment=check)
    assert seen == [row.t for row in report.trace]


def test_weights_concentrate_through_events():
    train, test = split_gaussians(300)
    config = TrainConfig(n=16, n_final=2, r=0.5, u=15,
                         mechanism=Mechanism.RANDOM_BETTER,
                         final_full_fit=False, seed=2)
    report = run_training(train, test, config)
    assert sum(ev.transferred_weight for ev in report.events) >= 14
    assert all(ev.delegator != ev.delegatee for ev in report.events)
    assert report.trace[-1].min_majority_size <= 2


def test_data_exhaustion_flags_incomplete_delegation():
    # 270-row dataset, n=350, u=65: only 3 increments exist, far fewer than
    # pruning to 10 needs, so training ends on condition (1)
    train, test = split_gaussians(270)
    assert train.m == 216
    config = TrainConfig(n=350, n_final=10, r=0.95, u=65,
                         mechanism=Mechanism.PROP_WEIGHTED,
                         final_full_fit=False, seed=1)
    report = run_training(train, test, config)
    assert report.increments_run == 3
    assert report.fully_delegated is False
    assert report.final_active > 10


def test_final_full_fit_bills_whole_training_set():
    train, test = split_gaussians(150)
    config = TrainConfig(n=6, n_final=2, r=0.5, u=24,
                         mechanism=Mechanism.PROP_WEIGHTED,
                         final_full_fit=True, seed=4)
    report = run_training(train, test, config)
    survivors = report.ledger.per_voter_epochs > report.increments_run
    assert survivors.sum() == 2  # only the final representatives kept fitting
    assert report.ledger.total_cost > report.increments_run * 24
    assert report.final_active == 2


def test_trace_determinism():
    train, test = split_gaussians(200)
    config = TrainConfig(n=12, n_final=3, r=0.6, u=16,
                         mechanism=Mechanism.MAX, seed=21)
    a = run_training(train, test, config)
    b = run_training(train, test, config)
    assert a.summary_dict() == b.summary_dict()
    assert a.trace == b.trace
    assert a.events == b.events


def test_relative_cost_identity_and_division():
    train, test = split_gaussians(150)
    config = TrainConfig(n=5, n_final=2, u=30, mechanism=Mechanism.DIRECT,
                         final_full_fit=False, seed=0)
    report = run_training(train, test, config)
    assert measure_relative_cost(report, report) == 1.0

    a, b = run_training(train, test, config), run_training(train, test, config)
    a.ledger = CostLedger(1)
    a.ledger.add(0, 1, 800)
    b.ledger = CostLedger(1)
    b.ledger.add(0, 1, 10_000)
    assert measure_relative_cost(a, b) == 0.08
    b.ledger = CostLedger(1)
    with pytest.raises(ValueError):
        measure_relative_cost(a, b)


def test_paired_reference_costs_less_when_delegating():
    ds = synthetic_gaussians(400, seed=8)
    config = TrainConfig(n=30, n_final=5, r=0.5, u=20,
                         mechanism=Mechanism.PROP_WEIGHTED,
                         final_full_fit=True, seed=13)
    summary = run_trials(ds, config, trials=2)
    for trial in summary.trials:
        assert trial.direct_report is not None
        assert trial.relative_cost < 1.0
        # paired runs share classifier seeds: voter 0's init must agree
        assert trial.report.config.mechanism is Mechanism.PROP_WEIGHTED
        assert trial.direct_report.config.mechanism is Mechanism.DIRECT


def test_run_trials_aggregates_and_determinism():
    ds = synthetic_gaussians(260, seed=1)
    config = TrainConfig(n=10, n_final=3, r=0.5, u=20,
                         mechanism=Mechanism.RANDOM, final_full_fit=False,
                         seed=31)
    one = run_trials(ds, config, trials=1, with_reference=False)
    assert one.accuracy[0] == one.trials[0].report.final_accuracy
    assert one.accuracy[1] == 0.0

    multi_a = run_trials(ds, config, trials=4, with_reference=False)
    multi_b = run_trials(ds, config, trials=4, with_reference=False)
    accs = [t.report.final_accuracy for t in multi_a.trials]
    assert multi_a.accuracy[0] == pytest.approx(np.mean(accs), abs=1e-12)
    assert multi_a.accuracy == multi_b.accuracy
    assert multi_a.f1 == multi_b.f1
    # reseeding actually varies the trials
    assert len({t.report.ledger.total_cost for t in multi_a.trials}) >= 1
    assert len(set(accs)) > 1


def test_run_trials_parallel_matches_serial():
    ds = synthetic_gaussians(260, seed=2)
    config = TrainConfig(n=8, n_final=2, r=0.5, u=20,
                         mechanism=Mechanism.PROP_BETTER,
                         final_full_fit=False, seed=17)
    serial = run_trials(ds, config, trials=3, jobs=1, with_reference=False)
    parallel = run_trials(ds, config, trials=3, jobs=2, with_reference=False)
    assert [t.report.summary_dict() for t in serial.trials] == \
        [t.report.summary_dict() for t in parallel.trials]


def test_mean_trace_alignment():
    ds = synthetic_gaussians(260, seed=3)
    config = TrainConfig(n=10, n_final=3, r=0.5, u=20,
                         mechanism=Mechanism.MAX, final_full_fit=False, seed=23)
    summary = run_trials(ds, config, trials=3, with_reference=False)
    rows = summary.mean_trace()
    assert [r["t"] for r in rows] == sorted({row.t for t in summary.trials
                                             for row in t.report.trace})
    assert all(r["trials"] >= 1 for r in rows)
    recomputed = np.mean([t.report.trace[0].test_accuracy
                          for t in summary.trials])
    assert rows[0]["test_accuracy_mean"] == pytest.approx(recomputed)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(n=5, n_final=6)
    with pytest.raises(ValueError):
        TrainConfig(n=5, r=0.0)
    with pytest.raises(ValueError):
        TrainConfig(n=5, u=0)
    with pytest.raises(ValueError):
        run_trials(synthetic_gaussians(50, 0), TrainConfig(n=3), trials=0)
