"""Incremental train-prune-reweight loop with exact training-cost accounting.

Each increment: every active voter takes one epoch over the increment and
refreshes its accuracy estimate, then the mechanism prunes some voters by
delegation. Pruning stops once ``n_final`` representatives remain or data
runs out; optionally the survivors are then fully fitted on the whole
training set. The ledger counts examples-seen exactly: one epoch over k
examples adds k to that voter's bill.

The Direct mechanism never delegates and trains the full population through
every increment; it is both a baseline and the reference denominator for
relative training cost.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .classifier import LinearModel, SgdHyperparams
from .data import Dataset, partition_increments, shuffle_split
from .ensemble import EnsembleState
from .mechanisms import (DelegationEvent, Mechanism, MechanismSpec,
                         apply_delegation, delegation_distribution,
                         sample_target, select_delegators)


@dataclass(frozen=True)
class TrainConfig:
    """One experiment's knobs. ``r`` is the retention rate (fraction of
    representatives that keep voting each increment)."""

    n: int
    n_final: int = 10
    r: float = 0.8
    u: int = 25
    mechanism: Mechanism = Mechanism.PROP_WEIGHTED
    final_full_fit: bool = True
    seed: int = 0
    dataset: str = ""
    test_fraction: float = 0.2
    hyper: SgdHyperparams = field(default_factory=SgdHyperparams)

    def __post_init__(self):
        if not 1 <= self.n_final <= self.n:
            raise ValueError("need 1 <= n_final <= n")
        if not 0.0 < self.r <= 1.0:
            raise ValueError("retention rate r must lie in (0, 1]")
        if self.u < 1:
            raise ValueError("increment size u must be >= 1")

    def spec(self) -> MechanismSpec:
        return MechanismSpec(kind=self.mechanism, r=self.r, rng_seed=self.seed)


class CostLedger:
    """Examples-seen per voter; total cost is their sum."""

    def __init__(self, n: int):
        self.per_voter_epochs = np.zeros(n, dtype=np.int64)
        self.per_voter_examples = np.zeros(n, dtype=np.int64)
        self.direct_reference_cost: int | None = None

    def add(self, voter: int, epochs: int, examples_per_epoch: int) -> None:
        self.per_voter_epochs[voter] += epochs
        self.per_voter_examples[voter] += epochs * examples_per_epoch

    @property
    def total_cost(self) -> int:
        return int(self.per_voter_examples.sum())

    @property
    def relative_cost(self) -> float | None:
        if self.direct_reference_cost is None:
            return None
        return self.total_cost / self.direct_reference_cost


@dataclass(frozen=True)
class TraceRow:
    t: int
    active: int
    test_accuracy: float
    min_majority_size: int


@dataclass
class TrainReport:
    """Everything one run produced: per-increment trace, delegation events,
    final metrics and the cost ledger."""

    config: TrainConfig
    trace: list[TraceRow]
    events: list[DelegationEvent]
    final_accuracy: float
    final_f1: float
    ledger: CostLedger
    fully_delegated: bool
    m_train: int
    m_test: int

    @property
    def increments_run(self) -> int:
        return len(self.trace)

    @property
    def final_active(self) -> int:
        return self.trace[-1].active if self.trace else self.config.n

    def summary_dict(self) -> dict:
        cfg = self.config
        return {
            "config": {
                "n": cfg.n, "n_final": cfg.n_final, "r": cfg.r, "u": cfg.u,
                "mechanism": cfg.mechanism.value,
                "final_full_fit": cfg.final_full_fit, "seed": cfg.seed,
                "dataset": cfg.dataset, "test_fraction": cfg.test_fraction,
            },
            "m_train": self.m_train,
            "m_test": self.m_test,
            "increments_run": self.increments_run,
            "final_active": self.final_active,
            "fully_delegated": self.fully_delegated,
            "final_accuracy": self.final_accuracy,
            "final_f1": self.final_f1,
            "total_cost": self.ledger.total_cost,
            "direct_reference_cost": self.ledger.direct_reference_cost,
            "relative_cost": self.ledger.relative_cost,
            "total_epochs": int(self.ledger.per_voter_epochs.sum()),
            "delegation_events": len(self.events),
        }

    def write_summary(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_trace_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,active,test_accuracy,min_majority_size\n")
            for row in self.trace:
                fh.write(f"{row.t},{row.active},{row.test_accuracy:.6f},"
                         f"{row.min_majority_size}\n")

    def write_events_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,delegator,delegatee,representative,transferred_weight\n")
            for ev in self.events:
                fh.write(f"{ev.t},{ev.delegator},{ev.delegatee},"
                         f"{ev.representative},{ev.transferred_weight}\n")


def _child_seq(seq: np.random.SeedSequence, key: int) -> np.random.SeedSequence:
    # Like seq.spawn() but stateless: the same (seq, key) always yields the
    # same child, so repeated runs off one sequence stay identical.
    return np.random.SeedSequence(entropy=seq.entropy,
                                  spawn_key=(*seq.spawn_key, key))


def _model_seeds(seed_seq: np.random.SeedSequence, n: int) -> list[int]:
    return [int(_child_seq(seed_seq, i).generate_state(1)[0]) for i in range(n)]


def run_training(train: Dataset, test: Dataset, config: TrainConfig,
                 seed_seq: np.random.SeedSequence | None = None,
                 on_increment=None) -> TrainReport:
    """Execute the full training-and-pruning loop on a fixed split.

    ``on_increment(t, state)``, when given, is called at the end of every
    increment (after that increment's delegations); used by invariant checks.
    """
    if seed_seq is None:
        seed_seq = np.random.SeedSequence(config.seed)
    model_seq, mech_seq = _child_seq(seed_seq, 0), _child_seq(seed_seq, 1)
    spec = config.spec()
    part = partition_increments(train.m, config.u)
    models = [LinearModel(train.dim, seed=s, hyper=config.hyper)
              for s in _model_seeds(model_seq, config.n)]
    state = EnsembleState(models)
    ledger = CostLedger(config.n)
    mech_rng = np.random.default_rng(mech_seq)
    events: list[DelegationEvent] = []
    trace: list[TraceRow] = []

    for t, (lo, hi) in enumerate(part.slices, start=1):
        state.increment_index = t
        X_inc, y_inc = train.X[lo:hi], train.y[lo:hi]
        for v in state.voters:
            if v.is_representative:
                v.model.partial_fit(X_inc, y_inc)
                ledger.add(v.id, 1, hi - lo)
        state.record_increment_accuracy(X_inc, y_inc)

        stop = False
        if spec.kind is not Mechanism.DIRECT:
            delegators = select_delegators(state, spec, config.n_final, mech_rng)
            if delegators:
                # All distributions reflect the pre-delegation state of this
                # increment; transfers then apply one at a time.
                dists = {i: delegation_distribution(state, i, spec)
                         for i in delegators}
                delegators.sort(key=lambda i: (state.voters[i].q, i))
                for i in delegators:
                    if state.active_count() <= config.n_final:
                        break
                    target = sample_target(state, i, dists[i], mech_rng)
                    if target is None:
                        continue  # no cycle-free candidate; stays active
                    events.append(apply_delegation(state, i, target, t))
            else:
                stop = True  # population already at n_final

        acc, _ = state.evaluate_metrics(test.X, test.y)
        trace.append(TraceRow(t=t, active=state.active_count(),
                              test_accuracy=acc,
                              min_majority_size=state.min_majority_size()))
        if on_increment is not None:
            on_increment(t, state)
        if stop:
            break

    if config.final_full_fit:
        for v in state.voters:
            if v.is_representative:
                epochs = v.model.fit(train.X, train.y)
                ledger.add(v.id, epochs, train.m)

    final_accuracy, final_f1 = state.evaluate_metrics(test.X, test.y)
    return TrainReport(config=config, trace=trace, events=events,
                       final_accuracy=final_accuracy, final_f1=final_f1,
                       ledger=ledger,
                       fully_delegated=state.active_count() <= config.n_final,
                       m_train=train.m, m_test=test.m)


def measure_relative_cost(report: TrainReport, direct_report: TrainReport) -> float:
    """Training cost of ``report`` as a fraction of the Direct reference."""
    if direct_report.ledger.total_cost == 0:
        raise ValueError("reference run has zero cost")
    return report.ledger.total_cost / direct_report.ledger.total_cost


@dataclass
class TrialResult:
    report: TrainReport
    direct_report: TrainReport | None = None

    @property
    def relative_cost(self) -> float | None:
        if self.direct_report is None:
            return None
        return measure_relative_cost(self.report, self.direct_report)


@dataclass
class TrialsSummary:
    """Aggregates over reseeded trials (fresh classifier seeds, reshuffled
    split each trial)."""

    config: TrainConfig
    trials: list[TrialResult]

    def _stats(self, values: list[float]) -> tuple[float, float]:
        arr = np.array(values, dtype=np.float64)
        return float(arr.mean()), float(arr.std())

    @property
    def accuracy(self) -> tuple[float, float]:
        return self._stats([t.report.final_accuracy for t in self.trials])

    @property
    def f1(self) -> tuple[float, float]:
        return self._stats([t.report.final_f1 for t in self.trials])

    @property
    def relative_cost(self) -> tuple[float, float] | None:
        costs = [t.relative_cost for t in self.trials]
        if any(c is None for c in costs):
            return None
        return self._stats(costs)

    def mean_trace(self) -> list[dict]:
        """Per-increment averages aligned by t (with per-t trial counts)."""
        by_t: dict[int, list[TraceRow]] = {}
        for trial in self.trials:
            for row in trial.report.trace:
                by_t.setdefault(row.t, []).append(row)
        out = []
        for t in sorted(by_t):
            rows = by_t[t]
            out.append({
                "t": t,
                "trials": len(rows),
                "active_mean": float(np.mean([r.active for r in rows])),
                "test_accuracy_mean": float(np.mean([r.test_accuracy for r in rows])),
                "min_majority_size_mean": float(np.mean([r.min_majority_size
                                                         for r in rows])),
            })
        return out


def _run_one_trial(dataset: Dataset, config: TrainConfig,
                   trial_seq: np.random.SeedSequence,
                   with_reference: bool) -> TrialResult:
    split_seq, run_seq = _child_seq(trial_seq, 0), _child_seq(trial_seq, 1)
    split_seed = int(split_seq.generate_state(1)[0])
    train, test = shuffle_split(dataset, config.test_fraction, split_seed)
    report = run_training(train, test, config, seed_seq=run_seq)
    direct_report = None
    if with_reference:
        # Identical split and identical classifier seeds: only the mechanism
        # differs, so costs and accuracies are paired per trial.
        direct_cfg = replace(config, mechanism=Mechanism.DIRECT)
        direct_report = run_training(train, test, direct_cfg, seed_seq=run_seq)
        report.ledger.direct_reference_cost = direct_report.ledger.total_cost
    return TrialResult(report=report, direct_report=direct_report)


def run_trials(dataset: Dataset, config: TrainConfig, trials: int,
               jobs: int = 1, with_reference: bool | None = None) -> TrialsSummary:
    """Repeat the experiment ``trials`` times with per-trial reseeding.

    ``with_reference`` additionally runs the Direct baseline on each trial's
    split (same classifier seeds) to express cost relative to it; defaults to
    on for every mechanism except Direct itself. Results are independent of
    ``jobs``: every trial's seeds derive from (config.seed, trial index).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if with_reference is None:
        with_reference = config.mechanism is not Mechanism.DIRECT
    trial_seqs = np.random.SeedSequence(config.seed).spawn(trials)
    if jobs > 1 and trials > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one_trial, dataset, config, seq,
                                   with_reference)
                       for seq in trial_seqs]
            results = [f.result() for f in futures]
    else:
        results = [_run_one_trial(dataset, config, seq, with_reference)
                   for seq in trial_seqs]
    return TrialsSummary(config=config, trials=results)
