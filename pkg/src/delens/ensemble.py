"""Voter population state: weights, delegation graph, accuracy history,
weighted-majority inference and weight-distribution metrics.

Wherever "representative" appears it means a voter that votes directly
(self-delegates, weight > 0). Total weight is conserved at the initial
voter count n throughout; a delegated vote travels transitively to the
terminal self-delegating voter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifier import LinearModel


@dataclass
class VoterState:
    """One classifier-voter. ``q`` is the running mean of per-increment
    training accuracies recorded while the voter was active; it freezes
    when the voter delegates."""

    id: int
    model: LinearModel
    weight: int = 1
    delegate_to: int = -1  # self index = votes directly
    acc_history: list[float] = field(default_factory=list)
    q: float = 1.0

    def __post_init__(self):
        if self.delegate_to < 0:
            self.delegate_to = self.id

    @property
    def is_representative(self) -> bool:
        return self.delegate_to == self.id


class EnsembleState:
    """The full voter population plus global bookkeeping."""

    def __init__(self, models: list[LinearModel]):
        if not models:
            raise ValueError("ensemble needs at least one voter")
        self.voters = [VoterState(id=i, model=m) for i, m in enumerate(models)]
        self.total_weight = len(models)
        self.increment_index = 0

    @property
    def n(self) -> int:
        return len(self.voters)

    def representatives(self) -> list[int]:
        return [v.id for v in self.voters if v.is_representative]

    def active_count(self) -> int:
        return sum(1 for v in self.voters if v.is_representative)

    def representative_of(self, i: int) -> int:
        """Transitive resolution: follow delegations to a self-delegation.

        The delegation graph is kept acyclic by construction; a cycle here
        means internal state corruption, so it aborts loudly.
        """
        seen = 0
        j = i
        while self.voters[j].delegate_to != j:
            j = self.voters[j].delegate_to
            seen += 1
            if seen > self.n:
                raise RuntimeError(f"delegation cycle reached from voter {i}")
        return j

    def weights_array(self) -> np.ndarray:
        return np.array([v.weight for v in self.voters], dtype=np.int64)

    def q_array(self) -> np.ndarray:
        return np.array([v.q for v in self.voters], dtype=np.float64)

    # ------------------------------------------------------------------
    # inference

    def _rep_scores(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        reps = self.representatives()
        if not reps:
            raise ValueError("no active voters")
        W = np.stack([self.voters[i].model.w for i in reps])
        b = np.array([self.voters[i].model.b for i in reps])
        votes = (np.atleast_2d(X) @ W.T + b) > 0.0  # (rows, reps) class-1 votes
        weights = np.array([self.voters[i].weight for i in reps], dtype=np.int64)
        return votes, weights

    def weighted_vote(self, X: np.ndarray) -> np.ndarray:
        """Weighted-majority class per row; ties go to class 0."""
        votes, weights = self._rep_scores(X)
        class1 = votes @ weights
        return (2 * class1 > self.total_weight).astype(np.int64)

    def record_increment_accuracy(self, X_inc: np.ndarray, y_inc: np.ndarray) -> None:
        """Append a_{t,i} for every active voter and refresh its mean q.

        Inactive (delegated) voters are skipped entirely; their history and
        q stay frozen.
        """
        for v in self.voters:
            if v.is_representative:
                a = v.model.accuracy(X_inc, y_inc)
                v.acc_history.append(a)
                v.q = float(np.mean(v.acc_history))

    def min_majority_size(self) -> int:
        """Smallest count of representatives whose combined weight is a
        strict majority of the total. Low values flag weight centralization."""
        weights = sorted((v.weight for v in self.voters if v.weight > 0), reverse=True)
        if not weights:
            raise ValueError("no active voters")
        acc = 0
        for k, w in enumerate(weights, 1):
            acc += w
            if 2 * acc > self.total_weight:
                return k
        # Unreachable while weight conservation holds: the full sum is n.
        raise RuntimeError("weights do not reach a majority")

    def evaluate_metrics(self, X_test: np.ndarray, y_test: np.ndarray) -> tuple[float, float]:
        """(accuracy, F1 for class 1) of the weighted vote on a test set."""
        y_test = np.asarray(y_test)
        if len(y_test) == 0:
            raise ValueError("empty test set")
        pred = self.weighted_vote(X_test)
        accuracy = float(np.mean(pred == y_test))
        tp = int(np.sum((pred == 1) & (y_test == 1)))
        fp = int(np.sum((pred == 1) & (y_test == 0)))
        fn = int(np.sum((pred == 0) & (y_test == 1)))
        if 2 * tp + fp + fn == 0:
            return accuracy, 0.0
        f1 = 2 * tp / (2 * tp + fp + fn)
        return accuracy, f1
