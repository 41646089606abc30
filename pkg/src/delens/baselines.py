"""Comparison ensembles: the Direct full ensemble and discrete AdaBoost over
depth-1 decision stumps, with compatible examples-seen cost accounting.

Each boosting round scans every (feature, midpoint, polarity) candidate via
cumulative weighted sums in presorted order, so a round costs O(features *
m) after an O(features * m log m) one-time sort.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .mechanisms import Mechanism
from .trainer import TrainConfig, TrainReport, run_training

EPS_FLOOR = 1e-12  # keeps alpha finite on a perfect round


@dataclass(frozen=True)
class Stump:
    """Axis-aligned threshold rule: predicts ``polarity`` (in {-1, +1}) for
    x[feature] <= threshold and the opposite beyond it."""

    feature: int
    threshold: float
    polarity: int
    alpha: float

    def predict_pm(self, X: np.ndarray) -> np.ndarray:
        side = np.where(X[:, self.feature] <= self.threshold, 1, -1)
        return self.polarity * side


@dataclass
class BoostedEnsemble:
    stumps: list[Stump]
    M: int
    m_train: int

    @property
    def cost_examples(self) -> int:
        # One pass over the training data per stump fitted.
        return len(self.stumps) * self.m_train

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        score = np.zeros(X.shape[0])
        for stump in self.stumps:
            score += stump.alpha * stump.predict_pm(X)
        return score

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Weighted sign vote mapped to {0, 1}; a zero score goes to 0."""
        if not self.stumps:
            raise ValueError("empty ensemble")
        return (self.decision_function(X) > 0.0).astype(np.int64)

    def accuracy(self, X: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(self.predict(X) == np.asarray(y)))


def best_stump(X: np.ndarray, y_pm: np.ndarray, wt: np.ndarray,
               sort_idx: np.ndarray | None = None) -> tuple[Stump, float]:
    """Exhaustive weighted-error-minimizing stump over all features and all
    midpoints between consecutive distinct values. Returns (stump, error)."""
    m, d = X.shape
    if sort_idx is None:
        sort_idx = np.argsort(X, axis=0, kind="stable")
    best = None
    best_err = np.inf
    for f in range(d):
        order = sort_idx[:, f]
        xs = X[order, f]
        ws = wt[order]
        pos = y_pm[order] > 0
        cum_pos = np.cumsum(np.where(pos, ws, 0.0))
        cum_neg = np.cumsum(np.where(pos, 0.0, ws))
        total_pos = cum_pos[-1]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        # threshold after sorted position k: left block predicted positive
        err_pos = cum_neg[:-1] + (total_pos - cum_pos[:-1])
        err_neg = 1.0 - err_pos  # weights are normalized
        for polarity, errs in ((1, err_pos), (-1, err_neg)):
            errs = np.where(valid, errs, np.inf)
            k = int(np.argmin(errs))
            if errs[k] < best_err:
                best_err = float(errs[k])
                best = Stump(feature=f, threshold=float((xs[k] + xs[k + 1]) / 2.0),
                             polarity=polarity, alpha=0.0)
    if best is None:
        raise ValueError("no informative split exists (all features constant)")
    return best, best_err


def train_adaboost(X: np.ndarray, y: np.ndarray, M: int) -> BoostedEnsemble:
    """Discrete AdaBoost with stump base learners.

    Stops early when a round's weighted error reaches 0 (that stump is kept)
    or cannot beat 0.5 (that stump is discarded).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if len(np.unique(y)) < 2:
        raise ValueError("training data must contain both classes")
    m = X.shape[0]
    y_pm = 2.0 * y - 1.0
    wt = np.full(m, 1.0 / m)
    sort_idx = np.argsort(X, axis=0, kind="stable")
    stumps: list[Stump] = []
    for _ in range(M):
        stump, err = best_stump(X, y_pm, wt, sort_idx)
        if err >= 0.5:
            break
        alpha = 0.5 * np.log((1.0 - err) / max(err, EPS_FLOOR))
        stump = replace(stump, alpha=float(alpha))
        stumps.append(stump)
        if err == 0.0:
            break
        wt = wt * np.exp(-alpha * y_pm * stump.predict_pm(X))
        wt /= wt.sum()
    return BoostedEnsemble(stumps=stumps, M=M, m_train=m)


def run_direct_baseline(train: Dataset, test: Dataset, config: TrainConfig,
                        seed_seq=None) -> TrainReport:
    """The no-delegation reference: every voter keeps weight 1 and the whole
    population trains through all increments plus the final full fit."""
    direct_cfg = replace(config, mechanism=Mechanism.DIRECT, final_full_fit=True)
    return run_training(train, test, direct_cfg, seed_seq=seed_seq)


def adaboost_summary_dict(ensemble: BoostedEnsemble, accuracy: float, f1: float,
                          direct_reference_cost: int | None = None) -> dict:
    summary = {
        "method": "adaboost_stump",
        "M": ensemble.M,
        "stumps": len(ensemble.stumps),
        "m_train": ensemble.m_train,
        "final_accuracy": accuracy,
        "final_f1": f1,
        "total_cost": ensemble.cost_examples,
        "direct_reference_cost": direct_reference_cost,
        "relative_cost": (ensemble.cost_examples / direct_reference_cost
                          if direct_reference_cost else None),
    }
    return summary
