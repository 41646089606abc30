"""Binary linear classifier trained by per-example hinge-loss SGD.

Supports one-epoch incremental fitting (``partial_fit``) and multi-epoch
full fitting with early stopping (``fit``). ``epochs_seen`` counts every
pass over data handed to the model and feeds the training-cost ledger.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import hinge_epoch

INIT_SCALE = 0.01


@dataclass(frozen=True)
class SgdHyperparams:
    """Knobs for the SGD update and the full-fit stopping rule.

    The step size decays as eta = eta0 / (1 + eta0 * lam * t) with t counting
    every example visited over the model's lifetime. ``fit`` stops once the
    epoch-average hinge loss has failed to improve on its best value by more
    than ``tol`` for ``patience`` consecutive epochs.
    """

    lam: float = 1e-4
    eta0: float = 0.01
    max_epochs_full_fit: int = 1000
    tol: float = 1e-3
    patience: int = 5

    def __post_init__(self):
        if min(self.lam, self.eta0, self.tol) < 0 or self.patience < 1:
            raise ValueError("hyperparameters must be positive")
        if self.max_epochs_full_fit < 1:
            raise ValueError("max_epochs_full_fit must be >= 1")


class LinearModel:
    """Hinge-loss linear classifier with an explicit epoch counter.

    Deterministic given (dim, seed, hyperparameters, data order): the seed
    fixes both the weight initialization and every per-epoch shuffle.
    """

    def __init__(self, dim: int, seed: int, hyper: SgdHyperparams | None = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.seed = seed
        self.hyper = hyper or SgdHyperparams()
        self._rng = np.random.default_rng(seed)
        self.w = self._rng.uniform(-INIT_SCALE, INIT_SCALE, size=dim)
        self.b = 0.0
        self.epochs_seen = 0
        self._step = 0  # lifetime per-example update counter

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise ValueError(f"expected {self.dim} features, got {X.shape[1]}")
        return X

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return self._check(X) @ self.w + self.b

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Class per row: 1 when the score is strictly positive, else 0."""
        return (self.decision_function(X) > 0.0).astype(np.int64)

    def accuracy(self, X: np.ndarray, y: np.ndarray) -> float:
        if len(y) == 0:
            raise ValueError("cannot score an empty set")
        return float(np.mean(self.predict(X) == np.asarray(y)))

    def _one_epoch(self, X: np.ndarray, y_pm: np.ndarray) -> float:
        order = self._rng.permutation(X.shape[0]).astype(np.int64)
        self.b, self._step, loss_sum = hinge_epoch(
            self.w, self.b, self._step, X, y_pm, order,
            self.hyper.eta0, self.hyper.lam)
        self.epochs_seen += 1
        return loss_sum / X.shape[0]

    def partial_fit(self, X: np.ndarray, y: np.ndarray) -> float:
        """One epoch over the batch in a seeded shuffled order.

        Returns the epoch-average hinge loss (measured pre-update per
        example). Increments ``epochs_seen`` by exactly 1.
        """
        X = self._check(X)
        if X.shape[0] == 0:
            raise ValueError("empty batch")
        y_pm = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
        return self._one_epoch(X, y_pm)

    def fit(self, X: np.ndarray, y: np.ndarray) -> int:
        """Epochs until the loss plateaus or the cap is reached.

        Returns the number of epochs actually run (also added to
        ``epochs_seen``).
        """
        X = self._check(X)
        if X.shape[0] == 0:
            raise ValueError("empty training set")
        y_pm = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
        h = self.hyper
        best = np.inf
        bad = 0
        epochs = 0
        for _ in range(h.max_epochs_full_fit):
            loss = self._one_epoch(X, y_pm)
            epochs += 1
            if best - loss > h.tol:
                best = loss
                bad = 0
            else:
                bad += 1
                if bad >= h.patience:
                    break
        return epochs

    def dump(self, path: str) -> None:
        """Debug serialization of (w, b, epochs_seen); versioned npz."""
        np.savez(path, format_version=1, w=self.w, b=self.b,
                 epochs_seen=self.epochs_seen, seed=self.seed)

    @classmethod
    def load(cls, path: str) -> "LinearModel":
        blob = np.load(path)
        if int(blob["format_version"]) != 1:
            raise ValueError(f"unsupported model dump version {blob['format_version']}")
        model = cls(dim=blob["w"].shape[0], seed=int(blob["seed"]))
        model.w = blob["w"]
        model.b = float(blob["b"])
        model.epochs_seen = int(blob["epochs_seen"])
        return model
