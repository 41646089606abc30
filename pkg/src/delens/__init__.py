"""delens: delegative pruning of incrementally trained linear-classifier
ensembles, with exact training-cost accounting and the matching analytic
bounds."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .classifier import LinearModel, SgdHyperparams
from .data import (ColumnSchema, Dataset, IncrementPartition, load_csv,
                   load_dataset, load_schema, partition_increments,
                   preprocess, shuffle_split, synthetic_gaussians)
from .ensemble import EnsembleState, VoterState
from .mechanisms import (DelegationEvent, Mechanism, MechanismSpec,
                         apply_delegation, delegation_distribution,
                         select_delegators)
from .trainer import (CostLedger, TrainConfig, TrainReport, TrialsSummary,
                      measure_relative_cost, run_training, run_trials)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "LinearModel", "SgdHyperparams",
    "ColumnSchema", "Dataset", "IncrementPartition", "load_csv",
    "load_dataset", "load_schema", "partition_increments", "preprocess",
    "shuffle_split", "synthetic_gaussians",
    "EnsembleState", "VoterState",
    "DelegationEvent", "Mechanism", "MechanismSpec", "apply_delegation",
    "delegation_distribution", "select_delegators",
    "CostLedger", "TrainConfig", "TrainReport", "TrialsSummary",
    "measure_relative_cost", "run_training", "run_trials",
    "__version__",
]
