"""Delegation mechanisms: who delegates, and to whom.

A mechanism pairs a delegator-selection rule with a delegation-probability
rule. Selection picks which representatives stop voting this increment;
the probability rule scores candidate delegatees. Candidates may themselves
be delegators from earlier increments: the transferred weight then travels
to their terminal representative, which is also whose weight the
weight-sensitive rules look at.

Any delegation that would close a cycle is excluded up front, and checked
again at application time because several delegations apply sequentially
within one increment.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ensemble import EnsembleState


class Mechanism(str, Enum):
    DIRECT = "direct"
    RANDOM = "random"
    MAX = "max"
    RANDOM_BETTER = "random_better"
    PROP_BETTER = "prop_better"
    PROP_WEIGHTED = "prop_weighted"


@dataclass(frozen=True)
class MechanismSpec:
    """Which mechanism drives pruning, at what retention rate.

    ``r`` is the fraction of representatives that do NOT delegate per
    increment (the delegation rate is 1 - r). ``rng_seed`` seeds the
    mechanism's random draws unless the trainer derives one itself.
    """

    kind: Mechanism
    r: float
    rng_seed: int | None = None

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError("retention rate r must lie in (0, 1]")


@dataclass(frozen=True)
class DelegationEvent:
    t: int
    delegator: int
    delegatee: int
    representative: int
    transferred_weight: int


def n_removed(active: int, r: float, n_final: int) -> int:
    """Representatives to prune this increment.

    floor(active * (1-r)), but at least 1 while still above ``n_final`` so
    low delegation rates keep making progress, and never past ``n_final``.
    """
    if active <= n_final:
        return 0
    # epsilon before flooring: 1-r is not exact for decimal rates like 0.8
    floor = int(active * (1.0 - r) + 1e-9)
    return min(max(1, floor), active - n_final)


def select_delegators(state: EnsembleState, spec: MechanismSpec, n_final: int,
                      rng: np.random.Generator) -> list[int]:
    """Pick the representatives that will delegate this increment.

    Direct never delegates. Random picks uniformly among representatives.
    Every other mechanism picks the lowest-q representatives, with q ties
    broken by a seeded uniform draw. Returns [] when the population is
    already at ``n_final`` (the trainer's stop signal).
    """
    if spec.kind is Mechanism.DIRECT:
        return []
    reps = state.representatives()
    k = n_removed(len(reps), spec.r, n_final)
    if k == 0:
        return []
    if spec.kind is Mechanism.RANDOM:
        picked = rng.choice(len(reps), size=k, replace=False)
        return [reps[j] for j in picked]
    tiebreak = rng.random(len(reps))
    order = sorted(range(len(reps)),
                   key=lambda j: (state.voters[reps[j]].q, tiebreak[j]))
    return [reps[j] for j in order[:k]]


def delegation_distribution(state: EnsembleState, i: int, spec: MechanismSpec
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Candidate delegatees of voter ``i`` with their probabilities.

    The candidate pool excludes ``i`` itself and anyone whose current
    representative is ``i`` (cycle guard). For the accuracy-aware rules the
    pool is further restricted to strictly higher q. Returns (indices,
    probabilities); both empty when no legal candidate exists, in which case
    the voter simply stays a representative this increment.
    """
    empty = (np.array([], dtype=np.int64), np.array([]))
    if spec.kind is Mechanism.DIRECT:
        return empty
    qi = state.voters[i].q
    pool = [j for j in range(state.n)
            if j != i and state.representative_of(j) != i]
    if spec.kind is not Mechanism.RANDOM:
        pool = [j for j in pool if state.voters[j].q > qi]
    if not pool:
        return empty
    idx = np.array(pool, dtype=np.int64)

    if spec.kind in (Mechanism.RANDOM, Mechanism.RANDOM_BETTER):
        raw = np.ones(len(pool))
    elif spec.kind is Mechanism.PROP_BETTER:
        raw = np.array([state.voters[j].q - qi for j in pool])
    elif spec.kind is Mechanism.PROP_WEIGHTED:
        raw = np.array([(state.voters[j].q - qi)
                        / state.voters[state.representative_of(j)].weight
                        for j in pool])
    elif spec.kind is Mechanism.MAX:
        rep_w = np.array([state.voters[state.representative_of(j)].weight
                          for j in pool])
        q = np.array([state.voters[j].q for j in pool])
        h = rep_w == rep_w.min()  # lightest representatives spread weight best
        raw = np.where(h & (q == q[h].max()), 1.0, 0.0)
    else:  # pragma: no cover
        raise ValueError(f"unhandled mechanism {spec.kind}")
    support = raw > 0.0
    idx, raw = idx[support], raw[support]
    return idx, raw / raw.sum()


def sample_target(state: EnsembleState, i: int, dist: tuple[np.ndarray, np.ndarray],
                  rng: np.random.Generator) -> int | None:
    """Draw a delegatee from a precomputed distribution.

    Distributions are computed against the pre-delegation state of the
    increment, but earlier transfers in the same increment can have made a
    candidate cycle-creating by now, so re-filter before drawing. ``None``
    means no legal target remains and the delegation is skipped.
    """
    idx, probs = dist
    if len(idx) == 0:
        return None
    legal = np.array([state.representative_of(j) != i for j in idx])
    if not legal.any():
        return None
    idx, probs = idx[legal], probs[legal]
    return int(rng.choice(idx, p=probs / probs.sum()))


def apply_delegation(state: EnsembleState, i: int, j: int, t: int) -> DelegationEvent:
    """Delegate voter ``i`` to ``j``: i's whole weight moves to j's
    representative and i stops voting."""
    voter = state.voters[i]
    if not voter.is_representative:
        raise ValueError(f"voter {i} is not a representative")
    if i == j:
        raise ValueError("self-delegation is not a transfer")
    rep = state.representative_of(j)
    if rep == i:
        raise ValueError(f"delegation {i}->{j} would create a cycle")
    transferred = voter.weight
    state.voters[rep].weight += transferred
    voter.weight = 0
    voter.delegate_to = j
    return DelegationEvent(t=t, delegator=i, delegatee=j,
                           representative=rep, transferred_weight=transferred)
