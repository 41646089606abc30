import numpy as np
import pytest

from delens.classifier import LinearModel
from delens.ensemble import EnsembleState


def make_state(qs, weight_overrides=None, delegate_overrides=None, dim=1):
    """EnsembleState with forced per-voter q values (models untouched)."""
    state = EnsembleState([LinearModel(dim, seed=i) for i in range(len(qs))])
    for v, q in zip(state.voters, qs):
        v.q = q
    for i, w in (weight_overrides or {}).items():
        state.voters[i].weight = w
    for i, d in (delegate_overrides or {}).items():
        state.voters[i].delegate_to = d
    return state


def recount_weights(delegate_to):
    """Independent weight oracle: follow each voter's delegation chain to its
    terminal self-delegation and count arrivals."""
    n = len(delegate_to)
    counts = [0] * n
    for j in range(n):
        k = j
        hops = 0
        while delegate_to[k] != k:
            k = delegate_to[k]
            hops += 1
            assert hops <= n, f"cycle reached from voter {j}"
        counts[k] += 1
    return counts


def assert_graph_sound(state):
    """Weight conservation + the recount identity + weight/delegation
    consistency, all from raw fields only."""
    delegate_to = [v.delegate_to for v in state.voters]
    weights = [v.weight for v in state.voters]
    assert sum(weights) == state.n
    assert weights == recount_weights(delegate_to)
    for v in state.voters:
        assert (v.weight > 0) == (v.delegate_to == v.id)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
