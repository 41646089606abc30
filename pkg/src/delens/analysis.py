"""Closed-form delegation-cost bound and exact pivotal-state combinatorics.

The cost side: pruning at retention rate r shrinks the active population
geometrically, so the incremental-phase cost (in units of u examples) is a
geometric series over the minimum number of increments needed to reach the
target population.

The combinatorial side: counting correctness matrices in which every voter
is decisive somewhere. These counts overflow floats by hundreds of orders of
magnitude, so everything is exact integer arithmetic until the final
division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def min_increments(n: int, n_final: int, r: float) -> float:
    """Increments z needed for the active population to decay from n to
    n_final at retention rate r: the solution of n * r**z = n_final."""
    if not 0.0 < r < 1.0:
        raise ValueError("retention rate r must lie strictly in (0, 1)")
    if not 1 <= n_final <= n:
        raise ValueError("need 1 <= n_final <= n")
    return math.log(n_final / n) / math.log(r)


def delegation_cost_bound(n: int, n_final: int, r: float) -> float:
    """Lower bound on incremental-phase cost, in units of u examples.

    The geometric series sum_{i=0}^{z} n*r^i = n * (1 - r^(z+1)) / (1 - r).
    A lower bound because the real loop removes whole voters (never a
    fraction) and cycle avoidance can stretch the schedule.
    """
    z = min_increments(n, n_final, r)
    return n * (1.0 - r ** (z + 1.0)) / (1.0 - r)


@dataclass(frozen=True)
class CostCurvePoint:
    n: int
    n_final: int
    r: float
    z: float
    bound: float


def cost_bound_grid(ns: list[int], n_finals: list[int], rs: list[float]
                    ) -> list[CostCurvePoint]:
    points = []
    for n in ns:
        for nf in n_finals:
            for r in rs:
                points.append(CostCurvePoint(
                    n=n, n_final=nf, r=r,
                    z=min_increments(n, nf, r),
                    bound=delegation_cost_bound(n, nf, r)))
    return points


def simulate_incremental_cost(n: int, n_final: int, r: float) -> int:
    """Incremental-phase cost (u-units) under the trainer's integer removal
    rule: train all active voters, then remove min(max(1, floor(G*(1-r))),
    G - n_final) until G reaches n_final (plus the final confirming
    increment, as in the live loop)."""
    G, cost = n, 0
    while True:
        cost += G
        if G <= n_final:
            return cost
        G -= min(max(1, int(G * (1.0 - r))), G - n_final)


def pivotal_fraction(n: int, m: int) -> tuple[Fraction, float]:
    """Fraction of correctness states on pivotal examples where every voter
    is decisive, as an exact ratio plus its float value.

    Exact counts: sum over the number of pivotal examples m_p in [2, m] of
    C(n, ceil(n/2))**m_p decisive states versus 2**(n*m_p) unrestricted
    states. The float conversion happens only at the very end (big-int
    division is correctly rounded), since the integers involved dwarf the
    double range.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if m < 2:
        raise ValueError("need m >= 2 (at least two pivotal examples)")
    c = math.comb(n, math.ceil(n / 2))
    s_pivotal = sum(c ** mp for mp in range(2, m + 1))
    s_total = sum(2 ** (n * mp) for mp in range(2, m + 1))
    ratio = Fraction(s_pivotal, s_total)
    return ratio, float(ratio)


def brute_force_pivotal_count(n: int, m_p: int) -> int:
    """Exhaustively count n x m_p binary matrices whose every column has
    exactly ceil(n/2) ones. Independent check of the closed form; bounded
    to n*m_p <= 24 cells."""
    bits = n * m_p
    if bits > 24:
        raise ValueError(f"instance too large: {n}x{m_p} > 24 cells")
    want = math.ceil(n / 2)
    col_mask = (1 << n) - 1
    count = 0
    for word in range(1 << bits):
        ok = True
        for col in range(m_p):
            if ((word >> (col * n)) & col_mask).bit_count() != want:
                ok = False
                break
        if ok:
            count += 1
    return count


def _group_correct(columns: list[int], weights: list[int], n_voters: int) -> int:
    """Number of examples a weighted strict majority classifies correctly.

    ``columns[j]`` is a bitmask of which voters are right on example j;
    total weight equals the voter count.
    """
    total = sum(weights)
    correct = 0
    for col in columns:
        mass = sum(w for i, w in enumerate(weights) if col >> i & 1)
        if 2 * mass > total:
            correct += 1
    return correct


def check_lemma1_counterexample_absence(n: int, m: int) -> bool:
    """Exhaustively verify: whenever some voter is pivotal on no example,
    at least one single delegation keeps group accuracy from dropping.

    Enumerates every n x m correctness state (bounded to n*m <= 20). A voter
    is pivotal on example j when it is correct there and exactly ceil(n/2)
    voters are. Returns True iff no counterexample exists; n = 1 is
    vacuously true (no delegation target exists).
    """
    if n * m > 20:
        raise ValueError(f"instance too large: {n}x{m} > 20 cells")
    if n == 1:
        return True
    want = math.ceil(n / 2)
    base_weights = [1] * n
    for word in range(1 << (n * m)):
        columns = [(word >> (j * n)) & ((1 << n) - 1) for j in range(m)]
        pivotal = 0  # voters pivotal somewhere
        for col in columns:
            if col.bit_count() == want:
                pivotal |= col
        if pivotal.bit_count() == n:
            continue  # every voter pivotal; lemma says nothing here
        before = _group_correct(columns, base_weights, n)
        found = False
        for i in range(n):
            for k in range(n):
                if i == k:
                    continue
                weights = base_weights.copy()
                weights[k] += weights[i]
                weights[i] = 0
                if _group_correct(columns, weights, n) >= before:
                    found = True
                    break
            if found:
                break
        if not found:
            return False
    return True
