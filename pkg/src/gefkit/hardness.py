"""Generators that turn 3-partition instances into hard is-GEF1 questions.

``reduce_to_isgef1_goods`` and ``reduce_to_isgef1_chores`` emit an instance
together with an initial allocation such that the allocation violates GEF1
exactly when the source multiset admits a partition into unit-sum triples.
A brute-force 3-partition solver certifies the labels, and
``certify_reduction`` closes the loop through the GEF1 checker.

Both constructions need m >= 2 source triples: the goods table contains
m/(m-1) entries, and the chores table needs the zero-valued "h" entry of
each agent to be a different item from her own "h" chore, which collapses
at m = 1 (where, provably, the emitted allocation always satisfies GEF1
even though every valid m = 1 multiset is a yes instance).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    Allocation,
    GefkitError,
    Instance,
    additive_instance,
    rational,
    validate_allocation,
)
from .fairness import is_group_fair

#: Partition enumeration over 3m elements explodes quickly; the oracle refuses
#: beyond this many triples.
MAX_ORACLE_TRIPLES = 4


class ReductionError(GefkitError):
    """A 3-partition instance violates the problem constraints, or the
    requested reduction variant is not defined for its size."""


@dataclass(frozen=True)
class ThreePartitionInstance:
    """A multiset of 3m rationals, each in (1/4, 1/2), summing to m."""

    x: tuple[Fraction, ...]
    m: int

    @staticmethod
    def from_values(values) -> "ThreePartitionInstance":
        x = tuple(rational(v) for v in values)
        if len(x) == 0 or len(x) % 3 != 0:
            raise ReductionError(f"need 3m numbers, got {len(x)}")
        m = len(x) // 3
        quarter, half = Fraction(1, 4), Fraction(1, 2)
        for v in x:
            if not quarter < v < half:
                raise ReductionError(f"value {v} is outside (1/4, 1/2)")
        if sum(x) != m:
            raise ReductionError(f"values sum to {sum(x)}, expected {m}")
        return ThreePartitionInstance(x, m)


@dataclass(frozen=True)
class ReductionOutput:
    instance: Instance
    allocation: Allocation
    epsilon: Fraction
    big_m: Fraction | None
    variant: str


def solve_3partition_bruteforce(tp: ThreePartitionInstance):
    """Exhaustively look for a partition into unit-sum triples.

    Returns the partition as a tuple of index triples (first one found, with
    the lowest open index always anchoring the next triple), or None when
    exhaustion proves there is none.
    """
    if tp.m > MAX_ORACLE_TRIPLES:
        raise ReductionError(
            f"oracle is limited to {MAX_ORACLE_TRIPLES} triples, got m={tp.m}"
        )
    target = Fraction(1)
    indices = list(range(3 * tp.m))

    def extend(remaining: list, chosen: list):
        if not remaining:
            return tuple(chosen)
        anchor = remaining[0]
        rest = remaining[1:]
        for pair in itertools.combinations(rest, 2):
            if tp.x[anchor] + tp.x[pair[0]] + tp.x[pair[1]] != target:
                continue
            left = [i for i in rest if i not in pair]
            found = extend(left, chosen + [(anchor,) + pair])
            if found is not None:
                return found
        return None

    return extend(indices, [])


def _epsilon_for(x: tuple[Fraction, ...]) -> Fraction:
    """Half the grid step of the input values: any bundle sum that exceeds an
    integer must exceed it by at least twice this, so comparisons against
    thresholds shifted by epsilon behave as the constructions require."""
    lcm = 1
    for v in x:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    return Fraction(1, 2 * lcm)


def reduce_to_isgef1_goods(tp: ThreePartitionInstance) -> ReductionOutput:
    """Goods-only instance whose starting allocation violates GEF1 iff the
    3-partition instance is a yes.

    Agents: a_1..a_m plus a collector b.  Items: one prize g_i per a_i, a
    block of swap items h(i, j) (owned by a_j, valued only by a_i), the 3m
    carrier items l_k valued like the source numbers, and two bonus items
    only b values.  b starts with every carrier; the a_i can all gain a full
    unit from the carriers exactly when the unit-sum triples exist.
    """
    m = tp.m
    if m < 2:
        raise ReductionError("the goods reduction needs m >= 2")
    x = tuple(sorted(tp.x, reverse=True))
    eps = _epsilon_for(x)
    n = m + 1
    b = m

    g = {i: i for i in range(m)}
    h = {}
    next_id = m
    for i in range(m):
        for j in range(m):
            if i != j:
                h[(i, j)] = next_id
                next_id += 1
    l = {k: next_id + k for k in range(3 * m)}
    next_id += 3 * m
    star = (next_id, next_id + 1)
    num_items = next_id + 2

    rows = [[Fraction(0)] * num_items for _ in range(n)]
    prize = Fraction(m + 1) - eps
    swap = Fraction(m, m - 1)
    for i in range(m):
        rows[i][g[i]] = prize
        for j in range(m):
            if j != i:
                rows[i][h[(i, j)]] = swap
        for k in range(3 * m):
            rows[i][l[k]] = x[k]
    for k in range(3 * m):
        rows[b][l[k]] = x[k]
    rows[b][star[0]] = Fraction(m)
    rows[b][star[1]] = Fraction(m)

    bundles: list[set] = [set() for _ in range(n)]
    for i in range(m):
        bundles[i].add(g[i])
        for j in range(m):
            if j != i:
                bundles[i].add(h[(j, i)])
    bundles[0].add(star[0])
    bundles[m - 1].add(star[1])
    bundles[b] = {l[k] for k in range(3 * m)}

    instance = additive_instance(
        rows,
        meta={
            "variant": "goods",
            "source_x": [str(v) for v in x],
            "epsilon": str(eps),
            "M": None,
        },
    )
    allocation = Allocation.from_bundles(bundles, range(num_items))
    report = validate_allocation(instance, allocation)
    if report is not None:  # pragma: no cover
        raise ReductionError(f"internal error, bad allocation: {report}")
    return ReductionOutput(instance, allocation, eps, None, "goods")


def reduce_to_isgef1_chores(tp: ThreePartitionInstance) -> ReductionOutput:
    """Chores-only instance whose starting allocation violates GEF1 iff the
    3-partition instance is a yes.

    Agents: a_1..a_m and b_1..b_m.  Items: a heavy chore g_i (bearable only
    for a_i and, more lightly, b_i), a medium chore h_i (free for the next
    agent a_{i+1}, cyclically), the 3m carrier chores l_k costing the source
    numbers (sorted decreasingly), and one personal zero chore per agent.
    Everything else costs the prohibitive -M.
    """
    m = tp.m
    if m < 2:
        raise ReductionError(
            "the chores reduction needs m >= 2: with a single triple the "
            "zero-valued h entry collides with the owned h chore and the "
            "emitted allocation satisfies GEF1 regardless of the source"
        )
    x = tuple(sorted(tp.x, reverse=True))
    eps = _epsilon_for(x)
    big_m = Fraction(m + 2)
    n = 2 * m

    g = {i: i for i in range(m)}
    h = {i: m + i for i in range(m)}
    l = {k: 2 * m + k for k in range(3 * m)}
    o = {k: 5 * m + k for k in range(2 * m)}
    num_items = 7 * m

    rows = [[-big_m] * num_items for _ in range(n)]
    for i in range(m):
        a = i
        rows[a][g[i]] = Fraction(-m) - eps
        rows[a][h[i]] = Fraction(-1) - eps
        rows[a][h[(i - 1) % m]] = Fraction(0)
        for k in range(3 * m):
            rows[a][l[k]] = -x[k]
        rows[a][o[i]] = Fraction(0)
    for i in range(m):
        bi = m + i
        rows[bi][g[i]] = -(x[3 * i + 1] + x[3 * i + 2])
        for k in (3 * i, 3 * i + 1, 3 * i + 2):
            rows[bi][l[k]] = -x[k]
        rows[bi][o[m + i]] = Fraction(0)

    bundles: list[set] = [set() for _ in range(n)]
    for i in range(m):
        bundles[i] = {g[i], h[i], o[i]}
        bundles[m + i] = {l[3 * i], l[3 * i + 1], l[3 * i + 2], o[m + i]}

    instance = additive_instance(
        rows,
        meta={
            "variant": "chores",
            "source_x": [str(v) for v in x],
            "epsilon": str(eps),
            "M": str(big_m),
        },
    )
    allocation = Allocation.from_bundles(bundles, range(num_items))
    report = validate_allocation(instance, allocation)
    if report is not None:  # pragma: no cover
        raise ReductionError(f"internal error, bad allocation: {report}")
    return ReductionOutput(instance, allocation, eps, big_m, "chores")


def certify_reduction(
    out: ReductionOutput, oracle_answer: bool, bound: int | None = None
) -> bool:
    """True iff the GEF1 checker's verdict matches the 3-partition oracle:
    the allocation violates GEF1 exactly on yes instances."""
    report = is_group_fair(out.instance, out.allocation, "gef1", bound=bound)
    return report.holds == (not oracle_answer)
