"""Pareto dominance, Nash social welfare, leximin ordering, brute-force oracles.

The brute-force optimizers enumerate every total allocation as an assignment
tuple (one agent index per item, items in index order) in lexicographic order,
i.e. ``itertools.product(range(n), repeat=m)``; ties are broken by the first
allocation found in that order.  All enumerations refuse to run when n^m
exceeds the configured bound instead of silently truncating.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

from .core import (
    AdditiveProfile,
    Allocation,
    Instance,
    SearchBoundExceeded,
    bundle_utility,
    ensure_valid_allocation,
    ternary_view,
)

#: Default cap on n^m for the exhaustive oracles.
DEFAULT_ENUMERATION_BOUND = 2 ** 20

LESS, EQUAL, GREATER = -1, 0, 1


def _check_enumeration_bound(n: int, m: int, bound: int | None) -> None:
    limit = DEFAULT_ENUMERATION_BOUND if bound is None else bound
    if n ** m > limit:
        raise SearchBoundExceeded(
            f"{n}^{m} allocations exceed the enumeration bound {limit}"
        )


def all_assignments(n: int, m: int):
    """All total allocations as assignment tuples, lexicographic order."""
    return itertools.product(range(n), repeat=m)


def assignment_to_allocation(n: int, assignment: Sequence[int]) -> Allocation:
    bundles = [set() for _ in range(n)]
    for item, agent in enumerate(assignment):
        bundles[agent].add(item)
    return Allocation.from_bundles(bundles, range(len(assignment)))


def utility_vector(instance: Instance, allocation: Allocation) -> tuple[Fraction, ...]:
    """Per-agent bundle utilities, in agent index order."""
    return tuple(
        bundle_utility(instance, i, allocation.bundles[i]) for i in instance.agents
    )


def pareto_dominates(u: Sequence[Fraction], v: Sequence[Fraction]) -> bool:
    """True iff u >= v componentwise with at least one strict inequality."""
    if len(u) != len(v):
        raise ValueError(f"vector lengths differ: {len(u)} vs {len(v)}")
    return all(a >= b for a, b in zip(u, v)) and any(a > b for a, b in zip(u, v))


def nash_welfare(instance: Instance, allocation: Allocation) -> Fraction:
    """Product over agents of the absolute bundle utilities."""
    ensure_valid_allocation(instance, allocation, total=True)
    product = Fraction(1)
    for value in utility_vector(instance, allocation):
        product *= abs(value)
    return product


def leximin_vector(instance: Instance, allocation: Allocation) -> tuple[Fraction, ...]:
    """Bundle utilities sorted increasingly."""
    ensure_valid_allocation(instance, allocation, total=True)
    return tuple(sorted(utility_vector(instance, allocation)))


def leximin_compare(u: Sequence[Fraction], v: Sequence[Fraction]) -> int:
    """Compare two ascending-sorted vectors; GREATER means u leximin-dominates v."""
    if len(u) != len(v):
        raise ValueError(f"vector lengths differ: {len(u)} vs {len(v)}")
    if any(a > b for a, b in zip(u, u[1:])) or any(a > b for a, b in zip(v, v[1:])):
        raise ValueError("leximin_compare expects ascending-sorted vectors")
    for a, b in zip(u, v):
        if a > b:
            return GREATER
        if a < b:
            return LESS
    return EQUAL


def _assignment_utilities(instance: Instance, assignment: Sequence[int]):
    """Utility per agent of an assignment tuple, as exact rationals."""
    if isinstance(instance.profile, AdditiveProfile):
        rows = instance.profile.values
        totals = [Fraction(0)] * instance.n
        for item, agent in enumerate(assignment):
            totals[agent] += rows[agent][item]
        return totals
    bundles = [set() for _ in range(instance.n)]
    for item, agent in enumerate(assignment):
        bundles[agent].add(item)
    return [bundle_utility(instance, i, bundles[i]) for i in instance.agents]


def is_pareto_optimal_bruteforce(
    instance: Instance, allocation: Allocation, bound: int | None = None
) -> bool:
    """True iff no allocation over the same items Pareto-dominates this one.

    Exhaustive over all n^m total allocations; guarded by ``bound``.
    """
    ensure_valid_allocation(instance, allocation, total=True)
    _check_enumeration_bound(instance.n, instance.m, bound)
    current = utility_vector(instance, allocation)
    for assignment in all_assignments(instance.n, instance.m):
        other = _assignment_utilities(instance, assignment)
        if all(a >= b for a, b in zip(other, current)) and any(
            a > b for a, b in zip(other, current)
        ):
            return False
    return True


def is_pareto_optimal_ternary(instance: Instance, allocation: Allocation) -> bool:
    """Pareto optimality for ternary symmetric profiles, checked item by item.

    A total allocation is Pareto-optimal iff every item sits with an agent
    whose valuation sign equals the best valuation sign over all agents.
    """
    ensure_valid_allocation(instance, allocation, total=True)
    view = ternary_view(instance)
    holder = {}
    for agent, bundle in enumerate(allocation.bundles):
        for item in bundle:
            holder[item] = agent
    for item in range(instance.m):
        best = max(view.signs[agent][item] for agent in instance.agents)
        if view.signs[holder[item]][item] != best:
            return False
    return True


def _optimal_bruteforce(instance: Instance, bound, better) -> Allocation:
    _check_enumeration_bound(instance.n, instance.m, bound)
    best_assignment = None
    best_key = None
    for assignment in all_assignments(instance.n, instance.m):
        key = better(_assignment_utilities(instance, assignment))
        if best_key is None or key > best_key:
            best_key = key
            best_assignment = assignment
    return assignment_to_allocation(instance.n, best_assignment)


def leximin_optimal_bruteforce(instance: Instance, bound: int | None = None) -> Allocation:
    """An allocation with the leximin-greatest sorted utility vector.

    Ties are broken by the first allocation found in enumeration order.
    """
    return _optimal_bruteforce(instance, bound, lambda utils: tuple(sorted(utils)))


def nash_optimal_bruteforce(instance: Instance, bound: int | None = None) -> Allocation:
    """An allocation maximizing the product of absolute bundle utilities."""

    def key(utils):
        product = Fraction(1)
        for value in utils:
            product *= abs(value)
        return product

    return _optimal_bruteforce(instance, bound, key)
