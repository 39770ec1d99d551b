"""Seed-deterministic random instances for fuzzing and regression corpora.

All randomness flows through one ``random.Random(seed)`` stream per call, so
a (kind, n, m, seed, value_range) tuple always produces the same instance.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .core import Instance, ProfileError, additive_instance, table_instance

KINDS = ("identical", "ternary", "additive", "table")

#: Random tables hold 2^m entries per agent.
MAX_TABLE_GENERATION_ITEMS = 8

_DENOMINATORS = (1, 2, 3, 4)


def _random_rational(rng: random.Random, lo: int, hi: int) -> Fraction:
    q = rng.choice(_DENOMINATORS)
    return Fraction(rng.randint(lo * q, hi * q), q)


def generate_random_instance(
    kind: str,
    n: int,
    m: int,
    seed: int,
    value_range: tuple[int, int] = (-2, 2),
) -> Instance:
    """Deterministically generate an instance of the requested kind.

    identical: one utility row shared by all agents.
    ternary:   per-agent positive scale, signs drawn from {-1, 0, +1}.
    additive:  independent rationals with small denominators in the range.
    table:     an explicit utility table on every subset (m capped).
    """
    lo, hi = value_range
    if lo > hi:
        raise ValueError(f"empty value range [{lo}, {hi}]")
    if n < 1 or m < 0:
        raise ValueError(f"bad shape n={n}, m={m}")
    rng = random.Random(seed)
    meta = {"kind": kind, "seed": seed}
    if kind == "identical":
        row = tuple(_random_rational(rng, lo, hi) for _ in range(m))
        return additive_instance([row] * n, meta)
    if kind == "ternary":
        rows = []
        for _ in range(n):
            alpha = Fraction(rng.randint(1, 4), rng.randint(1, 4))
            signs = [rng.choice((-1, 0, 1)) for _ in range(m)]
            rows.append(tuple(alpha * s for s in signs))
        return additive_instance(rows, meta)
    if kind == "additive":
        rows = [
            tuple(_random_rational(rng, lo, hi) for _ in range(m)) for _ in range(n)
        ]
        return additive_instance(rows, meta)
    if kind == "table":
        if m > MAX_TABLE_GENERATION_ITEMS:
            raise ProfileError(
                f"random tables support at most {MAX_TABLE_GENERATION_ITEMS} items"
            )
        tables = []
        for _ in range(n):
            table = {frozenset(): Fraction(0)}
            for mask in range(1, 2 ** m):
                subset = frozenset(o for o in range(m) if mask >> o & 1)
                table[subset] = _random_rational(rng, lo, hi)
            tables.append(table)
        return table_instance(n, m, tables, meta)
    raise ValueError(f"unknown instance kind {kind!r}")
