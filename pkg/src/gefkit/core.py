"""Exact data model: instances, utility profiles, allocations, item classification.

All utilities are exact rationals (``fractions.Fraction``); no floating point
is used anywhere, so every comparison made by the checkers is exact.  Values
are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping

Rational = Fraction

#: Explicit utility tables store one value per subset of items, so they are
#: only allowed for small item counts.
MAX_TABLE_ITEMS = 16


class GefkitError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(GefkitError):
    """A file or serialized object does not match the expected format."""


class ProfileError(GefkitError):
    """A utility profile violates a precondition (wrong shape or domain)."""


class InvalidAllocationError(GefkitError):
    """An allocation is not a valid partition of its scope."""


class SearchBoundExceeded(GefkitError):
    """An exhaustive search would exceed the configured enumeration bound."""


def rational(value) -> Fraction:
    """Parse a rational from an int, Fraction, or a "p/q" / integer string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"not a rational: {value!r}") from exc
    raise FormatError(f"not a rational: {value!r}")


def rational_str(value: Fraction) -> str:
    """Serialize a rational as "p/q", or just "p" for integers."""
    return str(value)


class ItemClass(Enum):
    GOOD = "good"
    CHORE = "chore"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class AdditiveProfile:
    """Additive utilities: an n x m matrix of rationals, one row per agent.

    The utility of a bundle is the sum of its singleton values.  A matrix of
    integers scaled to a common denominator is derived at construction time;
    the integer view is what the exhaustive checkers iterate over.
    """

    values: tuple[tuple[Fraction, ...], ...]
    denominator: int = field(init=False, compare=False, repr=False)
    int_rows: tuple[tuple[int, ...], ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        rows = tuple(tuple(rational(v) for v in row) for row in self.values)
        object.__setattr__(self, "values", rows)
        widths = {len(row) for row in rows}
        if len(widths) > 1:
            raise ProfileError("utility rows have unequal lengths")
        denom = 1
        for row in rows:
            for v in row:
                denom = denom * v.denominator // math.gcd(denom, v.denominator)
        int_rows = tuple(
            tuple(int(v * denom) for v in row) for row in rows
        )
        object.__setattr__(self, "denominator", denom)
        object.__setattr__(self, "int_rows", int_rows)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.values[0]) if self.values else 0


class TableProfile:
    """Explicit utility tables: one value for every subset of items, per agent.

    Supports the non-additive cases; capped at MAX_TABLE_ITEMS items because
    the table has 2^m entries per agent.  The empty bundle must be worth 0.
    """

    def __init__(self, n: int, m: int, tables: Iterable[Mapping[frozenset, Fraction]]):
        if m > MAX_TABLE_ITEMS:
            raise ProfileError(f"table profiles support at most {MAX_TABLE_ITEMS} items, got {m}")
        self.n = n
        self.m = m
        self.tables: tuple[dict[frozenset, Fraction], ...] = tuple(
            {frozenset(k): rational(v) for k, v in t.items()} for t in tables
        )
        if len(self.tables) != n:
            raise ProfileError(f"expected {n} tables, got {len(self.tables)}")
        items = frozenset(range(m))
        for agent, table in enumerate(self.tables):
            if len(table) != 2 ** m:
                raise ProfileError(
                    f"agent {agent}: table has {len(table)} entries, expected {2 ** m}"
                )
            for subset in table:
                if not subset <= items:
                    raise ProfileError(f"agent {agent}: subset {sorted(subset)} out of range")
            if table[frozenset()] != 0:
                raise ProfileError(f"agent {agent}: empty bundle must have value 0")

    def __eq__(self, other):
        return (
            isinstance(other, TableProfile)
            and self.n == other.n
            and self.m == other.m
            and self.tables == other.tables
        )


Profile = AdditiveProfile | TableProfile


@dataclass(frozen=True)
class Instance:
    """An allocation problem: n agents, m items, and a utility profile."""

    n: int
    m: int
    profile: Profile
    meta: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ProfileError(f"need at least one agent, got {self.n}")
        if self.m < 0:
            raise ProfileError(f"negative item count {self.m}")
        if self.profile.n != self.n or self.profile.m != self.m:
            raise ProfileError(
                f"profile shape {self.profile.n}x{self.profile.m} does not match "
                f"instance {self.n}x{self.m}"
            )

    @property
    def items(self) -> frozenset:
        return frozenset(range(self.m))

    @property
    def agents(self) -> range:
        return range(self.n)

    def is_additive(self) -> bool:
        return isinstance(self.profile, AdditiveProfile)


def additive_instance(rows, meta: Mapping | None = None) -> Instance:
    """Build an instance from an iterable of utility rows (one per agent)."""
    profile = AdditiveProfile(tuple(tuple(row) for row in rows))
    return Instance(profile.n, profile.m, profile, _freeze_meta(meta))


def table_instance(n: int, m: int, tables, meta: Mapping | None = None) -> Instance:
    return Instance(n, m, TableProfile(n, m, tables), _freeze_meta(meta))


def _freeze_meta(meta):
    if not meta:
        return ()
    return tuple(sorted((str(k), json.dumps(v, sort_keys=True)) for k, v in meta.items()))


def meta_dict(instance: Instance) -> dict:
    return {k: json.loads(v) for k, v in instance.meta}


@dataclass(frozen=True)
class Allocation:
    """A partition of ``scope`` into per-agent bundles (possibly partial).

    ``scope`` is the set of items the allocation claims to distribute; it may
    be a strict subset of the instance's items.  Construction does not check
    the partition conditions; use :func:`validate_allocation` for that.
    """

    bundles: tuple[frozenset, ...]
    scope: frozenset

    @staticmethod
    def from_bundles(bundles: Iterable[Iterable[int]], scope: Iterable[int] | None = None) -> "Allocation":
        frozen = tuple(frozenset(b) for b in bundles)
        if scope is None:
            scope_set = frozenset().union(*frozen) if frozen else frozenset()
        else:
            scope_set = frozenset(scope)
        return Allocation(frozen, scope_set)

    @property
    def n(self) -> int:
        return len(self.bundles)

    def is_total(self, instance: Instance) -> bool:
        return self.scope == instance.items

    def holder_of(self, item: int) -> int | None:
        for agent, bundle in enumerate(self.bundles):
            if item in bundle:
                return agent
        return None


def validate_allocation(instance: Instance, allocation: Allocation) -> str | None:
    """Check disjointness and non-wastefulness; return None if ok.

    On failure returns a report naming the offending item (duplicated,
    unallocated, or outside the declared scope).
    """
    if allocation.n != instance.n:
        return f"allocation has {allocation.n} bundles for {instance.n} agents"
    if not allocation.scope <= instance.items:
        stray = min(allocation.scope - instance.items)
        return f"scope contains unknown item {stray}"
    seen: dict[int, int] = {}
    for agent, bundle in enumerate(allocation.bundles):
        for item in bundle:
            if item not in allocation.scope:
                return f"item {item} assigned to agent {agent} is outside the scope"
            if item in seen:
                return f"duplicate item {item} (held by agents {seen[item]} and {agent})"
            seen[item] = agent
    for item in sorted(allocation.scope):
        if item not in seen:
            return f"unallocated item {item}"
    return None


def ensure_valid_allocation(instance: Instance, allocation: Allocation, total: bool = False):
    report = validate_allocation(instance, allocation)
    if report is not None:
        raise InvalidAllocationError(report)
    if total and not allocation.is_total(instance):
        missing = sorted(instance.items - allocation.scope)
        raise InvalidAllocationError(f"allocation is partial; items {missing} not covered")


def bundle_utility(instance: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    """Utility of ``bundle`` for ``agent``: sum of singletons, or table lookup."""
    items = frozenset(bundle)
    if not 0 <= agent < instance.n:
        raise ProfileError(f"agent {agent} out of range")
    if not items <= instance.items:
        stray = min(items - instance.items)
        raise ProfileError(f"item {stray} is not part of the instance")
    profile = instance.profile
    if isinstance(profile, AdditiveProfile):
        row = profile.values[agent]
        return sum((row[o] for o in items), Fraction(0))
    value = profile.tables[agent].get(items)
    if value is None:
        raise ProfileError(f"agent {agent}: no table entry for subset {sorted(items)}")
    return value


def classify_item(
    instance: Instance,
    agent: int,
    item: int,
    context_bundle: Iterable[int] | None = None,
) -> ItemClass:
    """Classify one item as GOOD, CHORE or NEUTRAL for an agent.

    Additive profiles classify by the sign of the singleton value.  Table
    profiles classify by the sign of the marginal contribution of ``item``
    inside ``context_bundle`` (which must contain the item).
    """
    if not 0 <= item < instance.m:
        raise ProfileError(f"item {item} out of range")
    profile = instance.profile
    if isinstance(profile, AdditiveProfile):
        value = profile.values[agent][item]
        if value > 0:
            return ItemClass.GOOD
        if value < 0:
            return ItemClass.CHORE
        return ItemClass.NEUTRAL
    if context_bundle is None:
        raise ProfileError("table profiles need a context bundle to classify an item")
    context = frozenset(context_bundle)
    if item not in context:
        raise ProfileError(f"item {item} is not in the context bundle")
    marginal = bundle_utility(instance, agent, context) - bundle_utility(
        instance, agent, context - {item}
    )
    if marginal > 0:
        return ItemClass.GOOD
    if marginal < 0:
        return ItemClass.CHORE
    return ItemClass.NEUTRAL


def goods_of(instance: Instance, agent: int, bundle: Iterable[int]) -> frozenset:
    """Items of ``bundle`` that are goods for ``agent`` (in that bundle's context)."""
    items = frozenset(bundle)
    return frozenset(
        o for o in items if classify_item(instance, agent, o, items) is ItemClass.GOOD
    )


def chores_of(instance: Instance, agent: int, bundle: Iterable[int]) -> frozenset:
    items = frozenset(bundle)
    return frozenset(
        o for o in items if classify_item(instance, agent, o, items) is ItemClass.CHORE
    )


@dataclass(frozen=True)
class TernarySymmetricView:
    """Decomposition of a ternary symmetric profile into per-agent scale and signs.

    Each agent's singleton values all lie in {-alpha_i, 0, +alpha_i} for some
    alpha_i > 0; the original matrix is exactly ``signs[i][o] * alpha[i]``.
    """

    alpha: tuple[Fraction, ...]
    signs: tuple[tuple[int, ...], ...]


def ternary_view(instance: Instance) -> TernarySymmetricView:
    """Extract the ternary symmetric structure, or raise ProfileError."""
    if not instance.is_additive():
        raise ProfileError("ternary symmetric profiles must be additive")
    alphas = []
    signs = []
    for agent in instance.agents:
        row = instance.profile.values[agent]
        magnitudes = {abs(v) for v in row if v != 0}
        if len(magnitudes) > 1:
            raise ProfileError(
                f"agent {agent}: nonzero magnitudes {sorted(magnitudes)} are not all equal"
            )
        alpha = magnitudes.pop() if magnitudes else Fraction(1)
        alphas.append(alpha)
        signs.append(tuple(0 if v == 0 else (1 if v > 0 else -1) for v in row))
    return TernarySymmetricView(tuple(alphas), tuple(signs))


def is_ternary_symmetric(instance: Instance) -> bool:
    try:
        ternary_view(instance)
    except ProfileError:
        return False
    return True


def normalize_ternary(instance: Instance) -> Instance:
    """Rescale a ternary symmetric profile so every singleton value is -1, 0 or 1."""
    view = ternary_view(instance)
    rows = tuple(tuple(Fraction(s) for s in row) for row in view.signs)
    return additive_instance(rows, meta_dict(instance) or None)


def is_identical_profile(instance: Instance) -> bool:
    """True if all agents share one utility function."""
    profile = instance.profile
    if isinstance(profile, AdditiveProfile):
        return all(row == profile.values[0] for row in profile.values)
    return all(t == profile.tables[0] for t in profile.tables)


# ---------------------------------------------------------------------------
# Serialization. Instance and allocation files are JSON with every rational
# rendered as a "p/q" or integer string; dumps are canonical (sorted keys)
# so that load -> save round-trips are byte identical.
# ---------------------------------------------------------------------------

def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def instance_to_dict(instance: Instance) -> dict:
    doc: dict = {"agents": instance.n, "items": instance.m}
    profile = instance.profile
    if isinstance(profile, AdditiveProfile):
        doc["profile_kind"] = "additive"
        doc["utilities"] = [[rational_str(v) for v in row] for row in profile.values]
    else:
        doc["profile_kind"] = "table"
        doc["utilities"] = [
            {"agent": agent, "subset": sorted(subset), "value": rational_str(value)}
            for agent in range(profile.n)
            for subset, value in sorted(
                profile.tables[agent].items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))
            )
        ]
    meta = meta_dict(instance)
    if meta:
        doc["meta"] = meta
    return doc


def instance_from_dict(doc: Mapping) -> Instance:
    try:
        n = int(doc["agents"])
        m = int(doc["items"])
        kind = doc["profile_kind"]
        utilities = doc["utilities"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed instance document: {exc}") from exc
    meta = doc.get("meta")
    if kind == "additive":
        if len(utilities) != n or any(len(row) != m for row in utilities):
            raise FormatError(f"expected {n} rows of {m} utilities")
        rows = tuple(tuple(rational(v) for v in row) for row in utilities)
        profile: Profile = AdditiveProfile(rows)
    elif kind == "table":
        tables: list[dict] = [dict() for _ in range(n)]
        for entry in utilities:
            try:
                agent = int(entry["agent"])
                subset = frozenset(int(i) for i in entry["subset"])
                value = rational(entry["value"])
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"malformed table entry {entry!r}") from exc
            if not 0 <= agent < n:
                raise FormatError(f"table entry for unknown agent {agent}")
            tables[agent][subset] = value
        profile = TableProfile(n, m, tables)
    else:
        raise FormatError(f"unknown profile_kind {kind!r}")
    return Instance(n, m, profile, _freeze_meta(meta))


def allocation_to_dict(allocation: Allocation) -> dict:
    return {
        "bundles": [sorted(b) for b in allocation.bundles],
        "scope": sorted(allocation.scope),
    }


def allocation_from_dict(doc: Mapping) -> Allocation:
    try:
        bundles = [frozenset(int(i) for i in b) for b in doc["bundles"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed allocation document: {exc}") from exc
    scope = doc.get("scope")
    if scope is not None:
        scope = frozenset(int(i) for i in scope)
    return Allocation.from_bundles(bundles, scope)


def save_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(instance_to_dict(instance)))


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    return instance_from_dict(doc)


def save_allocation(allocation: Allocation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(allocation_to_dict(allocation)))


def load_allocation(path) -> Allocation:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    return allocation_from_dict(doc)
