"""Exact checkers and witness finders for all supported fairness concepts.

Pairwise concepts (EF, EF1, EFX, PROP) compare ordered agent pairs.  Group
concepts compare a group S against a group T by reallocating everything T
holds among the members of S and scaling the resulting utilities by |S|/|T|
(|S|/n for the proportionality family, where T is fixed to all agents).

Quantifier convention for the "up to one item" concepts: a violation is a
triple (S, T, realloc) whose scaled utility vector Pareto-dominates the
current one *however* the per-agent single-item removals are chosen.  Each
agent's removal set is drawn from her current chores and her reallocated
goods; removing an item affects whichever side(s) of the comparison contain
it.  Because each agent's removal only touches her own component, this is
equivalent to: every agent's gain survives her worst single removal, and at
least one agent gains strictly under every removal.  The "up to any item"
concepts instead ask for a single removal choice under which domination
holds (the removal is mandatory whenever a candidate item exists).

Searches are exhaustive and deterministic: (S, T) pairs are visited by
increasing |S|, then lexicographically; reallocations are visited in
lexicographic assignment order; the first witness found is returned.  Sound
upper-bound pruning (disable with ``prune=False``) never changes the answer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    AdditiveProfile,
    Allocation,
    GefkitError,
    Instance,
    ItemClass,
    SearchBoundExceeded,
    bundle_utility,
    chores_of,
    classify_item,
    ensure_valid_allocation,
    goods_of,
    rational,
    rational_str,
)
from .welfare import (
    DEFAULT_ENUMERATION_BOUND,
    all_assignments,
    is_pareto_optimal_bruteforce,
    utility_vector,
)

PAIR_CONCEPTS = ("ef", "ef1", "efx")

#: family ("equal" sizes / "free" sizes / "gp": T fixed to all agents) and
#: removal mode ("exact": no removals, "one": worst removal, "any": chosen removal)
GROUP_CONCEPTS = {
    "gef": ("equal", "exact"),
    "gef1": ("equal", "one"),
    "gefx": ("equal", "any"),
    "s-gef": ("free", "exact"),
    "s-gef1": ("free", "one"),
    "s-gefx": ("free", "any"),
    "gp": ("gp", "exact"),
    "gp1": ("gp", "one"),
    "gpx": ("gp", "any"),
}

CONCEPTS = PAIR_CONCEPTS + ("prop", "po") + tuple(GROUP_CONCEPTS)


class TaxonomyError(GefkitError):
    """A logical implication between checker outputs was violated (checker bug)."""


def normalize_concept(name: str) -> str:
    """Map a concept name to its canonical form ("SGEF1" -> "s-gef1")."""
    canon = name.strip().lower().replace("_", "-")
    if canon.startswith("s") and not canon.startswith("s-") and canon != "s":
        candidate = "s-" + canon[1:]
        if candidate in GROUP_CONCEPTS:
            canon = candidate
    if canon not in CONCEPTS:
        raise ValueError(f"unknown fairness concept {name!r}")
    return canon


@dataclass(frozen=True)
class PairWitness:
    """An ordered agent pair (envious, envied) certifying an EF-family violation."""

    envious: int
    envied: int


@dataclass(frozen=True)
class AgentWitness:
    """An agent whose bundle falls short of her proportional share."""

    agent: int


@dataclass(frozen=True)
class GroupWitness:
    """A certified group violation: groups S and T, a reallocation of T's
    items among S, and one reported removal per agent in S (possibly empty)."""

    S: tuple[int, ...]
    T: tuple[int, ...]
    realloc: tuple[frozenset, ...]
    removals: tuple[frozenset, ...]


Witness = PairWitness | AgentWitness | GroupWitness


@dataclass
class CheckReport:
    concept: str
    holds: bool
    witness: Witness | None = None
    pairs_examined: int = 0
    reallocations_examined: int = 0


# ---------------------------------------------------------------------------
# Pairwise concepts
# ---------------------------------------------------------------------------

def _marginal(instance, agent, bundle: frozenset, item) -> Fraction:
    return bundle_utility(instance, agent, bundle) - bundle_utility(
        instance, agent, bundle - {item}
    )


def is_ef(instance: Instance, allocation: Allocation) -> CheckReport:
    """Envy-freeness: no agent values another's bundle above her own."""
    ensure_valid_allocation(instance, allocation)
    pairs = 0
    for i in instance.agents:
        own = bundle_utility(instance, i, allocation.bundles[i])
        for j in instance.agents:
            if i == j:
                continue
            pairs += 1
            if bundle_utility(instance, i, allocation.bundles[j]) > own:
                return CheckReport("ef", False, PairWitness(i, j), pairs)
    return CheckReport("ef", True, None, pairs)


def is_ef1(instance: Instance, allocation: Allocation) -> CheckReport:
    """Envy-freeness up to one item: some single removal (from either bundle)
    eliminates the envy of each ordered pair."""
    ensure_valid_allocation(instance, allocation)
    pairs = 0
    for i in instance.agents:
        pi = allocation.bundles[i]
        for j in instance.agents:
            if i == j:
                continue
            pairs += 1
            pj = allocation.bundles[j]
            removals = [frozenset()] + [frozenset({o}) for o in sorted(pi | pj)]
            if not any(
                bundle_utility(instance, i, pi - o) >= bundle_utility(instance, i, pj - o)
                for o in removals
            ):
                return CheckReport("ef1", False, PairWitness(i, j), pairs)
    return CheckReport("ef1", True, None, pairs)


def is_efx(instance: Instance, allocation: Allocation) -> CheckReport:
    """Envy-freeness up to any item: removing any own chore, or any of the
    other's goods, eliminates the envy of each ordered pair.  Chores and
    goods are identified by marginal contribution, so table profiles work."""
    ensure_valid_allocation(instance, allocation)
    pairs = 0
    for i in instance.agents:
        pi = allocation.bundles[i]
        own = bundle_utility(instance, i, pi)
        for j in instance.agents:
            if i == j:
                continue
            pairs += 1
            pj = allocation.bundles[j]
            other = bundle_utility(instance, i, pj)
            violated = any(
                _marginal(instance, i, pi, o) < 0
                and bundle_utility(instance, i, pi - {o}) < other
                for o in sorted(pi)
            ) or any(
                _marginal(instance, i, pj, o) > 0
                and own < bundle_utility(instance, i, pj - {o})
                for o in sorted(pj)
            )
            if violated:
                return CheckReport("efx", False, PairWitness(i, j), pairs)
    return CheckReport("efx", True, None, pairs)


def is_prop(instance: Instance, allocation: Allocation) -> CheckReport:
    """Proportionality: every agent gets at least 1/n of her grand-bundle value."""
    ensure_valid_allocation(instance, allocation, total=True)
    for i in instance.agents:
        share = bundle_utility(instance, i, instance.items) / instance.n
        if bundle_utility(instance, i, allocation.bundles[i]) < share:
            return CheckReport("prop", False, AgentWitness(i), instance.n)
    return CheckReport("prop", True, None, instance.n)


# ---------------------------------------------------------------------------
# Group concepts
# ---------------------------------------------------------------------------

def _iter_group_pairs(n: int, family: str):
    agents = range(n)
    if family == "equal":
        for k in range(1, n + 1):
            for S in itertools.combinations(agents, k):
                for T in itertools.combinations(agents, k):
                    yield S, T
    elif family == "free":
        for k in range(1, n + 1):
            for S in itertools.combinations(agents, k):
                for tk in range(1, n + 1):
                    for T in itertools.combinations(agents, tk):
                        yield S, T
    elif family == "gp":
        everyone = tuple(agents)
        for k in range(1, n + 1):
            for S in itertools.combinations(agents, k):
                yield S, everyone
    else:  # pragma: no cover
        raise ValueError(family)


def _search_pair_additive(instance, allocation, S, T, mode, prune, counters):
    """Search one (S, T) pair for a violation; additive fast path.

    Works on the profile's common-denominator integer matrix; the |S|/|T|
    scaling is applied by cross-multiplication, so everything stays integer.
    Depth-first over assignment prefixes with sound upper-bound pruning.
    """
    V = instance.profile.int_rows
    Sk, Tk = len(S), len(T)
    pool = frozenset().union(*(allocation.bundles[t] for t in T))
    items = sorted(pool)
    K = len(items)

    R0 = [sum(V[i][o] for o in allocation.bundles[i]) for i in S]
    own = [allocation.bundles[i] for i in S]
    chore_lists = [
        [(o, V[i][o]) for o in sorted(allocation.bundles[i]) if V[i][o] < 0] for i in S
    ]
    # Bounds. possuf[p][idx]: the most items[idx:] can still add to agent S[p];
    # bestsuf[idx]: the largest total the group can extract from items[idx:].
    possuf = [[0] * (K + 1) for _ in range(Sk)]
    bestsuf = [0] * (K + 1)
    for idx in range(K - 1, -1, -1):
        o = items[idx]
        for p in range(Sk):
            v = V[S[p]][o]
            possuf[p][idx] = possuf[p][idx + 1] + (v if v > 0 else 0)
        bestsuf[idx] = bestsuf[idx + 1] + max(V[i][o] for i in S)
    # In "any" mode a mandatory removal of an item that sits on both sides of
    # the comparison can raise an agent's gain by up to (Tk - Sk) * value.
    if mode == "any" and Sk != Tk:
        slack = [
            max([0] + [(Tk - Sk) * V[i][o] for o in own[p]])
            for p, i in enumerate(S)
        ]
    else:
        slack = [0] * Sk
    slack_total = sum(slack)
    total_R = sum(R0)

    if prune and Sk * bestsuf[0] + slack_total <= Tk * total_R:
        return None

    assignment = [0] * K
    load = [0] * Sk  # integer utility of the bundle assigned to each position
    item_index = {o: idx for idx, o in enumerate(items)}

    def leaf():
        counters[1] += 1
        gains = []
        removals = []
        for p, i in enumerate(S):
            g0 = Sk * load[p] - Tk * R0[p]
            if mode == "exact":
                gains.append(g0)
                removals.append(frozenset())
                continue
            best = None  # (delta, item) chosen by min (mode one) / max (mode any)
            for o, v in chore_lists[p]:
                if o in pool and assignment[item_index[o]] == p:
                    d = (Tk - Sk) * v
                else:
                    d = Tk * v
                if best is None or (d < best[0] if mode == "one" else d > best[0]):
                    best = (d, o)
            for idx in range(K):
                if assignment[idx] != p:
                    continue
                o = items[idx]
                v = V[i][o]
                if v <= 0:
                    continue
                d = (Tk * v if o in own[p] else 0) - Sk * v
                if best is None or (d < best[0] if mode == "one" else d > best[0]):
                    best = (d, o)
            if mode == "one":
                # The empty removal is always available to the defender.
                if best is None or best[0] > 0:
                    best = (0, None)
            elif best is None:
                best = (0, None)  # no candidate item: compare without removal
            gains.append(g0 + best[0])
            removals.append(frozenset() if best[1] is None else frozenset({best[1]}))
        if all(g >= 0 for g in gains) and any(g > 0 for g in gains):
            realloc = tuple(
                frozenset(items[idx] for idx in range(K) if assignment[idx] == p)
                for p in range(Sk)
            )
            return GroupWitness(tuple(S), tuple(T), realloc, tuple(removals))
        return None

    def dfs(idx):
        if idx == K:
            return leaf()
        o = items[idx]
        for p in range(Sk):
            assignment[idx] = p
            load[p] += V[S[p]][o]
            ok = True
            if prune:
                if Sk * (sum(load) + bestsuf[idx + 1]) + slack_total <= Tk * total_R:
                    ok = False
                else:
                    for q in range(Sk):
                        if Sk * (load[q] + possuf[q][idx + 1]) + slack[q] < Tk * R0[q]:
                            ok = False
                            break
            if ok:
                found = dfs(idx + 1)
                if found is not None:
                    load[p] -= V[S[p]][o]
                    return found
            load[p] -= V[S[p]][o]
        return None

    return dfs(0)


def _search_pair_generic(instance, allocation, S, T, mode, counters):
    """Reference search for one (S, T) pair using exact rational arithmetic
    and direct bundle evaluation; supports table profiles."""
    Sk, Tk = len(S), len(T)
    scale = Fraction(Sk, Tk)
    pool = frozenset().union(*(allocation.bundles[t] for t in T))
    items = sorted(pool)
    K = len(items)
    own = [allocation.bundles[i] for i in S]
    own_chores = [sorted(chores_of(instance, i, own[p])) for p, i in enumerate(S)]

    for assignment in itertools.product(range(Sk), repeat=K):
        counters[1] += 1
        bundles = [
            frozenset(items[idx] for idx in range(K) if assignment[idx] == p)
            for p in range(Sk)
        ]
        gains = []
        removals = []
        feasible = True
        for p, i in enumerate(S):
            candidates = sorted(
                set(own_chores[p]) | set(goods_of(instance, i, bundles[p]))
            )
            if mode == "exact":
                choices = [frozenset()]
            elif mode == "one":
                choices = [frozenset()] + [frozenset({o}) for o in candidates]
            else:  # any: removal is mandatory when a candidate exists
                choices = [frozenset({o}) for o in candidates] or [frozenset()]
            best = None
            best_choice = None
            for choice in choices:
                gain = scale * bundle_utility(instance, i, bundles[p] - choice) - (
                    bundle_utility(instance, i, own[p] - choice)
                )
                if best is None or (gain < best if mode == "one" else gain > best):
                    best = gain
                    best_choice = choice
            gains.append(best)
            removals.append(best_choice)
            if mode != "any" and best < 0:
                feasible = False
                break
        if feasible and all(g >= 0 for g in gains) and any(g > 0 for g in gains):
            return GroupWitness(tuple(S), tuple(T), tuple(bundles), tuple(removals))
    return None


def is_group_fair(
    instance: Instance,
    allocation: Allocation,
    concept: str,
    bound: int | None = None,
    prune: bool = True,
) -> CheckReport:
    """Check a group fairness concept by exhaustive (pruned) witness search.

    Raises SearchBoundExceeded when some (S, T) pair would need more than
    ``bound`` reallocations (default 2^20) and no witness was found earlier.
    """
    concept = normalize_concept(concept)
    if concept not in GROUP_CONCEPTS:
        raise ValueError(f"{concept!r} is not a group concept")
    family, mode = GROUP_CONCEPTS[concept]
    ensure_valid_allocation(instance, allocation, total=True)
    limit = DEFAULT_ENUMERATION_BOUND if bound is None else bound
    additive = isinstance(instance.profile, AdditiveProfile)
    counters = [0, 0]  # pairs, reallocations
    for S, T in _iter_group_pairs(instance.n, family):
        counters[0] += 1
        pool_size = sum(len(allocation.bundles[t]) for t in T)
        if len(S) ** pool_size > limit:
            raise SearchBoundExceeded(
                f"pair S={list(S)}, T={list(T)} needs {len(S)}^{pool_size} "
                f"reallocations, exceeding the bound {limit}"
            )
        if additive:
            witness = _search_pair_additive(
                instance, allocation, S, T, mode, prune, counters
            )
        else:
            witness = _search_pair_generic(instance, allocation, S, T, mode, counters)
        if witness is not None:
            return CheckReport(concept, False, witness, counters[0], counters[1])
    return CheckReport(concept, True, None, counters[0], counters[1])


def _po_report(instance, allocation, bound) -> CheckReport:
    """Pareto optimality as a CheckReport; the witness is a dominating allocation."""
    ensure_valid_allocation(instance, allocation, total=True)
    limit = DEFAULT_ENUMERATION_BOUND if bound is None else bound
    if instance.n ** instance.m > limit:
        raise SearchBoundExceeded(
            f"{instance.n}^{instance.m} allocations exceed the bound {limit}"
        )
    current = utility_vector(instance, allocation)
    everyone = tuple(instance.agents)
    count = 0
    for assignment in all_assignments(instance.n, instance.m):
        count += 1
        bundles = [set() for _ in instance.agents]
        for item, agent in enumerate(assignment):
            bundles[agent].add(item)
        other = [bundle_utility(instance, i, bundles[i]) for i in instance.agents]
        if all(a >= b for a, b in zip(other, current)) and any(
            a > b for a, b in zip(other, current)
        ):
            witness = GroupWitness(
                everyone,
                everyone,
                tuple(frozenset(b) for b in bundles),
                tuple(frozenset() for _ in everyone),
            )
            return CheckReport("po", False, witness, 1, count)
    return CheckReport("po", True, None, 1, count)


def check_concept(
    instance: Instance,
    allocation: Allocation,
    concept: str,
    bound: int | None = None,
) -> CheckReport:
    """Run any supported concept checker and return its CheckReport."""
    concept = normalize_concept(concept)
    if concept == "ef":
        return is_ef(instance, allocation)
    if concept == "ef1":
        return is_ef1(instance, allocation)
    if concept == "efx":
        return is_efx(instance, allocation)
    if concept == "prop":
        return is_prop(instance, allocation)
    if concept == "po":
        return _po_report(instance, allocation, bound)
    return is_group_fair(instance, allocation, concept, bound)


#: Implications between concepts: satisfying the first guarantees the second.
TAXONOMY_EDGES = (
    ("s-gef", "po"),
    ("s-gef", "gp"),
    ("s-gef", "prop"),
    ("s-gef", "ef"),
    ("s-gef", "s-gefx"),
    ("s-gef", "gef"),
    ("s-gefx", "s-gef1"),
    ("s-gefx", "gpx"),
    ("s-gefx", "efx"),
    ("s-gefx", "gefx"),
    ("s-gef1", "gp1"),
    ("s-gef1", "ef1"),
    ("s-gef1", "gef1"),
    ("gef", "ef"),
    ("gef", "gefx"),
    ("gef", "po"),
    ("gefx", "efx"),
    ("gefx", "gef1"),
    ("gef1", "ef1"),
    ("gp", "po"),
    ("gp", "gpx"),
    ("gp", "prop"),
    ("gpx", "gp1"),
    ("ef", "efx"),
    ("efx", "ef1"),
)


def taxonomy_report(
    instance: Instance, allocation: Allocation, bound: int | None = None
) -> dict[str, bool]:
    """Evaluate every concept and assert the implication edges between them.

    An edge violation means one of the checkers is wrong and raises
    TaxonomyError; it can never be a property of the input.
    """
    results = {c: check_concept(instance, allocation, c, bound).holds for c in CONCEPTS}
    for stronger, weaker in TAXONOMY_EDGES:
        if results[stronger] and not results[weaker]:
            raise TaxonomyError(
                f"{stronger} holds but {weaker} does not; "
                f"the implication {stronger} => {weaker} is violated"
            )
    return results


# ---------------------------------------------------------------------------
# Independent witness validation
# ---------------------------------------------------------------------------

def validate_witness(
    instance: Instance,
    allocation: Allocation,
    concept: str,
    witness: Witness,
) -> bool:
    """Re-check from first principles that a witness certifies a violation.

    Uses direct rational evaluation only; shares no state with the searchers.
    """
    concept = normalize_concept(concept)
    if isinstance(witness, PairWitness):
        i, j = witness.envious, witness.envied
        if not (0 <= i < instance.n and 0 <= j < instance.n and i != j):
            return False
        pi, pj = allocation.bundles[i], allocation.bundles[j]
        if concept == "ef":
            return bundle_utility(instance, i, pj) > bundle_utility(instance, i, pi)
        if concept == "ef1":
            removals = [frozenset()] + [frozenset({o}) for o in pi | pj]
            return all(
                bundle_utility(instance, i, pi - o) < bundle_utility(instance, i, pj - o)
                for o in removals
            )
        if concept == "efx":
            for o in pi:
                if _marginal(instance, i, pi, o) < 0 and bundle_utility(
                    instance, i, pi - {o}
                ) < bundle_utility(instance, i, pj):
                    return True
            for o in pj:
                if _marginal(instance, i, pj, o) > 0 and bundle_utility(
                    instance, i, pi
                ) < bundle_utility(instance, i, pj - {o}):
                    return True
            return False
        return False
    if isinstance(witness, AgentWitness):
        if concept != "prop" or not 0 <= witness.agent < instance.n:
            return False
        share = bundle_utility(instance, witness.agent, instance.items) / instance.n
        return bundle_utility(instance, witness.agent, allocation.bundles[witness.agent]) < share
    if not isinstance(witness, GroupWitness):
        return False

    S, T = witness.S, witness.T
    if not S or not T or len(set(S)) != len(S) or len(set(T)) != len(T):
        return False
    if not all(0 <= a < instance.n for a in S + T):
        return False
    if concept == "po":
        family, mode = "equal", "exact"
        if set(S) != set(instance.agents) or set(T) != set(instance.agents):
            return False
    else:
        family, mode = GROUP_CONCEPTS[concept]
    if family == "equal" and len(S) != len(T):
        return False
    if family == "gp" and set(T) != set(instance.agents):
        return False
    scale = Fraction(len(S), len(T))

    pool = frozenset().union(*(allocation.bundles[t] for t in T))
    if len(witness.realloc) != len(S) or len(witness.removals) != len(S):
        return False
    union = frozenset().union(*witness.realloc) if witness.realloc else frozenset()
    if union != pool or sum(len(b) for b in witness.realloc) != len(pool):
        return False

    saw_strict_capable = False
    for p, i in enumerate(S):
        pi = allocation.bundles[i]
        new = witness.realloc[p]
        removal = witness.removals[p]
        if len(removal) > 1:
            return False
        allowed = chores_of(instance, i, pi) | goods_of(instance, i, new)
        if not removal <= allowed:
            return False
        if mode == "exact":
            choices = [frozenset()]
        elif mode == "one":
            choices = [frozenset()] + [frozenset({o}) for o in allowed]
        else:
            choices = [frozenset({o}) for o in allowed] or [frozenset()]
        gains = [
            scale * bundle_utility(instance, i, new - c)
            - bundle_utility(instance, i, pi - c)
            for c in choices
        ]
        if mode == "any":
            # Some removal choice must keep this component nonnegative.
            if max(gains) < 0:
                return False
            if max(gains) > 0:
                saw_strict_capable = True
        else:
            if min(gains) < 0:
                return False
            if min(gains) > 0:
                saw_strict_capable = True
    return saw_strict_capable


# ---------------------------------------------------------------------------
# Witness / report serialization
# ---------------------------------------------------------------------------

def witness_to_dict(concept: str, witness: Witness) -> dict:
    if isinstance(witness, PairWitness):
        return {"concept": concept, "envious": witness.envious, "envied": witness.envied}
    if isinstance(witness, AgentWitness):
        return {"concept": concept, "agent": witness.agent}
    return {
        "concept": concept,
        "S": list(witness.S),
        "T": list(witness.T),
        "realloc": [sorted(b) for b in witness.realloc],
        "removals": [sorted(r) for r in witness.removals],
    }


def witness_from_dict(doc) -> tuple[str, Witness]:
    concept = normalize_concept(doc["concept"])
    if "envious" in doc:
        return concept, PairWitness(int(doc["envious"]), int(doc["envied"]))
    if "agent" in doc:
        return concept, AgentWitness(int(doc["agent"]))
    return concept, GroupWitness(
        tuple(int(a) for a in doc["S"]),
        tuple(int(a) for a in doc["T"]),
        tuple(frozenset(int(o) for o in b) for b in doc["realloc"]),
        tuple(frozenset(int(o) for o in r) for r in doc["removals"]),
    )


def report_to_dict(report: CheckReport) -> dict:
    return {
        "concept": report.concept,
        "holds": report.holds,
        "witness": None
        if report.witness is None
        else witness_to_dict(report.concept, report.witness),
        "stats": {
            "pairs": report.pairs_examined,
            "reallocations": report.reallocations_examined,
        },
    }
