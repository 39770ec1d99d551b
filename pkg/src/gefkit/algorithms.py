"""The two constructive allocation algorithms and the cost-flow machinery.

``egal_sequential`` handles identical additive utilities: items are placed in
decreasing order of absolute value, goods going to the currently worst-off
agent and chores to the best-off one.

``ternary_flow`` handles ternary symmetric utilities.  Items valued positively
by someone are routed through a minimum-cost integer flow whose "t" edge costs
grow as n^j, which makes cheap flows exactly the leximin-greatest (and Nash
welfare maximizing) assignments of the valued items; remaining chores then go
one at a time to the best-off agent and neutral items to indifferent agents.

The flow solver uses successive shortest augmenting paths with potentials and
exact (arbitrary precision) integer arithmetic throughout: the largest edge
cost is n^m, which no fixed-width type can hold for interesting sizes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    AdditiveProfile,
    Allocation,
    GefkitError,
    Instance,
    ProfileError,
    additive_instance,
    is_identical_profile,
    ternary_view,
)
from .fairness import is_efx


class InfeasibleNetworkError(GefkitError):
    """The network admits no integer flow meeting all demands."""


class NonCanonicalFlowError(GefkitError):
    """A flow does not fill each agent's "t" edges lowest index first."""


@dataclass(frozen=True)
class FlowEdge:
    tail: int
    head: int
    capacity: int
    cost: int


@dataclass(frozen=True)
class FlowNetwork:
    """Cost-flow network for assigning items to agents that value them.

    Nodes are indexed: source, sink, n agent nodes, m item nodes, then n*m
    tail nodes t(i, j) in row-major order.  The source demands m units and
    the sink -m; every edge has capacity 1.  The j-th unit of flow through
    agent i leaves via a tail edge of cost n^j (j starting at 1).
    """

    n: int
    m: int
    num_nodes: int
    source: int
    sink: int
    demands: tuple[int, ...]
    edges: tuple[FlowEdge, ...]

    def agent_node(self, agent: int) -> int:
        return 2 + agent

    def item_node(self, item: int) -> int:
        return 2 + self.n + item

    def tail_node(self, agent: int, j: int) -> int:
        """Tail node for agent's j-th unit, j in 1..m."""
        return 2 + self.n + self.m + agent * self.m + (j - 1)


@dataclass(frozen=True)
class IntegerFlow:
    """Edge flows, indexed like the network's edge tuple."""

    values: tuple[int, ...]


def flow_cost(network: FlowNetwork, flow: IntegerFlow) -> int:
    return sum(f * e.cost for f, e in zip(flow.values, network.edges))


def _check_realizable(network: FlowNetwork, flow: IntegerFlow) -> None:
    if len(flow.values) != len(network.edges):
        raise InfeasibleNetworkError(
            f"flow has {len(flow.values)} entries for {len(network.edges)} edges"
        )
    balance = [0] * network.num_nodes
    for f, e in zip(flow.values, network.edges):
        if not 0 <= f <= e.capacity:
            raise InfeasibleNetworkError(
                f"flow {f} on edge {e.tail}->{e.head} violates capacity {e.capacity}"
            )
        balance[e.tail] += f
        balance[e.head] -= f
    for node, (b, d) in enumerate(zip(balance, network.demands)):
        if b != d:
            raise InfeasibleNetworkError(f"node {node} ships {b}, demand is {d}")


def egal_sequential(instance: Instance, check_invariant: bool = False) -> Allocation:
    """Allocate items one by one, largest |value| first: goods to the worst-off
    agent, chores to the best-off one, ties to the lowest agent index.

    Requires an additive profile shared by all agents.  The output satisfies
    EFX and GEF1.  With ``check_invariant`` the partial allocation is checked
    to be EFX after every step (debugging aid; quadratic cost).
    """
    if not isinstance(instance.profile, AdditiveProfile):
        raise ProfileError("egal_sequential needs an additive profile")
    if not is_identical_profile(instance):
        raise ProfileError("egal_sequential needs identical utilities across agents")
    values = instance.profile.values[0]
    order = sorted(range(instance.m), key=lambda o: (-abs(values[o]), o))
    bundles: list[set] = [set() for _ in instance.agents]
    utilities = [Fraction(0) for _ in instance.agents]
    assigned: set = set()
    for item in order:
        value = values[item]
        if value >= 0:
            chosen = min(instance.agents, key=lambda i: (utilities[i], i))
        else:
            chosen = min(instance.agents, key=lambda i: (-utilities[i], i))
        bundles[chosen].add(item)
        utilities[chosen] += value
        assigned.add(item)
        if check_invariant:
            partial = Allocation.from_bundles(bundles, assigned)
            report = is_efx(instance, partial)
            if not report.holds:
                raise AssertionError(
                    f"partial allocation lost EFX after placing item {item}"
                )
    return Allocation.from_bundles(bundles, range(instance.m))


def build_nash_flow_network(instance: Instance) -> FlowNetwork:
    """Build the assignment network for a goods-only 0/1 additive profile.

    Edges: source -> each item; item -> each agent valuing it 1; agent ->
    tail(agent, j) at cost n^j; tail -> sink.  Every item must be valued by
    at least one agent, otherwise no realizable flow exists.
    """
    if not isinstance(instance.profile, AdditiveProfile):
        raise ProfileError("the flow construction needs an additive profile")
    n, m = instance.n, instance.m
    values = instance.profile.values
    for i in instance.agents:
        for o in range(m):
            if values[i][o] not in (0, 1):
                raise ProfileError(
                    f"agent {i} values item {o} at {values[i][o]}; only 0/1 allowed"
                )
    num_nodes = 2 + n + m + n * m
    demands = [0] * num_nodes
    demands[0] = m
    demands[1] = -m
    edges: list[FlowEdge] = []
    network = FlowNetwork(n, m, num_nodes, 0, 1, tuple(demands), ())
    for o in range(m):
        edges.append(FlowEdge(network.source, network.item_node(o), 1, 0))
    for o in range(m):
        valued = [i for i in range(n) if values[i][o] == 1]
        if not valued:
            raise ProfileError(f"item {o} is valued by no agent; the network is infeasible")
        for i in valued:
            edges.append(FlowEdge(network.item_node(o), network.agent_node(i), 1, 0))
    for i in range(n):
        for j in range(1, m + 1):
            edges.append(FlowEdge(network.agent_node(i), network.tail_node(i, j), 1, n ** j))
            edges.append(FlowEdge(network.tail_node(i, j), network.sink, 1, 0))
    return FlowNetwork(n, m, num_nodes, 0, 1, tuple(demands), tuple(edges))


def min_cost_integer_flow(network: FlowNetwork) -> IntegerFlow:
    """Minimum-cost integer flow by successive shortest augmenting paths.

    Dijkstra on reduced costs with node potentials; all arithmetic is exact.
    The returned flow fills each agent's tail edges lowest cost first.
    """
    num_nodes = network.num_nodes
    # Adjacency of (forward, backward) arc pairs sharing one capacity/flow cell.
    graph: list[list[list]] = [[] for _ in range(num_nodes)]
    for idx, e in enumerate(network.edges):
        arc = [e.head, e.capacity, e.cost, None, idx]
        rev = [e.tail, 0, -e.cost, arc, None]
        arc[3] = rev
        graph[e.tail].append(arc)
        graph[e.head].append(rev)

    supply = sum(d for d in network.demands if d > 0)
    if supply != network.demands[network.source] or -supply != network.demands[network.sink]:
        raise InfeasibleNetworkError("only source/sink demands are supported")

    potential = [0] * num_nodes
    flows = [0] * len(network.edges)
    for _ in range(supply):
        dist = [None] * num_nodes
        parent_arc: list = [None] * num_nodes
        dist[network.source] = 0
        heap = [(0, network.source)]
        while heap:
            d, u = heapq.heappop(heap)
            if dist[u] is not None and d > dist[u]:
                continue
            for arc in graph[u]:
                head, cap = arc[0], arc[1]
                if cap <= 0:
                    continue
                nd = d + arc[2] + potential[u] - potential[head]
                if dist[head] is None or nd < dist[head]:
                    dist[head] = nd
                    parent_arc[head] = arc
                    heapq.heappush(heap, (nd, head))
        if dist[network.sink] is None:
            raise InfeasibleNetworkError(
                "an item cannot reach the sink; no realizable flow exists"
            )
        # Unreachable nodes get the maximum finite distance, which keeps every
        # residual reduced cost nonnegative for the next round.
        farthest = max(d for d in dist if d is not None)
        for node in range(num_nodes):
            potential[node] += dist[node] if dist[node] is not None else farthest
        # Trace back and push one unit (all capacities are 1 in this network).
        node = network.sink
        path = []
        while node != network.source:
            arc = parent_arc[node]
            path.append(arc)
            node = arc[3][0]
        for arc in path:
            arc[1] -= 1
            arc[3][1] += 1
            if arc[4] is not None:
                flows[arc[4]] += 1
            else:
                flows[arc[3][4]] -= 1

    flow = IntegerFlow(tuple(_canonicalize_tails(network, flows)))
    _check_realizable(network, flow)
    return flow


def _canonicalize_tails(network: FlowNetwork, flows: list[int]) -> list[int]:
    """Rewrite tail-edge flows to fill each agent's lowest-cost slots first.

    Equal-cost shortest paths can leave gaps when n = 1; refilling from the
    bottom never increases the cost because tail costs increase with j.
    """
    agent_units = [0] * network.n
    tail_edge_idx: dict[tuple[int, int], int] = {}
    sink_edge_idx: dict[tuple[int, int], int] = {}
    for idx, e in enumerate(network.edges):
        for i in range(network.n):
            base = network.tail_node(i, 1)
            if base <= e.head < base + network.m and e.tail == network.agent_node(i):
                tail_edge_idx[(i, e.head - base + 1)] = idx
        if e.head == network.sink:
            base_all = 2 + network.n + network.m
            agent = (e.tail - base_all) // network.m
            j = (e.tail - base_all) % network.m + 1
            sink_edge_idx[(agent, j)] = idx
    for (i, j), idx in tail_edge_idx.items():
        agent_units[i] += flows[idx]
        flows[idx] = 0
    for (i, j), idx in sink_edge_idx.items():
        flows[idx] = 0
    for i in range(network.n):
        for j in range(1, agent_units[i] + 1):
            flows[tail_edge_idx[(i, j)]] = 1
            flows[sink_edge_idx[(i, j)]] = 1
    return flows


def flow_to_allocation(network: FlowNetwork, flow: IntegerFlow) -> Allocation:
    """Read the assignment off the item->agent edges of a realizable flow.

    Rejects flows whose tail edges are not filled lowest index first; those
    are never produced by the solver and would break the round trip with
    :func:`allocation_to_flow`.
    """
    _check_realizable(network, flow)
    tail_filled = [[False] * (network.m + 1) for _ in range(network.n)]
    bundles: list[set] = [set() for _ in range(network.n)]
    for f, e in zip(flow.values, network.edges):
        if f != 1:
            continue
        if 2 + network.n <= e.tail < 2 + network.n + network.m and 2 <= e.head < 2 + network.n:
            item = e.tail - (2 + network.n)
            agent = e.head - 2
            bundles[agent].add(item)
        base_all = 2 + network.n + network.m
        if e.tail >= base_all and e.head == network.sink:
            agent = (e.tail - base_all) // network.m
            j = (e.tail - base_all) % network.m + 1
            tail_filled[agent][j] = True
    for agent in range(network.n):
        filled = [j for j in range(1, network.m + 1) if tail_filled[agent][j]]
        if filled != list(range(1, len(filled) + 1)):
            raise NonCanonicalFlowError(
                f"agent {agent} uses tail slots {filled}; they must fill from 1 up"
            )
    return Allocation.from_bundles(bundles, range(network.m))


def allocation_to_flow(network: FlowNetwork, allocation: Allocation) -> IntegerFlow:
    """The canonical flow carrying a total allocation; inverse of
    :func:`flow_to_allocation` on canonical flows."""
    edge_index = {(e.tail, e.head): idx for idx, e in enumerate(network.edges)}
    flows = [0] * len(network.edges)
    for o in range(network.m):
        flows[edge_index[(network.source, network.item_node(o))]] = 1
    for agent, bundle in enumerate(allocation.bundles):
        for o in bundle:
            key = (network.item_node(o), network.agent_node(agent))
            if key not in edge_index:
                raise InfeasibleNetworkError(
                    f"item {o} cannot be routed to agent {agent}: no such edge "
                    "(the agent does not value it)"
                )
            flows[edge_index[key]] = 1
        for j in range(1, len(bundle) + 1):
            flows[edge_index[(network.agent_node(agent), network.tail_node(agent, j))]] = 1
            flows[edge_index[(network.tail_node(agent, j), network.sink)]] = 1
    flow = IntegerFlow(tuple(flows))
    _check_realizable(network, flow)
    return flow


def ternary_flow(instance: Instance) -> Allocation:
    """Compute an allocation for a ternary symmetric profile.

    Items someone values positively are assigned through the cost-flow
    network on the 0/1 profile; items that are chores for everyone then go
    one at a time to the currently best-off agent (by normalized utility);
    items whose best valuation is zero go to an indifferent agent with the
    lowest normalized utility.  The result is leximin-optimal for the
    normalized profile and GEF1 for the original one.
    """
    view = ternary_view(instance)
    n, m = instance.n, instance.m
    positive, neutral, negative = [], [], []
    for o in range(m):
        best = max(view.signs[i][o] for i in range(n))
        if best > 0:
            positive.append(o)
        elif best == 0:
            neutral.append(o)
        else:
            negative.append(o)

    bundles: list[set] = [set() for _ in range(n)]
    norm_utility = [0] * n

    if positive:
        rows = tuple(
            tuple(1 if view.signs[i][o] == 1 else 0 for o in positive)
            for i in range(n)
        )
        sub = additive_instance(rows)
        network = build_nash_flow_network(sub)
        assignment = flow_to_allocation(network, min_cost_integer_flow(network))
        for agent, bundle in enumerate(assignment.bundles):
            for local in bundle:
                item = positive[local]
                bundles[agent].add(item)
                norm_utility[agent] += view.signs[agent][item]

    for o in negative:
        chosen = min(range(n), key=lambda i: (-norm_utility[i], i))
        bundles[chosen].add(o)
        norm_utility[chosen] -= 1
    for o in neutral:
        indifferent = [i for i in range(n) if view.signs[i][o] == 0]
        chosen = min(indifferent, key=lambda i: (norm_utility[i], i))
        bundles[chosen].add(o)

    return Allocation.from_bundles(bundles, range(m))
