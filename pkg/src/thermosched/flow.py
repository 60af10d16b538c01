"""Polynomial exact solver for the fixed-window allocation problem.

With window lengths given, choosing clusters and windows to minimize total
task energy is a minimum-cost flow: one supply node per task, one
transshipment node per (window, cluster) pair reachable by a task arc only
when the task fits the window, and a sink absorbing everything through
capacity-q_k arcs. Integer capacities make the optimal flow integral, so a
unit of flow on a task arc decodes directly into a placement.

The flow itself is computed by successive shortest paths with potentials;
the layered shape of the network gives exact initial potentials in one
forward relaxation pass.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

from .model import Assignment, Instance, Placement


@dataclass(frozen=True)
class FlowArc:
    tail: int
    head: int
    capacity: int
    cost: float


@dataclass(frozen=True)
class FlowNetwork:
    """Flow formulation of one fixed-window instance.

    Node order: tasks first (in task order), then (window, cluster) nodes
    (window-major), then the sink. arc_placements holds the decoded
    (task_id, window, cluster) for task arcs and None for sink arcs.
    """

    instance: Instance
    window_lengths: tuple[int, ...]
    node_labels: tuple[str, ...]
    balances: tuple[int, ...]
    arcs: tuple[FlowArc, ...]
    arc_placements: tuple[tuple[int, int, int] | None, ...]
    unplaceable_tasks: tuple[int, ...]

    @property
    def sink(self) -> int:
        return len(self.node_labels) - 1


@dataclass
class FlowResult:
    feasible: bool
    assignment: Assignment | None
    total_cost: float | None
    arc_flows: tuple[int, ...]  # parallel to network.arcs


def build_network(
    instance: Instance, window_lengths: Sequence[int]
) -> FlowNetwork:
    """Build the flow network for the given fixed window lengths.

    Lengths must be nonnegative, at most one per available window, and sum
    to at most the major frame. Tasks that fit no (window, cluster) at all
    are reported in unplaceable_tasks; the network is still built and the
    solver will prove infeasibility.
    """
    lengths = tuple(int(l) for l in window_lengths)
    if not lengths:
        raise ValueError("at least one window length is required")
    if len(lengths) > instance.max_windows:
        raise ValueError(
            f"{len(lengths)} window lengths given but the instance allows "
            f"at most {instance.max_windows} windows"
        )
    if any(l < 0 for l in lengths):
        raise ValueError("window lengths must be nonnegative")
    if sum(lengths) > instance.major_frame_ms:
        raise ValueError(
            f"window lengths sum to {sum(lengths)}, exceeding the major "
            f"frame of {instance.major_frame_ms} ms"
        )

    clusters = instance.platform.clusters
    tasks = instance.tasks
    n = len(tasks)
    n_windows = len(lengths)

    labels = [f"task:{t.id}" for t in tasks]
    wc_index: dict[tuple[int, int], int] = {}
    for j in range(1, n_windows + 1):
        for c in clusters:
            wc_index[(j, c.id)] = len(labels)
            labels.append(f"wc:{j}:{c.id}")
    sink = len(labels)
    labels.append("sink")

    balances = [1] * n + [0] * (len(labels) - n)
    balances[sink] = -n

    arcs: list[FlowArc] = []
    placements: list[tuple[int, int, int] | None] = []
    unplaceable = []
    for ti, t in enumerate(tasks):
        admissible = 0
        for c in clusters:
            tc = t.on(c.id)
            for j in range(1, n_windows + 1):
                if tc.exec_time_ms <= lengths[j - 1]:
                    arcs.append(
                        FlowArc(ti, wc_index[(j, c.id)], 1, tc.effective_energy_cost)
                    )
                    placements.append((t.id, j, c.id))
                    admissible += 1
        if admissible == 0:
            unplaceable.append(t.id)
    for j in range(1, n_windows + 1):
        for c in clusters:
            arcs.append(FlowArc(wc_index[(j, c.id)], sink, c.core_count, 0.0))
            placements.append(None)

    return FlowNetwork(
        instance=instance,
        window_lengths=lengths,
        node_labels=tuple(labels),
        balances=tuple(balances),
        arcs=tuple(arcs),
        arc_placements=tuple(placements),
        unplaceable_tasks=tuple(unplaceable),
    )


def min_cost_assignment(network: FlowNetwork) -> FlowResult:
    """Optimal integral flow decoded into an assignment.

    Infeasible exactly when the maximum flow is smaller than the number of
    tasks. The returned assignment carries tight derived window lengths,
    which never exceed the fixed lengths used to build the network.
    """
    instance = network.instance
    n = len(instance.tasks)
    if n == 0:
        return FlowResult(True, Assignment.from_placements(instance, []), 0.0, ())

    n_nodes = len(network.node_labels) + 1  # plus a super source
    source = n_nodes - 1
    sink = network.sink

    heads: list[int] = []
    caps: list[int] = []
    costs: list[float] = []
    adj: list[list[int]] = [[] for _ in range(n_nodes)]

    def add_edge(u: int, v: int, cap: int, cost: float) -> int:
        idx = len(heads)
        heads.append(v)
        caps.append(cap)
        costs.append(cost)
        adj[u].append(idx)
        heads.append(u)
        caps.append(0)
        costs.append(-cost)
        adj[v].append(idx + 1)
        return idx

    arc_edge = [add_edge(a.tail, a.head, a.capacity, a.cost) for a in network.arcs]
    for ti in range(n):
        add_edge(source, ti, 1, 0.0)

    INF = math.inf
    # Exact initial potentials: the residual graph starts as a layered DAG
    # (source, tasks, window-cluster nodes, sink), so one relaxation sweep
    # in edge-construction order after the source edges settles all
    # distances even with negative costs.
    pot = [INF] * n_nodes
    pot[source] = 0.0
    for ti in range(n):
        pot[ti] = 0.0
    for ei, arc in zip(arc_edge, network.arcs):
        if pot[arc.tail] + costs[ei] < pot[arc.head]:
            pot[arc.head] = pot[arc.tail] + costs[ei]

    flow_pushed = 0
    dist = [INF] * n_nodes
    parent_edge = [-1] * n_nodes
    for _ in range(n):
        for v in range(n_nodes):
            dist[v] = INF
            parent_edge[v] = -1
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for ei in adj[u]:
                if caps[ei] <= 0:
                    continue
                v = heads[ei]
                if pot[v] == INF:
                    continue  # provably never on a source-sink path
                reduced = costs[ei] + pot[u] - pot[v]
                if reduced < 0.0:
                    reduced = 0.0  # floating-point noise; exact value is >= 0
                nd = d + reduced
                if nd < dist[v]:
                    dist[v] = nd
                    parent_edge[v] = ei
                    heapq.heappush(heap, (nd, v))
        if dist[sink] == INF:
            break
        # Capping at the sink distance keeps reduced costs nonnegative even
        # for nodes this round did not reach.
        d_sink = dist[sink]
        for v in range(n_nodes):
            if pot[v] < INF:
                pot[v] += dist[v] if dist[v] < d_sink else d_sink
        v = sink
        while v != source:
            ei = parent_edge[v]
            caps[ei] -= 1
            caps[ei ^ 1] += 1
            v = heads[ei ^ 1]
        flow_pushed += 1

    arc_flows = tuple(
        network.arcs[i].capacity - caps[arc_edge[i]] for i in range(len(network.arcs))
    )
    if flow_pushed < n:
        return FlowResult(False, None, None, arc_flows)

    chosen = [
        network.arc_placements[i]
        for i in range(len(network.arcs))
        if network.arc_placements[i] is not None and arc_flows[i] == 1
    ]
    assignment = Assignment.from_placements(
        instance, [Placement(*p) for p in chosen]
    )
    total = sum(
        instance.task_by_id(p.task_id).on(p.cluster).effective_energy_cost
        for p in assignment.placements
    )
    return FlowResult(True, assignment, total, arc_flows)
