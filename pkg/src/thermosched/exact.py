"""Exact optimization of task-to-(window, cluster) assignments.

One entry point, solve(), covers five objective kinds: minimizing sum-max
power, minimizing the LR upper-bound power, minimizing or maximizing total
idle time, and plain feasibility with optional per-task cluster fixes.

The power objectives are searched by depth-first branch and bound over
(window, cluster) placements with admissible incremental bounds and window
symmetry breaking (a task may only open the lowest-indexed empty window).
The idle-time objectives and the feasibility oracle branch over cluster
choices only: once every task has a cluster, the cheapest window partition
is obtained by sorting each cluster's tasks by decreasing execution time,
cutting them into core-count sized groups and aligning the groups rank by
rank across clusters. That grouping provably minimizes the total window
length, so it decides feasibility exactly and never affects the idle-time
value, which depends on cluster choices alone.

brute_force_optimum() is an independent exhaustive enumerator used as a
testing oracle; it shares no search code with solve().
"""

from __future__ import annotations

import math
import time
from bisect import insort
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

from .model import Assignment, Instance, Placement, assignment_to_dict, structural_violations
from .power import RegressionCoefficients

_EPS = 1e-12
_TIME_CHECK_MASK = 0x3FF  # check the clock every 1024 nodes


class ObjectiveKind(str, Enum):
    SM_POWER = "sm-power"
    LR_UB_POWER = "lr-ub-power"
    IDLE_MIN = "idle-min"
    IDLE_MAX = "idle-max"
    FEASIBILITY_ONLY = "feasibility-only"


class Sense(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


@dataclass(frozen=True)
class ObjectiveSpec:
    """What to optimize; LR-UB additionally needs regression coefficients.

    Coefficients attached to other kinds are ignored, so one spec value can
    be reused across kinds.
    """

    kind: ObjectiveKind
    coefficients: RegressionCoefficients | None = None

    @property
    def sense(self) -> Sense:
        return Sense.MAXIMIZE if self.kind is ObjectiveKind.IDLE_MAX else Sense.MINIMIZE


@dataclass(frozen=True)
class PartialFix:
    """Per-task cluster fixes; windows stay free."""

    fixed_clusters: tuple[tuple[int, int], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> "PartialFix":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[int, int]:
        return dict(self.fixed_clusters)


class SearchStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE_TIMEOUT = "feasible_timeout"
    INFEASIBLE = "infeasible"
    UNKNOWN_TIMEOUT = "unknown_timeout"


@dataclass
class SearchResult:
    status: SearchStatus
    assignment: Assignment | None
    objective_value: float | None
    lower_bound: float | None
    nodes_explored: int
    elapsed_ms: float

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "objective_value": self.objective_value,
            "lower_bound": self.lower_bound,
            "nodes_explored": self.nodes_explored,
            "elapsed_ms": self.elapsed_ms,
            "assignment": (
                assignment_to_dict(self.assignment) if self.assignment else None
            ),
        }


NodeRecorder = Callable[[tuple[tuple[int, int, int], ...], float], None]


# ---------------------------------------------------------------------------
# Shared preparation


def _check_inputs(
    instance: Instance, objective: ObjectiveSpec, partial: PartialFix | None
) -> dict[int, int]:
    violations = structural_violations(instance)
    if violations:
        raise ValueError("instance is not usable: " + "; ".join(violations))
    if objective.kind is ObjectiveKind.LR_UB_POWER and objective.coefficients is None:
        raise ValueError("the LR upper-bound objective requires regression coefficients")
    fix: dict[int, int] = {}
    if partial is not None:
        task_ids = {t.id for t in instance.tasks}
        cluster_ids = {c.id for c in instance.platform.clusters}
        for tid, cid in partial.fixed_clusters:
            if tid not in task_ids:
                raise ValueError(f"partial fix references unknown task {tid}")
            if cid not in cluster_ids:
                raise ValueError(f"partial fix references unknown cluster {cid}")
            fix[tid] = cid
    return fix


def _grouped_lengths(
    instance: Instance, cluster_lists: Sequence[Sequence[int]]
) -> list[int] | None:
    """Minimal window lengths for complete cluster choices.

    cluster_lists[ci] holds the execution times of the tasks put on cluster
    position ci, sorted in non-increasing order. Returns the per-window
    lengths of the cheapest partition, or None when more windows would be
    needed than the instance allows.
    """
    q = instance.max_windows
    lengths: list[int] = []
    for ci, cluster in enumerate(instance.platform.clusters):
        cap = cluster.core_count
        times = cluster_lists[ci]
        groups = (len(times) + cap - 1) // cap
        if groups > q:
            return None
        for j in range(groups):
            head = times[j * cap]
            if j == len(lengths):
                lengths.append(head)
            elif head > lengths[j]:
                lengths[j] = head
    return lengths


def _grouped_assignment(
    instance: Instance, cluster_of: Mapping[int, int]
) -> Assignment | None:
    """Feasible assignment for complete cluster choices, or None.

    Windows are filled by the aligned grouping described in the module
    docstring; ties between equal execution times break on ascending task
    id for determinism.
    """
    per_cluster: dict[int, list[tuple[int, int]]] = {
        c.id: [] for c in instance.platform.clusters
    }
    for tid, cid in cluster_of.items():
        e = instance.task_by_id(tid).on(cid).exec_time_ms
        per_cluster[cid].append((-e, tid))
    placements = []
    lists = []
    for c in instance.platform.clusters:
        entries = sorted(per_cluster[c.id])
        lists.append([-e for e, _ in entries])
        for rank, (_, tid) in enumerate(entries):
            placements.append(Placement(tid, rank // c.core_count + 1, c.id))
    lengths = _grouped_lengths(instance, lists)
    if lengths is None or sum(lengths) > instance.major_frame_ms:
        return None
    return Assignment.from_placements(instance, placements)


def _evaluate_placements(
    instance: Instance, objective: ObjectiveSpec, placements: Sequence[Placement]
) -> float:
    """Objective value of a complete placement list (no feasibility check)."""
    h = instance.major_frame_ms
    plat = instance.platform
    kind = objective.kind
    if kind is ObjectiveKind.FEASIBILITY_ONLY:
        return 0.0
    if kind in (ObjectiveKind.IDLE_MIN, ObjectiveKind.IDLE_MAX):
        processing = sum(
            instance.task_by_id(p.task_id).on(p.cluster).exec_time_ms
            for p in placements
        )
        return float(h * plat.total_cores - processing)

    wlen: dict[int, int] = {}
    wmaxb: dict[int, float] = {}
    wstar: dict[int, float] = {}
    sum_ae = 0.0
    for p in placements:
        tc = instance.task_by_id(p.task_id).on(p.cluster)
        wlen[p.window] = max(wlen.get(p.window, 0), tc.exec_time_ms)
        if kind is ObjectiveKind.SM_POWER:
            sum_ae += tc.activity_coef * tc.exec_time_ms
            prev = wmaxb.get(p.window)
            b = tc.offset_coef
            wmaxb[p.window] = b if prev is None else max(prev, b)
        else:
            beta = objective.coefficients.beta(p.cluster)
            wstar[p.window] = wstar.get(p.window, 0.0) + (
                tc.activity_coef * beta[0] + tc.offset_coef * beta[1]
            )
    if kind is ObjectiveKind.SM_POWER:
        off = sum(wlen[j] * wmaxb[j] for j in wlen)
        return plat.idle_power_watts + (sum_ae + off) / h
    return plat.idle_power_watts + sum(wlen[j] * wstar[j] for j in wlen) / h


def _heuristic_cluster_maps(
    instance: Instance,
    fix: Mapping[int, int],
    objective: ObjectiveSpec,
) -> list[dict[int, int]]:
    """Cheap complete cluster choices used to seed incumbents."""
    clusters = instance.platform.clusters
    kind = objective.kind

    def build(score) -> dict[int, int]:
        out = {}
        for t in instance.tasks:
            if t.id in fix:
                out[t.id] = fix[t.id]
            else:
                out[t.id] = min(clusters, key=lambda c: (score(t.on(c.id)), c.id)).id
        return out

    maps = [
        build(lambda tc: tc.exec_time_ms),
        build(lambda tc: tc.activity_coef * tc.exec_time_ms),
    ]
    if kind is ObjectiveKind.IDLE_MIN:
        maps.insert(0, build(lambda tc: -tc.exec_time_ms))
    if kind is ObjectiveKind.LR_UB_POWER:
        betas = objective.coefficients

        def star_cost(tc):
            beta = betas.beta(tc.cluster_id)
            return (tc.activity_coef * beta[0] + tc.offset_coef * beta[1]) * tc.exec_time_ms

        maps.insert(0, build(star_cost))

    # Balance-aware variant: place hardest tasks first, always onto the
    # cluster that keeps the grouped total window length smallest.
    order = sorted(
        instance.tasks,
        key=lambda t: (-min(tc.exec_time_ms for tc in t.per_cluster), t.id),
    )
    lists: list[list[int]] = [[] for _ in clusters]
    balanced: dict[int, int] = {}
    for t in order:
        candidates = [fix[t.id]] if t.id in fix else [c.id for c in clusters]
        best_cid, best_total = None, None
        for cid in candidates:
            ci = cid - 1
            e = t.on(cid).exec_time_ms
            insort(lists[ci], -e)
            lengths = _grouped_lengths(instance, [[-x for x in l] for l in lists])
            total = math.inf if lengths is None else sum(lengths)
            lists[ci].remove(-e)
            if best_total is None or total < best_total:
                best_cid, best_total = cid, total
        balanced[t.id] = best_cid
        insort(lists[best_cid - 1], -t.on(best_cid).exec_time_ms)
    maps.append(balanced)
    return maps


# ---------------------------------------------------------------------------
# Branch and bound over (window, cluster) placements: SM and LR-UB power


def _window_search(
    instance: Instance,
    objective: ObjectiveSpec,
    fix: Mapping[int, int],
    time_limit_ms: float | None,
    node_recorder: NodeRecorder | None,
) -> SearchResult:
    t_start = time.perf_counter()
    deadline = None if time_limit_ms is None else t_start + time_limit_ms / 1000.0
    plat = instance.platform
    m = len(plat.clusters)
    q = instance.max_windows
    h = instance.major_frame_ms
    n = len(instance.tasks)
    caps = [c.core_count for c in plat.clusters]
    p_idle = plat.idle_power_watts
    is_lrub = objective.kind is ObjectiveKind.LR_UB_POWER
    betas = objective.coefficients.betas if is_lrub else None

    # Branch on the hardest-to-place tasks first.
    def min_e(t):
        allowed = [fix[t.id] - 1] if t.id in fix else range(m)
        return min(t.per_cluster[ci].exec_time_ms for ci in allowed)

    ordered = sorted(instance.tasks, key=lambda t: (-min_e(t), t.id))
    tid = [t.id for t in ordered]
    allowed = [
        ((fix[t.id] - 1),) if t.id in fix else tuple(range(m)) for t in ordered
    ]
    exec_ms = [[tc.exec_time_ms for tc in t.per_cluster] for t in ordered]
    act_e = [
        [tc.activity_coef * tc.exec_time_ms for tc in t.per_cluster] for t in ordered
    ]
    off = [[tc.offset_coef for tc in t.per_cluster] for t in ordered]
    if is_lrub:
        unit = [
            [
                tc.activity_coef * betas[ci][0] + tc.offset_coef * betas[ci][1]
                for ci, tc in enumerate(t.per_cluster)
            ]
            for t in ordered
        ]

    # Suffix bounds over unassigned tasks. For SM every placement adds at
    # least the smallest activity energy; offsets of not-yet-placed tasks can
    # only lower the objective when negative, which the h-scaled slack covers.
    if is_lrub:
        incr = [
            min(
                (unit[p][ci] * exec_ms[p][ci]) if unit[p][ci] >= 0.0 else unit[p][ci] * h
                for ci in allowed[p]
            )
            for p in range(n)
        ]
    else:
        incr = [min(act_e[p][ci] for ci in allowed[p]) for p in range(n)]
        neg_b = [min(0.0, min(off[p][ci] for ci in allowed[p]) * h) for p in range(n)]
    suffix = [0.0] * (n + 1)
    for p in range(n - 1, -1, -1):
        suffix[p] = suffix[p + 1] + incr[p]
    if not is_lrub:
        suffix_neg = [0.0] * (n + 1)
        for p in range(n - 1, -1, -1):
            suffix_neg[p] = suffix_neg[p + 1] + neg_b[p]

    cnt = [[0] * m for _ in range(q)]
    wtotal = [0] * q
    wlen = [0] * q
    wmaxb = [0.0] * q
    wstar = [0.0] * q
    state = {"used": 0, "suml": 0, "sum_ae": 0.0, "true": 0.0, "safe": 0.0}
    # "true" accumulates the exact window offset (SM) or star (LR-UB) terms;
    # "safe" accumulates their admissible lower bounds (h-scaled when the
    # window term is negative and could still grow).

    def window_terms(j):
        if wtotal[j] == 0:
            return 0.0, 0.0
        s = wstar[j] if is_lrub else wmaxb[j]
        true_term = wlen[j] * s
        safe_term = true_term if s >= 0.0 else h * s
        return true_term, safe_term

    def bound_at(depth) -> float:
        slack = 0.0 if is_lrub else suffix_neg[depth]
        base = state["safe"] + suffix[depth] + slack
        if not is_lrub:
            base += state["sum_ae"]
        return p_idle + base / h

    incumbent: list = [None, math.inf]  # [placements, value]
    trail: list[tuple[int, int, int]] = []

    for cmap in _heuristic_cluster_maps(instance, fix, objective):
        asg = _grouped_assignment(instance, cmap)
        if asg is None:
            continue
        val = _evaluate_placements(instance, objective, asg.placements)
        if val < incumbent[1]:
            incumbent[0] = asg.placements
            incumbent[1] = val

    nodes = 0
    aborted = False
    root_bound = bound_at(0)

    def rec(depth: int):
        nonlocal nodes, aborted
        nodes += 1
        if deadline is not None and (nodes & _TIME_CHECK_MASK) == 0:
            if time.perf_counter() > deadline:
                aborted = True
        if aborted:
            return
        if node_recorder is not None:
            node_recorder(tuple(trail), bound_at(depth))
        if depth == n:
            value = p_idle + (state["true"] + (0.0 if is_lrub else state["sum_ae"])) / h
            if value < incumbent[1]:
                incumbent[0] = tuple(
                    Placement(t, j, k) for (t, j, k) in trail
                )
                incumbent[1] = value
            return

        options = []
        open_limit = min(state["used"] + 1, q)
        for ci in allowed[depth]:
            e = exec_ms[depth][ci]
            for j in range(open_limit):
                if cnt[j][ci] >= caps[ci]:
                    continue
                grow = e - wlen[j] if e > wlen[j] else 0
                if state["suml"] + grow > h:
                    continue
                newl = wlen[j] + grow
                if is_lrub:
                    news = wstar[j] + unit[depth][ci]
                    old_true, _ = window_terms(j)
                    delta = newl * news - old_true
                else:
                    b = off[depth][ci]
                    newb = b if wtotal[j] == 0 else max(wmaxb[j], b)
                    old_true, _ = window_terms(j)
                    delta = act_e[depth][ci] + (newl * newb - old_true)
                options.append((delta, ci, j, grow))
        options.sort(key=lambda o: (o[0], o[1], o[2]))

        for delta, ci, j, grow in options:
            old = (wlen[j], wmaxb[j], wstar[j], wtotal[j])
            old_true, old_safe = window_terms(j)
            cnt[j][ci] += 1
            wtotal[j] += 1
            wlen[j] += grow
            if is_lrub:
                wstar[j] += unit[depth][ci]
            else:
                b = off[depth][ci]
                wmaxb[j] = b if old[3] == 0 else max(wmaxb[j], b)
            new_true, new_safe = window_terms(j)
            opened = j == state["used"]
            state["used"] += 1 if opened else 0
            state["suml"] += grow
            state["sum_ae"] += 0.0 if is_lrub else act_e[depth][ci]
            state["true"] += new_true - old_true
            state["safe"] += new_safe - old_safe
            trail.append((tid[depth], j + 1, ci + 1))

            if incumbent[0] is None or bound_at(depth + 1) < incumbent[1] - _EPS:
                rec(depth + 1)

            trail.pop()
            cnt[j][ci] -= 1
            wlen[j], wmaxb[j], wstar[j], wtotal[j] = old
            state["used"] -= 1 if opened else 0
            state["suml"] -= grow
            state["sum_ae"] -= 0.0 if is_lrub else act_e[depth][ci]
            state["true"] -= new_true - old_true
            state["safe"] -= new_safe - old_safe
            if aborted:
                return

    rec(0)
    elapsed = (time.perf_counter() - t_start) * 1000.0
    if incumbent[0] is not None:
        assignment = Assignment.from_placements(instance, incumbent[0])
        if aborted:
            return SearchResult(
                SearchStatus.FEASIBLE_TIMEOUT, assignment, incumbent[1],
                root_bound, nodes, elapsed,
            )
        return SearchResult(
            SearchStatus.OPTIMAL, assignment, incumbent[1], incumbent[1], nodes, elapsed
        )
    if aborted:
        return SearchResult(
            SearchStatus.UNKNOWN_TIMEOUT, None, None, root_bound, nodes, elapsed
        )
    return SearchResult(SearchStatus.INFEASIBLE, None, None, None, nodes, elapsed)


# ---------------------------------------------------------------------------
# Branch and bound over cluster choices: idle time and feasibility


def _cluster_search(
    instance: Instance,
    objective: ObjectiveSpec,
    fix: Mapping[int, int],
    time_limit_ms: float | None,
) -> SearchResult:
    t_start = time.perf_counter()
    deadline = None if time_limit_ms is None else t_start + time_limit_ms / 1000.0
    plat = instance.platform
    m = len(plat.clusters)
    q = instance.max_windows
    h = instance.major_frame_ms
    total_cores = plat.total_cores
    idle_const = h * total_cores
    # Internal objective: minimize the signed processing time.
    sign = 1 if objective.kind is ObjectiveKind.IDLE_MAX else -1

    free = [t for t in instance.tasks if t.id not in fix]
    free.sort(
        key=lambda t: (
            -(max(tc.exec_time_ms for tc in t.per_cluster)
              - min(tc.exec_time_ms for tc in t.per_cluster)),
            -min(tc.exec_time_ms for tc in t.per_cluster),
            t.id,
        )
    )
    n_free = len(free)
    exec_ms = [[tc.exec_time_ms for tc in t.per_cluster] for t in free]
    # Cluster order tried cheapest-first for the internal minimization.
    choice_order = [
        sorted(range(m), key=lambda ci: (sign * exec_ms[p][ci], ci))
        for p in range(n_free)
    ]
    suffix = [0] * (n_free + 1)
    for p in range(n_free - 1, -1, -1):
        suffix[p] = suffix[p + 1] + min(sign * e for e in exec_ms[p])

    lists: list[list[int]] = [[] for _ in range(m)]  # negated times, ascending
    counts = [0] * m
    base = 0
    for tid, cid in fix.items():
        e = instance.task_by_id(tid).on(cid).exec_time_ms
        insort(lists[cid - 1], -e)
        counts[cid - 1] += 1
        base += sign * e

    def grouped_total() -> int | None:
        lengths = _grouped_lengths(instance, [[-x for x in l] for l in lists])
        return None if lengths is None else sum(lengths)

    caps_total = [q * c.core_count for c in plat.clusters]
    for ci in range(m):
        if counts[ci] > caps_total[ci]:
            return SearchResult(
                SearchStatus.INFEASIBLE, None, None, None, 1,
                (time.perf_counter() - t_start) * 1000.0,
            )
    start_total = grouped_total()
    if start_total is None or start_total > h:
        return SearchResult(
            SearchStatus.INFEASIBLE, None, None, None, 1,
            (time.perf_counter() - t_start) * 1000.0,
        )

    incumbent: list = [None, math.inf]  # [cluster map, signed processing]
    for cmap in _heuristic_cluster_maps(instance, fix, objective):
        asg = _grouped_assignment(instance, cmap)
        if asg is None:
            continue
        val = sum(
            sign * instance.task_by_id(t.id).on(cmap[t.id]).exec_time_ms
            for t in instance.tasks
        )
        if val < incumbent[1]:
            incumbent[0] = dict(cmap)
            incumbent[1] = val

    current = dict(fix)
    nodes = 0
    aborted = False
    root_bound = base + suffix[0]

    def rec(depth: int, acc: int):
        nonlocal nodes, aborted
        nodes += 1
        if deadline is not None and (nodes & _TIME_CHECK_MASK) == 0:
            if time.perf_counter() > deadline:
                aborted = True
        if aborted:
            return
        if depth == n_free:
            if acc < incumbent[1]:
                incumbent[0] = dict(current)
                incumbent[1] = acc
            return
        t = free[depth]
        for ci in choice_order[depth]:
            if counts[ci] + 1 > caps_total[ci]:
                continue
            contribution = sign * exec_ms[depth][ci]
            if acc + contribution + suffix[depth + 1] >= incumbent[1]:
                continue
            e = exec_ms[depth][ci]
            insort(lists[ci], -e)
            counts[ci] += 1
            current[t.id] = ci + 1
            total = grouped_total()
            if total is not None and total <= h:
                rec(depth + 1, acc + contribution)
            del current[t.id]
            counts[ci] -= 1
            lists[ci].remove(-e)
            if aborted:
                return

    rec(0, base)
    elapsed = (time.perf_counter() - t_start) * 1000.0

    def to_idle(signed_processing: float) -> float:
        return float(idle_const - sign * signed_processing)

    if incumbent[0] is not None:
        assignment = _grouped_assignment(instance, incumbent[0])
        value = to_idle(incumbent[1])
        if aborted:
            return SearchResult(
                SearchStatus.FEASIBLE_TIMEOUT, assignment, value,
                to_idle(root_bound), nodes, elapsed,
            )
        return SearchResult(
            SearchStatus.OPTIMAL, assignment, value, value, nodes, elapsed
        )
    if aborted:
        return SearchResult(
            SearchStatus.UNKNOWN_TIMEOUT, None, None, to_idle(root_bound), nodes, elapsed
        )
    return SearchResult(SearchStatus.INFEASIBLE, None, None, None, nodes, elapsed)


def _feasibility_search(
    instance: Instance,
    fix: Mapping[int, int],
    time_limit_ms: float | None,
) -> SearchResult:
    t_start = time.perf_counter()
    deadline = None if time_limit_ms is None else t_start + time_limit_ms / 1000.0
    plat = instance.platform
    m = len(plat.clusters)
    q = instance.max_windows
    h = instance.major_frame_ms

    def done(status, assignment=None, nodes=0):
        elapsed = (time.perf_counter() - t_start) * 1000.0
        obj = 0.0 if assignment is not None else None
        return SearchResult(status, assignment, obj, obj, nodes, elapsed)

    # Necessary conditions that settle most calls immediately.
    for t in instance.tasks:
        candidates = [fix[t.id]] if t.id in fix else [c.id for c in plat.clusters]
        if min(t.on(cid).exec_time_ms for cid in candidates) > h:
            return done(SearchStatus.INFEASIBLE)
    caps_total = {c.id: q * c.core_count for c in plat.clusters}
    forced = {c.id: 0 for c in plat.clusters}
    for tid, cid in fix.items():
        forced[cid] += 1
        if forced[cid] > caps_total[cid]:
            return done(SearchStatus.INFEASIBLE)

    objective = ObjectiveSpec(ObjectiveKind.FEASIBILITY_ONLY)
    for cmap in _heuristic_cluster_maps(instance, fix, objective):
        asg = _grouped_assignment(instance, cmap)
        if asg is not None:
            return done(SearchStatus.OPTIMAL, asg, nodes=1)

    # Exhaustive search over cluster choices for the free tasks.
    free = sorted(
        (t for t in instance.tasks if t.id not in fix),
        key=lambda t: (-min(tc.exec_time_ms for tc in t.per_cluster), t.id),
    )
    n_free = len(free)
    exec_ms = [[tc.exec_time_ms for tc in t.per_cluster] for t in free]
    choice_order = [
        sorted(range(m), key=lambda ci: (exec_ms[p][ci] / plat.clusters[ci].core_count, ci))
        for p in range(n_free)
    ]
    lists: list[list[int]] = [[] for _ in range(m)]
    counts = [0] * m
    for tid, cid in fix.items():
        insort(lists[cid - 1], -instance.task_by_id(tid).on(cid).exec_time_ms)
        counts[cid - 1] += 1
    current = dict(fix)
    caps_list = [caps_total[c.id] for c in plat.clusters]

    nodes = 0
    aborted = False
    witness: list = [None]

    def rec(depth: int) -> bool:
        nonlocal nodes, aborted
        nodes += 1
        if deadline is not None and (nodes & _TIME_CHECK_MASK) == 0:
            if time.perf_counter() > deadline:
                aborted = True
        if aborted:
            return False
        lengths = _grouped_lengths(instance, [[-x for x in l] for l in lists])
        if lengths is None or sum(lengths) > h:
            return False
        if depth == n_free:
            witness[0] = dict(current)
            return True
        t = free[depth]
        for ci in choice_order[depth]:
            if counts[ci] + 1 > caps_list[ci]:
                continue
            e = exec_ms[depth][ci]
            insort(lists[ci], -e)
            counts[ci] += 1
            current[t.id] = ci + 1
            found = rec(depth + 1)
            del current[t.id]
            counts[ci] -= 1
            lists[ci].remove(-e)
            if found:
                return True
            if aborted:
                return False
        return False

    found = rec(0)
    if found:
        return done(SearchStatus.OPTIMAL, _grouped_assignment(instance, witness[0]), nodes)
    if aborted:
        return done(SearchStatus.UNKNOWN_TIMEOUT, nodes=nodes)
    return done(SearchStatus.INFEASIBLE, nodes=nodes)


def solve(
    instance: Instance,
    objective: ObjectiveSpec,
    partial: PartialFix | None = None,
    time_limit_ms: float | None = None,
    node_recorder: NodeRecorder | None = None,
) -> SearchResult:
    """Exact search for the best assignment under the given objective.

    Enforces per-window cluster capacity, window-length dominance, the frame
    budget and any cluster fixes from the partial. Feasibility-only stops at
    the first feasible assignment. The returned lower_bound is proven: it
    equals the objective at optimality and falls back to the root bound on
    timeout (for idle-time maximization it is an upper bound, reported in
    the same field).

    node_recorder, when given, is invoked on every node of the SM / LR-UB
    search with the placed prefix and the node's bound; it exists for bound
    auditing and is ignored by the cluster-space searches.
    """
    if time_limit_ms is not None and time_limit_ms < 1:
        raise ValueError("time_limit_ms must be at least 1")
    fix = _check_inputs(instance, objective, partial)
    if objective.kind is ObjectiveKind.FEASIBILITY_ONLY:
        return _feasibility_search(instance, fix, time_limit_ms)
    if objective.kind in (ObjectiveKind.IDLE_MIN, ObjectiveKind.IDLE_MAX):
        return _cluster_search(instance, objective, fix, time_limit_ms)
    return _window_search(instance, objective, fix, time_limit_ms, node_recorder)


# ---------------------------------------------------------------------------
# Exhaustive oracle

_BRUTE_MAX_TASKS = 10
_BRUTE_MAX_WINDOWS = 5
_brute_cache: dict = {}


def _brute_table(
    instance: Instance,
    fixed: tuple[tuple[int, int], ...],
    betas: tuple[tuple[float, ...], ...] | None,
) -> dict:
    """Enumerate every placement (canonical window order) and keep the optima."""
    plat = instance.platform
    m = len(plat.clusters)
    q = instance.max_windows
    h = instance.major_frame_ms
    n = len(instance.tasks)
    caps = [c.core_count for c in plat.clusters]
    p_idle = plat.idle_power_watts
    total_cores = plat.total_cores
    fix = dict(fixed)

    ordered = sorted(
        instance.tasks,
        key=lambda t: (-max(tc.exec_time_ms for tc in t.per_cluster), t.id),
    )
    tid = [t.id for t in ordered]
    allowed = [((fix[t.id] - 1),) if t.id in fix else tuple(range(m)) for t in ordered]
    exec_ms = [[tc.exec_time_ms for tc in t.per_cluster] for t in ordered]
    act_e = [[tc.activity_coef * tc.exec_time_ms for tc in t.per_cluster] for t in ordered]
    off = [[tc.offset_coef for tc in t.per_cluster] for t in ordered]
    unit = None
    if betas is not None:
        unit = [
            [
                tc.activity_coef * betas[ci][0] + tc.offset_coef * betas[ci][1]
                for ci, tc in enumerate(t.per_cluster)
            ]
            for t in ordered
        ]

    cnt = [[0] * m for _ in range(q)]
    wtotal = [0] * q
    wlen = [0] * q
    wmaxb = [0.0] * q
    wstar = [0.0] * q
    trail: list[tuple[int, int, int]] = []

    table = {
        "feasible": None,
        "sm": [math.inf, None],
        "lr_ub": [math.inf, None],
        "idle_min": [math.inf, None],
        "idle_max": [-math.inf, None],
        "leaves": 0,
    }

    def rec(depth, used, suml, sum_ae, sum_e, off_sum, star_sum):
        if depth == n:
            table["leaves"] += 1
            snapshot = None
            if table["feasible"] is None:
                snapshot = tuple(trail)
                table["feasible"] = snapshot
            sm_val = p_idle + (sum_ae + off_sum) / h
            if sm_val < table["sm"][0]:
                snapshot = snapshot or tuple(trail)
                table["sm"] = [sm_val, snapshot]
            if unit is not None:
                lu_val = p_idle + star_sum / h
                if lu_val < table["lr_ub"][0]:
                    snapshot = snapshot or tuple(trail)
                    table["lr_ub"] = [lu_val, snapshot]
            t_idle = float(h * total_cores - sum_e)
            if t_idle < table["idle_min"][0]:
                snapshot = snapshot or tuple(trail)
                table["idle_min"] = [t_idle, snapshot]
            if t_idle > table["idle_max"][0]:
                snapshot = snapshot or tuple(trail)
                table["idle_max"] = [t_idle, snapshot]
            return
        open_limit = used + 1 if used < q else q
        for ci in allowed[depth]:
            e = exec_ms[depth][ci]
            for j in range(open_limit):
                if cnt[j][ci] >= caps[ci]:
                    continue
                grow = e - wlen[j] if e > wlen[j] else 0
                if suml + grow > h:
                    continue
                old_len, old_b, old_star, old_total = wlen[j], wmaxb[j], wstar[j], wtotal[j]
                newb = off[depth][ci] if old_total == 0 else max(old_b, off[depth][ci])
                new_off_sum = off_sum - old_len * (old_b if old_total else 0.0) + (old_len + grow) * newb
                new_star_sum = star_sum
                news = old_star
                if unit is not None:
                    news = old_star + unit[depth][ci]
                    new_star_sum = star_sum - old_len * old_star + (old_len + grow) * news
                cnt[j][ci] += 1
                wtotal[j] += 1
                wlen[j] += grow
                wmaxb[j] = newb
                wstar[j] = news
                trail.append((tid[depth], j + 1, ci + 1))
                rec(
                    depth + 1,
                    used + (1 if j == used else 0),
                    suml + grow,
                    sum_ae + act_e[depth][ci],
                    sum_e + e,
                    new_off_sum,
                    new_star_sum,
                )
                trail.pop()
                cnt[j][ci] -= 1
                wlen[j], wmaxb[j], wstar[j], wtotal[j] = old_len, old_b, old_star, old_total

    rec(0, 0, 0, 0.0, 0, 0.0, 0.0)
    return table


def brute_force_optimum(
    instance: Instance,
    objective: ObjectiveSpec,
    partial: PartialFix | None = None,
) -> SearchResult:
    """Exhaustively enumerate all placements and return the exact optimum.

    Guarded to small instances (at most 10 tasks and 5 windows). Windows are
    enumerated in canonical first-use order, which fully removes the window
    interchange symmetry. Results are cached per (instance, partial,
    coefficients), so asking for several objectives on the same instance
    costs one enumeration.
    """
    t_start = time.perf_counter()
    n = len(instance.tasks)
    if n > _BRUTE_MAX_TASKS or instance.max_windows > _BRUTE_MAX_WINDOWS:
        raise ValueError(
            f"brute force is guarded to n <= {_BRUTE_MAX_TASKS} and "
            f"q <= {_BRUTE_MAX_WINDOWS}; got n={n}, q={instance.max_windows}"
        )
    fix = _check_inputs(instance, objective, partial)
    fixed = tuple(sorted(fix.items()))
    betas = objective.coefficients.betas if objective.coefficients else None
    if objective.kind is ObjectiveKind.LR_UB_POWER and betas is None:
        raise ValueError("the LR upper-bound objective requires regression coefficients")

    key = (instance, fixed, betas)
    table = _brute_cache.get(key)
    if table is None:
        table = _brute_table(instance, fixed, betas)
        if len(_brute_cache) > 128:
            _brute_cache.clear()
        _brute_cache[key] = table

    def result(status, placements=None, value=None):
        elapsed = (time.perf_counter() - t_start) * 1000.0
        assignment = (
            Assignment.from_placements(instance, [Placement(*p) for p in placements])
            if placements is not None
            else None
        )
        return SearchResult(
            status, assignment, value, value, table["leaves"], elapsed
        )

    if table["feasible"] is None:
        return result(SearchStatus.INFEASIBLE)
    if objective.kind is ObjectiveKind.FEASIBILITY_ONLY:
        return result(SearchStatus.OPTIMAL, table["feasible"], 0.0)
    slot = {
        ObjectiveKind.SM_POWER: "sm",
        ObjectiveKind.LR_UB_POWER: "lr_ub",
        ObjectiveKind.IDLE_MIN: "idle_min",
        ObjectiveKind.IDLE_MAX: "idle_max",
    }[objective.kind]
    value, placements = table[slot]
    return result(SearchStatus.OPTIMAL, placements, value)
