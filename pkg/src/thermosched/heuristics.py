"""Black-box genetic search and a greedy heuristic over task allocations.

The genetic algorithm encodes the whole allocation in one real gene per
task: the unit interval splits evenly into cluster sub-intervals, each of
which splits evenly into window sub-intervals. A repair pass turns a genome
into a feasible assignment where possible (two cyclic sweeps over the
windows, bumping tasks whose preferred slot is full to the next window);
genomes that cannot be repaired are discarded by ranking them worst.

The greedy heuristic fixes one task at a time, most energy-hungry first, to
the cheapest cluster that still leaves the rest of the instance completable,
using the exact feasibility oracle from the solver.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from typing import IO, Sequence, Union

import numpy as np

from .exact import ObjectiveKind, ObjectiveSpec, PartialFix, SearchStatus, solve
from .model import Assignment, Instance, Placement, _open_for
from .power import PowerModel, RegressionCoefficients, schedule_power

_GENE_MAX = 1.0 - 1e-12  # genes live in [0, 1)


@dataclass(frozen=True)
class DecodedGene:
    """Preferred (cluster, window) of one task plus its within-window rank."""

    cluster: int
    window: int
    preference: float


@dataclass(frozen=True)
class GaConfig:
    """Knobs of the genetic algorithm.

    population_size defaults to 50 per task when left unset. Mutation picks
    each gene with probability 1/n and perturbs it by a signed sum of
    inverse powers of two scaled by bga_mutation_range (each of
    bga_precision_bits terms participating with probability 1/bits).
    A restart with a fresh random population happens after
    stall_generations generations without improvement. max_generations
    bounds the total generation count across restarts; runs limited only by
    wall-clock time are seed-deterministic in their evolution but may be cut
    at different generations, so reproducibility tests should set
    max_generations.
    """

    crossover_rate: float = 0.8
    mutation_rate: float = 0.2
    population_size: int | None = None
    elite_discard_fraction: float = 0.10
    time_limit_ms: float | None = None
    rng_seed: int = 0
    bga_mutation_range: float = 0.1
    bga_precision_bits: int = 16
    max_generations: int | None = None
    stall_generations: int = 20


def ga_config_from_dict(doc: dict, **overrides) -> GaConfig:
    """Build a GaConfig from a JSON-style document; overrides win.

    Unknown fields are ignored so configs can carry annotations. Override
    values of None are dropped, which lets callers pass through unset CLI
    flags directly.
    """
    fields = {f.name for f in GaConfig.__dataclass_fields__.values()}
    merged = {k: v for k, v in doc.items() if k in fields}
    merged.update({k: v for k, v in overrides.items() if v is not None and k in fields})
    return GaConfig(**merged)


def load_ga_config(path_or_file: Union[str, IO[str]], **overrides) -> GaConfig:
    import json

    f, owned = _open_for(path_or_file, "r")
    try:
        doc = json.load(f)
    finally:
        if owned:
            f.close()
    if not isinstance(doc, dict):
        raise ValueError("GA config document must be a JSON object")
    return ga_config_from_dict(doc, **overrides)


@dataclass(frozen=True)
class TracePoint:
    generation: int
    restart: int
    best_fitness: float


@dataclass
class GaResult:
    assignment: Assignment | None
    fitness: float
    trace: tuple[TracePoint, ...]
    generations: int
    restarts: int
    elapsed_ms: float

    @property
    def feasible(self) -> bool:
        return self.assignment is not None


def decode(genome: Sequence[float], instance: Instance) -> list[DecodedGene]:
    """Map genes in [0, 1) to preferred (cluster, window) pairs.

    cluster = floor(x * m) + 1; the remainder within the cluster
    sub-interval, rescaled by q * m, gives the preference in [0, q) whose
    integer part selects the window. Total on the whole of [0, 1)
    including values within rounding distance of sub-interval boundaries.
    """
    m = len(instance.platform.clusters)
    q = instance.max_windows
    if len(genome) != len(instance.tasks):
        raise ValueError(
            f"genome length {len(genome)} does not match task count "
            f"{len(instance.tasks)}"
        )
    out = []
    for x in genome:
        x = float(x)
        if not 0.0 <= x < 1.0:
            raise ValueError(f"gene {x} outside [0, 1)")
        ci = min(int(x * m), m - 1)
        pref = (x - ci / m) * q * m
        pref = min(max(pref, 0.0), math.nextafter(float(q), 0.0))
        window = min(int(pref), q - 1) + 1
        out.append(DecodedGene(cluster=ci + 1, window=window, preference=pref))
    return out


def reconstruct(genome: Sequence[float], instance: Instance) -> Assignment | None:
    """Repair a genome into a feasible assignment, or report failure as None.

    Sweeps the windows cyclically twice. In each visited window the still
    unassigned tasks preferring it are processed by ascending preference
    (ties on task id); a task is placed when its preferred cluster has a
    free core there, otherwise its preference moves to the next window with
    preference reset to zero. Fails when a task stays unassigned or the
    derived window lengths exceed the major frame.
    """
    genes = decode(genome, instance)
    q = instance.max_windows
    tasks = instance.tasks
    n = len(tasks)
    capacity = {
        (j, c.id): c.core_count
        for j in range(1, q + 1)
        for c in instance.platform.clusters
    }
    window = [g.window for g in genes]
    preference = [g.preference for g in genes]
    assigned = [False] * n
    placements: list[Placement] = []

    for iteration in range(2 * q):
        current = iteration % q + 1
        todo = [i for i in range(n) if not assigned[i] and window[i] == current]
        todo.sort(key=lambda i: (preference[i], tasks[i].id))
        for i in todo:
            cid = genes[i].cluster
            if capacity[(current, cid)] > 0:
                capacity[(current, cid)] -= 1
                assigned[i] = True
                placements.append(Placement(tasks[i].id, current, cid))
            else:
                window[i] = current % q + 1
                preference[i] = 0.0

    if not all(assigned):
        return None
    assignment = Assignment.from_placements(instance, placements)
    if assignment.total_window_length_ms > instance.major_frame_ms:
        return None
    return assignment


def write_fitness_trace_csv(
    trace: Sequence[TracePoint], path_or_file: Union[str, IO[str]]
) -> None:
    f, owned = _open_for(path_or_file, "w")
    try:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["generation", "restart", "best_fitness"])
        for p in trace:
            writer.writerow([p.generation, p.restart, repr(p.best_fitness)])
    finally:
        if owned:
            f.close()


def _two_point_crossover(rng: np.random.Generator, p1: np.ndarray, p2: np.ndarray):
    n = len(p1)
    a, b = sorted(rng.integers(0, n + 1, size=2))
    child = p1.copy()
    child[a:b] = p2[a:b]
    return child


def _bga_mutate(
    rng: np.random.Generator, vec: np.ndarray, mut_range: float, bits: int
) -> None:
    n = len(vec)
    powers = 2.0 ** -np.arange(bits)
    picked = np.flatnonzero(rng.random(n) < 1.0 / n)
    for idx in picked:
        alpha = rng.random(bits) < 1.0 / bits
        delta = mut_range * float(powers[alpha].sum())
        if rng.random() < 0.5:
            delta = -delta
        vec[idx] = min(max(vec[idx] + delta, 0.0), _GENE_MAX)


def run_ga(
    instance: Instance,
    model: Union[PowerModel, str],
    config: GaConfig,
    coefficients: RegressionCoefficients | None = None,
) -> GaResult:
    """Evolve allocations against the SM or LR power model.

    Selection is by uniform ranking: the worst elite_discard_fraction of
    each generation is discarded and parents are drawn uniformly from the
    survivors. Reconstruction failures rank after every finite fitness. On
    stalling the population restarts from fresh random genomes; the best
    assignment ever seen is returned, or an infeasible result when no
    genome ever reconstructed.
    """
    model = PowerModel(model)
    if model is PowerModel.LR_UB:
        raise ValueError("the genetic search uses the SM or LR model")
    if model is PowerModel.LR and coefficients is None:
        raise ValueError("the LR fitness model requires regression coefficients")
    if config.time_limit_ms is None and config.max_generations is None:
        raise ValueError("set time_limit_ms or max_generations (or both)")
    if not 0.0 <= config.crossover_rate <= 1.0 or not 0.0 <= config.mutation_rate <= 1.0:
        raise ValueError("rates must lie in [0, 1]")

    n = len(instance.tasks)
    pop_size = config.population_size if config.population_size is not None else 50 * n
    if pop_size < 2:
        raise ValueError("population_size must be at least 2")
    keep = max(2, pop_size - int(pop_size * config.elite_discard_fraction))

    rng = np.random.default_rng(config.rng_seed)
    t_start = time.perf_counter()
    deadline = (
        None if config.time_limit_ms is None else t_start + config.time_limit_ms / 1000.0
    )

    def fitness_of(vec: np.ndarray) -> float:
        asg = reconstruct(vec, instance)
        if asg is None:
            return math.inf
        return schedule_power(instance, asg, model, coefficients).watts

    best_fitness = math.inf
    best_assignment: Assignment | None = None
    trace: list[TracePoint] = []
    total_generations = 0
    restart = 0
    stop = False

    while not stop:
        population = rng.random((pop_size, n))
        restart_best = math.inf
        stall = 0
        generation = 0
        while True:
            fitness = np.array([fitness_of(ind) for ind in population])
            i_best = int(np.argmin(fitness))
            if fitness[i_best] < restart_best:
                restart_best = float(fitness[i_best])
                stall = 0
                if restart_best < best_fitness:
                    best_fitness = restart_best
                    best_assignment = reconstruct(population[i_best], instance)
            else:
                stall += 1
            trace.append(TracePoint(generation, restart, restart_best))
            total_generations += 1
            generation += 1

            if config.max_generations is not None and total_generations >= config.max_generations:
                stop = True
            if deadline is not None and time.perf_counter() >= deadline:
                stop = True
            if stop:
                break
            if stall >= config.stall_generations:
                break  # converged; restart from scratch

            order = np.argsort(fitness, kind="stable")
            survivors = population[order[:keep]]
            parents_a = survivors[rng.integers(0, keep, size=pop_size)]
            parents_b = survivors[rng.integers(0, keep, size=pop_size)]
            children = np.empty_like(population)
            for i in range(pop_size):
                if rng.random() < config.crossover_rate:
                    children[i] = _two_point_crossover(rng, parents_a[i], parents_b[i])
                else:
                    children[i] = parents_a[i]
                if rng.random() < config.mutation_rate:
                    _bga_mutate(
                        rng, children[i], config.bga_mutation_range,
                        config.bga_precision_bits,
                    )
            population = children
        restart += 1

    elapsed = (time.perf_counter() - t_start) * 1000.0
    return GaResult(
        assignment=best_assignment,
        fitness=best_fitness,
        trace=tuple(trace),
        generations=total_generations,
        restarts=restart,
        elapsed_ms=elapsed,
    )


def greedy(
    instance: Instance, feasibility_time_limit_ms: float | None = None
) -> Assignment | None:
    """Fix tasks to clusters one by one, cheapest energy first.

    Tasks are processed by non-increasing max-over-clusters expected energy
    (activity_coef * exec_time_ms); for each task the clusters are tried by
    non-decreasing expected energy, and a fix is committed only when the
    feasibility oracle confirms the remaining tasks can still be placed.
    Returns the assignment of the last oracle call, which covers all tasks,
    or None when no complete fixing exists.
    """

    def energy(task, cid):
        tc = task.on(cid)
        return tc.activity_coef * tc.exec_time_ms

    cluster_ids = [c.id for c in instance.platform.clusters]
    order = sorted(
        instance.tasks,
        key=lambda t: (-max(energy(t, cid) for cid in cluster_ids), t.id),
    )
    fixed: dict[int, int] = {}
    last: Assignment | None = None
    feas = ObjectiveSpec(ObjectiveKind.FEASIBILITY_ONLY)
    for task in order:
        placed = False
        for cid in sorted(cluster_ids, key=lambda c: (energy(task, c), c)):
            trial = dict(fixed)
            trial[task.id] = cid
            result = solve(
                instance, feas, PartialFix.of(trial),
                time_limit_ms=feasibility_time_limit_ms,
            )
            if result.status is SearchStatus.OPTIMAL:
                fixed[task.id] = cid
                last = result.assignment
                placed = True
                break
        if not placed:
            return None
    return last
