import random

import pytest

import helpers
import thermosched as ts
from thermosched.exact import ObjectiveKind, ObjectiveSpec, PartialFix, SearchStatus

ALL_KINDS = (
    ObjectiveKind.SM_POWER,
    ObjectiveKind.LR_UB_POWER,
    ObjectiveKind.IDLE_MIN,
    ObjectiveKind.IDLE_MAX,
)


def spec(kind):
    return ObjectiveSpec(kind, helpers.MEK_COEFF)


def single_core_pair_instance():
    """Two tasks, two single-core clusters, one window; e = [[10, 5], [10, 5]]."""
    plat = ts.Platform(
        clusters=(
            ts.Cluster(id=1, core_count=1, label="a", frequency_mhz=1000),
            ts.Cluster(id=2, core_count=1, label="b", frequency_mhz=1000),
        ),
        idle_power_watts=1.0,
    )
    tasks = tuple(
        ts.Task(i, f"t{i}", (
            ts.TaskCharacteristics(1, 10, 0.5, 0.5),
            ts.TaskCharacteristics(2, 5, 0.5, 0.5),
        ))
        for i in (1, 2)
    )
    return ts.Instance(plat, tasks, 10, 1)


class TestSolveBasics:
    def test_feasibility_stops_at_first_feasible(self):
        instance = helpers.small_random_instance(0)
        result = ts.solve(instance, ObjectiveSpec(ObjectiveKind.FEASIBILITY_ONLY))
        assert result.status is SearchStatus.OPTIMAL
        assert ts.check_feasible(instance, result.assignment).feasible
        assert result.objective_value == 0.0

    def test_idle_min_picks_longest_feasible_times(self):
        instance = single_core_pair_instance()
        result = ts.solve(instance, spec(ObjectiveKind.IDLE_MIN))
        assert result.status is SearchStatus.OPTIMAL
        # one task per cluster; both task-to-cluster matchings give 10 + 5
        assert result.objective_value == pytest.approx(10 * 2 - 15)
        clusters = sorted(p.cluster for p in result.assignment.placements)
        assert clusters == [1, 2]

    def test_sm_matches_brute_force_on_eight_tasks(self):
        instance = helpers.small_random_instance(100, n=8)
        sm = spec(ObjectiveKind.SM_POWER)
        exact = ts.solve(instance, sm)
        oracle = ts.brute_force_optimum(instance, sm)
        assert exact.status == oracle.status
        if exact.status is SearchStatus.OPTIMAL:
            assert exact.objective_value == pytest.approx(oracle.objective_value, abs=1e-9)

    def test_optimal_bound_equals_objective(self):
        instance = helpers.small_random_instance(4)
        for kind in ALL_KINDS:
            result = ts.solve(instance, spec(kind))
            if result.status is SearchStatus.OPTIMAL:
                assert result.lower_bound == pytest.approx(result.objective_value, abs=1e-9)

    def test_reported_sm_objective_matches_schedule_power(self):
        for seed in range(8):
            instance = helpers.small_random_instance(seed)
            result = ts.solve(instance, spec(ObjectiveKind.SM_POWER))
            if result.status is SearchStatus.OPTIMAL:
                recomputed = ts.schedule_power(instance, result.assignment, "sm").watts
                assert result.objective_value == pytest.approx(recomputed, abs=1e-9)

    def test_invalid_partial_fix(self):
        instance = helpers.small_random_instance(1)
        with pytest.raises(ValueError):
            ts.solve(instance, spec(ObjectiveKind.SM_POWER), PartialFix.of({999: 1}))
        with pytest.raises(ValueError):
            ts.solve(instance, spec(ObjectiveKind.SM_POWER), PartialFix.of({1: 99}))

    def test_lr_ub_requires_coefficients(self):
        instance = helpers.small_random_instance(1)
        with pytest.raises(ValueError):
            ts.solve(instance, ObjectiveSpec(ObjectiveKind.LR_UB_POWER))

    def test_rejects_sub_millisecond_time_limit(self):
        instance = helpers.small_random_instance(1)
        with pytest.raises(ValueError, match="time_limit_ms"):
            ts.solve(instance, spec(ObjectiveKind.SM_POWER), time_limit_ms=0)

    def test_timeout_keeps_valid_bound(self):
        instance = helpers.small_random_instance(2, n=8, q_max=4, kappa_lo=1.5, kappa_hi=1.6)
        sm = spec(ObjectiveKind.SM_POWER)
        limited = ts.solve(instance, sm, time_limit_ms=1)
        full = ts.solve(instance, sm)
        assert limited.status in (
            SearchStatus.OPTIMAL,
            SearchStatus.FEASIBLE_TIMEOUT,
            SearchStatus.UNKNOWN_TIMEOUT,
        )
        if limited.status is SearchStatus.FEASIBLE_TIMEOUT:
            assert limited.lower_bound <= full.objective_value + 1e-9
            assert limited.objective_value >= full.objective_value - 1e-9

    def test_result_document(self):
        instance = helpers.small_random_instance(3)
        result = ts.solve(instance, spec(ObjectiveKind.SM_POWER))
        doc = result.to_dict()
        assert doc["status"] == result.status.value
        assert set(doc) == {
            "status", "objective_value", "lower_bound",
            "nodes_explored", "elapsed_ms", "assignment",
        }


class TestBruteForce:
    def test_single_placement(self):
        plat = ts.Platform(
            clusters=(ts.Cluster(id=1, core_count=1, label="only", frequency_mhz=1000),),
            idle_power_watts=2.0,
        )
        tasks = (ts.Task(1, "t", (ts.TaskCharacteristics(1, 40, 1.0, 0.5),)),)
        instance = ts.Instance(plat, tasks, 100, 1)
        result = ts.brute_force_optimum(instance, ObjectiveSpec(ObjectiveKind.SM_POWER))
        assert result.status is SearchStatus.OPTIMAL
        # unique placement: activity 1.0 * 40 / 100 plus offset 0.5 * 40 / 100
        assert result.objective_value == pytest.approx(2.0 + (40 + 0.5 * 40) / 100)
        assert result.objective_value == pytest.approx(
            ts.schedule_power(instance, result.assignment, "sm").watts, abs=1e-9
        )

    def test_pigeonhole_infeasible(self):
        plat = ts.Platform(
            clusters=(ts.Cluster(id=1, core_count=1, label="only", frequency_mhz=1000),),
            idle_power_watts=0.0,
        )
        tasks = tuple(
            ts.Task(i, f"t{i}", (ts.TaskCharacteristics(1, 10, 0.1, 0.1),))
            for i in (1, 2)
        )
        instance = ts.Instance(plat, tasks, 100, 1)
        result = ts.brute_force_optimum(instance, ObjectiveSpec(ObjectiveKind.FEASIBILITY_ONLY))
        assert result.status is SearchStatus.INFEASIBLE

    def test_size_guard(self):
        instance = helpers.small_random_instance(5, n=8)
        big = helpers.with_windows(instance, 8)
        with pytest.raises(ValueError, match="guard"):
            ts.brute_force_optimum(big, ObjectiveSpec(ObjectiveKind.SM_POWER))


class TestOracleAgreement:
    def test_all_kinds_match_brute_force(self):
        for seed in range(25):
            instance = helpers.small_random_instance(seed)
            for kind in ALL_KINDS:
                oracle = ts.brute_force_optimum(instance, spec(kind))
                exact = ts.solve(instance, spec(kind))
                assert exact.status == oracle.status, (seed, kind)
                if oracle.status is SearchStatus.OPTIMAL:
                    assert exact.objective_value == pytest.approx(
                        oracle.objective_value, abs=1e-9
                    ), (seed, kind)

    def test_window_symmetry_invariance(self):
        rng = random.Random(9)
        for seed in range(6):
            instance = helpers.small_random_instance(seed)
            result = ts.solve(instance, spec(ObjectiveKind.SM_POWER))
            if result.status is not SearchStatus.OPTIMAL:
                continue
            perm = list(range(1, instance.max_windows + 1))
            rng.shuffle(perm)
            permuted = ts.Assignment.from_placements(
                instance,
                [(p.task_id, perm[p.window - 1], p.cluster) for p in result.assignment.placements],
            )
            assert ts.schedule_power(instance, permuted, "sm").watts == pytest.approx(
                result.objective_value, abs=1e-9
            )


class TestBoundValidity:
    def test_node_bounds_admissible(self):
        rng = random.Random(13)
        for seed in (0, 3, 7):
            instance = helpers.small_random_instance(seed, n_hi=6, q_max=3)
            records = []
            ts.solve(
                instance,
                spec(ObjectiveKind.SM_POWER),
                node_recorder=lambda trail, bound: records.append((trail, bound)),
            )
            sample = records if len(records) <= 100 else rng.sample(records, 100)
            for trail, bound in sample:
                best = helpers.best_sm_completion(instance, trail)
                if best is not None:
                    assert bound <= best + 1e-9


class TestPartialFix:
    def test_fix_forces_cluster(self):
        instance = helpers.small_random_instance(21)
        fix = {t.id: 1 for t in instance.tasks}
        result = ts.solve(
            instance, ObjectiveSpec(ObjectiveKind.FEASIBILITY_ONLY), PartialFix.of(fix)
        )
        if result.status is SearchStatus.OPTIMAL:
            assert all(p.cluster == 1 for p in result.assignment.placements)

    def test_feasibility_monotone_under_subsets(self):
        rng = random.Random(17)
        feas = ObjectiveSpec(ObjectiveKind.FEASIBILITY_ONLY)
        for seed in range(10):
            instance = helpers.small_random_instance(seed, n_hi=6)
            fix = helpers.random_cluster_map(instance, rng)
            if ts.solve(instance, feas, PartialFix.of(fix)).status is not SearchStatus.OPTIMAL:
                continue
            items = list(fix.items())
            for _ in range(3):
                subset = dict(rng.sample(items, rng.randint(0, len(items))))
                sub = ts.solve(instance, feas, PartialFix.of(subset))
                assert sub.status is SearchStatus.OPTIMAL
