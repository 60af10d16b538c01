"""Average-power predictors for windowed multi-core schedules.

Three predictors are implemented:

* sum-max (SM): window power is the sum of per-task activity terms weighted
  by core occupancy, plus the largest offset coefficient in the window, plus
  idle power.
* linear regression (LR): a window is cut into processing-idling intervals
  (no task starts or ends strictly inside an interval); interval power is a
  per-cluster dot product of regression coefficients with the summed task
  feature vectors.
* LR upper bound (LR-UB): LR under the assumption that every task occupies
  its window completely, which over-approximates LR whenever the per-task
  coefficient combination is nonnegative.

Schedule-level power averages the above-idle contributions over the major
frame; frame time not covered by any window contributes idle power only.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Sequence, Union

import numpy as np

from .model import (
    IDLE,
    Assignment,
    Instance,
    ParseError,
    Platform,
    TaskCharacteristics,
    _open_for,
    derive_core_schedule,
)

#: Feature vector of a task on its cluster: (activity_coef, offset_coef).
FEATURE_DIM = 2


class PowerModel(str, Enum):
    SM = "sm"
    LR = "lr"
    LR_UB = "lr-ub"


@dataclass(frozen=True)
class RegressionCoefficients:
    """Per-cluster regression coefficients, one beta vector per cluster.

    betas[k-1] pairs with the feature vector (activity_coef, offset_coef)
    of tasks on cluster k. All cores of a cluster share the same vector.
    """

    betas: tuple[tuple[float, ...], ...]
    r_squared: float | None = None

    def beta(self, cluster_id: int) -> tuple[float, ...]:
        return self.betas[cluster_id - 1]


@dataclass(frozen=True)
class ProcessingInterval:
    """A sub-window during which every core runs one task fully or idles fully.

    active[ci][r] is the occupying task id or IDLE, where ci indexes the
    platform's cluster list and r the core slot.
    """

    length_ms: int
    active: tuple[tuple[int | None, ...], ...]


@dataclass(frozen=True)
class PowerEstimate:
    """A power prediction in watts with its idle/activity/offset decomposition."""

    watts: float
    idle_watts: float
    activity_watts: float
    offset_watts: float

    @classmethod
    def compose(cls, idle: float, activity: float, offset: float) -> "PowerEstimate":
        return cls(
            watts=idle + activity + offset,
            idle_watts=idle,
            activity_watts=activity,
            offset_watts=offset,
        )


def sm_window_power(
    platform: Platform,
    window_tasks: Sequence[TaskCharacteristics],
    window_length_ms: int,
) -> PowerEstimate:
    """Sum-max prediction of the average power of one window.

    The window must be at least as long as each contained task. An empty
    window predicts exactly the idle power (the max term is defined as 0).
    """
    if not window_tasks:
        return PowerEstimate.compose(platform.idle_power_watts, 0.0, 0.0)
    if window_length_ms < 1:
        raise ValueError("a non-empty window must have positive length")
    longest = max(tc.exec_time_ms for tc in window_tasks)
    if longest > window_length_ms:
        raise ValueError(
            f"window of {window_length_ms} ms is shorter than a contained "
            f"task of {longest} ms"
        )
    activity = sum(
        tc.activity_coef * (tc.exec_time_ms / window_length_ms) for tc in window_tasks
    )
    offset = max(tc.offset_coef for tc in window_tasks)
    return PowerEstimate.compose(platform.idle_power_watts, activity, offset)


def lr_ub_window_power(
    platform: Platform,
    coefficients: RegressionCoefficients,
    window_tasks: Sequence[TaskCharacteristics],
    window_length_ms: int,
) -> PowerEstimate:
    """LR prediction assuming every task runs for the whole window.

    Given the window membership the value is independent of execution times;
    the length argument is only validated against the precondition.
    """
    if window_tasks:
        if window_length_ms < 1:
            raise ValueError("a non-empty window must have positive length")
        longest = max(tc.exec_time_ms for tc in window_tasks)
        if longest > window_length_ms:
            raise ValueError(
                f"window of {window_length_ms} ms is shorter than a contained "
                f"task of {longest} ms"
            )
    activity = 0.0
    offset = 0.0
    for tc in window_tasks:
        beta = coefficients.beta(tc.cluster_id)
        activity += tc.activity_coef * beta[0]
        offset += tc.offset_coef * beta[1]
    return PowerEstimate.compose(platform.idle_power_watts, activity, offset)


def decompose_intervals(
    instance: Instance, assignment: Assignment, window: int
) -> list[ProcessingInterval]:
    """Cut one window into processing-idling intervals.

    All tasks of the window start at the window start, so the interval
    boundaries are the sorted distinct task end times plus the window end.
    The interval lengths sum to the window length; an empty window yields
    no intervals.
    """
    return _decompose_with_schedule(
        instance, assignment, window, derive_core_schedule(instance, assignment)
    )


def _decompose_with_schedule(
    instance: Instance, assignment: Assignment, window: int, schedule
) -> list[ProcessingInterval]:
    length = assignment.window_lengths_ms[window - 1]
    if length == 0:
        return []
    slots = schedule.window(window)

    end_time: dict[int, int] = {}
    for p in assignment.placements:
        if p.window == window:
            end_time[p.task_id] = instance.task_by_id(p.task_id).on(p.cluster).exec_time_ms

    boundaries = sorted(set(end_time.values()) | {length})
    intervals = []
    start = 0
    for end in boundaries:
        active = tuple(
            tuple(
                tid if tid is not IDLE and end_time[tid] >= end else IDLE
                for tid in cluster_slots
            )
            for cluster_slots in slots
        )
        intervals.append(ProcessingInterval(length_ms=end - start, active=active))
        start = end
    return intervals


def _interval_features(
    instance: Instance, interval: ProcessingInterval
) -> list[tuple[float, float]]:
    """Summed (activity, offset) feature vector per cluster; idle slots add zero."""
    features = []
    for ci, cluster in enumerate(instance.platform.clusters):
        sum_a = 0.0
        sum_b = 0.0
        for tid in interval.active[ci]:
            if tid is IDLE:
                continue
            tc = instance.task_by_id(tid).on(cluster.id)
            sum_a += tc.activity_coef
            sum_b += tc.offset_coef
        features.append((sum_a, sum_b))
    return features


def lr_interval_power(
    platform: Platform,
    coefficients: RegressionCoefficients,
    interval: ProcessingInterval,
    instance: Instance,
) -> PowerEstimate:
    """LR prediction of the average power of one processing-idling interval."""
    activity = 0.0
    offset = 0.0
    for ci, cluster in enumerate(platform.clusters):
        beta = coefficients.beta(cluster.id)
        if len(beta) != FEATURE_DIM:
            raise ValueError(
                f"cluster {cluster.id}: expected beta of dimension {FEATURE_DIM}, "
                f"got {len(beta)}"
            )
        for tid in interval.active[ci]:
            if tid is IDLE:
                continue
            tc = instance.task_by_id(tid).on(cluster.id)
            activity += beta[0] * tc.activity_coef
            offset += beta[1] * tc.offset_coef
    return PowerEstimate.compose(platform.idle_power_watts, activity, offset)


def schedule_power(
    instance: Instance,
    assignment: Assignment,
    model: Union[PowerModel, str],
    coefficients: RegressionCoefficients | None = None,
) -> PowerEstimate:
    """Average power of a whole schedule under the selected model.

    Window (SM, LR-UB) or interval (LR) contributions above idle are weighted
    by their lengths and divided by the major frame length, so frame time not
    covered by any window contributes idle power only.
    """
    model = PowerModel(model)
    if model in (PowerModel.LR, PowerModel.LR_UB) and coefficients is None:
        raise ValueError(f"model {model.value} requires regression coefficients")

    h = instance.major_frame_ms
    plat = instance.platform
    activity = 0.0
    offset = 0.0

    if model is PowerModel.LR:
        schedule = derive_core_schedule(instance, assignment)
        for j in range(1, instance.max_windows + 1):
            for interval in _decompose_with_schedule(instance, assignment, j, schedule):
                est = lr_interval_power(plat, coefficients, interval, instance)
                w = interval.length_ms / h
                activity += w * est.activity_watts
                offset += w * est.offset_watts
        return PowerEstimate.compose(plat.idle_power_watts, activity, offset)

    by_window: dict[int, list[TaskCharacteristics]] = {}
    for p in assignment.placements:
        tc = instance.task_by_id(p.task_id).on(p.cluster)
        by_window.setdefault(p.window, []).append(tc)
    for j, tcs in by_window.items():
        length = assignment.window_lengths_ms[j - 1]
        if model is PowerModel.SM:
            est = sm_window_power(plat, tcs, length)
        else:
            est = lr_ub_window_power(plat, coefficients, tcs, length)
        w = length / h
        activity += w * est.activity_watts
        offset += w * est.offset_watts
    return PowerEstimate.compose(plat.idle_power_watts, activity, offset)


def power_to_temperature(platform: Platform, power_watts: float) -> float:
    """Steady-state temperature for an average power draw.

    T = P / B + (G / B) * T_ambient. Raises ValueError when the platform
    carries no thermal parameters.
    """
    if not platform.has_thermal_parameters:
        missing = [
            name
            for name, val in (
                ("thermal_b", platform.thermal_b),
                ("thermal_g", platform.thermal_g),
                ("ambient_celsius", platform.ambient_celsius),
            )
            if val is None
        ]
        raise ValueError(
            "platform has no thermal parameters; missing: " + ", ".join(missing)
        )
    b = platform.thermal_b
    g = platform.thermal_g
    return power_watts / b + (g / b) * platform.ambient_celsius


# ---------------------------------------------------------------------------
# Coefficient identification


@dataclass(frozen=True)
class FitSample:
    """One measured interval: summed per-cluster features and measured power."""

    interval_length_ms: int
    measured_power_watts: float
    features: tuple[tuple[float, ...], ...]


def fit_regression_coefficients(
    samples: Sequence[FitSample], platform: Platform
) -> RegressionCoefficients:
    """Ordinary least squares for the per-cluster beta vectors.

    The idle power is the known intercept, not a fitted parameter: the
    regression runs on (measured - idle power) against the per-cluster
    summed feature vectors. Returns the coefficients together with the
    coefficient of determination. Raises ValueError when the design matrix
    is rank deficient or there are too few samples.
    """
    m = len(platform.clusters)
    n_params = m * FEATURE_DIM
    if len(samples) < 2 * n_params:
        raise ValueError(
            f"need at least {2 * n_params} samples to fit {n_params} "
            f"coefficients, got {len(samples)}"
        )
    rows = []
    for s in samples:
        if len(s.features) != m or any(len(f) != FEATURE_DIM for f in s.features):
            raise ValueError(
                f"each sample must carry {m} feature vectors of dimension {FEATURE_DIM}"
            )
        rows.append([x for f in s.features for x in f])
    design = np.asarray(rows, dtype=float)
    y = np.array(
        [s.measured_power_watts - platform.idle_power_watts for s in samples],
        dtype=float,
    )
    rank = np.linalg.matrix_rank(design)
    if rank < n_params:
        raise ValueError(
            f"design matrix is rank deficient (rank {rank} of {n_params}); "
            "the samples do not excite every cluster feature"
        )
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - design @ beta
    ss_res = float(residual @ residual)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    betas = tuple(
        tuple(float(b) for b in beta[ci * FEATURE_DIM : (ci + 1) * FEATURE_DIM])
        for ci in range(m)
    )
    return RegressionCoefficients(betas=betas, r_squared=r_squared)


# ---------------------------------------------------------------------------
# Document I/O


def coefficients_from_dict(doc: dict) -> RegressionCoefficients:
    entries = doc.get("clusters")
    if entries is None:
        raise ParseError("coefficients document: missing field 'clusters'")
    by_id = {}
    for pos, cd in enumerate(entries):
        where = f"clusters[{pos}]"
        if "cluster_id" not in cd or "beta" not in cd:
            raise ParseError(f"{where}: needs 'cluster_id' and 'beta'")
        by_id[int(cd["cluster_id"])] = tuple(float(x) for x in cd["beta"])
    betas = tuple(by_id[k] for k in sorted(by_id))
    r2 = doc.get("r_squared")
    return RegressionCoefficients(
        betas=betas, r_squared=float(r2) if r2 is not None else None
    )


def coefficients_to_dict(coefficients: RegressionCoefficients) -> dict:
    doc: dict = {
        "clusters": [
            {"cluster_id": ci + 1, "beta": list(beta)}
            for ci, beta in enumerate(coefficients.betas)
        ]
    }
    if coefficients.r_squared is not None:
        doc["r_squared"] = coefficients.r_squared
    return doc


def load_coefficients(path_or_file: Union[str, IO[str]]) -> RegressionCoefficients:
    f, owned = _open_for(path_or_file, "r")
    try:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    finally:
        if owned:
            f.close()
    return coefficients_from_dict(doc)


def save_coefficients(
    coefficients: RegressionCoefficients, path_or_file: Union[str, IO[str]]
) -> None:
    f, owned = _open_for(path_or_file, "w")
    try:
        json.dump(coefficients_to_dict(coefficients), f, indent=2, sort_keys=True)
        f.write("\n")
    finally:
        if owned:
            f.close()


def _fit_sample_header(n_clusters: int) -> list[str]:
    cols = ["interval_length_ms", "measured_power_watts"]
    for k in range(1, n_clusters + 1):
        cols += [f"sum_a_k{k}", f"sum_b_k{k}"]
    return cols


def read_fit_samples_csv(
    path_or_file: Union[str, IO[str]], n_clusters: int
) -> list[FitSample]:
    """Read fitting samples: per-cluster summed features plus measured power."""
    f, owned = _open_for(path_or_file, "r")
    try:
        reader = csv.reader(f)
        header = next(reader, None)
        expected = _fit_sample_header(n_clusters)
        if header is None or [c.strip() for c in header] != expected:
            raise ParseError(
                "fitting-sample CSV must have header " + ",".join(expected)
            )
        samples = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise ParseError(f"line {lineno}: expected {len(expected)} columns")
            try:
                length = int(row[0])
                watts = float(row[1])
                feats = tuple(
                    (float(row[2 + 2 * k]), float(row[3 + 2 * k]))
                    for k in range(n_clusters)
                )
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from exc
            samples.append(
                FitSample(
                    interval_length_ms=length,
                    measured_power_watts=watts,
                    features=feats,
                )
            )
        return samples
    finally:
        if owned:
            f.close()


def write_fit_samples_csv(
    samples: Iterable[FitSample], path_or_file: Union[str, IO[str]]
) -> None:
    samples = list(samples)
    if not samples:
        raise ValueError("cannot write an empty sample set")
    n_clusters = len(samples[0].features)
    f, owned = _open_for(path_or_file, "w")
    try:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(_fit_sample_header(n_clusters))
        for s in samples:
            row = [s.interval_length_ms, repr(s.measured_power_watts)]
            for feat in s.features:
                row += [repr(feat[0]), repr(feat[1])]
            writer.writerow(row)
    finally:
        if owned:
            f.close()
