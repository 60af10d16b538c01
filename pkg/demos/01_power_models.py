"""Walk through the three power models on a single hand-built window.

Three tasks share one 700 ms window on a 4+2-core platform: two on the
little cluster (450 and 550 ms) and one on the big cluster (700 ms). The
sum-max model charges each task's activity by its occupancy and adds the
largest offset; the regression model cuts the window into processing-idling
intervals and prices each one; the upper-bound variant pretends every task
fills the window.
"""

import thermosched as ts
from thermosched.presets import builtin_coefficients, builtin_platform

platform = builtin_platform("imx8-mek")
coeff = builtin_coefficients("imx8-mek")

tasks = (
    ts.Task(1, "a2time-4K", (
        ts.TaskCharacteristics(1, 450, 0.25, 0.25),
        ts.TaskCharacteristics(2, 161, 0.52, 0.37),
    )),
    ts.Task(2, "canrdr-4M", (
        ts.TaskCharacteristics(1, 550, 0.41, 1.36),
        ts.TaskCharacteristics(2, 239, 0.95, 0.88),
    )),
    ts.Task(3, "membench-1M-RO-S", (
        ts.TaskCharacteristics(1, 980, 0.58, 1.05),
        ts.TaskCharacteristics(2, 700, 1.24, 1.22),
    )),
)
instance = ts.Instance(platform, tasks, major_frame_ms=700, max_windows=1)
assignment = ts.Assignment.from_placements(instance, [(1, 1, 1), (2, 1, 1), (3, 1, 2)])

print("window lengths:", assignment.window_lengths_ms)
print("feasible:", bool(ts.check_feasible(instance, assignment)))

sm = ts.schedule_power(instance, assignment, "sm")
print(f"\nsum-max:   {sm.watts:6.3f} W "
      f"(idle {sm.idle_watts}, activity {sm.activity_watts:.3f}, offset {sm.offset_watts:.3f})")

print("\nprocessing-idling intervals:")
for iv in ts.decompose_intervals(instance, assignment, 1):
    est = ts.lr_interval_power(platform, coeff, iv, instance)
    share = iv.length_ms / instance.major_frame_ms
    active = sorted(t for cluster in iv.active for t in cluster if t is not None)
    print(f"  {iv.length_ms:4d} ms, tasks {active}: {est.watts:6.3f} W, "
          f"weighted contribution {share * (est.watts - platform.idle_power_watts):.3f} W")

lr = ts.schedule_power(instance, assignment, "lr", coeff)
lr_ub = ts.schedule_power(instance, assignment, "lr-ub", coeff)
print(f"\nregression: {lr.watts:6.3f} W")
print(f"upper bound: {lr_ub.watts:6.3f} W (never below the regression value)")

thermal = ts.Platform(
    clusters=platform.clusters, idle_power_watts=platform.idle_power_watts,
    thermal_b=0.5, thermal_g=0.4, ambient_celsius=25.0,
)
print(f"\nsteady state at {lr.watts:.2f} W with B=0.5, G=0.4, T_amb=25: "
      f"{ts.power_to_temperature(thermal, lr.watts):.1f} C")
