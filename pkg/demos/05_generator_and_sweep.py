"""Seeded instance generation and a miniature scalability sweep.

Instances draw a kernel and a big-cluster execution time per task; the
other cluster's time follows the kernel's relative speedup, and the major
frame scales the total work by the tightness knob. The sweep then times a
few methods over growing sizes and writes the usual CSV.
"""

import statistics

from thermosched.generator import (
    GeneratorConfig,
    generate_instance,
    scalability_sweep,
    write_sweep_csv,
)
from thermosched.presets import builtin_kernel_pool, builtin_platform

platform = builtin_platform("imx8-mek")
pool = builtin_kernel_pool("mixed")

config = GeneratorConfig(kernel_pool=pool, n_tasks=20, rng_seed=7, tightness_kappa=3.5)
instance = generate_instance(config, platform)
little = [t.on(1).exec_time_ms for t in instance.tasks]
big = [t.on(2).exec_time_ms for t in instance.tasks]
print(f"20 tasks: big times {min(big)}..{max(big)} ms, "
      f"little times {min(little)}..{max(little)} ms")
print(f"mean execution {statistics.fmean(little + big):.1f} ms "
      f"-> major frame {instance.major_frame_ms} ms at tightness 3.5")

cells = scalability_sweep(
    sizes=[5, 10, 15],
    repetitions=2,
    methods=["heur", "idle-min", "idle-max"],
    time_limit_ms=30000,
    platform=platform,
    kernel_pool=pool,
    base_seed=0,
)
write_sweep_csv(cells, "sweep_demo.csv")
print("\nmean elapsed per (n, method):")
means = {}
for cell in cells:
    means.setdefault((cell.n, cell.method), []).append(cell.elapsed_ms)
for (n, method), values in sorted(means.items()):
    print(f"  n={n:2d} {method:9s} {statistics.fmean(values):8.2f} ms")
print("\nfull table written to sweep_demo.csv")
