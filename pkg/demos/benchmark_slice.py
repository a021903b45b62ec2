"""Walkthrough: run a small benchmark slice and summarize it.

Generates fully reduced 32- and 64-node instances across all eight
average:max ratios, solves each with both algorithms over several seeds,
and prints the per-cell iteration means (the plot-data view puts ratio on
the x axis with one series per algorithm).
"""

import io

from stopgames.bench import (
    BenchPlan,
    run_benchmark,
    summarize,
    write_plot_csv,
    write_records_csv,
)

plan = BenchPlan(
    sizes=[32, 64],
    ratios=list(range(1, 9)),
    instances_per_cell=5,
    runs_per_instance=5,
    algorithms=["hk", "perm"],
    master_seed=99,
)

records = run_benchmark(plan)
print(f"{len(records)} runs, all stable: {all(r.stable_check for r in records)}")

rows = summarize(records)
print(f"\n{'size':>5} {'ratio':>5} {'algo':>5} {'mean iters':>10} {'mean ms':>9}")
for r in rows:
    print(f"{r.size:>5} {r.ratio:>5} {r.algorithm:>5} {r.mean_iterations:>10.2f} {r.mean_wall_time_ms:>9.2f}")

perm_wins = sum(
    1
    for r in rows
    if r.algorithm == "perm"
    and r.mean_iterations
    < next(
        x.mean_iterations
        for x in rows
        if x.algorithm == "hk" and (x.size, x.ratio) == (r.size, r.ratio)
    )
)
print(f"\npermutation improvement wins {perm_wins} of {len(rows) // 2} cells on iterations")

plot = io.StringIO()
write_plot_csv(rows, plot)
print("\nplot-data CSV (ratio on x, one series per algorithm):")
print(plot.getvalue())

csv_buf = io.StringIO()
write_records_csv(records[:3], csv_buf)
print("records CSV shape (first rows):")
print(csv_buf.getvalue())
