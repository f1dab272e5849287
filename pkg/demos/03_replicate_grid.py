"""A small replicate grid and its aggregate table.

Runs a (scenario x alpha x replicate) grid on a desk-size problem, then
collapses it to per-cell moments the same way the benchmark table is
produced. Every number is a pure function of the master seed.
"""

from fghs import Scenario, aggregate, run_grid

scenario = Scenario(
    name="demo-grid",
    p=8,
    n=30,
    truth="sparse",
    s=6,
    magnitude_lo=0.2,
    magnitude_hi=0.6,
    law="gaussian",
    replicates=4,
    master_seed=5,
)

results = run_grid([scenario], [1.0, 0.5, 0.1], n_iter=600, burn_in=100)
print(f"{len(results)} replicate cells:")
print(f"{'alpha':>6} {'rep':>4} {'per-entry err':>14} {'clamps':>7} {'status':>7}")
for r in results:
    print(f"{r.alpha:>6} {r.replicate:>4} {r.frob_sq_per_entry:>14.5f} "
          f"{r.clamp_events:>7} {r.status:>7}")
print()

print("Aggregated, one row per (scenario, alpha):")
print(f"{'alpha':>6} {'reps':>5} {'mean err':>10} {'sd':>9} {'mean KL':>9}")
for row in aggregate(results):
    sd = f"{row.sd_err:.5f}" if row.sd_err is not None else "-"
    print(f"{row.alpha:>6} {row.n_reps:>5} {row.mean_err:>10.5f} "
          f"{sd:>9} {row.mean_kl:>9.4f}")
