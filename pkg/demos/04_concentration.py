"""Error decay as the sample size grows.

Holds one sparse truth fixed and re-estimates it from progressively larger
datasets. Posterior contraction should push the squared error down roughly
like 1/n, so the log-log slope printed at the end should sit near -1.
"""

from fghs import Scenario, concentration_sweep

scenario = Scenario(
    name="demo-trend",
    p=10,
    n=40,
    truth="sparse",
    s=6,
    magnitude_lo=0.2,
    magnitude_hi=0.6,
    law="gaussian",
    replicates=6,
    master_seed=2,
)

rows, slope = concentration_sweep(
    scenario, [40, 80, 160, 320], alpha=0.9, n_iter=600, burn_in=100,
)

print(f"{'n':>5} {'reps':>5} {'mean frob^2':>12} {'sd':>9}")
for r in rows:
    sd = f"{r.sd_err:.4f}" if r.sd_err is not None else "-"
    print(f"{r.n:>5} {r.n_reps:>5} {r.mean_err:>12.4f} {sd:>9}")
print()
print(f"log-log slope: {slope:.3f}  (1/n decay would give -1)")
