"""One dataset, two likelihood powers.

Draws a single replicate from a sparse 10-variable truth, runs the Gibbs
chain at alpha = 1 (the ordinary posterior) and alpha = 0.5 (a tempered
one), and compares the posterior means entry by entry. The tempered fit
shrinks noise entries harder at little cost on the true edges, which is
the package's reason to exist.
"""

import numpy as np

from fghs import SamplerConfig, Scenario, generate_data, run_chain, scenario_truth

scenario = Scenario(
    name="demo-sparse",
    p=10,
    n=40,
    truth="sparse",
    s=8,
    magnitude_lo=0.2,
    magnitude_hi=0.6,
    law="gaussian",
    replicates=1,
    master_seed=11,
)

truth = np.asarray(scenario_truth(scenario))
y = generate_data(scenario, replicate=0)
support = (truth != 0.0) & ~np.eye(10, dtype=bool)
print(f"Truth has {support.sum() // 2} edges among {10 * 9 // 2} pairs.")
print()

for alpha in (1.0, 0.5):
    out = run_chain(y, SamplerConfig(alpha=alpha, n_iter=1100, burn_in=100, seed=3))
    err = np.sum((out.mean_omega - truth) ** 2) / 100
    on_edges = np.abs(out.mean_omega[support]).mean()
    off_edges = np.abs(out.mean_omega[~support & ~np.eye(10, dtype=bool)]).mean()
    print(f"alpha = {alpha}")
    print(f"  per-entry squared error : {err:.5f}")
    print(f"  mean |omega_hat| on true edges : {on_edges:.3f}")
    print(f"  mean |omega_hat| off the edges : {off_edges:.4f}")
    print(f"  kept {out.samples_kept} samples, {out.clamp_events} scale clamps")
    print()

print("Off-edge magnitudes drop faster than on-edge ones as alpha decreases:")
print("tempering buys extra shrinkage where the data are only noise.")
