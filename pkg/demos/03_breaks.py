"""Locate mean shifts with the dynamic-programming break search and test for any break."""

import numpy as np

from leadtime_lab import bai_perron, generate_break_series, newey_west, sup_f

x = generate_break_series(900, [300, 600], [0.0, 4.0, 8.0], sigma=1.0, seed=3)
model = bai_perron(x, max_breaks=5, trim=0.05)
print("BIC by break count:", np.round(model.bic_by_m, 1))
print("chosen m =", model.chosen_m, "| regimes start at", [i + 1 for i in model.break_indices])
print("segment means:", np.round(model.segment_means, 3))
print(f"sup-F = {model.supf:.1f}, p = {model.supf_p:.3f}")

# Without a break the test should rarely reject.
stat, p = sup_f(generate_break_series(500, [], [0.0], seed=4), 0.05)
print(f"no-break series: sup-F = {stat:.2f}, p = {p:.3f}")

# HAC long-run variance for AR(1) with phi = 0.5 is 1 / (1 - 0.5)^2 = 4.
rng = np.random.default_rng(5)
e = rng.standard_normal(20000)
ar = np.empty_like(e)
ar[0] = e[0] / np.sqrt(0.75)
for t in range(1, e.size):
    ar[t] = 0.5 * ar[t - 1] + e[t]
hac = newey_west(ar)
print(f"long-run variance {hac.long_run_variance:.3f} (bandwidth {hac.bandwidth:.1f})")
