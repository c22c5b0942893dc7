"""Nights vs GBV divergence per day, with a block-bootstrap interval for its mean."""

from leadtime_lab import block_bootstrap_mean, divergence_series, generate_panel, wasserstein1
from leadtime_lab.synth import standard_scenario

# W1 on a toy pair: moving all mass by three days costs exactly three.
print("W1(point at 0, point at 3) =", wasserstein1([1, 0, 0, 0], [0, 0, 0, 1]))

days = generate_panel(standard_scenario())
series = divergence_series(days)
print(f"daily W1 in days: min {series.w1.min():.2f}, max {series.w1.max():.2f}")

# Daily divergences are serially dependent, so resample in circular blocks.
boot = block_bootstrap_mean(series.w1, replicates=1000, seed=42)
print(f"mean W1 {boot.point:.3f}, 95% interval [{boot.ci_low:.3f}, {boot.ci_high:.3f}], "
      f"block length {boot.block_len}")
