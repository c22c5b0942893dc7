"""Penalized spline smoothing of a bimodal day that no single parametric family fits."""

from leadtime_lab import FamilyParams, compare_day, crps, induced_pmf, smooth_pmf
from leadtime_lab.parametric import fitted_cdf

# Short-lead bookings mixed with a cluster around 120 days out.
x = 0.7 * induced_pmf(FamilyParams("Gamma", 1.0, 1 / 15)) + 0.3 * induced_pmf(FamilyParams("Gamma", 15.0, 1 / 8))

fit = smooth_pmf(x)
print(f"basis k = {fit.k_used}, lambda = {fit.lam:.3g}, edf = {fit.edf:.2f}, "
      f"residual check passed: {fit.k_check_passed}")
print(f"smoother CRPS {crps(fit.fitted_cdf, x):.5f}")
for fam, f in compare_day(x).fits.items():
    print(f"{fam:>9} CRPS {crps(fitted_cdf(f), x):.5f}")
