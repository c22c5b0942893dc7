"""Distributional analysis of daily booking lead-time compositions.

Paired daily pmfs (by nights and by booking value) over leads 0..365 are
compared with Wasserstein-1 distances, scanned for mean shifts, examined
in the tail with GPD peaks-over-threshold fits, summarised by interval-
censored parametric fits and a penalized spline smoother, and scored
with CRPS and KLD.
"""

__version__ = "0.1.0"

from .breaks import BreakModel, HacEstimate, bai_perron, min_segment, newey_west, sup_f
from .composition import (
    GBV,
    NIGHTS,
    DailyPmf,
    PairedDay,
    PooledPmf,
    cdf,
    make_pair,
    pool_days,
    read_panel,
    tail_mass,
    validate_pmf,
    write_panel,
)
from .divergence import DivergenceSeries, crps, divergence_series, kld, wasserstein1
from .gpd import (
    GpdFit,
    StabilityProfile,
    TailRatioSeries,
    fit_gpd,
    sample_exceedances,
    stability_sweep,
    tail_ratio_series,
)
from .parametric import (
    DayComparison,
    FamilyFit,
    FamilyParams,
    compare_day,
    cross_entropy,
    fit_family,
    induced_pmf,
    win_tally,
)
from .resampling import BootstrapResult, block_bootstrap_mean, block_length, simulate_supf_null
from .smoother import SmoothFit, score_smoother, smooth_pmf
from .synth import Regime, ScenarioSpec, generate_break_series, generate_panel

__all__ = [
    "BootstrapResult", "BreakModel", "DailyPmf", "DayComparison", "DivergenceSeries",
    "FamilyFit", "FamilyParams", "GBV", "GpdFit", "HacEstimate", "NIGHTS", "PairedDay",
    "PooledPmf", "Regime", "ScenarioSpec", "SmoothFit", "StabilityProfile", "TailRatioSeries",
    "bai_perron", "block_bootstrap_mean", "block_length", "cdf", "compare_day", "crps",
    "cross_entropy", "divergence_series", "fit_family", "fit_gpd", "generate_break_series",
    "generate_panel", "induced_pmf", "kld", "make_pair", "min_segment", "newey_west",
    "pool_days", "read_panel", "sample_exceedances", "score_smoother", "simulate_supf_null",
    "smooth_pmf", "stability_sweep", "sup_f", "tail_mass", "tail_ratio_series", "validate_pmf",
    "wasserstein1", "win_tally", "write_panel",
]
