"""Distances and scores between distributions on the 0..365 lead grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .composition import N_LEADS, PairedDay, as_mass, cdf
from .errors import DuplicateDates, EmptyInput, NonMonotoneCdf, UnsortedDates

KLD_SMOOTHING = 1e-16
CDF_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class DivergenceSeries:
    dates: tuple
    w1: np.ndarray

    def __len__(self):
        return len(self.dates)


def wasserstein1(p, q) -> float:
    """Earth-mover distance in days between two pmfs on a common ordered grid.

    On an ordered integer support with unit spacing this is the L1 distance
    between the two cdfs. Works for any support length, not just 366.
    """
    d = np.cumsum(as_mass(p) - as_mass(q))
    return float(np.abs(d).sum())


def divergence_series(days: Sequence[PairedDay]) -> DivergenceSeries:
    """Per-day Nights-vs-GBV Wasserstein-1 distances."""
    days = list(days)
    if not days:
        raise EmptyInput("no days supplied")
    dates = tuple(d.date for d in days)
    for a, b in zip(dates, dates[1:]):
        if a == b:
            raise DuplicateDates(f"date {a} appears more than once")
        if b < a:
            raise UnsortedDates(f"date {b} follows {a}")
    w = np.array([wasserstein1(d.nights, d.gbv) for d in days])
    return DivergenceSeries(dates, w)


def kld(x, xhat) -> float:
    """Kullback-Leibler divergence KL(x || xhat) in nats.

    Both vectors get ``1e-16`` added to every entry and are rescaled to sum
    to one, so empty bins never produce infinities.
    """
    a = as_mass(x) + KLD_SMOOTHING
    b = as_mass(xhat) + KLD_SMOOTHING
    a = a / a.sum()
    b = b / b.sum()
    return float(np.sum(a * (np.log(a) - np.log(b))))


def crps(fitted_cdf, empirical) -> float:
    """Discrete CRPS: sum over leads of squared cdf differences.

    ``fitted_cdf`` is a cdf vector (not a pmf) so parametric, smoothed and
    empirical fits all go through the same path.
    """
    F = np.asarray(fitted_cdf, dtype=float)
    if F.shape != (N_LEADS,):
        raise NonMonotoneCdf(f"fitted cdf must have {N_LEADS} entries, got {F.shape}")
    if np.any(np.diff(F) < -1e-12):
        raise NonMonotoneCdf("fitted cdf decreases")
    if F[0] < -CDF_TOL or F[-1] > 1 + CDF_TOL or abs(F[-1] - 1.0) > CDF_TOL:
        raise NonMonotoneCdf(f"fitted cdf must lie in [0, 1] and end at 1 (ends at {F[-1]!r})")
    return float(np.sum((F - cdf(empirical)) ** 2))

