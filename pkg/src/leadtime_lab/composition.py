"""Daily lead-time compositions on the fixed 0..365 support.

A day's bookings (by volume or by revenue) are spread over integer lead
times 0..365. Each spread is stored as a dense length-366 probability
vector; every other module consumes these containers.
"""

from __future__ import annotations

import csv
import datetime as dt
import warnings
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadLength,
    EmptyInput,
    InputValidationError,
    MixedMetrics,
    NegativeMass,
    SumOutOfTolerance,
    ThresholdOutOfRange,
)
from .fileio import atomic_open

MAX_LEAD = 365
N_LEADS = MAX_LEAD + 1
LEADS = np.arange(N_LEADS)

NIGHTS = "Nights"
GBV = "GBV"
METRICS = (NIGHTS, GBV)

SUM_TOL = 1e-6
NEG_TOL = 1e-12
# sums closer to one than this are left untouched (keeps CSV round trips bit-exact)
EXACT_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DailyPmf:
    """One day's share vector for one metric.

    Construct through :func:`validate_pmf`, which enforces the simplex
    constraints; the constructor itself only freezes the array.
    """

    mass: np.ndarray
    date: dt.date | None = None
    metric: str = NIGHTS
    renormalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mass", _frozen(self.mass))

    def __len__(self):
        return len(self.mass)

    def __array__(self, dtype=None, copy=None):
        return self.mass if dtype is None else self.mass.astype(dtype)


@dataclass(frozen=True)
class PairedDay:
    date: dt.date
    nights: DailyPmf
    gbv: DailyPmf

    def __post_init__(self):
        if self.nights.metric != NIGHTS or self.gbv.metric != GBV:
            raise MixedMetrics("PairedDay needs a Nights pmf and a GBV pmf")
        if self.nights.date != self.date or self.gbv.date != self.date:
            raise ValueError("PairedDay members must carry the pair's date")


@dataclass(frozen=True, eq=False)
class PooledPmf:
    mass: np.ndarray
    day_count: int
    metric: str = NIGHTS

    def __post_init__(self):
        object.__setattr__(self, "mass", _frozen(self.mass))


def as_mass(p) -> np.ndarray:
    """Return the underlying probability vector of a pmf-like object."""
    if isinstance(p, (DailyPmf, PooledPmf)):
        return p.mass
    return np.asarray(p, dtype=float)


def validate_pmf(raw, date=None, metric=NIGHTS) -> DailyPmf:
    """Check a raw share vector and wrap it as a :class:`DailyPmf`.

    Entries in ``[-1e-12, 0)`` are treated as rounding noise and set to
    zero. A total within ``1e-6`` of one (but off by more than ``1e-12``)
    is rescaled to sum to one and the result is flagged ``renormalized``.

    Raises
    ------
    BadLength
        ``raw`` does not have 366 entries.
    NegativeMass
        Some entry is below ``-1e-12``.
    SumOutOfTolerance
        The total differs from one by more than ``1e-6`` (this includes
        all-zero days).
    """
    x = np.asarray(raw, dtype=float)
    if x.ndim != 1 or x.shape[0] != N_LEADS:
        raise BadLength(f"expected {N_LEADS} entries, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NegativeMass("non-finite entry in share vector")
    if np.any(x < -NEG_TOL):
        i = int(np.argmin(x))
        raise NegativeMass(f"entry at lead {i} is {x[i]:.3g}")
    x = np.where(x < 0, 0.0, x)
    s = x.sum()
    if abs(s - 1.0) > SUM_TOL:
        raise SumOutOfTolerance(f"shares sum to {s!r}")
    renorm = abs(s - 1.0) > EXACT_TOL
    if renorm:
        x = x / s
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    return DailyPmf(x, date=date, metric=metric, renormalized=bool(renorm))


def cdf(pmf) -> np.ndarray:
    """Cumulative distribution over leads 0..365."""
    return np.cumsum(as_mass(pmf))


def tail_mass(pmf, u: int) -> float:
    """Mass strictly beyond lead ``u``."""
    if not 0 <= u <= MAX_LEAD:
        raise ThresholdOutOfRange(f"threshold {u} outside [0, {MAX_LEAD}]")
    return float(as_mass(pmf)[int(u) + 1 :].sum())


def pool_days(days: Sequence[DailyPmf]) -> PooledPmf:
    """Day-weighted mixture: the entrywise mean of the daily pmfs."""
    days = list(days)
    if not days:
        raise EmptyInput("cannot pool an empty sequence of days")
    metrics = {d.metric for d in days}
    if len(metrics) > 1:
        raise MixedMetrics(f"pool mixes metrics {sorted(metrics)}")
    mass = np.mean(np.stack([d.mass for d in days]), axis=0)
    return PooledPmf(mass, day_count=len(days), metric=metrics.pop())


def make_pair(date, nights, gbv) -> PairedDay:
    """Validate two raw vectors and bundle them as a :class:`PairedDay`."""
    return PairedDay(
        date,
        validate_pmf(nights, date=date, metric=NIGHTS),
        validate_pmf(gbv, date=date, metric=GBV),
    )


# -- CSV panel format: date,lead,nights_share,gbv_share ---------------------

PANEL_COLUMNS = ("date", "lead", "nights_share", "gbv_share")


def read_panel(path, strict: bool = True) -> list[PairedDay]:
    """Read a long-format panel CSV into validated, date-sorted pairs.

    Missing (date, lead) rows read as zero share. Leads outside 0..365 are
    rejected; with ``strict=False`` they are dropped with a warning and the
    remaining shares are rescaled to one.

    Raises
    ------
    InputValidationError
        With one diagnostic per bad row or bad day.
    """
    diagnostics = []
    nights = defaultdict(lambda: np.zeros(N_LEADS))
    gbv = defaultdict(lambda: np.zeros(N_LEADS))
    dropped = defaultdict(int)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in PANEL_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise InputValidationError([f"header missing columns {missing}"])
        for rowno, row in enumerate(reader, start=2):
            try:
                date = dt.date.fromisoformat(row["date"].strip())
            except ValueError:
                diagnostics.append(f"row {rowno}: bad date {row['date']!r}")
                continue
            try:
                lead = int(row["lead"])
                ns = float(row["nights_share"])
                gs = float(row["gbv_share"])
            except (TypeError, ValueError):
                diagnostics.append(f"row {rowno}: non-numeric lead or share")
                continue
            if not 0 <= lead <= MAX_LEAD:
                if strict:
                    diagnostics.append(f"row {rowno}: lead {lead} outside 0..{MAX_LEAD}")
                else:
                    dropped[date] += 1
                continue
            nights[date][lead] += ns
            gbv[date][lead] += gs

    days = []
    for date in sorted(set(nights) | set(dropped)):
        n, g = nights[date], gbv[date]
        if dropped.get(date):
            warnings.warn(
                f"{date}: dropped {dropped[date]} rows with lead beyond {MAX_LEAD}",
                stacklevel=2,
            )
            n = n / n.sum() if n.sum() > 0 else n
            g = g / g.sum() if g.sum() > 0 else g
        try:
            days.append(make_pair(date, n, g))
        except (NegativeMass, SumOutOfTolerance, BadLength) as exc:
            diagnostics.append(f"date {date}: {type(exc).__name__}: {exc}")
    if diagnostics:
        raise InputValidationError(diagnostics)
    if not days:
        raise InputValidationError(["panel contains no rows"])
    return days


def write_panel(days: Iterable[PairedDay], path) -> None:
    """Write pairs in the long CSV format; all-zero (date, lead) rows are skipped.

    Floats are written with ``repr`` so a read-back is bit-exact.
    """
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PANEL_COLUMNS)
        for day in days:
            n, g = day.nights.mass, day.gbv.mass
            iso = day.date.isoformat()
            for lead in np.flatnonzero((n != 0) | (g != 0)):
                w.writerow((iso, int(lead), repr(float(n[lead])), repr(float(g[lead]))))
