"""Gamma / Weibull / Lognormal fits to daily pmfs.

Each integer lead ``l`` is treated as the interval ``[l - 0.5, l + 0.5)``
(lead 0 as ``[0, 0.5)``) of a continuous distribution truncated to
``[0, 365.5]``. Parameters minimise the cross-entropy between the observed
shares and these bin probabilities, using BFGS on log-transformed
coordinates with an analytic gradient.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, special

from .composition import LEADS, as_mass
from .errors import DegenerateInput, DegenerateMass, EmptyInput

GAMMA = "Gamma"
WEIBULL = "Weibull"
LOGNORMAL = "Lognormal"
FAMILIES = (GAMMA, WEIBULL, LOGNORMAL)  # also the tie-break order

P_FLOOR = 1e-300
TIE_TOL = 1e-9
GTOL = 1e-7
FTOL = 1e-10
MAXITER = 500

# bin edges 0, 0.5, 1.5, ..., 365.5
EDGES = np.concatenate(([0.0], LEADS + 0.5))

_SHAPE_STEP = 1e-3  # log-shape step for the Gamma shape derivative stencil


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of one two-parameter family.

    ``(a, b)`` is (shape, rate) for Gamma, (shape, scale) for Weibull and
    (mu, sigma) for Lognormal.
    """

    family: str
    a: float
    b: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.b <= 0 or not math.isfinite(self.b) or not math.isfinite(self.a):
            raise ValueError(f"invalid parameters {self}")
        if self.family != LOGNORMAL and self.a <= 0:
            raise ValueError(f"{self.family} shape must be positive")

    def to_unconstrained(self) -> np.ndarray:
        if self.family == LOGNORMAL:
            return np.array([self.a, math.log(self.b)])
        return np.array([math.log(self.a), math.log(self.b)])

    @classmethod
    def from_unconstrained(cls, family, u):
        if family == LOGNORMAL:
            return cls(family, float(u[0]), float(math.exp(u[1])))
        return cls(family, float(math.exp(u[0])), float(math.exp(u[1])))

    def mean(self) -> float:
        """Mean of the untruncated continuous distribution."""
        if self.family == GAMMA:
            return self.a / self.b
        if self.family == WEIBULL:
            return self.b * math.gamma(1 + 1 / self.a)
        return math.exp(self.a + self.b**2 / 2)

    def scale_mean(self, factor: float) -> "FamilyParams":
        """Multiply the mean by ``factor`` through the scale-type parameter, shape fixed."""
        if factor <= 0:
            raise ValueError("mean factor must be positive")
        if self.family == GAMMA:
            return FamilyParams(GAMMA, self.a, self.b / factor)
        if self.family == WEIBULL:
            return FamilyParams(WEIBULL, self.a, self.b * factor)
        return FamilyParams(LOGNORMAL, self.a + math.log(factor), self.b)


@dataclass(frozen=True, eq=False)
class FamilyFit:
    params: FamilyParams
    cross_entropy: float
    induced_pmf: np.ndarray
    converged: bool
    iterations: int
    trace: tuple = field(default=(), repr=False)

    @property
    def family(self):
        return self.params.family


@dataclass(frozen=True, eq=False)
class DayComparison:
    date: dt.date | None
    metric: str | None
    fits: dict
    winner: str
    ln_minus_gamma: float
    wei_minus_gamma: float
    failed: tuple = ()


@dataclass(frozen=True)
class WinTally:
    counts: dict
    shares: dict
    n: int


# -- cdf pieces --------------------------------------------------------------


def _cdf_sf(family, u, x):
    """cdf and survival function at points ``x`` for unconstrained params ``u``."""
    if family == GAMMA:
        a, lam = math.exp(u[0]), math.exp(u[1])
        return special.gammainc(a, lam * x), special.gammaincc(a, lam * x)
    if family == WEIBULL:
        k, s = math.exp(u[0]), math.exp(u[1])
        z = (x / s) ** k
        return -np.expm1(-z), np.exp(-z)
    mu, sig = u[0], math.exp(u[1])
    with np.errstate(divide="ignore"):
        w = (np.log(x) - mu) / sig
    return special.ndtr(w), special.ndtr(-w)


def _cdf_grad(family, u, x):
    """d cdf / d u at points ``x``; shape ``(2, len(x))``. The Gamma shape row stays zero."""
    g = np.zeros((2, x.size))
    pos = x > 0
    xp = x[pos]
    if family == GAMMA:
        a, lam = math.exp(u[0]), math.exp(u[1])
        lx = np.log(lam * xp)
        g[1, pos] = np.exp(a * lx - lam * xp - special.gammaln(a))
        # the shape derivative is taken on bin masses in _bins
    elif family == WEIBULL:
        k, s = math.exp(u[0]), math.exp(u[1])
        lr = np.log(xp / s)
        z = np.exp(k * lr)
        dens = np.exp(-z)
        g[0, pos] = dens * k * z * lr
        g[1, pos] = -dens * k * z
    else:
        mu, sig = u[0], math.exp(u[1])
        w = (np.log(xp) - mu) / sig
        phi = np.exp(-0.5 * w * w) / math.sqrt(2 * math.pi)
        g[0, pos] = -phi / sig
        g[1, pos] = -phi * w
    return g


def _bins(family, u, with_grad=False):
    """Untruncated bin masses on EDGES (and their gradients)."""
    F, S = _cdf_sf(family, u, EDGES)
    upper = F[:-1] > 0.5  # take differences of the survival function in the upper tail
    B = np.maximum(_masses(F, S, upper), 0.0)
    if not with_grad:
        return B
    dF = _cdf_grad(family, u, EDGES)
    dB = dF[:, 1:] - dF[:, :-1]
    if family == GAMMA:
        # no closed form in the shape; a stencil on the masses keeps tail bins accurate
        h = _SHAPE_STEP
        c = [_masses(*_cdf_sf(family, (u[0] + s * h, u[1]), EDGES), upper) for s in (-2, -1, 1, 2)]
        dB[0] = (c[0] - 8 * c[1] + 8 * c[2] - c[3]) / (12 * h)
    return B, dB


def _masses(F, S, upper):
    return np.where(upper, S[:-1] - S[1:], F[1:] - F[:-1])


def induced_pmf(params: FamilyParams) -> np.ndarray:
    """Truncated, interval-censored bin probabilities for leads 0..365."""
    B = _bins(params.family, params.to_unconstrained())
    Z = B.sum()
    if not Z > 1e-300:
        raise DegenerateMass(f"{params} puts no mass on 0..365")
    return B / Z


def induced_cdf(params: FamilyParams) -> np.ndarray:
    c = np.cumsum(induced_pmf(params))
    return np.minimum(c / c[-1], 1.0)


def cross_entropy(x, p) -> float:
    """``-sum x_l log p_l`` with ``p`` floored at 1e-300."""
    x = as_mass(x)
    p = np.maximum(np.asarray(p, dtype=float), P_FLOOR)
    nz = x > 0
    return float(-np.sum(x[nz] * np.log(p[nz])))


def objective(family, u, x):
    """Cross-entropy and its gradient in unconstrained coordinates."""
    B, dB = _bins(family, np.asarray(u, dtype=float), with_grad=True)
    Z = B.sum()
    if not Z > 1e-300:
        return -math.log(P_FLOOR), np.zeros(2)
    p = B / Z
    live = p > P_FLOOR
    w = np.where(live & (x > 0), x, 0.0)
    f = float(-np.sum(x[x > 0] * np.log(np.maximum(p[x > 0], P_FLOOR))))
    dZ = dB.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(w > 0, w / B, 0.0)
    grad = -(dB @ ratio) + w.sum() * dZ / Z
    return f, grad


# -- starts ------------------------------------------------------------------


def _grid_moments(x):
    m = float(LEADS @ x)
    v = float(((LEADS - m) ** 2) @ x)
    return m, v


def _weibull_shape_for_cv2(cv2):
    def gap(k):
        return math.exp(special.gammaln(1 + 2 / k) - 2 * special.gammaln(1 + 1 / k)) - 1 - cv2

    lo, hi = 0.1, 10.0
    if gap(lo) <= 0:
        return lo
    if gap(hi) >= 0:
        return hi
    return optimize.bisect(gap, lo, hi, xtol=1e-10)


def _matched(family, shape, m):
    """Parameters with the given shape and untruncated mean ``m``."""
    if family == GAMMA:
        return FamilyParams(GAMMA, shape, shape / m)
    if family == WEIBULL:
        return FamilyParams(WEIBULL, shape, m / math.gamma(1 + 1 / shape))
    return FamilyParams(LOGNORMAL, math.log(m) - shape**2 / 2, shape)


def starting_points(x, family) -> list[FamilyParams]:
    """Moment-matched start plus half- and double-shape variants at the same mean."""
    m, v = _grid_moments(as_mass(x))
    m = max(m, 1e-3)
    v = max(v, 1e-6)
    if family == GAMMA:
        shape = m * m / v
    elif family == WEIBULL:
        shape = _weibull_shape_for_cv2(v / (m * m))
    else:
        shape = math.sqrt(math.log1p(v / (m * m)))
    return [_matched(family, shape * c, m) for c in (1.0, 0.5, 2.0)]


# -- fitting -----------------------------------------------------------------


def _run_bfgs(family, x, u0):
    trace = []

    def fun(u):
        return objective(family, u, x)

    def cb(intermediate_result):
        trace.append(float(intermediate_result.fun))

    f0, _ = fun(u0)
    trace.append(f0)
    res = optimize.minimize(
        fun, u0, jac=True, method="BFGS", callback=cb,
        options={"gtol": GTOL, "maxiter": MAXITER},
    )
    f, g = fun(res.x)
    small_grad = np.max(np.abs(g)) < GTOL
    flat = len(trace) >= 2 and abs(trace[-1] - trace[-2]) <= FTOL * max(1.0, abs(trace[-1]))
    converged = bool(np.isfinite(f) and (small_grad or flat or res.success))
    return res.x, f, converged, int(res.nit), tuple(trace)


def fit_family(x, family: str) -> FamilyFit:
    """Minimum cross-entropy fit of one family to a daily pmf.

    Three BFGS runs (moment start, half shape, double shape, all at the
    grid mean) are made and the lowest objective kept.

    Raises
    ------
    DegenerateInput
        All mass sits in a single lead bin.
    """
    x = as_mass(x)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if x.max() >= 1.0 - 1e-12:
        raise DegenerateInput("pmf is concentrated on a single lead")
    best = None
    total_iter = 0
    for start in starting_points(x, family):
        u, f, conv, nit, trace = _run_bfgs(family, x, start.to_unconstrained())
        total_iter += nit
        if best is None or f < best[1]:
            best = (u, f, conv, trace)
    u, f, conv, trace = best
    params = FamilyParams.from_unconstrained(family, u)
    return FamilyFit(params, f, induced_pmf(params), conv, total_iter, trace)


def compare_day(x, date=None, metric=None) -> DayComparison:
    """Fit all three families and pick the lowest cross-entropy.

    Values within ``1e-9`` of the minimum count as ties and go to the
    earlier family in Gamma, Weibull, Lognormal order. A family whose fit
    raises is left out and listed in ``failed``.
    """
    fits, failed = {}, []
    for fam in FAMILIES:
        try:
            fits[fam] = fit_family(x, fam)
        except (DegenerateInput, DegenerateMass, FloatingPointError, ValueError):
            failed.append(fam)
    if not fits:
        raise DegenerateInput("no family could be fitted")
    hmin = min(f.cross_entropy for f in fits.values())
    winner = next(f for f in FAMILIES if f in fits and fits[f].cross_entropy <= hmin + TIE_TOL)

    def diff(fam):
        if fam in fits and GAMMA in fits:
            return fits[fam].cross_entropy - fits[GAMMA].cross_entropy
        return math.nan

    return DayComparison(date, metric, fits, winner, diff(LOGNORMAL), diff(WEIBULL), tuple(failed))


def win_tally(comparisons: Sequence[DayComparison]) -> WinTally:
    comparisons = list(comparisons)
    if not comparisons:
        raise EmptyInput("no comparisons to tally")
    counts = {f: 0 for f in FAMILIES}
    for c in comparisons:
        counts[c.winner] += 1
    n = len(comparisons)
    return WinTally(counts, {f: counts[f] / n for f in FAMILIES}, n)


def tally_from_counts(counts: dict) -> WinTally:
    n = sum(counts.values())
    if n == 0:
        raise EmptyInput("all counts are zero")
    full = {f: int(counts.get(f, 0)) for f in FAMILIES}
    return WinTally(full, {f: full[f] / n for f in FAMILIES}, n)


def fitted_cdf(fit: FamilyFit) -> np.ndarray:
    c = np.cumsum(fit.induced_pmf)
    return np.minimum(c / c[-1], 1.0)
