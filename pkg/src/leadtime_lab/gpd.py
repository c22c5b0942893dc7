"""Tail-mass ratios and peaks-over-threshold GPD fits.

GPD fits target the day-weighted mixture of the daily pmfs. The mixture
is approximated by drawing a fixed number of leads from every day's pmf
and pooling them. Fits try two maximum-likelihood configurations, then
probability-weighted moments, then the method of moments. A stage only
counts if its estimate keeps every exceedance inside the GPD support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .composition import GBV, NIGHTS, N_LEADS, PairedDay, as_mass
from .errors import AllStagesFailed, ThresholdOutOfRange, TooFewExceedances

MIN_EXCEED = 30
RATIO_FLOOR = 1e-12
PWM_PLOTTING = 0.35
XI_LOWER = -1.0  # below this the GPD likelihood is unbounded

MLE_A = "MLE_A"
MLE_B = "MLE_B"
PWM = "PWM"
MOM = "MOM"
ESTIMATORS = (MLE_A, MLE_B, PWM, MOM)


@dataclass(frozen=True, eq=False)
class TailRatioSeries:
    """GBV/Nights tail-mass ratios; ``ratio`` is NaN wherever ``undefined_mask`` is set."""

    dates: tuple
    thresholds: tuple
    ratio: np.ndarray
    gbv_tail: np.ndarray
    nights_tail: np.ndarray
    undefined_mask: np.ndarray


@dataclass(frozen=True)
class GpdFit:
    threshold: float
    xi: float
    beta: float
    n_exceed: int
    estimator: str


@dataclass(frozen=True, eq=False)
class StabilityProfile:
    """Shape estimate by threshold. Failed or under-populated thresholds hold NaN."""

    thresholds: tuple
    xi_by_threshold: np.ndarray
    n_by_threshold: np.ndarray
    beta_by_threshold: np.ndarray
    estimator_by_threshold: tuple

    @property
    def masked(self) -> np.ndarray:
        return np.isnan(self.xi_by_threshold)


# -- tail-mass ratios --------------------------------------------------------


def _tail_matrix(mass, thresholds):
    # column u holds sum_{l > u} mass[:, l]
    rev = np.cumsum(mass[:, ::-1], axis=1)[:, ::-1]
    rev = np.concatenate([rev, np.zeros((mass.shape[0], 1))], axis=1)
    return rev[:, np.asarray(thresholds) + 1]


def tail_ratio_series(days: Sequence[PairedDay], thresholds=(7, 30, 60, 90, 180)) -> TailRatioSeries:
    """Per-day ratio of GBV to Nights mass beyond each threshold."""
    thresholds = tuple(int(u) for u in thresholds)
    if any(not 0 <= u <= 364 for u in thresholds):
        raise ThresholdOutOfRange("tail thresholds must lie in 0..364")
    days = list(days)
    nights = np.stack([d.nights.mass for d in days])
    gbv = np.stack([d.gbv.mass for d in days])
    nt = _tail_matrix(nights, thresholds)
    gt = _tail_matrix(gbv, thresholds)
    undefined = nt < RATIO_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(undefined, np.nan, gt / np.where(undefined, 1.0, nt))
    return TailRatioSeries(tuple(d.date for d in days), thresholds, ratio, gt, nt, undefined)


# -- synthetic draws ---------------------------------------------------------


def draw_leads(pool, draws_per_day: int, seed: int, jitter: bool = True) -> np.ndarray:
    """Draw leads from every day's pmf and concatenate them.

    Day ``i`` uses its own child stream of ``SeedSequence(seed)``, so the
    draws of one day do not depend on the others. With ``jitter`` each lead
    is spread uniformly over its unit bin ``(l - 0.5, l + 0.5)``.
    """
    if draws_per_day < 1:
        raise ValueError("draws_per_day must be >= 1")
    pool = list(pool)
    children = np.random.SeedSequence(seed).spawn(len(pool))
    out = np.empty(len(pool) * draws_per_day)
    for i, (day, ss) in enumerate(zip(pool, children)):
        rng = np.random.default_rng(ss)
        c = np.cumsum(as_mass(day))
        u = rng.random(draws_per_day) * c[-1]
        lead = np.minimum(np.searchsorted(c, u, side="right"), N_LEADS - 1).astype(float)
        if jitter:
            lead += rng.random(draws_per_day) - 0.5
        out[i * draws_per_day : (i + 1) * draws_per_day] = lead
    return out


def exceedances(draws, u: float) -> np.ndarray:
    d = np.asarray(draws)
    return d[d > u] - u


def sample_exceedances(pool, u: float, draws_per_day: int = 1000, seed: int = 42, jitter: bool = True) -> np.ndarray:
    """Exceedances ``x - u`` of pooled synthetic draws ``x > u``."""
    return exceedances(draw_leads(pool, draws_per_day, seed, jitter), u)


# -- estimators --------------------------------------------------------------


def gpd_nll(xi: float, beta: float, y) -> float:
    """Negative GPD log-likelihood; ``inf`` outside the support."""
    y = np.asarray(y)
    if beta <= 0:
        return math.inf
    t = y / beta
    n = y.size
    if abs(xi) < 1e-9:
        return n * math.log(beta) + float(t.sum())
    z = xi * t
    if z.min() <= -1:
        return math.inf
    return n * math.log(beta) + (1 + 1 / xi) * float(np.log1p(z).sum())


def _nll_grad(theta, y):
    """NLL and gradient in ``(xi, log beta)``."""
    xi, lb = theta
    beta = math.exp(lb)
    n = y.size
    t = y / beta
    z = xi * t
    if xi <= XI_LOWER or z.min() <= -1:
        return math.inf, np.array([np.nan, np.nan])
    w = t / (1 + z)
    sw = float(w.sum())
    if abs(xi) < 1e-6:
        st, st2 = float(t.sum()), float((t * t).sum())
        f = n * lb + st - xi * (st2 / 2 - st)  # first order in xi
        dxi = st - st2 / 2
    else:
        s = float(np.log1p(z).sum())
        f = n * lb + (1 + 1 / xi) * s
        dxi = -s / xi**2 + (1 + 1 / xi) * sw
    dlb = n - (1 + xi) * sw
    return f, np.array([dxi, dlb])


def pwm_estimate(y):
    """Probability-weighted-moment estimate ``(xi, beta)``."""
    ys = np.sort(np.asarray(y, dtype=float))
    n = ys.size
    b0 = ys.mean()
    i = np.arange(1, n + 1)
    b1 = float(np.sum((1 - (i - PWM_PLOTTING) / n) * ys) / n)
    denom = b0 - 2 * b1
    return 2 - b0 / denom, 2 * b0 * b1 / denom


def mom_from_moments(m: float, v: float):
    xi = (1 - m * m / v) / 2
    return xi, m * (1 - xi)


def mom_estimate(y):
    """Method-of-moments estimate ``(xi, beta)`` from the sample mean and variance."""
    y = np.asarray(y, dtype=float)
    return mom_from_moments(float(y.mean()), float(y.var(ddof=1)))


def feasible(xi, beta, y) -> bool:
    """True when every exceedance lies inside the support of GPD(xi, beta)."""
    if not (math.isfinite(xi) and math.isfinite(beta)) or beta <= 0:
        return False
    if xi >= 0:
        return True
    return bool(1 + xi * np.max(y) / beta > 0)


def _mle_a(y):
    # quasi-Newton with Wolfe line search, started from the PWM estimate
    xi0, b0 = pwm_estimate(y)
    if not feasible(xi0, b0, y) or xi0 <= XI_LOWER:
        xi0, b0 = 0.0, float(np.mean(y))
    res = optimize.minimize(
        _nll_grad, [xi0, math.log(b0)], args=(y,), jac=True, method="BFGS",
        options={"gtol": 1e-6 * y.size, "maxiter": 400},
    )
    ok = res.success or (np.all(np.isfinite(res.jac)) and np.max(np.abs(res.jac)) < 1e-4 * y.size)
    return float(res.x[0]), float(math.exp(res.x[1])), bool(ok and np.isfinite(res.fun))


def _mle_b(y):
    # derivative-free Powell (Brent line searches) from the exponential fit
    def f(theta):
        return _nll_grad(theta, y)[0]

    res = optimize.minimize(
        f, [0.0, math.log(float(np.mean(y)))], method="Powell",
        options={"xtol": 1e-8, "ftol": 1e-12, "maxiter": 20000},
    )
    return float(res.x[0]), float(math.exp(res.x[1])), bool(res.success and np.isfinite(res.fun))


def fit_gpd(y, u: float = 0.0, stages=ESTIMATORS) -> GpdFit:
    """Fit a GPD to exceedances with the MLE -> MLE -> PWM -> MOM fallback chain.

    Parameters
    ----------
    y : array_like
        Exceedances over the threshold (positive values).
    u : float
        Threshold, recorded on the result.
    stages : sequence of str
        Subset/order of the chain; mostly useful for tests.

    Raises
    ------
    TooFewExceedances
        Fewer than 30 exceedances.
    AllStagesFailed
        No stage produced a finite estimate satisfying the support constraint.
    """
    y = np.asarray(y, dtype=float)
    if y.size < MIN_EXCEED:
        raise TooFewExceedances(f"{y.size} exceedances at u={u}; need {MIN_EXCEED}")
    runners = {
        MLE_A: _mle_a,
        MLE_B: _mle_b,
        PWM: lambda v: (*pwm_estimate(v), True),
        MOM: lambda v: (*mom_estimate(v), True),
    }
    for stage in stages:
        with np.errstate(all="ignore"):
            try:
                xi, beta, ok = runners[stage](y)
            except (ValueError, FloatingPointError, ZeroDivisionError):
                continue
        if stage in (MLE_A, MLE_B) and xi <= XI_LOWER + 1e-6:
            ok = False
        if ok and feasible(xi, beta, y):
            return GpdFit(float(u), float(xi), float(beta), int(y.size), stage)
    raise AllStagesFailed(f"no GPD estimator succeeded at u={u} (n={y.size})")


def stability_sweep(pool, thresholds=(60, 90, 120, 150, 180, 210, 240, 270), draws_per_day: int = 1000,
                    seed: int = 42, jitter: bool = True) -> StabilityProfile:
    """Shape estimate at each threshold from one shared set of draws."""
    thresholds = tuple(int(t) for t in thresholds)
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly increasing")
    draws = draw_leads(pool, draws_per_day, seed, jitter)
    xi = np.full(len(thresholds), np.nan)
    beta = np.full(len(thresholds), np.nan)
    counts = np.zeros(len(thresholds), dtype=int)
    est = []
    for i, u in enumerate(thresholds):
        y = exceedances(draws, u)
        counts[i] = y.size
        try:
            fit = fit_gpd(y, u)
        except (TooFewExceedances, AllStagesFailed):
            est.append("")
            continue
        xi[i], beta[i] = fit.xi, fit.beta
        est.append(fit.estimator)
    return StabilityProfile(thresholds, xi, counts, beta, tuple(est))


def pool_metric(days: Sequence[PairedDay], metric: str):
    if metric == NIGHTS:
        return [d.nights for d in days]
    if metric == GBV:
        return [d.gbv for d in days]
    raise ValueError(f"unknown metric {metric!r}")
