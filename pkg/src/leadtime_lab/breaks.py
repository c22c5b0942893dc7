"""Structural breaks in the mean of a scalar series.

Break locations come from an exact dynamic program over segment sums of
squares (Bai-Perron style, mean-shift only), the number of breaks from
BIC, and evidence for at least one break from a single-break sup-F scan
whose denominator is a Newey-West long-run variance with an Andrews AR(1)
plug-in bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SeriesTooShort

ANDREWS_CONST = 1.1447


@dataclass(frozen=True)
class HacEstimate:
    long_run_variance: float
    bandwidth: float


@dataclass(frozen=True, eq=False)
class BreakModel:
    """Result of :func:`bai_perron`.

    ``break_indices`` are 0-based positions of the *last* element of every
    segment except the final one, so the new regime starts at ``idx + 1``.
    ``ssr_by_m`` and ``bic_by_m`` are indexed by break count 0..max_breaks;
    ``breaks_by_m[m]`` holds the optimal locations for each m.
    """

    break_indices: tuple
    segment_means: tuple
    ssr_by_m: np.ndarray
    bic_by_m: np.ndarray
    chosen_m: int
    supf: float
    supf_p: float
    min_segment: int
    n: int
    breaks_by_m: tuple = field(default=())

    def segment_ids(self) -> np.ndarray:
        ids = np.zeros(self.n, dtype=int)
        for idx in self.break_indices:
            ids[idx + 1 :] += 1
        return ids

    def break_dates(self, dates):
        """First date of each new regime."""
        return [dates[i + 1] for i in self.break_indices]


def min_segment(n: int, trim: float) -> int:
    """Smallest admissible regime length: ``ceil(trim * n)``."""
    if n < 1 or not 0 < trim < 0.5:
        raise ValueError("need n >= 1 and 0 < trim < 0.5")
    # guard against 0.05 * 100 = 5.000000000000001 style round-up
    return max(1, math.ceil(round(trim * n, 9)))


# -- long-run variance -------------------------------------------------------


def andrews_bandwidth(rho, n):
    """Bartlett-kernel lag truncation from an AR(1) plug-in.

    Vectorised over ``rho``. Returns integers in ``[0, n - 2]``.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.full(rho.shape, max(n - 2, 0), dtype=int)
    ok = np.isfinite(rho) & (np.abs(1 - rho) > 1e-12) & (np.abs(1 + rho) > 1e-12)
    r = rho[ok]
    alpha = 4 * r**2 / ((1 - r) ** 2 * (1 + r) ** 2)
    L = np.ceil(ANDREWS_CONST * np.cbrt(alpha * n))
    out[ok] = np.clip(np.nan_to_num(L, posinf=n - 2), 0, max(n - 2, 0)).astype(int)
    out[~np.isfinite(rho)] = 0
    return out


def _bartlett_lrv(gammas, L):
    """Combine autocovariances ``gammas[..., j]`` with Bartlett weights up to ``L``."""
    j = np.arange(gammas.shape[-1])
    L = np.asarray(L)[..., None]
    w = np.where(j <= L, 1 - j / (L + 1), 0.0)
    w[..., 0] = 0.5  # gamma_0 enters once, the rest twice
    return np.maximum(2 * np.sum(w * gammas, axis=-1), 0.0)


def newey_west(series) -> HacEstimate:
    """Long-run variance of a series (Bartlett kernel, Andrews AR(1) bandwidth)."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 20:
        raise SeriesTooShort(f"newey_west needs at least 20 points, got {n}")
    e = x - x.mean()
    g0 = e @ e / n
    if g0 <= 0:
        return HacEstimate(0.0, 0.0)
    rho = (e[:-1] @ e[1:] / n) / g0
    L = int(andrews_bandwidth(rho, n)[0])
    gammas = np.array([g0] + [e[:-j] @ e[j:] / n for j in range(1, L + 1)])
    return HacEstimate(float(_bartlett_lrv(gammas, L)), float(L))


# -- sup-F -------------------------------------------------------------------


def _split_autocov(x, k, j, P):
    """Lag-``j`` autocovariance sums of the two-mean residuals, for every split ``k``.

    ``x`` is the demeaned series, ``P`` its prefix sums (``P[i] = x[:i].sum()``),
    ``k`` the first-segment lengths. Returns ``sum_t e_t e_{t+j}`` (not divided by n)
    where ``e_t = x_t - m1`` for ``t < k`` and ``x_t - m2`` otherwise.
    """
    n = x.size
    m1 = P[k] / k
    m2 = (P[n] - P[k]) / (n - k)
    sxx = x[: n - j] @ x[j:] if j else x @ x
    # sum_{t=0}^{n-1-j} a_t x_{t+j}
    e1 = np.minimum(k, n - j)
    ax_fwd = m1 * (P[e1 + j] - P[j]) + m2 * np.where(k <= n - 1 - j, P[n] - P[np.minimum(k + j, n)], 0.0)
    # sum_{t=0}^{n-1-j} a_{t+j} x_t
    c = np.clip(k - j, 0, n - j)
    ax_bwd = m1 * P[c] + m2 * (P[n - j] - P[c])
    c11 = np.maximum(k - j, 0)
    c22 = np.maximum(n - j - k, 0)
    c12 = (n - j) - c11 - c22
    aa = m1 * m1 * c11 + m2 * m2 * c22 + m1 * m2 * c12
    return sxx - ax_fwd - ax_bwd + aa


def supf_scan(series, trim: float) -> np.ndarray:
    """F-type statistic for a single mean shift after each admissible split.

    Entry ``i`` corresponds to a first segment of length ``h + i`` where
    ``h = min_segment(n, trim)``. The denominator is the Newey-West
    long-run variance of the residuals of the two-mean model at that split.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    h = min_segment(n, trim)
    if n < 2 * h or n < 20:
        raise SeriesTooShort(f"sup-F needs at least {max(2 * h, 20)} points, got {n}")
    x = x - x.mean()
    P = np.concatenate(([0.0], np.cumsum(x)))
    k = np.arange(h, n - h + 1)
    m1 = P[k] / k
    m2 = (P[n] - P[k]) / (n - k)
    d = m2 - m1

    g0 = np.maximum(_split_autocov(x, k, 0, P) / n, 0.0)
    g1 = _split_autocov(x, k, 1, P) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(g0 > 0, g1 / g0, 0.0)
    L = andrews_bandwidth(rho, n)
    Lmax = int(L.max())
    gammas = np.empty((k.size, Lmax + 1))
    gammas[:, 0] = g0
    if Lmax >= 1:
        gammas[:, 1] = g1
    for j in range(2, Lmax + 1):
        gammas[:, j] = _split_autocov(x, k, j, P) / n
    lrv = _bartlett_lrv(gammas, L)

    se2 = lrv * (1.0 / k + 1.0 / (n - k))
    with np.errstate(divide="ignore", invalid="ignore"):
        F = np.where(d == 0, 0.0, d * d / se2)
    return F


def supf_statistic(series, trim: float) -> float:
    return float(np.max(supf_scan(series, trim)))


def sup_f(series, trim: float = 0.05, *, null_draws: int = 999, seed: int = 42):
    """Sup-F test of no break against at least one mean shift.

    Returns ``(statistic, p_value)``; the p-value is the upper-tail rank of
    the statistic within a simulated Gaussian white-noise null of the same
    length (see :func:`leadtime_lab.resampling.simulate_supf_null`).
    """
    from .resampling import HacSpec, simulate_supf_null, supf_pvalue

    stat = supf_statistic(series, trim)
    null = simulate_supf_null(len(series), HacSpec(trim=trim), null_draws, seed)
    return stat, supf_pvalue(stat, null)


# -- Bai-Perron dynamic program ---------------------------------------------


def _segment_ssr(S1, S2, starts, end):
    """SSR of x[start:end] for an array of starts and one end (prefix sums)."""
    m = end - starts
    s = S1[end] - S1[starts]
    return np.maximum(S2[end] - S2[starts] - s * s / m, 0.0)


def optimal_partitions(series, max_breaks: int, h: int):
    """Minimal SSR and break positions for every break count 0..max_breaks.

    Returns ``(ssr, breaks)`` where ``breaks[m]`` is a tuple of segment-end
    indices (last element of each non-final segment).
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    x = x - x.mean()
    S1 = np.concatenate(([0.0], np.cumsum(x)))
    S2 = np.concatenate(([0.0], np.cumsum(x * x)))

    # best[s, t]: minimal SSR of x[:t] split into s+1 segments of length >= h
    best = np.full((max_breaks + 1, n + 1), np.inf)
    arg = np.full((max_breaks + 1, n + 1), -1, dtype=int)
    t0 = np.arange(h, n + 1)
    best[0, t0] = _segment_ssr(S1, S2, np.zeros(t0.size, dtype=int), t0)
    for s in range(1, max_breaks + 1):
        for t in range((s + 1) * h, n + 1):
            b = np.arange(s * h, t - h + 1)
            cand = best[s - 1, b] + _segment_ssr(S1, S2, b, t)
            i = int(np.argmin(cand))
            best[s, t] = cand[i]
            arg[s, t] = b[i]

    ssr = np.empty(max_breaks + 1)
    breaks = []
    for m in range(max_breaks + 1):
        ssr[m] = best[m, n]
        ends, t = [], n
        for s in range(m, 0, -1):
            t = arg[s, t]
            ends.append(int(t) - 1)
        breaks.append(tuple(sorted(ends)))
    return ssr, tuple(breaks)


def bic(ssr, n: int) -> np.ndarray:
    """``n ln(SSR_m / n) + (2m + 1) ln n`` with a tiny floor on SSR."""
    ssr = np.maximum(np.asarray(ssr, dtype=float), np.finfo(float).tiny)
    m = np.arange(ssr.size)
    return n * np.log(ssr / n) + (2 * m + 1) * np.log(n)


def bai_perron(
    series,
    max_breaks: int = 5,
    trim: float = 0.05,
    *,
    with_supf: bool = True,
    null_draws: int = 999,
    seed: int = 42,
) -> BreakModel:
    """Estimate mean-shift breaks and pick their number by BIC.

    Parameters
    ----------
    series : array_like
        The scalar series, e.g. daily Wasserstein distances.
    max_breaks : int
        Largest break count considered.
    trim : float
        Minimum regime length as a fraction of the sample.
    with_supf : bool
        Also run the sup-F test (needs a simulated null; cached per length).
    null_draws, seed
        Size and seed of the simulated sup-F null.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if max_breaks < 0:
        raise ValueError("max_breaks must be >= 0")
    h = min_segment(n, trim)
    if n < (max_breaks + 1) * h:
        raise SeriesTooShort(f"{n} points cannot hold {max_breaks + 1} segments of {h}")
    ssr, breaks = optimal_partitions(x, max_breaks, h)
    b = bic(ssr, n)
    m = int(np.argmin(b))
    idx = breaks[m]
    edges = [0] + [i + 1 for i in idx] + [n]
    means = tuple(float(x[a:c].mean()) for a, c in zip(edges, edges[1:]))
    if with_supf and n >= max(2 * min_segment(n, trim), 40):
        stat, p = sup_f(x, trim, null_draws=null_draws, seed=seed)
    else:
        stat, p = math.nan, math.nan
    return BreakModel(
        break_indices=idx,
        segment_means=means,
        ssr_by_m=ssr,
        bic_by_m=b,
        chosen_m=m,
        supf=stat,
        supf_p=p,
        min_segment=h,
        n=n,
        breaks_by_m=breaks,
    )
