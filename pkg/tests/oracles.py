"""Independent reference implementations used only by the tests."""

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def ot_linprog(p, q):
    """Earth-mover distance by solving the transport LP with |i - j| costs."""
    n = len(p)
    cost = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).ravel()
    a_eq = np.zeros((2 * n, n * n))
    for i in range(n):
        a_eq[i, i * n:(i + 1) * n] = 1.0
        a_eq[n + i, i::n] = 1.0
    res = linprog(cost, A_eq=a_eq, b_eq=np.concatenate([p, q]), bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    assert res.status == 0
    return res.fun


def cvm_loop(fitted_cdf, pmf):
    total, run = 0.0, 0.0
    for i in range(len(pmf)):
        run += pmf[i]
        total += (fitted_cdf[i] - run) ** 2
    return total


def kld_loop(x, y, eps=1e-16):
    a = [v + eps for v in x]
    b = [v + eps for v in y]
    sa, sb = sum(a), sum(b)
    return sum((ai / sa) * math.log((ai / sa) / (bi / sb)) for ai, bi in zip(a, b))


def segment_ssr(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum((x - x.mean()) ** 2)) if x.size else 0.0


def exhaustive_partition(x, m, h):
    """Minimal SSR over every split of ``x`` into ``m + 1`` segments of length >= h.

    Returns ``(ssr, ends)`` with ends the last index of each non-final segment.
    """
    n = len(x)
    best = (math.inf, None)
    for cuts in itertools.combinations(range(h, n - h + 1), m):
        edges = (0, *cuts, n)
        if any(b - a < h for a, b in zip(edges, edges[1:])):
            continue
        s = sum(segment_ssr(x[a:b]) for a, b in zip(edges, edges[1:]))
        if s < best[0]:
            best = (s, tuple(c - 1 for c in cuts))
    return best


def single_break_scan(x, h):
    """Location (last index of the first segment) minimizing the two-segment SSR."""
    n = len(x)
    ssr = [segment_ssr(x[:k]) + segment_ssr(x[k:]) for k in range(h, n - h + 1)]
    return h + int(np.argmin(ssr)) - 1


def split_lrv_direct(x, k, L):
    """Bartlett long-run variance of two-mean residuals at split ``k``, by loops."""
    x = np.asarray(x, dtype=float)
    n = x.size
    parts = [seg - seg.mean() for seg in (x[:k], x[k:]) if seg.size]
    e = np.concatenate(parts)
    g = [sum(e[t] * e[t + j] for t in range(n - j)) / n for j in range(L + 1)]
    return g[0] + 2 * sum((1 - j / (L + 1)) * g[j] for j in range(1, L + 1))


def gpd_pwm_by_hand(y, a=0.35):
    ys = sorted(y)
    n = len(ys)
    b0 = sum(ys) / n
    b1 = sum((1 - (i + 1 - a) / n) * v for i, v in enumerate(ys)) / n
    return 2 - b0 / (b0 - 2 * b1), 2 * b0 * b1 / (b0 - 2 * b1)


def gpd_mom_by_hand(y):
    n = len(y)
    m = sum(y) / n
    v = sum((t - m) ** 2 for t in y) / (n - 1)
    xi = 0.5 * (1 - m * m / v)
    return xi, 0.5 * m * (m * m / v + 1)


def gpd_sample(xi, beta, n, rng):
    e = -np.log1p(-rng.random(n))
    if abs(xi) < 1e-12:
        return beta * e
    return beta / xi * np.expm1(xi * e)
