"""Penalized cubic B-spline smoother for daily pmfs.

The working response is ``log(x + 1e-8)``. A cubic B-spline basis on
equally spaced knots over [0, 365] with a second-order difference penalty
is fitted by penalized least squares. The smoothing parameter minimises
a profiled Gaussian REML score whose scale is floored at the response
resolution, and fitted values are exponentiated and normalized. When
residuals ordered by lead stay serially correlated, the basis dimension
is doubled (up to ``k_max``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg
from scipy.interpolate import BSpline

from .composition import LEADS, MAX_LEAD, as_mass
from .divergence import crps, kld
from .errors import BasisTooSmall

DELTA = 1e-8
LOG10_LAMBDA_RANGE = (-6.0, 6.0)
GRID_POINTS = 61
NULL_SPACE_DIM = 2  # constant and linear coefficient sequences are unpenalized
# resolution of the log-share response (1e-3 rms); residual variance below it is not signal
PHI_FLOOR = 1e-6
AC_LIMIT = 0.2
AC_ALPHA = 0.05
N_SHUFFLES = 199
_PERM_SEED = 20240601
_GOLDEN = (np.sqrt(5) - 1) / 2


@dataclass(frozen=True, eq=False)
class SmoothFit:
    fitted_pmf: np.ndarray
    edf: float
    k_used: int
    lam: float
    k_check_passed: bool
    reml: float = np.nan

    @property
    def fitted_cdf(self) -> np.ndarray:
        c = np.cumsum(self.fitted_pmf)
        return np.minimum(c / c[-1], 1.0)


@lru_cache(maxsize=16)
def basis(k: int):
    """Design matrix (366 x k) and penalty (k x k) for a k-dimensional cubic basis.

    Knots extend three spacings beyond both ends so every interior basis
    function has the same shape; linear functions then have exactly linear
    coefficients and sit in the penalty null space.
    """
    if k < 4:
        raise BasisTooSmall(f"cubic basis needs k >= 4, got {k}")
    nseg = k - 3
    dx = MAX_LEAD / nseg
    knots = np.arange(-3, nseg + 4) * dx
    B = BSpline.design_matrix(LEADS.astype(float), knots, 3).toarray()
    D = np.diff(np.eye(k), 2, axis=0)
    P = D.T @ D
    B.setflags(write=False)
    P.setflags(write=False)
    return B, P


class _System:
    """Penalized least squares for one (basis, response) pair."""

    def __init__(self, B, P, y):
        self.B, self.P, self.y = B, P, y
        self.BtB = B.T @ B
        self.Bty = B.T @ y
        self.n, self.k = B.shape
        ev = np.linalg.eigvalsh(P)
        pos = ev[ev > ev.max() * 1e-10]
        self.rank = pos.size
        self.logdet_P = float(np.sum(np.log(pos)))

    def solve(self, lam):
        A = self.BtB + lam * self.P
        cf = linalg.cho_factor(A)
        beta = linalg.cho_solve(cf, self.Bty)
        logdet_A = 2.0 * np.sum(np.log(np.diag(cf[0])))
        return beta, cf, logdet_A

    def reml(self, log10_lam):
        lam = 10.0**log10_lam
        beta, _, logdet_A = self.solve(lam)
        r = self.y - self.B @ beta
        pen = float(beta @ self.P @ beta)
        dof = self.n - NULL_SPACE_DIM
        phi = max((r @ r + lam * pen) / dof, PHI_FLOOR)
        return 0.5 * (dof * np.log(phi) + logdet_A - self.rank * np.log(lam) - self.logdet_P)

    def edf(self, lam):
        _, cf, _ = self.solve(lam)
        return float(np.trace(linalg.cho_solve(cf, self.BtB)))


def _golden(f, a, b, tol=1e-4):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2


def select_lambda(system: _System) -> tuple[float, float]:
    """Grid search over log10(lambda) then golden-section refinement; returns (lambda, score)."""
    grid = np.linspace(*LOG10_LAMBDA_RANGE, GRID_POINTS)
    scores = np.array([system.reml(g) for g in grid])
    i = int(np.argmin(scores))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    best = _golden(system.reml, lo, hi)
    s = system.reml(best)
    if s > scores[i]:
        best, s = grid[i], scores[i]
    return 10.0**best, float(s)


def lag1_check(resid, shuffles=N_SHUFFLES, seed=_PERM_SEED):
    """Lag-1 autocorrelation of residuals and its permutation p-value."""
    r = resid - resid.mean()
    ss = r @ r
    if ss <= PHI_FLOOR * r.size:
        return 0.0, 1.0
    ac = (r[:-1] @ r[1:]) / ss
    rng = np.random.default_rng(seed)
    perm = np.array([rng.permutation(r) for _ in range(shuffles)])
    ac_perm = np.sum(perm[:, :-1] * perm[:, 1:], axis=1) / ss
    p = (1 + np.sum(ac_perm >= ac)) / (shuffles + 1)
    return float(ac), float(p)


def _to_pmf(eta):
    w = np.exp(eta - eta.max())
    return w / w.sum()


def fit_at_lambda(x, k: int, lam: float):
    """Fitted pmf and edf for a fixed basis size and smoothing parameter."""
    B, P = basis(k)
    y = np.log(as_mass(x) + DELTA)
    system = _System(B, P, y)
    beta, _, _ = system.solve(lam)
    return _to_pmf(B @ beta), system.edf(lam)


def unpenalized_fit(x, k: int) -> np.ndarray:
    B, _ = basis(k)
    y = np.log(as_mass(x) + DELTA)
    beta, *_ = np.linalg.lstsq(B, y, rcond=None)
    return _to_pmf(B @ beta)


def smooth_pmf(x, k_init: int = 20, k_max: int = 100) -> SmoothFit:
    """Smooth a daily pmf; see the module docstring for the procedure.

    Raises
    ------
    BasisTooSmall
        ``k_init < 4``.
    """
    if k_init < 4:
        raise BasisTooSmall(f"k_init must be >= 4, got {k_init}")
    if not k_init <= k_max <= MAX_LEAD + 1:
        raise ValueError("need k_init <= k_max <= 366")
    y = np.log(as_mass(x) + DELTA)
    k = k_init
    while True:
        B, P = basis(k)
        system = _System(B, P, y)
        lam, score = select_lambda(system)
        beta, _, _ = system.solve(lam)
        eta = B @ beta
        ac, p = lag1_check(y - eta)
        passed = not (ac > AC_LIMIT and p < AC_ALPHA)
        if passed or k >= k_max:
            break
        k = min(2 * k, k_max)
    return SmoothFit(_to_pmf(eta), system.edf(lam), k, float(lam), passed, score)


def score_smoother(fit: SmoothFit, x) -> tuple[float, float]:
    """In-sample (CRPS, KLD) of a smooth fit against the pmf it was fitted to."""
    return crps(fit.fitted_cdf, x), kld(x, fit.fitted_pmf)

