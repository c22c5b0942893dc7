"""Circular block bootstrap and simulated sup-F null distributions."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, SeriesTooShort

# spawn key separating null-simulation streams from any user-level use of the same seed
_NULL_STREAM = 0x5F


@dataclass(frozen=True)
class BootstrapResult:
    point: float
    ci_low: float
    ci_high: float
    replicates: int
    block_len: int


@dataclass(frozen=True)
class HacSpec:
    """Settings shared by an observed sup-F statistic and its simulated null."""

    trim: float = 0.05

    def __post_init__(self):
        if not 0 < self.trim < 0.5:
            raise InvalidConfig(f"trim must be in (0, 0.5), got {self.trim}")


def block_length(n: int) -> int:
    """``ceil(n ** (1/3))`` computed in integers (27 -> 3, 2557 -> 14)."""
    if n < 1:
        raise ValueError("n must be positive")
    b = max(1, int(round(n ** (1.0 / 3.0))))
    while b**3 < n:
        b += 1
    while b > 1 and (b - 1) ** 3 >= n:
        b -= 1
    return b


def circular_block_indices(n: int, block_len: int, replicates: int, rng) -> np.ndarray:
    """Index matrix ``(replicates, n)`` built from wrap-around blocks."""
    n_blocks = math.ceil(n / block_len)
    starts = rng.integers(0, n, size=(replicates, n_blocks))
    idx = (starts[:, :, None] + np.arange(block_len)) % n
    return idx.reshape(replicates, -1)[:, :n]


def block_bootstrap_mean(series, replicates: int = 1000, seed: int = 42, level: float = 0.95) -> BootstrapResult:
    """Percentile confidence interval for the mean of a dependent series.

    Blocks of length ``ceil(n ** (1/3))`` are drawn with wrap-around, so
    every replicate has the full length ``n``.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 2:
        raise SeriesTooShort("bootstrap needs at least two observations")
    if replicates < 100:
        raise ValueError("use at least 100 replicates")
    b = block_length(n)
    rng = np.random.default_rng(seed)
    means = x[circular_block_indices(n, b, replicates, rng)].mean(axis=1)
    point = float(x.mean())
    tail = (1 - level) / 2 * 100
    lo, hi = np.percentile(means, [tail, 100 - tail])
    # percentile bounds can in principle sit on one side of the point estimate
    lo, hi = min(float(lo), point), max(float(hi), point)
    return BootstrapResult(point, lo, hi, replicates, b)


@functools.lru_cache(maxsize=32)
def _null_cached(n, trim, draws, seed):
    from .breaks import supf_statistic

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_NULL_STREAM, n)))
    stats = np.array([supf_statistic(rng.standard_normal(n), trim) for _ in range(draws)])
    stats.sort()
    stats.setflags(write=False)
    return stats


def simulate_supf_null(n: int, hac_spec: HacSpec | None = None, draws: int = 999, seed: int = 42) -> np.ndarray:
    """Sorted sup-F statistics from ``draws`` Gaussian white-noise series of length ``n``.

    Results are cached per ``(n, trim, draws, seed)``.
    """
    spec = hac_spec or HacSpec()
    if not isinstance(spec, HacSpec):
        raise InvalidConfig("hac_spec must be a HacSpec")
    if n < 40:
        raise InvalidConfig(f"null simulation needs n >= 40, got {n}")
    if draws < 200:
        raise InvalidConfig(f"null simulation needs draws >= 200, got {draws}")
    return _null_cached(int(n), float(spec.trim), int(draws), int(seed))


def supf_pvalue(stat: float, null) -> float:
    """Upper-tail rank p-value ``(1 + #{null >= stat}) / (draws + 1)``."""
    null = np.asarray(null)
    exceed = null.size - np.searchsorted(null, stat, side="left")
    return float((1 + exceed) / (null.size + 1))
