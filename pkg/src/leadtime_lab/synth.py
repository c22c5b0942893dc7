"""Seeded synthetic panels with known generating parameters.

Nights pmfs are interval-censored parametric pmfs; the paired GBV pmf comes
from the same family with its mean inflated by ``gbv_shift``. Optional
single-harmonic seasonality, regime overrides, multinomial sampling noise
and a lower truncation point make the fixtures used throughout the tests.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .composition import MAX_LEAD, make_pair
from .errors import InvalidSpec
from .parametric import FAMILIES, FamilyParams, induced_pmf

DEFAULT_START = dt.date(2019, 1, 1)


@dataclass(frozen=True)
class Regime:
    """Parameter override active from ``start`` (day index) onwards.

    ``a``/``b`` replace the base parameters when given; ``mean_factor``
    then rescales the mean through the scale-type parameter.
    """

    start: int
    a: float | None = None
    b: float | None = None
    mean_factor: float = 1.0


@dataclass(frozen=True)
class ScenarioSpec:
    n_days: int
    family: str = "Gamma"
    base_params: tuple = (0.77, 0.013)
    seasonal_amplitude: float = 0.0
    regimes: tuple = ()
    noise_draws: int = 0
    truncate_at: int = MAX_LEAD
    gbv_shift: float = 0.0
    seed: int = 42
    start_date: dt.date = field(default=DEFAULT_START)

    def validate(self):
        if self.n_days < 1:
            raise InvalidSpec("n_days must be positive")
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}")
        try:
            FamilyParams(self.family, *self.base_params)
        except (TypeError, ValueError) as exc:
            raise InvalidSpec(str(exc)) from None
        if not 0 <= self.seasonal_amplitude < 1:
            raise InvalidSpec("seasonal_amplitude must be in [0, 1)")
        starts = [r.start for r in self.regimes]
        if any(s < 0 for s in starts) or any(b <= a for a, b in zip(starts, starts[1:])):
            raise InvalidSpec("regime starts must be >= 0 and strictly increasing")
        if any(r.mean_factor <= 0 for r in self.regimes):
            raise InvalidSpec("regime mean_factor must be positive")
        if self.noise_draws < 0:
            raise InvalidSpec("noise_draws must be >= 0")
        if not 0 <= self.truncate_at <= MAX_LEAD:
            raise InvalidSpec(f"truncate_at must be in 0..{MAX_LEAD}")
        if self.gbv_shift < 0:
            raise InvalidSpec("gbv_shift must be >= 0")
        return self


def day_params(spec: ScenarioSpec, d: int) -> FamilyParams:
    """Effective Nights parameters on day index ``d``."""
    a, b = spec.base_params
    factor = 1.0
    for r in spec.regimes:
        if r.start <= d:
            a = r.a if r.a is not None else a
            b = r.b if r.b is not None else b
            factor = r.mean_factor
    p = FamilyParams(spec.family, a, b)
    season = 1.0 + spec.seasonal_amplitude * math.sin(2 * math.pi * d / 365.0)
    return p.scale_mean(factor * season)


def _finish(p, rng, spec):
    if spec.noise_draws > 0:
        p = rng.multinomial(spec.noise_draws, p / p.sum()) / spec.noise_draws
    if spec.truncate_at < MAX_LEAD:
        p = p.copy()
        p[spec.truncate_at + 1 :] = 0.0
    s = p.sum()
    if s <= 0:
        raise InvalidSpec("truncation removed all mass from a day")
    return p / s


def generate_panel(spec: ScenarioSpec) -> list:
    """Build the list of :class:`~leadtime_lab.composition.PairedDay` for a scenario."""
    spec.validate()
    children = np.random.SeedSequence(spec.seed).spawn(spec.n_days)
    days = []
    for d, ss in enumerate(children):
        rng_n, rng_g = (np.random.default_rng(s) for s in ss.spawn(2))
        p = day_params(spec, d)
        nights = _finish(induced_pmf(p), rng_n, spec)
        gbv = _finish(induced_pmf(p.scale_mean(1.0 + spec.gbv_shift)), rng_g, spec)
        days.append(make_pair(spec.start_date + dt.timedelta(days=d), nights, gbv))
    return days


def generate_break_series(n: int, break_points, means, sigma: float = 1.0, seed: int = 42) -> np.ndarray:
    """Piecewise-constant mean plus iid Gaussian noise.

    ``break_points`` are the first indices of each new segment.
    """
    break_points = [int(b) for b in break_points]
    if len(means) != len(break_points) + 1:
        raise InvalidSpec("need exactly one more mean than break points")
    if sigma < 0:
        raise InvalidSpec("sigma must be >= 0")
    if any(not 0 < b < n for b in break_points) or any(b2 <= b1 for b1, b2 in zip(break_points, break_points[1:])):
        raise InvalidSpec("break points must be increasing and inside the series")
    edges = [0] + break_points + [n]
    mu = np.concatenate([np.full(e2 - e1, float(m)) for e1, e2, m in zip(edges, edges[1:], means)])
    noise = np.random.default_rng(seed).standard_normal(n) if sigma > 0 else np.zeros(n)
    return mu + sigma * noise


def scenario_from_dict(obj: dict, seed: int | None = None) -> ScenarioSpec:
    """Build a spec from JSON-style data; ``seed`` overrides the stored one."""
    obj = dict(obj)
    try:
        regimes = tuple(
            Regime(int(r["start"]), r.get("a"), r.get("b"), float(r.get("mean_factor", 1.0)))
            for r in obj.pop("regimes", [])
        )
        if "start_date" in obj:
            obj["start_date"] = dt.date.fromisoformat(obj["start_date"])
        if "base_params" in obj:
            obj["base_params"] = tuple(float(v) for v in obj["base_params"])
        if seed is not None:
            obj["seed"] = int(seed)
        spec = ScenarioSpec(regimes=regimes, **obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"bad scenario: {exc}") from None
    return spec.validate()


def load_scenario(path, seed: int | None = None) -> ScenarioSpec:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh), seed=seed)


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "n_days": spec.n_days,
        "family": spec.family,
        "base_params": list(spec.base_params),
        "seasonal_amplitude": spec.seasonal_amplitude,
        "regimes": [
            {k: v for k, v in (("start", r.start), ("a", r.a), ("b", r.b), ("mean_factor", r.mean_factor)) if v is not None}
            for r in spec.regimes
        ],
        "noise_draws": spec.noise_draws,
        "truncate_at": spec.truncate_at,
        "gbv_shift": spec.gbv_shift,
        "seed": spec.seed,
        "start_date": spec.start_date.isoformat(),
    }


# Fixtures shared by tests, demos and the acceptance suite.

def truncation_scenario(n_days: int = 1000, seed: int = 7) -> ScenarioSpec:
    """Exponential leads (mean 40) with a final 1% of days at mean 200.

    A single homogeneous exponential cannot show both a flat shape estimate
    up to u = 150 and a strongly negative one at u = 270; the short
    long-horizon regime supplies the far-tail exceedances near the bound.
    """
    late = n_days - max(1, n_days // 100)
    return ScenarioSpec(
        n_days=n_days, family="Gamma", base_params=(1.0, 1 / 40),
        regimes=(Regime(late, a=1.0, b=1 / 200),), seed=seed,
    )


def untruncated_exponential_scenario(n_days: int = 1000, mean: float = 20.0, seed: int = 7) -> ScenarioSpec:
    """Exponential leads whose mass beyond 365 is negligible (e^-18 at mean 20)."""
    return ScenarioSpec(n_days=n_days, family="Gamma", base_params=(1.0, 1 / mean), seed=seed)


def standard_scenario(n_days: int = 120, seed: int = 1) -> ScenarioSpec:
    """Small noisy panel with seasonality, a mean-doubling regime halfway and a GBV shift.

    Used as the end-to-end fixture for the batch pipeline.
    """
    return ScenarioSpec(
        n_days=n_days, family="Gamma", base_params=(0.77, 0.026), seasonal_amplitude=0.2,
        regimes=(Regime(n_days // 2, mean_factor=2.0),), noise_draws=5000, gbv_shift=0.14, seed=seed,
    )
