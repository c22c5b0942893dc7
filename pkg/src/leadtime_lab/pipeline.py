"""Batch runs: ingestion, analysis stages, reports, manifest and plot data.

A run reads one panel (or simulates one from a scenario), executes the
requested stages in dependency order and writes one file set per stage
into the output directory. Every file is written atomically. A manifest
records the configuration, the seed, a SHA-256 digest of the input and
per-stage wall times; timings live only in the manifest so that all other
outputs are byte-identical across repeated runs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import reports
from .breaks import bai_perron
from .composition import GBV, LEADS, NIGHTS, pool_days, read_panel, write_panel
from .divergence import crps, divergence_series, kld
from .errors import (
    InputValidationError,
    InvalidConfig,
    InvalidSpec,
    LeadtimeError,
    MissingStageOutput,
    StageFailure,
)
from .fileio import write_csv, write_json
from .gpd import pool_metric, stability_sweep, tail_ratio_series
from .parametric import FAMILIES, DayComparison, compare_day, fitted_cdf, win_tally
from .resampling import block_bootstrap_mean
from .smoother import score_smoother, smooth_pmf
from .synth import generate_panel, load_scenario

STAGES = ("simulate", "divergence", "breaks", "tails", "gpd", "fit", "smooth", "score")
ANALYSIS_STAGES = STAGES[1:]
DEPENDS = {"breaks": ("divergence",), "score": ("fit", "smooth")}

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_STAGE = 3

THREADS_ENV = "LEADTIME_LAB_THREADS"

HIST_LOW, HIST_HIGH, HIST_WIDTH = -0.05, 0.25, 0.005

# stage -> files it owns, relative to the output directory
STAGE_FILES = {
    "simulate": ("panel.csv",),
    "divergence": ("divergence.csv", "divergence_bootstrap.json"),
    "breaks": ("breaks.json", "segments.csv"),
    "tails": ("tails.csv",),
    "gpd": ("gpd.csv",),
    "fit": ("fits.csv", "comparisons.csv", "win_tally.json"),
    "smooth": ("smoother.csv",),
    "score": ("scores.csv",),
}
POOLED_FILE = "pooled.csv"
MANIFEST_FILE = "manifest.json"
PLOT_DIR = "plots"


@dataclass(frozen=True)
class RunConfig:
    input_path: Path | None
    output_dir: Path
    stages: tuple = ANALYSIS_STAGES
    seed: int = 42
    tail_thresholds: tuple = (7, 30, 60, 90, 180)
    gpd_thresholds: tuple = (60, 90, 120, 150, 180, 210, 240, 270)
    bootstrap_replicates: int = 1000
    max_breaks: int = 5
    trim: float = 0.05
    draws_per_day: int = 1000
    jitter: bool = True
    null_draws: int = 999
    scenario_path: Path | None = None
    strict: bool = True

    def validate(self) -> "RunConfig":
        stages = tuple(self.stages)
        if not stages:
            raise InvalidConfig("stages must be nonempty")
        unknown = sorted(set(stages) - set(STAGES))
        if unknown:
            raise InvalidConfig(f"unknown stages {unknown}; choose from {list(STAGES)}")
        if "simulate" in stages:
            src = self.scenario_path or self.input_path
            if src is None or not Path(src).is_file():
                raise InvalidConfig(f"scenario file not found: {src}")
        elif self.input_path is None or not Path(self.input_path).is_file():
            raise InvalidConfig(f"input file not found: {self.input_path}")
        if self.bootstrap_replicates < 100:
            raise InvalidConfig("bootstrap_replicates must be >= 100")
        if self.max_breaks < 0:
            raise InvalidConfig("max_breaks must be >= 0")
        if not 0 < self.trim < 0.5:
            raise InvalidConfig("trim must be in (0, 0.5)")
        if self.draws_per_day < 1:
            raise InvalidConfig("draws_per_day must be >= 1")
        if any(not 0 <= u <= 364 for u in self.tail_thresholds):
            raise InvalidConfig("tail thresholds must lie in 0..364")
        g = tuple(self.gpd_thresholds)
        if not g or any(b <= a for a, b in zip(g, g[1:])):
            raise InvalidConfig("gpd thresholds must be nonempty and strictly increasing")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("input_path", "output_dir", "scenario_path"):
            d[k] = None if d[k] is None else str(d[k])
        for k in ("stages", "tail_thresholds", "gpd_thresholds"):
            d[k] = list(d[k])
        return d


@dataclass
class RunResult:
    status: int
    stages: tuple
    manifest_path: Path | None = None
    failed_stage: str | None = None
    diagnostics: list = field(default_factory=list)


def resolve_stages(requested) -> tuple:
    """Requested stages plus their prerequisites, in execution order."""
    want = set(requested)
    changed = True
    while changed:
        extra = {d for s in want for d in DEPENDS.get(s, ())} - want
        want |= extra
        changed = bool(extra)
    return tuple(s for s in STAGES if s in want)


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise InvalidConfig(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InvalidConfig(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def parallel_map(fn, items, threads: int | None = None) -> list:
    """Order-preserving map over at most ``threads`` worker processes.

    Per-item work is pure, so results do not depend on the worker count.
    """
    items = list(items)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    chunk = max(1, len(items) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items, chunksize=chunk))


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# -- stages ------------------------------------------------------------------


def _metric_days(days):
    for day in days:
        yield day.date, NIGHTS, day.nights
        yield day.date, GBV, day.gbv


def _stage_divergence(cfg, out, days, results):
    series = divergence_series(days)
    boot = block_bootstrap_mean(series.w1, cfg.bootstrap_replicates, cfg.seed)
    results["divergence"] = series
    reports.write_divergence(series, out / "divergence.csv")
    reports.write_bootstrap(boot, out / "divergence_bootstrap.json")


def _stage_breaks(cfg, out, days, results):
    series = results["divergence"]
    model = bai_perron(series.w1, cfg.max_breaks, cfg.trim, null_draws=cfg.null_draws, seed=cfg.seed)
    results["breaks"] = model
    reports.write_breaks(model, series.dates, out / "breaks.json")
    reports.write_segments(model, series.dates, out / "segments.csv")


def _stage_tails(cfg, out, days, results):
    trs = tail_ratio_series(days, cfg.tail_thresholds)
    results["tails"] = trs
    reports.write_tails(trs, out / "tails.csv")


def _stage_gpd(cfg, out, days, results):
    profiles = {
        m: stability_sweep(pool_metric(days, m), cfg.gpd_thresholds, cfg.draws_per_day, cfg.seed, cfg.jitter)
        for m in (NIGHTS, GBV)
    }
    results["gpd"] = profiles
    reports.write_gpd(profiles, out / "gpd.csv")


def _compare(item):
    date, metric, pmf = item
    try:
        return compare_day(pmf.mass, date, metric)
    except LeadtimeError:
        # no family fits (e.g. a single-lead day): recorded, not fatal
        return DayComparison(date, metric, {}, "", math.nan, math.nan, FAMILIES)


def _stage_fit(cfg, out, days, results):
    comps = parallel_map(_compare, _metric_days(days))
    results["fit"] = comps
    reports.write_fits(comps, out / "fits.csv")
    reports.write_comparisons(comps, out / "comparisons.csv")
    tally = {}
    for metric in (NIGHTS, GBV):
        ok = [c for c in comps if c.metric == metric and c.winner]
        if ok:
            t = win_tally(ok)
            tally[metric] = {"counts": t.counts, "shares": t.shares, "n": t.n}
    write_json(out / "win_tally.json", tally)


def _smooth(item):
    date, metric, pmf = item
    fit = smooth_pmf(pmf.mass)
    c, k = score_smoother(fit, pmf.mass)
    return date, metric, fit, c, k


def _stage_smooth(cfg, out, days, results):
    records = parallel_map(_smooth, _metric_days(days))
    results["smooth"] = records
    reports.write_smoother(records, out / "smoother.csv")


def _stage_score(cfg, out, days, results):
    by_key = {(d, m): p.mass for d, m, p in _metric_days(days)}
    smooth = {(d, m): f for d, m, f, _, _ in results["smooth"]}
    rows = []
    for comp in results["fit"]:
        key = (comp.date, comp.metric)
        x = by_key[key]
        for fam in FAMILIES:
            f = comp.fits.get(fam)
            if f is not None:
                rows.append((*key, fam, crps(fitted_cdf(f), x), kld(x, f.induced_pmf)))
        s = smooth[key]
        rows.append((*key, "Smoother", crps(s.fitted_cdf, x), kld(x, s.fitted_pmf)))
    reports.write_scores(rows, out / "scores.csv")


RUNNERS = {
    "divergence": _stage_divergence,
    "breaks": _stage_breaks,
    "tails": _stage_tails,
    "gpd": _stage_gpd,
    "fit": _stage_fit,
    "smooth": _stage_smooth,
    "score": _stage_score,
}


def write_pooled(days, path) -> Path:
    nights = pool_days([d.nights for d in days]).mass
    gbv = pool_days([d.gbv for d in days]).mass
    return write_csv(path, ("lead", "nights", "gbv"),
                     [(int(l), reports.fmt(n), reports.fmt(g)) for l, n, g in zip(LEADS, nights, gbv)])


# -- run ---------------------------------------------------------------------


def run(config: RunConfig) -> RunResult:
    """Execute a configured run.

    Returns a :class:`RunResult` whose ``status`` is 0 on success, 2 when
    the input fails validation (``diagnostics`` lists the offending rows)
    and 3 when a stage raises (``failed_stage`` names it). Files written by
    stages that completed before a failure are kept.
    """
    config.validate()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stages = resolve_stages(config.stages)
    timings = {}
    manifest = {
        "tool": "leadtime-lab",
        "version": __version__,
        "config": config.to_dict(),
        "seed": config.seed,
        "stages": list(stages),
    }

    def finish(result: RunResult) -> RunResult:
        manifest["status"] = result.status
        manifest["failed_stage"] = result.failed_stage
        manifest["wall_time_s"] = timings
        manifest["outputs"] = {
            f.relative_to(out).as_posix(): file_digest(f)
            for f in sorted(out.rglob("*")) if f.is_file() and f.name != MANIFEST_FILE
        }
        result.manifest_path = write_json(out / MANIFEST_FILE, manifest)
        return result

    # ingestion
    try:
        if "simulate" in stages:
            src = Path(config.scenario_path or config.input_path)
            manifest["input"] = {"kind": "scenario", "path": str(src), "sha256": file_digest(src)}
            t0 = time.perf_counter()
            spec = load_scenario(src, seed=config.seed)
            days = generate_panel(spec)
            write_panel(days, out / "panel.csv")
            timings["simulate"] = time.perf_counter() - t0
        else:
            src = Path(config.input_path)
            manifest["input"] = {"kind": "panel", "path": str(src), "sha256": file_digest(src)}
            days = read_panel(src, strict=config.strict)
    except InputValidationError as exc:
        return finish(RunResult(EXIT_INPUT, stages, diagnostics=exc.diagnostics))
    except InvalidSpec as exc:
        return finish(RunResult(EXIT_INPUT, stages, diagnostics=[str(exc)]))
    write_pooled(days, out / POOLED_FILE)

    results = {}
    for stage in stages:
        if stage == "simulate":
            continue
        t0 = time.perf_counter()
        try:
            RUNNERS[stage](config, out, days, results)
        except Exception as exc:  # noqa: BLE001 - any stage error maps to exit 3
            timings[stage] = time.perf_counter() - t0
            err = StageFailure(stage, exc)
            return finish(RunResult(EXIT_STAGE, stages, failed_stage=stage, diagnostics=[str(err)]))
        timings[stage] = time.perf_counter() - t0
    emit_plot_data(out)
    return finish(RunResult(EXIT_OK, stages))


# -- plot data ---------------------------------------------------------------

PLOT_BUNDLES = {
    # bundle -> (source files, output file)
    "pooled_pmf": ((POOLED_FILE,), "pooled_pmf.csv"),
    "divergence_breaks": (("divergence.csv", "segments.csv", "breaks.json"), "divergence_breaks.csv"),
    "tail_ratios": (("tails.csv",), "tail_ratios.csv"),
    "stability": (("gpd.csv",), "stability.csv"),
    "ce_difference_hist": (("comparisons.csv",), "ce_difference_hist.csv"),
}


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _num(s):
    return float(s) if s != "" else math.nan


def histogram_counts(values, low=HIST_LOW, high=HIST_HIGH, width=HIST_WIDTH):
    """Counts in fixed-width bins ``[low + i w, low + (i+1) w)``; the top edge is closed.

    Returns ``(edges, counts, below, above)``; NaN values are ignored.
    """
    nbins = int(round((high - low) / width))
    edges = np.round(low + width * np.arange(nbins + 1), 10)
    v = np.asarray(values, dtype=float)
    v = v[~np.isnan(v)]
    idx = np.floor((v - low) / width + 1e-9).astype(int)
    idx[v == high] = nbins - 1
    below = int(np.sum(idx < 0))
    above = int(np.sum(idx >= nbins))
    counts = np.bincount(idx[(idx >= 0) & (idx < nbins)], minlength=nbins)
    return edges, counts, below, above


def _bundle_pooled(out):
    rows = _read_csv(out / POOLED_FILE)
    n = np.array([float(r["nights"]) for r in rows])
    g = np.array([float(r["gbv"]) for r in rows])
    nc, gc = np.cumsum(n), np.cumsum(g)
    return ("lead", "nights", "gbv", "nights_cdf", "gbv_cdf"), [
        (r["lead"], r["nights"], r["gbv"], reports.fmt(a), reports.fmt(b)) for r, a, b in zip(rows, nc, gc)
    ]


def _bundle_divergence_breaks(out):
    w = _read_csv(out / "divergence.csv")
    seg = _read_csv(out / "segments.csv")
    with open(out / "breaks.json") as fh:
        rep = json.load(fh)
    means = [rep["initial_mean"]] + [b["segment_mean"] for b in rep["breaks"]]
    starts = {b["date"] for b in rep["breaks"]}
    rows = []
    for a, s in zip(w, seg):
        sid = int(s["segment_id"])
        rows.append((a["date"], a["w1"], sid, reports.fmt(float(means[sid])), reports.fmt(a["date"] in starts)))
    return ("date", "w1", "segment_id", "segment_mean", "regime_start"), rows


def _bundle_tail_ratios(out):
    rows = [(r["date"], r["threshold"], r["ratio"]) for r in _read_csv(out / "tails.csv")]
    return ("date", "threshold", "ratio"), rows


def _bundle_stability(out):
    rows = [
        (r["metric"], r["threshold"], r["xi"], r["n_exceed"], r["estimator"], reports.fmt(r["xi"] == ""))
        for r in _read_csv(out / "gpd.csv")
    ]
    return ("metric", "threshold", "xi", "n_exceed", "estimator", "masked"), rows


def _bundle_hist(out):
    comps = _read_csv(out / "comparisons.csv")
    rows = []
    for metric in (NIGHTS, GBV):
        sub = [c for c in comps if c["metric"] == metric]
        for col in ("ln_minus_gamma", "wei_minus_gamma"):
            edges, counts, below, above = histogram_counts([_num(c[col]) for c in sub])
            rows.append((metric, col, reports.fmt(-math.inf), reports.fmt(edges[0]), below))
            for lo, hi, c in zip(edges, edges[1:], counts):
                rows.append((metric, col, reports.fmt(lo), reports.fmt(hi), int(c)))
            rows.append((metric, col, reports.fmt(edges[-1]), reports.fmt(math.inf), above))
    return ("metric", "difference", "bin_low", "bin_high", "count"), rows


_BUNDLE_BUILDERS = {
    "pooled_pmf": _bundle_pooled,
    "divergence_breaks": _bundle_divergence_breaks,
    "tail_ratios": _bundle_tail_ratios,
    "stability": _bundle_stability,
    "ce_difference_hist": _bundle_hist,
}


def emit_plot_data(output_dir, bundles=None) -> dict:
    """Write tidy plot-ready CSVs derived from stage outputs in ``output_dir``.

    Bundles
    -------
    pooled_pmf
        ``lead,nights,gbv,nights_cdf,gbv_cdf`` from the pooled pmfs.
    divergence_breaks
        ``date,w1,segment_id,segment_mean,regime_start``.
    tail_ratios
        ``date,threshold,ratio`` (empty ratio where undefined).
    stability
        ``metric,threshold,xi,n_exceed,estimator,masked``.
    ce_difference_hist
        ``metric,difference,bin_low,bin_high,count``: counts of per-day
        cross-entropy differences in bins of width 0.005 over
        [-0.05, 0.25], plus one underflow and one overflow row.

    With ``bundles=None`` every bundle whose sources exist is written.
    Naming a bundle whose sources are missing raises ``MissingStageOutput``.
    Returns a mapping from bundle name to written path.
    """
    out = Path(output_dir)
    names = tuple(PLOT_BUNDLES) if bundles is None else tuple(bundles)
    written = {}
    for name in names:
        if name not in PLOT_BUNDLES:
            raise ValueError(f"unknown plot bundle {name!r}")
        sources, target = PLOT_BUNDLES[name]
        missing = [s for s in sources if not (out / s).is_file()]
        if missing:
            if bundles is None:
                continue
            raise MissingStageOutput(f"bundle {name!r} needs {missing} in {out}")
        header, rows = _BUNDLE_BUILDERS[name](out)
        written[name] = write_csv(out / PLOT_DIR / target, header, rows)
    return written
