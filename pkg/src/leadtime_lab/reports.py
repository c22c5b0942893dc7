"""CSV and JSON exports for every analysis stage.

Floats are written with ``repr`` so files round-trip exactly and are
byte-stable across runs. Undefined values are written as empty fields
in CSV and ``null`` in JSON.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .fileio import write_csv, write_json
from .parametric import FAMILIES

DIVERGENCE_COLUMNS = ("date", "w1")
TAIL_COLUMNS = ("date", "threshold", "nights_tail", "gbv_tail", "ratio", "defined")
GPD_COLUMNS = ("metric", "threshold", "xi", "beta", "n_exceed", "estimator")
FIT_COLUMNS = ("date", "metric", "family", "a", "b", "cross_entropy", "converged")
COMPARISON_COLUMNS = ("date", "metric", "winner", "ln_minus_gamma", "wei_minus_gamma")
SMOOTHER_COLUMNS = ("date", "metric", "k_used", "edf", "lambda", "crps", "kld", "k_check_passed")
SEGMENT_COLUMNS = ("date", "segment_id")
SCORE_COLUMNS = ("date", "metric", "model", "crps", "kld", "in_sample")


def fmt(v) -> str:
    """Text form of one CSV cell."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "" if math.isnan(v) else repr(v)
    if hasattr(v, "isoformat"):
        return v.isoformat()
    return str(v)


def _rows(rows):
    return [[fmt(v) for v in row] for row in rows]


def json_value(v):
    """NaN/inf become ``None``; numpy scalars become Python scalars."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    if hasattr(v, "isoformat"):
        return v.isoformat()
    return v


def write_divergence(series, path) -> Path:
    return write_csv(path, DIVERGENCE_COLUMNS, _rows(zip(series.dates, series.w1)))


def write_tails(trs, path) -> Path:
    rows = []
    for i, date in enumerate(trs.dates):
        for j, u in enumerate(trs.thresholds):
            defined = not trs.undefined_mask[i, j]
            rows.append((date, u, trs.nights_tail[i, j], trs.gbv_tail[i, j],
                         trs.ratio[i, j] if defined else None, defined))
    return write_csv(path, TAIL_COLUMNS, _rows(rows))


def write_gpd(profiles: dict, path) -> Path:
    """``profiles`` maps metric name to a :class:`~leadtime_lab.gpd.StabilityProfile`."""
    rows = []
    for metric, prof in profiles.items():
        for j, u in enumerate(prof.thresholds):
            rows.append((metric, u, prof.xi_by_threshold[j], prof.beta_by_threshold[j],
                         prof.n_by_threshold[j], prof.estimator_by_threshold[j]))
    return write_csv(path, GPD_COLUMNS, _rows(rows))


def write_fits(comparisons, path) -> Path:
    rows = []
    for c in comparisons:
        for fam in FAMILIES:
            f = c.fits.get(fam)
            if f is None:
                rows.append((c.date, c.metric, fam, None, None, None, False))
            else:
                rows.append((c.date, c.metric, fam, f.params.a, f.params.b, f.cross_entropy, f.converged))
    return write_csv(path, FIT_COLUMNS, _rows(rows))


def write_comparisons(comparisons, path) -> Path:
    rows = [(c.date, c.metric, c.winner, c.ln_minus_gamma, c.wei_minus_gamma) for c in comparisons]
    return write_csv(path, COMPARISON_COLUMNS, _rows(rows))


def write_smoother(records, path) -> Path:
    """``records`` holds ``(date, metric, SmoothFit, crps, kld)`` tuples."""
    rows = [(d, m, f.k_used, f.edf, f.lam, c, k, f.k_check_passed) for d, m, f, c, k in records]
    return write_csv(path, SMOOTHER_COLUMNS, _rows(rows))


def write_scores(records, path) -> Path:
    """``records`` holds ``(date, metric, model, crps, kld)``; all scores are in-sample."""
    return write_csv(path, SCORE_COLUMNS, _rows((*r, True) for r in records))


def breaks_report(model, dates) -> dict:
    """JSON-ready summary of a :class:`~leadtime_lab.breaks.BreakModel`.

    Each break carries the first date of the new regime and that regime's
    mean; the first regime's mean is reported under ``initial_mean``.
    """
    starts = model.break_dates(dates)
    return {
        "breaks": [
            {"date": json_value(d), "segment_mean": json_value(m)}
            for d, m in zip(starts, model.segment_means[1:])
        ],
        "initial_mean": json_value(model.segment_means[0]),
        "supf": json_value(model.supf),
        "supf_p": json_value(model.supf_p),
        "bic": [json_value(b) for b in model.bic_by_m],
        "ssr": [json_value(s) for s in model.ssr_by_m],
        "chosen_m": model.chosen_m,
        "min_segment": model.min_segment,
    }


def write_breaks(model, dates, path) -> Path:
    return write_json(path, breaks_report(model, dates))


def write_segments(model, dates, path) -> Path:
    return write_csv(path, SEGMENT_COLUMNS, _rows(zip(dates, model.segment_ids())))


def write_bootstrap(result, path) -> Path:
    return write_json(path, {k: json_value(getattr(result, k))
                             for k in ("point", "ci_low", "ci_high", "replicates", "block_len")})
