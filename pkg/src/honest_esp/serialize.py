"""JSON and plot-data emission.

Floats are printed with 17 significant digits so every double
round-trips exactly; non-finite values become JSON null (the reference
band endpoints are the only place infinities legitimately appear).
"""

import dataclasses
import json
import math

import numpy as np
import pandas as pd

from .bands import fit_beta_spline
from .errors import ValidationError

# fixed column order for the plot CSV; bands not present stay absent
_BAND_ORDER = ("pointwise", "scb-sup", "scb-inf", "scb-inf-upper",
               "scb-inf-lower", "bonferroni")


def _float_token(x):
    if math.isfinite(x):
        return "%.17g" % x
    return "null"


def _render(obj, indent, level):
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float_token(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = dataclasses.asdict(obj)
    if isinstance(obj, dict):
        items = []
        for key, value in obj.items():
            if not isinstance(key, str):
                raise ValidationError(f"JSON keys must be strings, got {key!r}")
            items.append((json.dumps(key), _render(value, indent, level + 1)))
        return _join(("%s:%s" % (k, " " + v if indent else v) for k, v in items),
                     "{", "}", indent, level)
    if isinstance(obj, (list, tuple)):
        return _join((_render(v, indent, level + 1) for v in obj),
                     "[", "]", indent, level)
    raise ValidationError(f"cannot serialize {type(obj).__name__}")


def _join(parts, open_ch, close_ch, indent, level):
    parts = list(parts)
    if not parts:
        return open_ch + close_ch
    if not indent:
        return open_ch + ",".join(parts) + close_ch
    pad = " " * (indent * (level + 1))
    body = (",\n" + pad).join(parts)
    return "%s\n%s%s\n%s%s" % (open_ch, pad, body,
                               " " * (indent * level), close_ch)


def dumps(obj, indent=None):
    """Serialize nested dicts/lists/arrays/dataclasses to JSON text."""
    return _render(obj, indent or 0, 0)


def dump(obj, fp, indent=None):
    fp.write(dumps(obj, indent=indent))
    fp.write("\n")


def estimate_payload(est, cov=None):
    out = {
        "estimator": est.estimator,
        "n_units": est.n_units,
        "event_times": est.event_times,
        "beta": est.beta,
    }
    if cov is not None:
        out["cov"] = cov.cov
    return out


def band_payload(band):
    return {
        "kind": band.kind,
        "alpha": band.alpha,
        "method": band.method,
        "crit": band.crit,
        "grid": band.grid,
        "lower": band.lower,
        "upper": band.upper,
    }


def refband_payload(refband, grid=None):
    out = {"kind": refband.kind, "params": dict(refband.params)}
    if refband.members:
        out["members"] = [refband_payload(m) for m in refband.members]
    if grid is not None:
        lo, hi = refband.bounds(grid)
        out["grid"], out["lower"], out["upper"] = grid, lo, hi
    return out


def _spans_payload(spans):
    return [[a, b] for a, b in spans]


def report_payload(report, curve_points=201):
    """Full JSON document for one honest analysis."""
    est = report.estimate
    curve_grid = np.linspace(float(est.event_times[0]),
                             float(est.event_times[-1]), curve_points)
    curve = fit_beta_spline(est).eval(curve_grid)
    cfg = report.config
    return {
        "n_units": report.n_units,
        "n_periods": report.n_periods,
        "config": {
            "alpha": cfg.alpha,
            "method": cfg.method,
            "B": cfg.B,
            "seed": cfg.seed,
            "t_a": cfg.t_a,
            "grid_post": cfg.grid_post,
            "grid_pre": cfg.grid_pre,
            "refband": cfg.refband,
        },
        "estimate": estimate_payload(est),
        "curve": {"grid": curve_grid, "beta": curve},
        "bands": [band_payload(b) for b in report.bands],
        "refband": refband_payload(report.refband, curve_grid),
        "relevance": {
            "rejected": report.relevance.rejected,
            "spans": _spans_payload(report.relevance.spans),
            "n_points": report.relevance.n_points,
        },
        "equivalence": {
            "validated": report.equivalence.validated,
            "spans": _spans_payload(report.equivalence.spans),
            "n_points": report.equivalence.n_points,
        },
    }


def _in_any_span(t, spans):
    return any(a <= t <= b for a, b in spans)


def plot_frame(report, curve_points=201):
    """One row per grid point: curve, every band, reference band, spans.

    Band columns are empty off the band's own grid; the smooth curve
    and the reference band are evaluated everywhere.
    """
    est = report.estimate
    curve_grid = np.linspace(float(est.event_times[0]),
                             float(est.event_times[-1]), curve_points)
    rows = np.unique(np.concatenate(
        [curve_grid] + [b.grid for b in report.bands]))
    frame = {"t": rows, "beta": fit_beta_spline(est).eval(rows)}
    lo, hi = report.refband.bounds(rows)
    frame["ref_lower"], frame["ref_upper"] = lo, hi
    by_kind = {b.kind: b for b in report.bands}
    for kind in _BAND_ORDER:
        band = by_kind.get(kind)
        if band is None:
            continue
        slug = kind.replace("-", "_")
        lower = np.full(rows.shape, np.nan)
        upper = np.full(rows.shape, np.nan)
        pos = np.searchsorted(rows, band.grid)
        lower[pos], upper[pos] = band.lower, band.upper
        frame[slug + "_lower"], frame[slug + "_upper"] = lower, upper
    frame["in_significant_span"] = np.array(
        [int(_in_any_span(t, report.relevance.spans)) for t in rows])
    frame["in_violation_span"] = np.array(
        [int(_in_any_span(t, report.equivalence.spans)) for t in rows])
    return pd.DataFrame(frame)


def write_plot_csv(report, path, curve_points=201):
    plot_frame(report, curve_points).to_csv(path, index=False,
                                            float_format="%.17g")


def write_estimate_csv(est, cov, path):
    """Per-period table: event time, estimate, standard error."""
    se = np.sqrt(np.clip(np.diag(cov.cov), 0.0, None) / est.n_units)
    pd.DataFrame({
        "event_time": est.event_times,
        "beta": est.beta,
        "se": se,
    }).to_csv(path, index=False, float_format="%.17g")
