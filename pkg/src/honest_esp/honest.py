"""Reference bands and honest hypothesis tests on the effect curve.

A reference band encodes how large a violation of the identifying
assumptions the analyst is willing to tolerate: a constant band sized
from the estimated anticipation effect, a trend band bounding deviation
from the linear pre-trend, a union of several bands, or externally
fixed constants.  Relevance is established when the sup-side
simultaneous band escapes the reference band somewhere after the
event; equivalence is validated when the inf-side band stays strictly
inside it everywhere before the anticipation point.
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .bands import (
    build_band,
    crit_kac_rice,
    crit_mult_boot,
    crit_param_boot,
    default_post_grid,
    default_pre_grid,
    fit_beta_spline,
    fit_cov_surface,
    pointwise_band,
)
from .errors import (
    DegenerateVariance,
    EmptyList,
    EmptyPreAnticipationWindow,
    ValidationError,
)
from .estimate import (
    did_covariance,
    did_estimate,
    fwl_residualize,
    staggered_estimate,
)
from .panel import two_way_transform

_STRICT_TOL = 1e-12


@dataclass(frozen=True)
class ReferenceBand:
    """Tolerated region for the effect curve."""

    kind: str
    params: dict
    members: tuple = ()

    def bounds(self, t):
        """(lower, upper) arrays of the band evaluated at t."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if self.kind in ("anticipation", "constant"):
            lo = np.full(t.shape, self.params["lower"])
            hi = np.full(t.shape, self.params["upper"])
        elif self.kind == "trend":
            a = self.params["slope_lower"] * t
            b = self.params["slope_upper"] * t
            lo, hi = np.minimum(a, b), np.maximum(a, b)
        elif self.kind == "union":
            los, his = zip(*(m.bounds(t) for m in self.members))
            lo = np.min(np.stack(los), axis=0)
            hi = np.max(np.stack(his), axis=0)
        else:
            raise ValidationError(f"unknown reference band kind {self.kind!r}")
        return lo, hi

    def lower(self, t):
        return self.bounds(t)[0]

    def upper(self, t):
        return self.bounds(t)[1]


def refband_anticipation(est, cov, t_a, alpha=0.05, s_lower=None, s_upper=None):
    """Constant band around the estimated effect at the anticipation time.

    Bounds are beta(t_a) -+ S_lower se(t_a) and + S_upper se(t_a); the
    scale factors default to the two-sided t quantile at alpha.
    """
    t_a = float(t_a)
    spline = fit_beta_spline(est)
    surface = fit_cov_surface(cov)
    var = surface.eval(t_a, t_a)
    if var <= surface.ridge():
        raise DegenerateVariance(
            f"variance at anticipation time {t_a} is numerically zero"
        )
    default_s = float(stats.t.ppf(1.0 - alpha / 2.0, est.n_units - 1))
    s_lo = default_s if s_lower is None else float(s_lower)
    s_hi = default_s if s_upper is None else float(s_upper)
    if s_lo < 0 or s_hi < 0:
        raise ValidationError("scale factors must be nonnegative")
    center = spline.eval(t_a)
    se = float(np.sqrt(var / est.n_units))
    return ReferenceBand(
        kind="anticipation",
        params={
            "t_a": t_a,
            "s_lower": s_lo,
            "s_upper": s_hi,
            "center": center,
            "se": se,
            "lower": center - s_lo * se,
            "upper": center + s_hi * se,
        },
    )


def _deriv_quad_coeffs(spline, i):
    """Coefficients of the derivative on interval i as a quadratic in
    the local coordinate B = (t - x_i) / h."""
    h = spline.knots[i + 1] - spline.knots[i]
    slope = (spline.values[i + 1] - spline.values[i]) / h
    m0, m1 = spline.m[i], spline.m[i + 1]
    c0 = slope + (h / 6.0) * (-2.0 * m0 - m1)
    c1 = h * m0
    c2 = (h / 2.0) * (m1 - m0)
    return c0, c1, c2


def _quad_roots_unit(c0, c1, c2):
    """Real roots of c2 B^2 + c1 B + c0 inside (0, 1)."""
    eps = 1e-14
    roots = []
    if abs(c2) < eps:
        if abs(c1) >= eps:
            roots.append(-c0 / c1)
    else:
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc >= 0.0:
            sq = np.sqrt(disc)
            roots.extend([(-c1 - sq) / (2.0 * c2), (-c1 + sq) / (2.0 * c2)])
    return [r for r in roots if 0.0 < r < 1.0]


def total_variation(spline, a, b):
    """Exact total variation of the spline over [a, b].

    Equals the integral of |derivative|; computed by splitting at knots
    and at stationary points (the derivative is quadratic piecewise)
    and summing |value differences| over the monotone pieces.
    """
    a, b = float(a), float(b)
    if b < a:
        raise ValidationError("need a <= b")
    knots = spline.knots
    pts = [a, b]
    for i in range(knots.shape[0] - 1):
        x0, x1 = knots[i], knots[i + 1]
        if x1 <= a or x0 >= b:
            continue
        if a < x0 < b:
            pts.append(float(x0))
        if a < x1 < b:
            pts.append(float(x1))
        h = x1 - x0
        for r in _quad_roots_unit(*_deriv_quad_coeffs(spline, i)):
            t_star = float(x0 + r * h)
            if a < t_star < b:
                pts.append(t_star)
    pts = np.unique(np.asarray(pts))
    vals = spline.eval(pts)
    return float(np.sum(np.abs(np.diff(vals))))


def refband_trend(est, t_pre=None, m_lower=1.0, m_upper=1.0):
    """Band between two lines through the origin around the pre-trend.

    The trend slope is the average pre-period derivative,
    (beta(0) - beta(-t_pre)) / t_pre, widened by m_lower / m_upper
    times the average absolute derivative over the pre-period.
    """
    spline = fit_beta_spline(est)
    max_pre = -float(est.event_times[0])
    if t_pre is None:
        t_pre = max_pre
    t_pre = float(t_pre)
    if t_pre <= 0 or t_pre > max_pre + 1e-9:
        raise ValidationError(
            f"t_pre must be in (0, {max_pre}], got {t_pre}"
        )
    m_lo, m_hi = float(m_lower), float(m_upper)
    if m_lo < 0 or m_hi < 0:
        raise ValidationError("trend multipliers must be nonnegative")
    trend = (spline.eval(0.0) - spline.eval(-t_pre)) / t_pre
    rough = total_variation(spline, -t_pre, 0.0) / t_pre
    return ReferenceBand(
        kind="trend",
        params={
            "t_pre": t_pre,
            "m_lower": m_lo,
            "m_upper": m_hi,
            "trend": trend,
            "roughness": rough,
            "slope_lower": trend - m_lo * rough,
            "slope_upper": trend + m_hi * rough,
        },
    )


def refband_constant(lower, upper):
    """Externally fixed constant band."""
    lower, upper = float(lower), float(upper)
    if upper < lower:
        raise ValidationError("upper bound below lower bound")
    return ReferenceBand(kind="constant", params={"lower": lower, "upper": upper})


def refband_union(members):
    """Pointwise envelope of several reference bands."""
    members = tuple(members)
    if not members:
        raise EmptyList("union needs at least one reference band")
    return ReferenceBand(
        kind="union",
        params={"size": len(members)},
        members=members,
    )


def _runs(grid, flags):
    """Maximal runs of consecutive True flags as (start, stop) times."""
    spans = []
    start = None
    for idx, ok in enumerate(flags):
        if ok and start is None:
            start = idx
        elif not ok and start is not None:
            spans.append((float(grid[start]), float(grid[idx - 1])))
            start = None
    if start is not None:
        spans.append((float(grid[start]), float(grid[-1])))
    return tuple(spans)


@dataclass(frozen=True)
class RelevanceResult:
    """Outcome of the band-disjointness test after the event."""

    rejected: bool
    spans: tuple
    n_points: int


@dataclass(frozen=True)
class EquivalenceResult:
    """Outcome of the band-containment validation before the event."""

    validated: bool
    spans: tuple
    n_points: int


def relevance_test(scb, refband):
    """Reject no-relevant-effect when the sup band leaves the reference
    band at one or more grid points; spans are the disjoint stretches."""
    if scb.kind != "scb-sup":
        raise ValidationError(f"relevance test needs a scb-sup band, got {scb.kind}")
    lo, hi = refband.bounds(scb.grid)
    disjoint = (scb.lower > hi) | (scb.upper < lo)
    spans = _runs(scb.grid, disjoint)
    return RelevanceResult(
        rejected=bool(np.any(disjoint)),
        spans=spans,
        n_points=int(scb.grid.shape[0]),
    )


def equivalence_validate(band, refband, t_a=None):
    """Validate equivalence when the inf band lies strictly inside the
    reference band at every grid point up to the anticipation time.

    Ties within 1e-12 of a reference edge do not count as inside, so
    boundary cases fail validation rather than pass it.  The spans
    report where containment fails.
    """
    if band.kind != "scb-inf":
        raise ValidationError(
            f"equivalence validation needs a two-sided scb-inf band, got {band.kind}"
        )
    grid = band.grid
    mask = np.ones(grid.shape, dtype=bool)
    if t_a is not None:
        mask = grid <= float(t_a) + 1e-9
    if not np.any(mask):
        raise EmptyPreAnticipationWindow(
            f"no grid points at or before t_a={t_a}"
        )
    g = grid[mask]
    lo, hi = refband.bounds(g)
    inside = (band.lower[mask] > lo + _STRICT_TOL) & (band.upper[mask] < hi - _STRICT_TOL)
    spans = _runs(g, ~inside)
    return EquivalenceResult(
        validated=bool(np.all(inside)),
        spans=spans,
        n_points=int(g.shape[0]),
    )


@dataclass(frozen=True)
class ReportConfig:
    """Knobs for honest_report."""

    alpha: float = 0.05
    method: str = "param-boot"
    B: int = 1000
    seed: int = 0
    t_a: float = -1.0
    refband: dict | None = None
    grid_post: int = 100
    grid_pre: int = 101
    kac_rice_form: str = "corrected"
    threads: int | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValidationError(f"alpha must be in (0, 0.5), got {self.alpha}")
        if self.B < 100:
            raise ValidationError(f"B must be at least 100, got {self.B}")
        if self.method not in ("param-boot", "mult-boot", "kac-rice"):
            raise ValidationError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class HonestReport:
    """Everything honest_report computes, ready for serialization."""

    estimate: object
    bands: tuple
    refband: ReferenceBand
    relevance: RelevanceResult
    equivalence: EquivalenceResult
    config: ReportConfig
    n_units: int
    n_periods: int


def build_refband(est, cov, spec, alpha=0.05):
    """Construct a reference band from a plain dict specification.

    Kinds: anticipation (t_a, s_lower, s_upper), trend (t_pre, m_lower,
    m_upper), constant (lower, upper), union (members: list of specs).
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValidationError("reference band spec must be a dict with a kind")
    kind = spec["kind"]
    if kind == "anticipation":
        return refband_anticipation(
            est, cov, t_a=spec.get("t_a", -1.0), alpha=alpha,
            s_lower=spec.get("s_lower"), s_upper=spec.get("s_upper"),
        )
    if kind == "trend":
        return refband_trend(
            est, t_pre=spec.get("t_pre"),
            m_lower=spec.get("m_lower", 1.0), m_upper=spec.get("m_upper", 1.0),
        )
    if kind == "constant":
        if "lower" not in spec or "upper" not in spec:
            raise ValidationError("constant band needs lower and upper")
        return refband_constant(spec["lower"], spec["upper"])
    if kind == "union":
        members = spec.get("members", [])
        if not members:
            raise EmptyList("union needs at least one member spec")
        return refband_union(
            build_refband(est, cov, member, alpha=alpha) for member in members
        )
    raise ValidationError(f"unknown reference band kind {kind!r}")


def estimate_panel(data):
    """Estimate and covariance for any panel design.

    Returns (dp_or_None, est, cov): dp is the demeaned panel for
    treatment designs (needed by the multiplier bootstrap) and None for
    staggered designs.
    """
    if data.group is not None:
        est, cov, _spec = staggered_estimate(data)
        return None, est, cov
    if data.covariates is not None:
        dp = fwl_residualize(data)
    else:
        dp = two_way_transform(data)
    est = did_estimate(dp)
    cov = did_covariance(dp, est)
    return dp, est, cov


def honest_report(data, config=None):
    """Full honest analysis: bands, reference band, both tests."""
    config = config if config is not None else ReportConfig()
    dp, est, cov = estimate_panel(data)
    return assemble_report(dp, est, cov, config)


def assemble_report(dp, est, cov, config=None):
    """honest_report from precomputed estimates.

    Lets callers that cache (dp, est, cov) per dataset rerun the band
    and test stages without re-estimating.  dp may be None only when
    the method does not need unit-level residuals (everything except
    the multiplier bootstrap).
    """
    config = config if config is not None else ReportConfig()
    t_pre = -float(est.event_times[0])
    t_post = float(est.event_times[-1])
    if t_post <= 0:
        raise ValidationError("panel has no post-event periods")
    if t_pre <= 0:
        raise ValidationError("panel has no pre-event periods")
    if config.t_a < -t_pre or config.t_a > 0:
        raise ValidationError(
            f"t_a must be in [{-t_pre}, 0], got {config.t_a}"
        )

    spline = fit_beta_spline(est)
    surface = fit_cov_surface(cov)

    if config.method == "mult-boot":
        if dp is None:
            raise ValidationError(
                "multiplier bootstrap is unavailable for staggered designs"
            )
        sup_crit = crit_mult_boot(dp, est, cov, side="sup", alpha=config.alpha,
                                  B=config.B, seed=config.seed,
                                  grid_points=config.grid_post,
                                  threads=config.threads)
        inf_crit = crit_mult_boot(dp, est, cov, side="inf", alpha=config.alpha,
                                  B=config.B, seed=config.seed,
                                  grid_points=config.grid_pre,
                                  threads=config.threads)
    elif config.method == "kac-rice":
        sup_crit = crit_kac_rice(cov, alpha=config.alpha,
                                 grid_points=config.grid_post,
                                 form=config.kac_rice_form)
        # No crossings bound on the inf side; fall back to the
        # parametric bootstrap there.
        inf_crit = crit_param_boot(est, cov, side="inf", alpha=config.alpha,
                                   B=config.B, seed=config.seed,
                                   grid_points=config.grid_pre,
                                   threads=config.threads)
    else:
        sup_crit = crit_param_boot(est, cov, side="sup", alpha=config.alpha,
                                   B=config.B, seed=config.seed,
                                   grid_points=config.grid_post,
                                   threads=config.threads)
        inf_crit = crit_param_boot(est, cov, side="inf", alpha=config.alpha,
                                   B=config.B, seed=config.seed,
                                   grid_points=config.grid_pre,
                                   threads=config.threads)

    post_grid = default_post_grid(t_post, config.grid_post)
    pre_grid = default_pre_grid(t_pre, t_a=config.t_a, points=config.grid_pre)
    full_grid = np.concatenate([
        np.linspace(-t_pre, 0.0, config.grid_pre),
        post_grid,
    ])

    sup_band = build_band(spline, surface, sup_crit, post_grid, est.n_units,
                          kind="scb-sup")
    inf_band = build_band(spline, surface, inf_crit, pre_grid, est.n_units,
                          kind="scb-inf")
    pw_band = pointwise_band(est, cov, full_grid, alpha=config.alpha)

    ref_spec = config.refband if config.refband is not None else {
        "kind": "anticipation", "t_a": config.t_a,
    }
    refband = build_refband(est, cov, ref_spec, alpha=config.alpha)

    relevance = relevance_test(sup_band, refband)
    equivalence = equivalence_validate(inf_band, refband, t_a=config.t_a)

    return HonestReport(
        estimate=est,
        bands=(pw_band, sup_band, inf_band),
        refband=refband,
        relevance=relevance,
        equivalence=equivalence,
        config=config,
        n_units=est.n_units,
        n_periods=int(est.event_times.shape[0]),
    )
