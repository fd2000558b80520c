"""Critical values and confidence bands for the interpolated effect curve.

The curve between observed event times is the natural cubic interpolant
of the point estimates, and its covariance surface is the tensor fit of
the estimated covariance matrix.  Simultaneous bands control

    P( sup_{(0, T_post]} |T(t)| > u_sup ) <= alpha / 2       (sup side)
    P( inf_{[-T_pre, 0]} |T(t)| > u_inf ) <= alpha           (inf side)

for the standardized deviation process T.  Critical values come from a
parametric bootstrap (normal draws at the observed times), a two-point
multiplier bootstrap on the per-unit residuals, or an expected upper
bound on level crossings of the standardized process (sup side only).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import rng as rng_mod
from .errors import (
    DegenerateGrid,
    GridMismatch,
    InfSideUnsupported,
    NoRoot,
    NonPSDCovariance,
    OutOfDomain,
    ValidationError,
)
from .parallel import run_chunks
from .spline import eval_matrix, natural_cubic_fit, tensor_fit

MULT_LOW = (1.0 - math.sqrt(5.0)) / 2.0
MULT_HIGH = (1.0 + math.sqrt(5.0)) / 2.0
MULT_P_LOW = (5.0 + math.sqrt(5.0)) / 10.0

_PSD_WARN = 1e-6
_PSD_FAIL = 1e-2


@dataclass(frozen=True)
class CriticalValue:
    """Simultaneous critical value and how it was obtained."""

    value: float
    side: str
    alpha: float
    method: str
    domain: tuple
    df: int | None = None
    B: int | None = None
    seed: int | None = None
    form: str | None = None


@dataclass(frozen=True)
class Band:
    """Lower/upper envelope for the effect curve on a grid."""

    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    kind: str
    alpha: float
    method: str | None = None
    crit: float | None = None
    seed: int | None = None


def default_post_grid(t_post, points=100):
    """Equidistant grid over (0, t_post]: excludes the reference time."""
    t_post = float(t_post)
    if t_post <= 0 or points < 1:
        raise ValidationError("t_post must be positive, points at least 1")
    return t_post * np.arange(1, points + 1) / points


def default_pre_grid(t_pre, t_a=0.0, points=101):
    """Equidistant grid over [-t_pre, t_a]."""
    t_pre = float(t_pre)
    if t_pre <= 0 or t_a < -t_pre or points < 2:
        raise ValidationError("need t_pre > 0, t_a >= -t_pre and points >= 2")
    return np.linspace(-t_pre, float(t_a), points)


def fit_beta_spline(est):
    """Interpolated effect curve over all observed event times."""
    return natural_cubic_fit(est.event_times.astype(np.float64), est.beta)


def fit_cov_surface(cov):
    """Interpolated covariance surface over all observed event times."""
    return tensor_fit(cov.event_times.astype(np.float64), cov.cov)


def multipliers(generator, size):
    """Two-point multipliers with mean 0, variance 1, third moment 1."""
    u = generator.random(size)
    return np.where(u < MULT_P_LOW, MULT_LOW, MULT_HIGH)


def _check_aligned(est, cov):
    if not np.array_equal(est.event_times, cov.event_times):
        raise GridMismatch("estimate and covariance grids differ")
    if est.n_units != cov.n_units:
        raise GridMismatch("estimate and covariance sample sizes differ")


def _default_domain(side, event_times):
    if side == "sup":
        return (0.0, float(event_times[-1]))
    return (float(event_times[0]), 0.0)


def _stat_grid(side, domain, points):
    lo, hi = float(domain[0]), float(domain[1])
    if hi <= lo:
        raise ValidationError(f"domain [{lo}, {hi}] is empty")
    if points is None:
        points = 100 if side == "sup" else 101
    if side == "sup":
        # Left-open span: the reference time never enters the supremum.
        return lo + (hi - lo) * np.arange(1, points + 1) / points
    return np.linspace(lo, hi, points)


def _validate_side(side):
    if side not in ("sup", "inf"):
        raise ValidationError(f"side must be 'sup' or 'inf', got {side!r}")


def _quantile_level(side, alpha):
    if not 0.0 < alpha < 0.5:
        raise ValidationError(f"alpha must be in (0, 0.5), got {alpha}")
    return 1.0 - alpha / 2.0 if side == "sup" else 1.0 - alpha


def _psd_factor(sigma):
    """Square root of sigma after clipping small negative eigenvalues."""
    eigvals, eigvecs = np.linalg.eigh(0.5 * (sigma + sigma.T))
    trace = float(np.sum(np.abs(eigvals)))
    clipped = float(-np.sum(eigvals[eigvals < 0.0]))
    if trace > 0 and clipped > _PSD_FAIL * trace:
        raise NonPSDCovariance(
            f"covariance has negative eigenvalue mass {clipped:.3e}"
        )
    if trace > 0 and clipped > _PSD_WARN * trace:
        warnings.warn(
            f"clipped negative eigenvalue mass {clipped:.3e} from covariance",
            RuntimeWarning,
            stacklevel=3,
        )
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


class _StatContext:
    """Shared pieces of the bootstrap statistic on a restricted grid."""

    def __init__(self, est, cov, side, domain, points):
        _validate_side(side)
        _check_aligned(est, cov)
        self.knots = est.event_times.astype(np.float64)
        self.n = est.n_units
        self.surface = fit_cov_surface(cov)
        domain = domain if domain is not None else _default_domain(side, self.knots)
        lo, hi = float(domain[0]), float(domain[1])
        tol = 1e-9
        if lo < self.knots[0] - tol or hi > self.knots[-1] + tol:
            raise OutOfDomain(
                f"domain [{lo}, {hi}] exceeds the observed times"
            )
        self.domain = (lo, hi)
        grid = _stat_grid(side, self.domain, points)
        diag = self.surface.diag(grid)
        valid = diag > self.surface.ridge()
        if not np.any(valid):
            raise DegenerateGrid("no grid points with usable variance")
        self.grid = grid[valid]
        self.se = np.sqrt(diag[valid] / self.n)
        self.eval_op = eval_matrix(self.knots, self.grid).T
        self.side = side

    def stats_from_deviations(self, dev):
        """sup or inf over the grid of |dev(t)| / se(t), per replicate."""
        curves = np.abs(dev @ self.eval_op) / self.se
        return curves.max(axis=1) if self.side == "sup" else curves.min(axis=1)


def crit_param_boot(est, cov, side="sup", alpha=0.05, domain=None, B=1000,
                    seed=0, grid_points=None, threads=None):
    """Critical value from normal draws at the observed event times.

    Draws beta* ~ N(beta_hat, cov/n), interpolates the deviation from
    beta_hat, and takes the empirical quantile of the sup (or inf) of
    the standardized absolute deviation over the grid.
    """
    if B < 100:
        raise ValidationError(f"B must be at least 100, got {B}")
    ctx = _StatContext(est, cov, side, domain, grid_points)
    factor = _psd_factor(cov.cov / ctx.n)
    t_dim = factor.shape[0]
    out = np.empty(B)

    def worker(start, stop):
        gen = rng_mod.substream(seed, start)
        z = gen.standard_normal((stop - start, t_dim))
        out[start:stop] = ctx.stats_from_deviations(z @ factor.T)

    run_chunks(B, worker, threads=threads)
    value = float(np.quantile(out, _quantile_level(side, alpha)))
    return CriticalValue(
        value=value, side=side, alpha=float(alpha), method="param-boot",
        domain=ctx.domain, df=ctx.n - 1, B=int(B), seed=int(seed),
    )


def crit_mult_boot(dp, est, cov, side="sup", alpha=0.05, domain=None,
                   B=1000, seed=0, grid_points=None, threads=None):
    """Critical value from the two-point multiplier bootstrap.

    Each replicate reweights the per-unit residual contributions by an
    independent multiplier, fixed across event times within a unit;
    the implied estimator deviation has the closed form
    (d * m)' resid / sum(d^2).
    """
    if B < 100:
        raise ValidationError(f"B must be at least 100, got {B}")
    if not np.array_equal(dp.event_times, est.event_times):
        raise GridMismatch("demeaned panel and estimate grids differ")
    ctx = _StatContext(est, cov, side, domain, grid_points)
    d = dp.d
    y = dp.y
    resid = (y - y[:, dp.ref_index][:, None]) - np.outer(d, est.beta)
    scale = float(d @ d)
    contrib = d[:, None] * resid
    out = np.empty(B)

    def worker(start, stop):
        gen = rng_mod.substream(seed, start)
        m = multipliers(gen, (stop - start, d.shape[0]))
        out[start:stop] = ctx.stats_from_deviations((m @ contrib) / scale)

    run_chunks(B, worker, threads=threads)
    value = float(np.quantile(out, _quantile_level(side, alpha)))
    return CriticalValue(
        value=value, side=side, alpha=float(alpha), method="mult-boot",
        domain=ctx.domain, df=ctx.n - 1, B=int(B), seed=int(seed),
    )


def _crossing_factor(u, df, form):
    if form == "corrected":
        return (1.0 + u * u / df) ** (-(df - 1.0) / 2.0)
    return (1.0 + u / df) ** (df / 2.0)


def crit_kac_rice(cov, alpha=0.05, df=None, side="sup", domain=None,
                  grid_points=None, form="corrected"):
    """Critical value from the expected-crossings bound (sup side only).

    Solves F(-u; df) + K g(u; df) = alpha / 4 where K collects the
    integrated roughness of the standardized process over the span and
    g is the local crossing factor.  With K = 0 this reduces to the
    t quantile at 1 - alpha/4.  form='printed' keeps an increasing
    crossing factor some references state; the corrected form decays
    like the Gaussian bound and is the default.
    """
    _validate_side(side)
    if side == "inf":
        raise InfSideUnsupported("crossings bound only covers the sup side")
    if df is None:
        df = cov.n_units - 1
    if df < 1:
        raise ValidationError(f"df must be at least 1, got {df}")
    if form not in ("corrected", "printed"):
        raise ValidationError(f"unknown form {form!r}")
    if not 0.0 < alpha < 0.5:
        raise ValidationError(f"alpha must be in (0, 0.5), got {alpha}")
    knots = cov.event_times.astype(np.float64)
    surface = tensor_fit(knots, cov.cov)
    domain = domain if domain is not None else (0.0, float(knots[-1]))
    lo, hi = float(domain[0]), float(domain[1])
    if hi <= lo:
        raise ValidationError(f"domain [{lo}, {hi}] is empty")
    grid = _stat_grid("sup", (lo, hi), grid_points)
    ridge = surface.ridge()

    def integral(points):
        diag = surface.diag(points)
        valid = diag > ridge
        pts = points[valid]
        if pts.shape[0] < 2:
            return 0.0, pts
        taus = surface.corr_roughness(pts)
        return float(np.trapezoid(np.abs(taus), pts)), pts

    k_val, pts = integral(grid)
    if pts.shape[0] == 0:
        raise DegenerateGrid("no grid points with usable variance")
    # Refine until the crossing integral stabilizes.
    for _ in range(3):
        if pts.shape[0] < 2:
            break
        mids = 0.5 * (pts[1:] + pts[:-1])
        refined = np.sort(np.concatenate([pts, mids]))
        k_new, pts = integral(refined)
        if abs(k_new - k_val) <= 1e-6 * max(abs(k_val), 1e-12):
            k_val = k_new
            break
        k_val = k_new
    k_total = k_val / (2.0 * math.pi)
    target = alpha / 4.0

    def lhs(u):
        return stats.t.sf(u, df) + k_total * _crossing_factor(u, df, form)

    u_hi = 50.0
    if form == "corrected":
        if lhs(u_hi) > target:
            raise NoRoot("no critical value below 50 standard errors")
        lo_u, hi_u = 0.0, u_hi
    else:
        scan = np.linspace(0.0, u_hi, 5001)
        vals = lhs(scan)
        below = np.nonzero(vals <= target)[0]
        if below.size == 0:
            raise NoRoot("crossing bound never reaches the target level")
        first = below[0]
        if first == 0:
            lo_u, hi_u = 0.0, scan[0] + 1e-12
        else:
            lo_u, hi_u = scan[first - 1], scan[first]
    for _ in range(200):
        mid = 0.5 * (lo_u + hi_u)
        if lhs(mid) > target:
            lo_u = mid
        else:
            hi_u = mid
        if hi_u - lo_u < 1e-8:
            break
    value = 0.5 * (lo_u + hi_u)
    return CriticalValue(
        value=float(value), side="sup", alpha=float(alpha), method="kac-rice",
        domain=(lo, hi), df=int(df), B=None, seed=None, form=form,
    )


def _band_se(cov_surface, grid, n):
    return np.sqrt(np.clip(cov_surface.diag(grid), 0.0, None) / n)


def build_band(est_spline, cov_surface, crit, grid, n, kind="scb-sup"):
    """Band from an interpolated curve, surface and critical value.

    kind 'scb-sup' and 'scb-inf' are two-sided; 'scb-inf-upper' and
    'scb-inf-lower' keep one finite side and set the other to -inf/+inf.
    """
    grid = np.asarray(grid, dtype=np.float64)
    lo, hi = crit.domain
    tol = 1e-9
    if np.any(grid < lo - tol) or np.any(grid > hi + tol):
        raise OutOfDomain("grid exceeds the critical value's domain")
    center = est_spline.eval(grid)
    half = crit.value * _band_se(cov_surface, grid, n)
    if kind in ("scb-sup", "scb-inf"):
        lower, upper = center - half, center + half
    elif kind == "scb-inf-upper":
        lower, upper = np.full_like(center, -np.inf), center + half
    elif kind == "scb-inf-lower":
        lower, upper = center - half, np.full_like(center, np.inf)
    else:
        raise ValidationError(f"unknown band kind {kind!r}")
    return Band(
        grid=grid, lower=lower, upper=upper, kind=kind,
        alpha=crit.alpha, method=crit.method, crit=crit.value, seed=crit.seed,
    )


def pointwise_band(est, cov, grid, alpha=0.05):
    """Per-time t interval: center +- t_{1-alpha/2, n-1} se(t)."""
    _check_aligned(est, cov)
    if not 0.0 < alpha < 0.5:
        raise ValidationError(f"alpha must be in (0, 0.5), got {alpha}")
    grid = np.asarray(grid, dtype=np.float64)
    spline = fit_beta_spline(est)
    surface = fit_cov_surface(cov)
    center = spline.eval(grid)
    q = stats.t.ppf(1.0 - alpha / 2.0, est.n_units - 1)
    half = q * _band_se(surface, grid, est.n_units)
    return Band(grid=grid, lower=center - half, upper=center + half,
                kind="pointwise", alpha=float(alpha), method="t", crit=float(q))


def bonferroni_band(est, cov, grid, alpha=0.05, comparisons=None):
    """Pointwise band at the split level alpha / comparisons."""
    _check_aligned(est, cov)
    if not 0.0 < alpha < 0.5:
        raise ValidationError(f"alpha must be in (0, 0.5), got {alpha}")
    grid = np.asarray(grid, dtype=np.float64)
    m = int(comparisons) if comparisons is not None else grid.shape[0]
    if m < 1:
        raise ValidationError("comparisons must be positive")
    spline = fit_beta_spline(est)
    surface = fit_cov_surface(cov)
    center = spline.eval(grid)
    q = stats.t.ppf(1.0 - (alpha / m) / 2.0, est.n_units - 1)
    half = q * _band_se(surface, grid, est.n_units)
    return Band(grid=grid, lower=center - half, upper=center + half,
                kind="bonferroni", alpha=float(alpha), method="t", crit=float(q))
