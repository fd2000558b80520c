"""Synthetic event-study panels and Monte Carlo studies.

The generator draws balanced panels from a components model: a uniform
unit effect that also drives selection into treatment, a smooth common
time trend, a treatment effect curve switched on at (or before) the
reference period, and Matern Gaussian-process noise over time.  The
study runners measure estimation accuracy, rejection rates of the
relevance test under differential trends, and validation rates of the
equivalence test.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special, stats

from .bands import (
    CriticalValue,
    build_band,
    crit_kac_rice,
    crit_mult_boot,
    crit_param_boot,
    default_post_grid,
    fit_beta_spline,
    fit_cov_surface,
)
from .errors import (
    DegenerateDraw,
    NonPSDKernel,
    ValidationError,
)
from .estimate import did_covariance, did_estimate
from .honest import equivalence_validate, refband_constant, refband_trend
from .panel import PanelData, make_panel, two_way_transform
from .rng import fold, substream

_KERNEL_JITTER = 1e-10
_MAX_REDRAWS = 100

# leading path tags keep the study streams apart
_ACCURACY_TAG = 1
_POWER_TAG = 2
_VALIDATION_TAG = 3
_TRAIN_SEED_XOR = 0x5EED

CURVE_NAMES = (
    "zero",
    "saturating",
    "oscillating",
    "saturating-anticipated",
    "oscillating-anticipated",
)


def matern_cov(times, variance=2.0, smoothness=1.5, scale=10.0):
    """Matern covariance matrix over a time grid.

    C(s, t) = v * 2^(1-nu)/Gamma(nu) * (sqrt(2 nu) h)^nu K_nu(sqrt(2 nu) h)
    with h = |s - t| / scale.  The nu = 3/2 case uses its closed form
    v (1 + sqrt(3) h) exp(-sqrt(3) h); other nu go through the modified
    Bessel function.
    """
    if variance <= 0 or smoothness <= 0 or scale <= 0:
        raise ValidationError("kernel variance, smoothness and scale "
                              "must be positive")
    t = np.asarray(times, dtype=np.float64)
    h = np.abs(t[:, None] - t[None, :]) / scale
    if smoothness == 1.5:
        r = np.sqrt(3.0) * h
        return variance * (1.0 + r) * np.exp(-r)
    r = np.sqrt(2.0 * smoothness) * h
    fac = variance * 2.0 ** (1.0 - smoothness) / special.gamma(smoothness)
    with np.errstate(invalid="ignore", over="ignore"):
        out = fac * r**smoothness * special.kv(smoothness, r)
    out[h == 0.0] = variance
    return out


def common_trend(t):
    """Shared smooth time trend, zero at t = -10 with flat ends."""
    u = np.asarray(t, dtype=np.float64) + 10.0
    return (2000.0 * u**3 - 150.0 * u**4 + 3.0 * u**5) / 640000.0


def _raw_curve(name, t):
    """Treatment effect curve before onset normalization."""
    t = np.asarray(t, dtype=np.float64)
    if name == "zero":
        return np.zeros_like(t)
    if name in ("saturating", "oscillating"):
        g = np.where(t > 0.0, t, 0.0) ** 1.5
        out = 3.0 * g / (3.0 + g)
        if name == "oscillating":
            out = out + np.where(t > 0.0, 0.3 * np.cos(3.0 * t) - 0.3, 0.0)
        return out
    if name in ("saturating-anticipated", "oscillating-anticipated"):
        u = t + 4.0
        g = np.where(u > 0.0, u, 0.0) ** 1.5
        out = 2.0 * g / (3.0 + g)
        if name == "oscillating-anticipated":
            out = out + np.where(u > 0.0, 0.3 * np.cos(3.0 * u) - 0.3, 0.0)
        return out
    raise ValidationError(f"unknown effect curve {name!r}; "
                          f"choose one of {CURVE_NAMES}")


@dataclass(frozen=True)
class SimConfig:
    """Panel generator settings."""

    curve: str = "saturating"
    effect_scale: float = 1.0
    trend_slope: float = 0.0
    n_units: int = 100
    n_periods: int = 11
    t_min: float = -10.0
    t_max: float = 10.0
    # 4.0 reproduces the published accuracy numbers; see the note in
    # generate_panel's docstring
    kernel_variance: float = 4.0
    kernel_smoothness: float = 1.5
    kernel_scale: float = 10.0
    unit_effect_range: float = 3.0
    assignment_slope: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.curve not in CURVE_NAMES:
            raise ValidationError(f"unknown effect curve {self.curve!r}; "
                                  f"choose one of {CURVE_NAMES}")
        if self.n_units < 2:
            raise ValidationError("need at least 2 units")
        if self.n_periods < 2:
            raise ValidationError("need at least 2 periods")
        if self.t_min >= 0.0 or self.t_max <= 0.0:
            raise ValidationError("time window must bracket the reference "
                                  "period 0")

    @property
    def times(self):
        # rational construction keeps the reference period exactly zero
        steps = np.arange(self.n_periods, dtype=np.float64)
        return self.t_min + (self.t_max - self.t_min) * steps / (self.n_periods - 1)


def true_effect(config, t):
    """Treatment effect curve the generator injects, normalized so the
    reference period gets exactly zero; includes the differential trend."""
    t = np.asarray(t, dtype=np.float64)
    raw = _raw_curve(config.curve, t) - _raw_curve(config.curve, 0.0)
    return config.effect_scale * raw + config.trend_slope * t


def anticipation_offset(config):
    """Effect level the curve carries before the reference period.

    Zero for curves that switch on at t = 0; for anticipated curves the
    pre-onset plateau equals minus the curve's value at the reference
    period.
    """
    return -float(config.effect_scale * _raw_curve(config.curve, 0.0))


def _noise_factor(config):
    kern = matern_cov(config.times, config.kernel_variance,
                      config.kernel_smoothness, config.kernel_scale)
    if not np.all(np.isfinite(kern)):
        raise NonPSDKernel("noise kernel evaluation overflowed")
    try:
        factor = np.linalg.cholesky(kern + _KERNEL_JITTER * np.eye(len(kern)))
    except np.linalg.LinAlgError:
        raise NonPSDKernel("noise kernel is not positive semidefinite "
                           "even after jitter") from None
    if not np.all(np.isfinite(factor)):
        raise NonPSDKernel("noise kernel factorization degenerated")
    return factor


def generate_panel(config, rng=None):
    """One balanced panel draw.

    Y_i(t) = beta(t) D_i + lam_i + trend(t) + eps_i(t) with
    lam_i uniform, P(D_i = 1 | lam_i) logistic in lam_i, and eps rows
    drawn from the Matern process.  Treatment is redrawn while it has
    no variation; repeated failure raises DegenerateDraw.

    The default kernel_variance is 4 (noise standard deviation 2):
    that scale reproduces the published benchmark study results, which
    are a factor sqrt(2) above what variance 2 produces.
    """
    if rng is None:
        rng = substream(config.seed)
    times = config.times
    n = config.n_units
    factor = _noise_factor(config)
    lam = rng.uniform(-config.unit_effect_range, config.unit_effect_range, n)
    prob = special.expit(config.assignment_slope * lam)
    treat = (rng.random(n) < prob).astype(np.float64)
    draws = 0
    while treat.min() == treat.max():
        draws += 1
        if draws > _MAX_REDRAWS:
            raise DegenerateDraw(
                f"treatment had no variation after {_MAX_REDRAWS} redraws")
        treat = (rng.random(n) < prob).astype(np.float64)
    eps = rng.standard_normal((n, len(times))) @ factor.T
    beta = true_effect(config, times)
    outcomes = (lam[:, None] + common_trend(times)[None, :]
                + treat[:, None] * beta[None, :] + eps)
    return make_panel(outcomes, times, treatment=treat)


def _basic_estimate(data):
    dp = two_way_transform(data)
    est = did_estimate(dp)
    return dp, est, did_covariance(dp, est)


def _run_reps(reps, worker, threads):
    """Replicate loop; chunked so a thread pool can pick spans up."""
    from .parallel import run_chunks

    run_chunks(reps, worker, threads=threads)


@dataclass(frozen=True)
class AccuracyResult:
    """Sup-norm estimation error summary over replicates."""

    mean_error: float
    half_width: float
    errors: tuple = field(repr=False, default=())


def run_accuracy_study(config, reps=500, eval_points=101, threads=None):
    """Mean sup-norm error of the interpolated effect curve.

    Per replicate: draw a panel, estimate, interpolate, take the largest
    absolute deviation from the true curve over an equidistant grid.
    Reported with a 95% normal-theory confidence half-width.
    """
    if reps < 2:
        raise ValidationError("need at least 2 replicates")
    grid = np.linspace(config.t_min, config.t_max, eval_points)
    truth = true_effect(config, grid)
    errors = np.empty(reps)

    def worker(start, stop):
        for rep in range(start, stop):
            panel = generate_panel(config, substream(config.seed,
                                                     _ACCURACY_TAG, rep))
            _, est, _ = _basic_estimate(panel)
            fitted = fit_beta_spline(est).eval(grid)
            errors[rep] = np.max(np.abs(fitted - truth))

    _run_reps(reps, worker, threads)
    mean = float(errors.mean())
    half = float(1.96 * errors.std(ddof=1) / np.sqrt(reps))
    return AccuracyResult(mean_error=mean, half_width=half,
                          errors=tuple(errors))


POWER_METHODS = ("param-boot", "mult-boot", "kac-rice", "naive", "bonferroni")


@dataclass(frozen=True)
class PowerResult:
    """Rejection rates of the relevance test per method and effect size."""

    effect_scales: tuple
    rates: dict
    half_widths: dict
    reps: int
    refband_kind: str


def _t_crit(method, alpha, df, m, domain):
    if method == "naive":
        level = 1.0 - alpha / 2.0
    else:
        level = 1.0 - (alpha / m) / 2.0
    return CriticalValue(value=float(stats.t.ppf(level, df)), side="sup",
                         alpha=alpha, method=method, domain=domain, df=df)


def _disjoint_somewhere(band, refband):
    lo, hi = refband.bounds(band.grid)
    return bool(np.any((band.lower > hi) | (band.upper < lo)))


def _trained_trend_band(config, m_lower, m_upper):
    """Reference band fitted on an independent no-effect draw."""
    train = replace(config, effect_scale=0.0,
                    seed=config.seed ^ _TRAIN_SEED_XOR)
    _, est, _ = _basic_estimate(generate_panel(train))
    return refband_trend(est, m_lower=m_lower, m_upper=m_upper)


def resolve_study_refband(config, spec):
    """Reference band for a power study.

    None means the sharp null band [0, 0]; {'kind': 'trend', 'm': M}
    trains a trend band on an independent draw with the treatment
    effect switched off; {'kind': 'constant', ...} passes through.
    """
    if spec is None:
        return refband_constant(0.0, 0.0)
    kind = spec.get("kind")
    if kind == "constant":
        return refband_constant(spec["lower"], spec["upper"])
    if kind == "trend":
        m = spec.get("m", 1.0)
        return _trained_trend_band(config, spec.get("m_lower", m),
                                   spec.get("m_upper", m))
    raise ValidationError(f"unsupported study reference band kind {kind!r}")


def run_power_study(config, effect_scales=(0.0, 0.25, 0.5, 0.75, 1.0),
                    methods=POWER_METHODS, reps=300, B=1000, alpha=0.05,
                    refband=None, grid_points=100, threads=None):
    """Rejection rate of the relevance test across effect sizes.

    All methods share each replicate's estimate, so differences between
    their power curves come only from the critical values.  'naive' uses
    the pointwise t quantile and 'bonferroni' splits alpha across the
    grid; both are benchmarks, not simultaneous bands.
    """
    for name in methods:
        if name not in POWER_METHODS:
            raise ValidationError(f"unknown method {name!r}")
    ref = resolve_study_refband(config, refband)
    grid = default_post_grid(config.t_max, grid_points)
    domain = (0.0, float(config.t_max))
    rejected = {name: np.zeros((len(effect_scales), reps), dtype=bool)
                for name in methods}

    def worker(start, stop):
        for rep in range(start, stop):
            for a_idx, a in enumerate(effect_scales):
                cfg = replace(config, effect_scale=float(a))
                rng = substream(config.seed, _POWER_TAG, a_idx, rep)
                dp, est, cov = _basic_estimate(generate_panel(cfg, rng))
                spline = fit_beta_spline(est)
                surface = fit_cov_surface(cov)
                df = est.n_units - 1
                for name in methods:
                    seed = fold(config.seed, _POWER_TAG, a_idx, rep,
                                methods.index(name))
                    if name == "param-boot":
                        crit = crit_param_boot(est, cov, side="sup",
                                               alpha=alpha, domain=domain,
                                               B=B, seed=seed, threads=1)
                    elif name == "mult-boot":
                        crit = crit_mult_boot(dp, est, cov, side="sup",
                                              alpha=alpha, domain=domain,
                                              B=B, seed=seed, threads=1)
                    elif name == "kac-rice":
                        crit = crit_kac_rice(cov, alpha=alpha, side="sup",
                                             domain=domain)
                    else:
                        crit = _t_crit(name, alpha, df, grid_points, domain)
                    band = build_band(spline, surface, crit, grid,
                                      est.n_units, kind="scb-sup")
                    rejected[name][a_idx, rep] = _disjoint_somewhere(band, ref)

    _run_reps(reps, worker, threads)
    rates, halves = {}, {}
    for name in methods:
        p = rejected[name].mean(axis=1)
        rates[name] = tuple(float(v) for v in p)
        halves[name] = tuple(float(1.96 * np.sqrt(v * (1.0 - v) / reps))
                             for v in p)
    return PowerResult(effect_scales=tuple(float(a) for a in effect_scales),
                       rates=rates, half_widths=halves, reps=reps,
                       refband_kind=ref.kind)


@dataclass(frozen=True)
class EquivalenceStudyResult:
    """Validation rate of the equivalence test over replicates."""

    rate: float
    half_width: float
    band_center: float
    band_half_width: float
    outcomes: tuple = field(repr=False, default=())


def run_validation_study(config, s_value=1.0, t_a=-4.0, reps=500, B=1000,
                         alpha=0.05, grid_points=101, method="param-boot",
                         threads=None):
    """Validation rate against a fixed reference band.

    The band is centered one unit above the curve's pre-onset plateau
    with half-width s_value, so s_value = 1 puts the true pre-period
    effect exactly on the band's lower edge: the worst case for the
    test's error rate.
    """
    if method not in ("param-boot", "mult-boot"):
        raise ValidationError("method must be param-boot or mult-boot")
    center = anticipation_offset(config) + 1.0
    ref = refband_constant(center - s_value, center + s_value)
    grid = np.linspace(config.t_min, float(t_a), grid_points)
    domain = (float(config.t_min), 0.0)
    outcomes = np.zeros(reps, dtype=bool)

    def worker(start, stop):
        for rep in range(start, stop):
            rng = substream(config.seed, _VALIDATION_TAG, rep)
            dp, est, cov = _basic_estimate(generate_panel(config, rng))
            seed = fold(config.seed, _VALIDATION_TAG, rep)
            if method == "param-boot":
                crit = crit_param_boot(est, cov, side="inf", alpha=alpha,
                                       domain=domain, B=B, seed=seed,
                                       threads=1)
            else:
                crit = crit_mult_boot(dp, est, cov, side="inf", alpha=alpha,
                                      domain=domain, B=B, seed=seed,
                                      threads=1)
            band = build_band(fit_beta_spline(est), fit_cov_surface(cov),
                              crit, grid, est.n_units, kind="scb-inf")
            outcomes[rep] = equivalence_validate(band, ref, t_a=t_a).validated

    _run_reps(reps, worker, threads)
    rate = float(outcomes.mean())
    half = float(1.96 * np.sqrt(rate * (1.0 - rate) / reps))
    return EquivalenceStudyResult(rate=rate, half_width=half,
                                  band_center=float(center),
                                  band_half_width=float(s_value),
                                  outcomes=tuple(bool(v) for v in outcomes))
