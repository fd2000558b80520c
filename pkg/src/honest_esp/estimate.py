"""Event-study point estimation and covariance.

The per-period effect is the coefficient of the demeaned treatment on
the demeaned outcome change from the reference period,

    beta(t) = sum_i d_i (y_i(t) - y_i(0)) / sum_i d_i^2,

with beta(0) = 0 by construction.  Its covariance across periods uses
the per-unit residuals of that regression.  Covariate adjustment
residualizes both treatment and outcomes on the demeaned covariates
first (partialling out), after which the same formulas apply.
Staggered adoption estimates each group against the never-treated in
event time and aggregates with group-size weights.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr

from .errors import (
    EmptyCommonWindow,
    EmptyGroup,
    NoNeverTreated,
    NoTreatmentVariation,
    RankDeficientCovariates,
    SingularDesign,
    ValidationError,
    ZeroResidualTreatment,
)
from .panel import DemeanedPanel, _freeze

_VAR_EPS = 1e-14


@dataclass(frozen=True)
class PointwiseEstimate:
    """Per-period effect estimates on the observed event-time grid."""

    event_times: np.ndarray
    beta: np.ndarray
    n_units: int
    estimator: str = "did"

    @property
    def ref_index(self):
        return int(np.searchsorted(self.event_times, 0))


@dataclass(frozen=True)
class CovMatrix:
    """Estimated covariance of the effect curve on the observed grid.

    Scaled so that cov / n_units approximates Var(beta_hat); the row
    and column of the reference period are identically zero.
    """

    event_times: np.ndarray
    cov: np.ndarray
    n_units: int


def did_estimate(dp, times=None):
    """Pointwise effect estimates from a demeaned panel."""
    d = dp.d
    y = dp.y
    s2 = float(d @ d) / dp.n
    if s2 < _VAR_EPS:
        raise NoTreatmentVariation("demeaned treatment has no variation")
    delta = y - y[:, dp.ref_index][:, None]
    beta = (d @ delta) / (dp.n * s2)
    beta[dp.ref_index] = 0.0
    event_times = dp.event_times
    if times is not None:
        times = np.asarray(times)
        idx = np.searchsorted(event_times, times)
        ok = (idx < event_times.shape[0]) & (event_times[np.minimum(idx, event_times.shape[0] - 1)] == times)
        if not np.all(ok):
            raise ValidationError(f"requested times not on the panel grid: {times[~ok]}")
        beta = beta[idx]
        event_times = event_times[idx]
    return PointwiseEstimate(
        event_times=_freeze(np.asarray(event_times)),
        beta=_freeze(beta),
        n_units=dp.n,
        estimator="did",
    )


def did_covariance(dp, est=None):
    """Covariance of the effect curve on the observed grid."""
    if est is None:
        est = did_estimate(dp)
    d = dp.d
    y = dp.y
    n = dp.n
    s2 = float(d @ d) / n
    if s2 < _VAR_EPS:
        raise NoTreatmentVariation("demeaned treatment has no variation")
    delta = y - y[:, dp.ref_index][:, None]
    resid = delta - np.outer(d, est.beta)
    weighted = resid * (d * d)[:, None]
    cov = (weighted.T @ resid) / n / (s2 * s2)
    cov = 0.5 * (cov + cov.T)
    cov[dp.ref_index, :] = 0.0
    cov[:, dp.ref_index] = 0.0
    return CovMatrix(
        event_times=_freeze(np.asarray(dp.event_times)),
        cov=_freeze(cov),
        n_units=n,
    )


def fwl_residualize(data):
    """Partial demeaned covariates out of treatment and outcomes.

    Returns a DemeanedPanel whose d_tilde / y_tilde are the residuals
    of the cross-section demeaned treatment and outcomes on the
    demeaned covariates.  Downstream estimation on those residuals
    gives the covariate-adjusted effect curve.
    """
    if data.treatment is None:
        raise ValidationError("fwl_residualize needs a treatment panel")
    d_dot = data.treatment - data.treatment.mean()
    y_dot = data.outcomes - data.outcomes.mean(axis=0, keepdims=True)
    if data.covariates is None or data.covariates.shape[1] == 0:
        return DemeanedPanel(
            event_times=_freeze(data.event_times.copy()),
            d_dot=_freeze(d_dot),
            y_dot=_freeze(y_dot),
            d_tilde=_freeze(d_dot.copy()),
            y_tilde=_freeze(y_dot.copy()),
        )
    w_dot = data.covariates - data.covariates.mean(axis=0, keepdims=True)
    n, k = w_dot.shape
    q_mat, r_mat, _ = qr(w_dot, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r_mat))
    tol = max(n, k) * np.finfo(np.float64).eps * (diag[0] if diag.size else 0.0)
    if diag.size == 0 or np.any(diag <= tol):
        raise RankDeficientCovariates("demeaned covariates are rank deficient")

    def project_out(x):
        return x - q_mat @ (q_mat.T @ x)

    d_tilde = project_out(d_dot)
    y_tilde = project_out(y_dot)
    if float(d_tilde @ d_tilde) / n < _VAR_EPS:
        raise ZeroResidualTreatment(
            "covariates explain the treatment exactly"
        )
    return DemeanedPanel(
        event_times=_freeze(data.event_times.copy()),
        d_dot=_freeze(d_dot),
        y_dot=_freeze(y_dot),
        d_tilde=_freeze(d_tilde),
        y_tilde=_freeze(y_tilde),
    )


@dataclass(frozen=True)
class StaggeredSpec:
    """Adoption groups, sizes, weights and the common event window."""

    groups: np.ndarray
    sizes: np.ndarray
    weights: np.ndarray
    window: np.ndarray

    @property
    def t_pre(self):
        return int(-self.window[0])

    @property
    def t_post(self):
        return int(self.window[-1])


def make_staggered_spec(data):
    """Derive groups, weights and the common window from the panel."""
    if data.group is None:
        raise ValidationError("make_staggered_spec needs a group panel")
    finite = np.isfinite(data.group)
    if not np.any(~finite):
        raise NoNeverTreated("staggered design needs never-treated units")
    if not np.any(finite):
        raise NoTreatmentVariation("no treated groups in the panel")
    groups = np.unique(data.group[finite]).astype(np.int64)
    sizes = np.array([(data.group == g).sum() for g in groups], dtype=np.int64)
    weights = sizes / sizes.sum()
    # Event times observable for every group: e is usable when g + e is
    # on the calendar grid for each g.
    lo = int(max(data.event_times[0] - g for g in groups))
    hi = int(min(data.event_times[-1] - g for g in groups))
    if hi <= lo:
        raise EmptyCommonWindow(
            f"common event window [{lo}, {hi}] has fewer than two points"
        )
    window = np.arange(lo, hi + 1)
    return StaggeredSpec(
        groups=_freeze(groups),
        sizes=_freeze(sizes),
        weights=_freeze(weights),
        window=_freeze(window),
    )


def _group_subpanel(data, g, window):
    """Demeaned subpanel of group g against the never-treated."""
    mask = (data.group == g) | ~np.isfinite(data.group)
    if (data.group == g).sum() == 0:
        raise EmptyGroup(f"group {g} has no units")
    d = (data.group[mask] == g).astype(np.float64)
    cols = np.searchsorted(data.event_times, g + window)
    y = data.outcomes[mask][:, cols]
    d_dot = d - d.mean()
    y_dot = y - y.mean(axis=0, keepdims=True)
    return DemeanedPanel(
        event_times=_freeze(window.copy()),
        d_dot=_freeze(d_dot),
        y_dot=_freeze(y_dot),
    )


def staggered_estimate(data, spec=None):
    """Group-size weighted effect curve on the common event window.

    Returns (estimate, cov, spec).  Per-group estimates use only that
    group and the never-treated units, indexed in event time; the
    aggregate weights are the group shares among treated units, and the
    covariance rescales each group block to the full panel size.
    """
    if spec is None:
        spec = make_staggered_spec(data)
    else:
        for g in spec.groups:
            if (data.group == g).sum() == 0:
                raise EmptyGroup(f"group {g} has no units")
    n = data.n
    beta = np.zeros(spec.window.shape[0])
    cov = np.zeros((spec.window.shape[0],) * 2)
    for g, w in zip(spec.groups, spec.weights):
        dp = _group_subpanel(data, int(g), spec.window)
        est_g = did_estimate(dp)
        cov_g = did_covariance(dp, est_g)
        beta += w * est_g.beta
        cov += w * w * (n / dp.n) * cov_g.cov
    ref = int(np.searchsorted(spec.window, 0))
    beta[ref] = 0.0
    cov[ref, :] = 0.0
    cov[:, ref] = 0.0
    est = PointwiseEstimate(
        event_times=_freeze(spec.window.copy()),
        beta=_freeze(beta),
        n_units=n,
        estimator="staggered",
    )
    return est, CovMatrix(
        event_times=_freeze(spec.window.copy()),
        cov=_freeze(cov),
        n_units=n,
    ), spec


def twfe_oracle(data):
    """Effect curve from the stacked two-way fixed-effects regression.

    Independent check: regress the within-transformed outcome on the
    within-transformed event-time dummies D_i 1{t = s}, s != 0, by
    least squares on the stacked panel.  Agrees with did_estimate
    exactly in balanced panels.
    """
    if data.treatment is None:
        raise ValidationError("twfe_oracle needs a treatment panel")
    n, T = data.n, data.T
    ref = data.ref_index

    def within(x):
        return (x - x.mean(axis=0, keepdims=True)
                - x.mean(axis=1, keepdims=True) + x.mean())

    y_w = within(data.outcomes).ravel()
    cols = []
    for s in range(T):
        if s == ref:
            continue
        dummy = np.zeros((n, T))
        dummy[:, s] = data.treatment
        cols.append(within(dummy).ravel())
    design = np.column_stack(cols)
    coef, _, rank, _ = np.linalg.lstsq(design, y_w, rcond=None)
    if rank < T - 1:
        raise SingularDesign("stacked design is rank deficient")
    beta = np.insert(coef, ref, 0.0)
    return PointwiseEstimate(
        event_times=_freeze(data.event_times.copy()),
        beta=_freeze(beta),
        n_units=n,
        estimator="twfe",
    )
