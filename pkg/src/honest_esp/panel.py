"""Balanced panel container, validation, CSV round-trip and demeaning.

Panels are stored wide: one outcome row per unit, one column per event
time.  Event times are strictly increasing numbers containing 0, the
reference period; staggered designs additionally need consecutive
integers so group subpanels stay aligned under calendar shifts.  A
panel carries either a binary treatment indicator (basic design) or an
adoption-group label per unit (staggered design, with inf marking
never-treated units).
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import (
    DuplicateCell,
    MissingReferencePeriod,
    NoTreatmentVariation,
    NonBinaryTreatment,
    TimeVaryingCovariate,
    TimeVaryingTreatment,
    UnbalancedPanel,
    ValidationError,
)

_GROUP_NEVER_TOKENS = {"inf", "never", ""}


def _freeze(arr):
    arr = np.asarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PanelData:
    """Validated balanced panel."""

    outcomes: np.ndarray
    event_times: np.ndarray
    treatment: np.ndarray | None = None
    group: np.ndarray | None = None
    covariates: np.ndarray | None = None
    covariate_names: tuple = ()
    unit_ids: tuple = ()

    @property
    def n(self):
        return self.outcomes.shape[0]

    @property
    def T(self):
        return self.outcomes.shape[1]

    @property
    def t_pre(self):
        return float(-self.event_times[0])

    @property
    def t_post(self):
        return float(self.event_times[-1])

    @property
    def ref_index(self):
        return int(np.searchsorted(self.event_times, 0))


def make_panel(outcomes, event_times, treatment=None, group=None,
               covariates=None, covariate_names=None, unit_ids=None):
    """Validate and build a PanelData.

    Exactly one of treatment (binary, unit-constant) and group
    (adoption times, inf for never treated) must be given.
    """
    outcomes = np.asarray(outcomes, dtype=np.float64)
    if outcomes.ndim != 2:
        raise ValidationError(f"outcomes must be 2-D, got shape {outcomes.shape}")
    n, T = outcomes.shape
    if not np.all(np.isfinite(outcomes)):
        raise UnbalancedPanel("outcomes contain missing or non-finite values")

    event_times = np.array(event_times, dtype=np.float64)
    if event_times.shape != (T,):
        raise ValidationError(
            f"event_times length {event_times.shape} does not match {T} columns"
        )
    if T < 2:
        raise ValidationError("panel needs at least two periods")
    if not np.all(np.isfinite(event_times)):
        raise ValidationError("event times must be finite numbers")
    if np.any(np.diff(event_times) <= 0):
        raise ValidationError("event times must be strictly increasing")
    # snap grid roundoff so the reference column is found exactly
    near_zero = np.abs(event_times) <= 1e-9 * max(1.0, np.abs(event_times).max())
    event_times[near_zero] = 0.0
    if 0.0 not in event_times:
        raise MissingReferencePeriod("event time 0 is required as the reference")

    if (treatment is None) == (group is None):
        raise ValidationError("exactly one of treatment and group must be given")

    if treatment is not None:
        treatment = np.asarray(treatment, dtype=np.float64)
        if treatment.shape != (n,):
            raise ValidationError(f"treatment must have shape ({n},)")
        if not np.all(np.isin(treatment, (0.0, 1.0))):
            raise NonBinaryTreatment("treatment values must be 0 or 1")
        if treatment.min() == treatment.max():
            raise NoTreatmentVariation("all units share one treatment status")

    if group is not None:
        # calendar shifts by adoption time need an integer-aligned grid
        if not np.array_equal(
            event_times, np.arange(event_times[0], event_times[0] + T)
        ):
            raise ValidationError(
                "staggered designs need consecutive integer event times"
            )
        group = np.asarray(group, dtype=np.float64)
        if group.shape != (n,):
            raise ValidationError(f"group must have shape ({n},)")
        finite = group[np.isfinite(group)]
        if np.any(np.isnan(group)):
            raise ValidationError("group labels must be numbers or inf")
        if finite.size and not np.all(finite == np.round(finite)):
            raise ValidationError("finite group labels must be integers")
        if finite.size and not np.all(np.isin(finite, event_times)):
            bad = finite[~np.isin(finite, event_times)][0]
            raise ValidationError(f"group label {bad:g} is not an observed event time")

    if covariates is not None:
        covariates = np.asarray(covariates, dtype=np.float64)
        if covariates.ndim != 2 or covariates.shape[0] != n:
            raise ValidationError(f"covariates must have shape ({n}, k)")
        if not np.all(np.isfinite(covariates)):
            raise ValidationError("covariates contain missing or non-finite values")
        k = covariates.shape[1]
        if covariate_names is None:
            covariate_names = tuple(f"x{j}" for j in range(k))
        covariate_names = tuple(str(c) for c in covariate_names)
        if len(covariate_names) != k:
            raise ValidationError("covariate_names length does not match columns")
    else:
        covariate_names = ()

    if unit_ids is None:
        unit_ids = tuple(range(n))
    unit_ids = tuple(unit_ids)
    if len(unit_ids) != n:
        raise ValidationError("unit_ids length does not match rows")
    if len(set(unit_ids)) != n:
        raise DuplicateCell("unit ids must be unique")

    return PanelData(
        outcomes=_freeze(outcomes),
        event_times=_freeze(event_times),
        treatment=_freeze(treatment) if treatment is not None else None,
        group=_freeze(group) if group is not None else None,
        covariates=_freeze(covariates) if covariates is not None else None,
        covariate_names=covariate_names,
        unit_ids=unit_ids,
    )


@dataclass(frozen=True)
class DemeanedPanel:
    """Cross-section demeaned treatment and outcome arrays.

    d_tilde / y_tilde are filled by covariate residualization and take
    precedence in downstream estimation when present.
    """

    event_times: np.ndarray
    d_dot: np.ndarray
    y_dot: np.ndarray
    d_tilde: np.ndarray | None = None
    y_tilde: np.ndarray | None = None

    @property
    def n(self):
        return self.d_dot.shape[0]

    @property
    def d(self):
        return self.d_tilde if self.d_tilde is not None else self.d_dot

    @property
    def y(self):
        return self.y_tilde if self.y_tilde is not None else self.y_dot

    @property
    def ref_index(self):
        return int(np.searchsorted(self.event_times, 0))


def two_way_transform(data):
    """Cross-section demeaning of treatment and outcomes.

    Demeaning in the time direction cancels from the estimator, so only
    the cross-section means are removed.
    """
    if data.treatment is None:
        raise ValidationError("two_way_transform needs a treatment panel")
    d_dot = data.treatment - data.treatment.mean()
    y_dot = data.outcomes - data.outcomes.mean(axis=0, keepdims=True)
    return DemeanedPanel(
        event_times=_freeze(data.event_times.copy()),
        d_dot=_freeze(d_dot),
        y_dot=_freeze(y_dot),
    )


def _parse_group_token(value):
    if isinstance(value, str):
        token = value.strip().lower()
        if token in _GROUP_NEVER_TOKENS:
            return np.inf
        try:
            return float(token)
        except ValueError:
            raise ValidationError(f"cannot parse group label {value!r}") from None
    value = float(value)
    return value


def load_csv(path, treatment_col=None, group_col=None, covariate_cols=(),
             unit_col="unit", time_col="time", outcome_col="outcome"):
    """Read a long-format CSV into a validated PanelData.

    Exactly one of treatment_col / group_col must be named.  Group
    labels accept inf, never or an empty field for never-treated units.
    """
    if (treatment_col is None) == (group_col is None):
        raise ValidationError("name exactly one of treatment_col and group_col")
    # round_trip parsing keeps write_csv -> load_csv exact to the bit
    df = pd.read_csv(path, dtype={unit_col: str},
                     float_precision="round_trip")
    needed = [unit_col, time_col, outcome_col]
    needed += [treatment_col] if treatment_col else [group_col]
    needed += list(covariate_cols)
    missing = [c for c in needed if c not in df.columns]
    if missing:
        raise ValidationError(f"missing columns: {', '.join(missing)}")

    try:
        times_raw = pd.to_numeric(df[time_col])
        outcomes_raw = pd.to_numeric(df[outcome_col])
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"non-numeric time or outcome value: {exc}") from None
    df = df.assign(**{time_col: times_raw, outcome_col: outcomes_raw})

    if df.duplicated([unit_col, time_col]).any():
        row = df[df.duplicated([unit_col, time_col])].iloc[0]
        raise DuplicateCell(
            f"duplicate cell unit={row[unit_col]} time={row[time_col]}"
        )

    units = df[unit_col].unique().tolist()
    times = np.sort(df[time_col].unique())
    wide = df.pivot(index=unit_col, columns=time_col, values=outcome_col)
    wide = wide.reindex(index=units, columns=times)
    if wide.isna().any().any():
        unit = wide.index[wide.isna().any(axis=1)][0]
        raise UnbalancedPanel(f"unit {unit} is missing one or more periods")

    def unit_constant(col, error_cls, label):
        per_unit = df.groupby(unit_col, sort=False)[col].nunique()
        if (per_unit > 1).any():
            unit = per_unit.index[per_unit > 1][0]
            raise error_cls(f"{label} varies over time for unit {unit}")
        return df.groupby(unit_col, sort=False)[col].first().reindex(units)

    treatment = group = None
    if treatment_col:
        treat_series = unit_constant(treatment_col, TimeVaryingTreatment, "treatment")
        treatment = treat_series.to_numpy(dtype=np.float64)
    else:
        raw = df[group_col].astype(object).where(~df[group_col].isna(), "")
        df = df.assign(__group=[_parse_group_token(v) for v in raw])
        group_series = unit_constant("__group", TimeVaryingTreatment, "group")
        group = group_series.to_numpy(dtype=np.float64)

    covariates = None
    if covariate_cols:
        cols = []
        for c in covariate_cols:
            series = unit_constant(c, TimeVaryingCovariate, f"covariate {c}")
            cols.append(series.to_numpy(dtype=np.float64))
        covariates = np.column_stack(cols)

    return make_panel(
        outcomes=wide.to_numpy(dtype=np.float64),
        event_times=times,
        treatment=treatment,
        group=group,
        covariates=covariates,
        covariate_names=tuple(covariate_cols) or None,
        unit_ids=tuple(units),
    )


def write_csv(data, path):
    """Write a PanelData back to long format (inverse of load_csv)."""
    n, T = data.n, data.T
    rows = {
        "unit": np.repeat([str(u) for u in data.unit_ids], T),
        "time": np.tile(data.event_times, n),
        "outcome": data.outcomes.ravel(),
    }
    if data.treatment is not None:
        rows["treat"] = np.repeat(data.treatment.astype(np.int64), T)
    if data.group is not None:
        labels = ["inf" if not np.isfinite(g) else str(int(g)) for g in data.group]
        rows["group"] = np.repeat(labels, T)
    for j, name in enumerate(data.covariate_names):
        rows[name] = np.repeat(data.covariates[:, j], T)
    pd.DataFrame(rows).to_csv(path, index=False, float_format="%.17g")
