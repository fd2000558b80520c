"""Command-line front end for estimation, reports, studies, and the service."""

import functools
import sys

import click

from .errors import HonestEspError, NumericalError, ValidationError
from .honest import ReportConfig, estimate_panel, honest_report
from .panel import load_csv
from .serialize import (dumps, estimate_payload, report_payload,
                        write_estimate_csv, write_plot_csv)
from .sim import (SimConfig, run_accuracy_study, run_power_study,
                  run_validation_study)


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    sys.exit(3 if isinstance(exc, NumericalError) else 2)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except HonestEspError as exc:
            _fail(exc)
    return wrapper


def _parse_config_file(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"config line without '=': {line!r}")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


@click.group()
@click.version_option(package_name="honest-esp")
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="key=value file supplying flag defaults")
@click.pass_context
def main(ctx, config_path):
    """Honest simultaneous inference for event-study panels."""
    if config_path:
        try:
            defaults = _parse_config_file(config_path)
        except HonestEspError as exc:
            _fail(exc)
        ctx.default_map = {
            "estimate": defaults,
            "report": defaults,
            "serve": defaults,
            "simulate": {name: defaults
                         for name in ("accuracy", "power", "validation")},
        }


def _schema_options(fn):
    opts = [
        click.option("--input", "input_path", required=True,
                     type=click.Path(exists=True, dir_okay=False),
                     help="long-format panel CSV"),
        click.option("--unit", "unit_col", default="unit", show_default=True),
        click.option("--time", "time_col", default="time", show_default=True),
        click.option("--outcome", "outcome_col", default="outcome",
                     show_default=True),
        click.option("--treat", "treat_col", default=None,
                     help="binary treatment column [default: treat]"),
        click.option("--group", "group_col", default=None,
                     help="adoption-cohort column for staggered designs"),
        click.option("--covariates", default="",
                     help="comma-separated unit-level covariate columns"),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _load(input_path, unit_col, time_col, outcome_col, treat_col, group_col,
          covariates):
    cov_cols = tuple(c.strip() for c in covariates.split(",") if c.strip())
    if treat_col is None and group_col is None:
        treat_col = "treat"
    return load_csv(input_path, treatment_col=treat_col, group_col=group_col,
                    covariate_cols=cov_cols, unit_col=unit_col,
                    time_col=time_col, outcome_col=outcome_col)


def _write_json(doc, output):
    text = dumps(doc, indent=2)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
    else:
        click.echo(text)


@main.command()
@_schema_options
@click.option("--output", type=click.Path(), default=None,
              help="write JSON here instead of stdout")
@click.option("--csv", "csv_path", type=click.Path(), default=None,
              help="also write a per-period estimate/se table")
@_guarded
def estimate(input_path, unit_col, time_col, outcome_col, treat_col,
             group_col, covariates, output, csv_path):
    """Per-period effect estimates and their covariance."""
    data = _load(input_path, unit_col, time_col, outcome_col, treat_col,
                 group_col, covariates)
    _dp, est, cov = estimate_panel(data)
    _write_json(estimate_payload(est, cov), output)
    if csv_path:
        write_estimate_csv(est, cov, csv_path)


def _refband_spec(kind, t_a, s_lower, s_upper, m, m_lower, m_upper,
                  ref_lower, ref_upper):
    if kind == "anticipation":
        spec = {"kind": kind, "t_a": t_a}
        if s_lower is not None:
            spec["s_lower"] = s_lower
        if s_upper is not None:
            spec["s_upper"] = s_upper
        return spec
    if kind == "trend":
        return {"kind": kind,
                "m_lower": m_lower if m_lower is not None else m,
                "m_upper": m_upper if m_upper is not None else m}
    if kind == "constant":
        if ref_lower is None or ref_upper is None:
            raise ValidationError(
                "constant reference band needs --ref-lower and --ref-upper")
        return {"kind": kind, "lower": ref_lower, "upper": ref_upper}
    raise ValidationError(f"unknown reference band kind {kind!r}")


@main.command()
@_schema_options
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--method", default="param-boot", show_default=True,
              type=click.Choice(["param-boot", "mult-boot", "kac-rice"]))
@click.option("-B", "--boot", "b", default=1000, show_default=True,
              help="bootstrap replications")
@click.option("--seed", default=0, show_default=True)
@click.option("--t-a", "t_a", default=-1.0, show_default=True,
              help="anticipation cutoff")
@click.option("--refband", "refband_kind", default="anticipation",
              show_default=True,
              type=click.Choice(["anticipation", "trend", "constant"]))
@click.option("--s-lower", default=None, type=float,
              help="anticipation band half-width below the center")
@click.option("--s-upper", default=None, type=float)
@click.option("--m", default=1.0, show_default=True,
              help="trend band roughness multiplier (both sides)")
@click.option("--m-lower", default=None, type=float)
@click.option("--m-upper", default=None, type=float)
@click.option("--ref-lower", default=None, type=float,
              help="constant band lower bound")
@click.option("--ref-upper", default=None, type=float)
@click.option("--grid-post", default=100, show_default=True)
@click.option("--grid-pre", default=101, show_default=True)
@click.option("--threads", default=None, type=int)
@click.option("--output", type=click.Path(), default=None)
@click.option("--plot-csv", "plot_csv", type=click.Path(), default=None,
              help="data-only CSV with curve, bands, and spans per grid point")
@_guarded
def report(input_path, unit_col, time_col, outcome_col, treat_col, group_col,
           covariates, alpha, method, b, seed, t_a, refband_kind, s_lower,
           s_upper, m, m_lower, m_upper, ref_lower, ref_upper, grid_post,
           grid_pre, threads, output, plot_csv):
    """Full honest analysis: bands, reference band, both tests."""
    data = _load(input_path, unit_col, time_col, outcome_col, treat_col,
                 group_col, covariates)
    spec = _refband_spec(refband_kind, t_a, s_lower, s_upper, m, m_lower,
                         m_upper, ref_lower, ref_upper)
    config = ReportConfig(alpha=alpha, method=method, B=b, seed=seed, t_a=t_a,
                          refband=spec, grid_post=grid_post,
                          grid_pre=grid_pre, threads=threads)
    rep = honest_report(data, config)
    _write_json(report_payload(rep), output)
    if plot_csv:
        write_plot_csv(rep, plot_csv)


@main.group()
def simulate():
    """Monte Carlo studies on synthetic panels."""


def _sim_options(fn):
    opts = [
        click.option("--curve", default="saturating", show_default=True),
        click.option("--scale", "effect_scale", default=1.0, show_default=True,
                     help="effect curve multiplier"),
        click.option("--trend-slope", default=0.0, show_default=True,
                     help="differential pre-trend slope"),
        click.option("--n", "n_units", default=100, show_default=True),
        click.option("--periods", "n_periods", default=11, show_default=True),
        click.option("--smoothness", default=1.5, show_default=True,
                     help="noise kernel smoothness"),
        click.option("--variance", default=4.0, show_default=True,
                     help="noise kernel variance"),
        click.option("--seed", default=0, show_default=True),
        click.option("--threads", default=None, type=int),
        click.option("--output", type=click.Path(), default=None),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _sim_config(curve, effect_scale, trend_slope, n_units, n_periods,
                smoothness, variance, seed):
    return SimConfig(curve=curve, effect_scale=effect_scale,
                     trend_slope=trend_slope, n_units=n_units,
                     n_periods=n_periods, kernel_smoothness=smoothness,
                     kernel_variance=variance, seed=seed)


@simulate.command()
@_sim_options
@click.option("--reps", default=500, show_default=True)
@click.option("--points", "eval_points", default=101, show_default=True)
@_guarded
def accuracy(curve, effect_scale, trend_slope, n_units, n_periods, smoothness,
             variance, seed, threads, output, reps, eval_points):
    """Mean sup-norm error of the fitted effect curve."""
    cfg = _sim_config(curve, effect_scale, trend_slope, n_units, n_periods,
                      smoothness, variance, seed)
    res = run_accuracy_study(cfg, reps=reps, eval_points=eval_points,
                             threads=threads)
    _write_json({"mean_error": res.mean_error, "half_width": res.half_width,
                 "reps": reps, "errors": res.errors}, output)


@simulate.command()
@_sim_options
@click.option("--scales", default="0,0.25,0.5,0.75,1", show_default=True,
              help="comma-separated effect scales")
@click.option("--methods", default="param-boot,mult-boot,naive,bonferroni",
              show_default=True)
@click.option("--reps", default=300, show_default=True)
@click.option("-B", "--boot", "b", default=1000, show_default=True)
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--refband", "refband_kind", default="none", show_default=True,
              type=click.Choice(["none", "constant", "trend"]))
@click.option("--m", default=None, type=float,
              help="trend band roughness multiplier")
@click.option("--ref-lower", default=None, type=float)
@click.option("--ref-upper", default=None, type=float)
@_guarded
def power(curve, effect_scale, trend_slope, n_units, n_periods, smoothness,
          variance, seed, threads, output, scales, methods, reps, b, alpha,
          refband_kind, m, ref_lower, ref_upper):
    """Rejection rates of the relevance test by method and effect size."""
    cfg = _sim_config(curve, effect_scale, trend_slope, n_units, n_periods,
                      smoothness, variance, seed)
    try:
        scale_values = tuple(float(s) for s in scales.split(",") if s.strip())
    except ValueError:
        raise ValidationError(f"bad --scales value {scales!r}") from None
    method_names = tuple(s.strip() for s in methods.split(",") if s.strip())
    refband = None
    if refband_kind == "trend":
        refband = {"kind": "trend", "m": m if m is not None else 1.0}
    elif refband_kind == "constant":
        if ref_lower is None or ref_upper is None:
            raise ValidationError(
                "constant reference band needs --ref-lower and --ref-upper")
        refband = {"kind": "constant", "lower": ref_lower, "upper": ref_upper}
    res = run_power_study(cfg, effect_scales=scale_values,
                          methods=method_names, reps=reps, B=b, alpha=alpha,
                          refband=refband, threads=threads)
    _write_json({"effect_scales": res.effect_scales, "rates": res.rates,
                 "half_widths": res.half_widths, "reps": res.reps,
                 "refband_kind": res.refband_kind}, output)


@simulate.command()
@_sim_options
@click.option("--s", "s_value", default=1.0, show_default=True,
              help="reference band half-width")
@click.option("--t-a", "t_a", default=-4.0, show_default=True)
@click.option("--reps", default=500, show_default=True)
@click.option("-B", "--boot", "b", default=1000, show_default=True)
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--method", default="param-boot", show_default=True)
@_guarded
def validation(curve, effect_scale, trend_slope, n_units, n_periods,
               smoothness, variance, seed, threads, output, s_value, t_a,
               reps, b, alpha, method):
    """Validation rate of the pre-event equivalence test."""
    cfg = _sim_config(curve, effect_scale, trend_slope, n_units, n_periods,
                      smoothness, variance, seed)
    res = run_validation_study(cfg, s_value=s_value, t_a=t_a, reps=reps, B=b,
                               alpha=alpha, method=method, threads=threads)
    _write_json({"rate": res.rate, "half_width": res.half_width,
                 "band_center": res.band_center,
                 "band_half_width": res.band_half_width,
                 "reps": len(res.outcomes)}, output)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@_guarded
def serve(host, port):
    """Run the JSON-over-HTTP service."""
    if not 1024 <= port <= 65535:
        raise ValidationError(f"port must be in [1024, 65535], got {port}")
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
