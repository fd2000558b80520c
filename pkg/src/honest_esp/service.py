"""JSON-over-HTTP service around the estimation and testing pipeline.

Datasets are immutable once uploaded: the panel, its estimate, and its
covariance are cached per dataset id, so repeated band or test requests
only pay for the band stage.  All floats are emitted through the
17-digit serializer; infinities become null.
"""

import hashlib
import io
import os
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles

from .bands import (build_band, crit_kac_rice, crit_mult_boot,
                    crit_param_boot, default_post_grid, default_pre_grid,
                    fit_beta_spline, fit_cov_surface)
from .errors import NumericalError, ValidationError
from .honest import ReportConfig, assemble_report, estimate_panel
from .panel import load_csv, write_csv
from .serialize import band_payload, dumps, estimate_payload, report_payload

_TEST_KEYS = ("alpha", "method", "B", "seed", "t_a", "refband", "grid_post",
              "grid_pre", "kac_rice_form", "threads")


def _json(doc, status=200):
    return Response(content=dumps(doc), media_type="application/json",
                    status_code=status)


class _Dataset:
    """One uploaded panel plus lazily computed, immutable derivatives."""

    def __init__(self, data):
        self.data = data
        self._lock = threading.Lock()
        self._estimated = None
        self._bands = {}

    def estimated(self):
        with self._lock:
            if self._estimated is None:
                self._estimated = estimate_panel(self.data)
            return self._estimated

    def cached_band(self, key):
        with self._lock:
            return self._bands.get(key)

    def store_band(self, key, band):
        # first writer wins; identical params give identical bands
        with self._lock:
            return self._bands.setdefault(key, band)


def _default_ui_dir():
    override = os.environ.get("HONEST_ESP_UI_DIR")
    if override:
        return Path(override)
    return Path(__file__).resolve().parents[2] / "frontend" / "dist"


def _demo_csv_text():
    # fixed-seed synthetic panel so the UI has something to explore
    from .sim import SimConfig, generate_panel

    panel = generate_panel(SimConfig(curve="oscillating", n_units=150,
                                     n_periods=21, seed=42))
    buf = io.StringIO()
    write_csv(panel, buf)
    return buf.getvalue()


def _require(store, dataset_id):
    ds = store.get(dataset_id)
    if ds is None:
        raise HTTPException(status_code=404,
                            detail=f"unknown dataset {dataset_id!r}")
    return ds


def _band_request(ds, body):
    method = body.get("method", "param-boot")
    side = body.get("side", "sup")
    alpha = float(body.get("alpha", 0.05))
    B = int(body.get("B", 1000))
    seed = int(body.get("seed", 0))
    points = body.get("points")
    if side not in ("sup", "inf"):
        raise ValidationError(f"side must be sup or inf, got {side!r}")
    if method not in ("param-boot", "mult-boot", "kac-rice"):
        raise ValidationError(f"unknown method {method!r}")
    points = int(points) if points is not None else (100 if side == "sup"
                                                     else 101)
    key = (method, side, alpha, B, seed, points)
    hit = ds.cached_band(key)
    if hit is not None:
        return hit

    dp, est, cov = ds.estimated()
    spline = fit_beta_spline(est)
    surface = fit_cov_surface(cov)
    if method == "mult-boot":
        if dp is None:
            raise ValidationError(
                "multiplier bootstrap is unavailable for staggered designs")
        crit = crit_mult_boot(dp, est, cov, side=side, alpha=alpha, B=B,
                              seed=seed, grid_points=points, threads=1)
    elif method == "kac-rice":
        crit = crit_kac_rice(cov, alpha=alpha, side=side, grid_points=points)
    else:
        crit = crit_param_boot(est, cov, side=side, alpha=alpha, B=B,
                               seed=seed, grid_points=points, threads=1)
    if side == "sup":
        grid = default_post_grid(float(est.event_times[-1]), points)
        kind = "scb-sup"
    else:
        grid = default_pre_grid(-float(est.event_times[0]), t_a=0.0,
                                points=points)
        kind = "scb-inf"
    band = build_band(spline, surface, crit, grid, est.n_units, kind=kind)
    return ds.store_band(key, band)


def create_app():
    app = FastAPI(title="honest-esp", version="0.1.0", docs_url=None,
                  redoc_url=None)
    store = {}
    store_lock = threading.Lock()

    @app.exception_handler(ValidationError)
    def _validation_handler(request: Request, exc: ValidationError):
        return _json({"error": str(exc)}, status=400)

    @app.exception_handler(NumericalError)
    def _numerical_handler(request: Request, exc: NumericalError):
        return _json({"error": str(exc)}, status=422)

    @app.exception_handler(RequestValidationError)
    def _request_handler(request: Request, exc: RequestValidationError):
        return _json({"error": str(exc)}, status=400)

    @app.exception_handler(HTTPException)
    def _http_handler(request: Request, exc: HTTPException):
        # keep one error body shape across all failure modes
        return _json({"error": str(exc.detail)}, status=exc.status_code)

    @app.get("/health")
    def health():
        return _json({"status": "ok"})

    @app.post("/datasets")
    def upload(file: UploadFile = File(...),
               unit: str = Form("unit"), time: str = Form("time"),
               outcome: str = Form("outcome"), treat: str = Form(""),
               group: str = Form(""), covariates: str = Form("")):
        content = file.file.read()
        cov_cols = tuple(c.strip() for c in covariates.split(",") if c.strip())
        treat_col = treat.strip() or None
        group_col = group.strip() or None
        if treat_col is None and group_col is None:
            treat_col = "treat"
        schema = repr((unit, time, outcome, treat_col, group_col, cov_cols))
        dataset_id = hashlib.sha256(content
                                    + schema.encode()).hexdigest()[:16]
        with store_lock:
            known = dataset_id in store
        if not known:
            data = load_csv(io.BytesIO(content), treatment_col=treat_col,
                            group_col=group_col, covariate_cols=cov_cols,
                            unit_col=unit, time_col=time, outcome_col=outcome)
            with store_lock:
                store.setdefault(dataset_id, _Dataset(data))
        ds = store[dataset_id]
        return _json({
            "id": dataset_id,
            "n_units": ds.data.n,
            "n_periods": ds.data.T,
            "event_times": ds.data.event_times,
            "design": "staggered" if ds.data.group is not None
                      else "treatment",
        })

    @app.get("/datasets/{dataset_id}/estimate")
    def get_estimate(dataset_id: str):
        ds = _require(store, dataset_id)
        _dp, est, cov = ds.estimated()
        return _json(estimate_payload(est, cov))

    @app.post("/datasets/{dataset_id}/bands")
    def post_bands(dataset_id: str, body: dict):
        ds = _require(store, dataset_id)
        band = _band_request(ds, body)
        return _json(band_payload(band))

    @app.post("/datasets/{dataset_id}/test")
    def post_test(dataset_id: str, body: dict):
        ds = _require(store, dataset_id)
        kwargs = {k: body[k] for k in _TEST_KEYS if body.get(k) is not None}
        config = ReportConfig(**kwargs)
        dp, est, cov = ds.estimated()
        report = assemble_report(dp, est, cov, config)
        return _json(report_payload(report))

    @app.get("/ui/demo.csv")
    def demo_csv():
        return Response(content=_demo_csv_text(), media_type="text/csv")

    ui_dir = _default_ui_dir()
    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")

    return app
