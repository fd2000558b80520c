"""Tests for JSON emission and plot-data export."""

import json
import math

import numpy as np
import pandas as pd
import pytest

from honest_esp.errors import ValidationError
from honest_esp.honest import ReportConfig, honest_report
from honest_esp.serialize import (band_payload, dumps, estimate_payload,
                                  plot_frame, refband_payload, report_payload,
                                  write_estimate_csv, write_plot_csv)
from honest_esp.sim import SimConfig, generate_panel


@pytest.fixture(scope="module")
def report():
    panel = generate_panel(SimConfig(n_units=80, n_periods=11, seed=5))
    return honest_report(panel, ReportConfig(B=200, seed=3))


class TestDumps:
    def test_scalars(self):
        assert dumps(None) == "null"
        assert dumps(True) == "true"
        assert dumps(False) == "false"
        assert dumps(7) == "7"
        assert dumps(np.int64(7)) == "7"
        assert dumps("a\"b\n") == '"a\\"b\\n"'

    def test_float_round_trip_exact(self):
        for x in (0.1, 1.0 / 3.0, np.nextafter(2.0, 3.0), 1e-300, 1e300,
                  -4.9406564584124654e-324):
            assert float(dumps(x)) == x

    def test_nonfinite_become_null(self):
        assert dumps(float("inf")) == "null"
        assert dumps(float("-inf")) == "null"
        assert dumps(float("nan")) == "null"
        assert dumps([1.0, np.inf]) == "[1,null]"

    def test_numpy_containers(self):
        doc = {"a": np.arange(3), "b": np.array([[1.5, 2.5]]),
               "c": (np.float64(0.5), np.bool_(True))}
        assert json.loads(dumps(doc)) == {"a": [0, 1, 2], "b": [[1.5, 2.5]],
                                          "c": [0.5, True]}

    def test_indent_matches_compact(self):
        doc = {"x": [1.25, {"y": None}], "z": "s"}
        assert json.loads(dumps(doc, indent=2)) == json.loads(dumps(doc))
        assert "\n" in dumps(doc, indent=2)

    def test_rejects_non_string_keys(self):
        with pytest.raises(ValidationError):
            dumps({1: "x"})

    def test_rejects_unknown_types(self):
        with pytest.raises(ValidationError):
            dumps(object())


class TestPayloads:
    def test_estimate_payload(self, report):
        est = report.estimate
        doc = json.loads(dumps(estimate_payload(est)))
        assert doc["estimator"] == "did"
        assert doc["n_units"] == est.n_units
        np.testing.assert_array_equal(doc["beta"], est.beta)

    def test_band_payload_round_trip(self, report):
        band = report.bands[1]
        doc = json.loads(dumps(band_payload(band)))
        assert doc["kind"] == "scb-sup"
        np.testing.assert_array_equal(doc["grid"], band.grid)
        np.testing.assert_array_equal(doc["lower"], band.lower)
        assert doc["crit"] == band.crit

    def test_refband_payload_bounds(self, report):
        grid = np.linspace(-10.0, 10.0, 21)
        doc = refband_payload(report.refband, grid)
        lo, hi = report.refband.bounds(grid)
        np.testing.assert_array_equal(doc["lower"], lo)
        np.testing.assert_array_equal(doc["upper"], hi)

    def test_report_payload_structure(self, report):
        doc = json.loads(dumps(report_payload(report)))
        assert set(doc) == {"n_units", "n_periods", "config", "estimate",
                            "curve", "bands", "refband", "relevance",
                            "equivalence"}
        assert [b["kind"] for b in doc["bands"]] == ["pointwise", "scb-sup",
                                                     "scb-inf"]
        assert doc["relevance"]["rejected"] == report.relevance.rejected
        assert doc["equivalence"]["validated"] == report.equivalence.validated
        assert len(doc["curve"]["grid"]) == 201
        assert doc["config"]["B"] == 200

    def test_report_payload_deterministic(self, report):
        assert dumps(report_payload(report)) == dumps(report_payload(report))


class TestPlotFrame:
    def test_columns_and_alignment(self, report):
        df = plot_frame(report)
        assert list(df.columns[:4]) == ["t", "beta", "ref_lower", "ref_upper"]
        assert list(df.columns[-2:]) == ["in_significant_span",
                                         "in_violation_span"]
        sup = report.bands[1]
        rows = df.set_index("t")
        np.testing.assert_array_equal(
            rows.loc[sup.grid, "scb_sup_lower"].to_numpy(), sup.lower)
        # off the sup grid the column is empty
        assert np.isnan(rows.loc[-10.0, "scb_sup_lower"])

    def test_span_flags_respect_spans(self, report):
        df = plot_frame(report)
        for a, b in report.relevance.spans:
            inside = (df["t"] >= a) & (df["t"] <= b)
            assert df.loc[inside, "in_significant_span"].all()
        outside = np.ones(len(df), dtype=bool)
        for a, b in report.relevance.spans:
            outside &= ~((df["t"] >= a) & (df["t"] <= b))
        assert (df.loc[outside, "in_significant_span"] == 0).all()

    def test_plot_csv_round_trip(self, report, tmp_path):
        path = tmp_path / "plot.csv"
        write_plot_csv(report, path)
        # default pandas parsing is lossy in the last ulp; the file is exact
        back = pd.read_csv(path, float_precision="round_trip")
        df = plot_frame(report)
        np.testing.assert_array_equal(back["t"].to_numpy(),
                                      df["t"].to_numpy())
        np.testing.assert_array_equal(back["beta"].to_numpy(),
                                      df["beta"].to_numpy())

    def test_estimate_csv(self, report, tmp_path):
        from honest_esp.honest import estimate_panel
        panel = generate_panel(SimConfig(n_units=80, n_periods=11, seed=5))
        _dp, est, cov = estimate_panel(panel)
        path = tmp_path / "est.csv"
        write_estimate_csv(est, cov, path)
        back = pd.read_csv(path, float_precision="round_trip")
        assert list(back.columns) == ["event_time", "beta", "se"]
        np.testing.assert_array_equal(back["beta"].to_numpy(), est.beta)
        se = np.sqrt(np.clip(np.diag(cov.cov), 0.0, None) / est.n_units)
        np.testing.assert_array_equal(back["se"].to_numpy(), se)
