"""Tests for panel validation, CSV round-trip and demeaning."""

import numpy as np
import pytest

from honest_esp.errors import (
    DuplicateCell,
    MissingReferencePeriod,
    NoTreatmentVariation,
    NonBinaryTreatment,
    TimeVaryingCovariate,
    TimeVaryingTreatment,
    UnbalancedPanel,
    ValidationError,
)
from honest_esp.panel import load_csv, make_panel, two_way_transform, write_csv


def small_panel():
    outcomes = np.array([
        [1.0, 3.0],
        [2.0, 5.0],
        [1.0, 1.5],
        [2.0, 2.5],
    ])
    return make_panel(outcomes, [0, 1], treatment=[1, 1, 0, 0])


class TestMakePanel:
    def test_basic_construction(self):
        data = small_panel()
        assert data.n == 4
        assert data.T == 2
        assert data.t_pre == 0
        assert data.t_post == 1
        assert data.ref_index == 0

    def test_arrays_are_immutable(self):
        data = small_panel()
        with pytest.raises(ValueError):
            data.outcomes[0, 0] = 9.0

    def test_missing_reference_period(self):
        with pytest.raises(MissingReferencePeriod):
            make_panel(np.zeros((3, 2)), [1, 2], treatment=[1, 0, 0])

    def test_irregular_times_allowed_for_treatment_design(self):
        data = make_panel(np.zeros((3, 4)), [-1.5, 0, 2, 2.75],
                          treatment=[1, 0, 0])
        assert data.t_pre == 1.5
        assert data.t_post == 2.75
        assert data.ref_index == 1

    def test_unsorted_times_rejected(self):
        with pytest.raises(ValidationError):
            make_panel(np.zeros((3, 3)), [0, 2, 1], treatment=[1, 0, 0])
        with pytest.raises(ValidationError):
            make_panel(np.zeros((3, 3)), [0, 1, 1], treatment=[1, 0, 0])

    def test_near_zero_time_snaps_to_reference(self):
        data = make_panel(np.zeros((2, 3)), [-1.0, 1e-13, 1.0],
                          treatment=[1, 0])
        assert data.event_times[1] == 0.0

    def test_staggered_needs_consecutive_integer_times(self):
        with pytest.raises(ValidationError):
            make_panel(np.zeros((3, 3)), [-1, 0, 2], group=[0, np.inf, np.inf])
        with pytest.raises(ValidationError):
            make_panel(np.zeros((3, 3)), [-0.5, 0, 0.5],
                       group=[0, np.inf, np.inf])

    def test_nan_outcome_is_unbalanced(self):
        outcomes = np.array([[1.0, np.nan], [2.0, 3.0]])
        with pytest.raises(UnbalancedPanel):
            make_panel(outcomes, [0, 1], treatment=[1, 0])

    def test_non_binary_treatment(self):
        with pytest.raises(NonBinaryTreatment):
            make_panel(np.zeros((3, 2)), [0, 1], treatment=[1, 0, 0.5])

    def test_no_treatment_variation(self):
        with pytest.raises(NoTreatmentVariation):
            make_panel(np.zeros((3, 2)), [0, 1], treatment=[1, 1, 1])

    def test_duplicate_unit_ids(self):
        with pytest.raises(DuplicateCell):
            make_panel(np.zeros((3, 2)), [0, 1], treatment=[1, 0, 0],
                       unit_ids=("a", "a", "b"))

    def test_both_designs_rejected(self):
        with pytest.raises(ValidationError):
            make_panel(np.zeros((3, 2)), [0, 1],
                       treatment=[1, 0, 0], group=[0, np.inf, np.inf])

    def test_group_label_must_be_observed_time(self):
        with pytest.raises(ValidationError):
            make_panel(np.zeros((3, 3)), [-1, 0, 1], group=[2, np.inf, np.inf])

    def test_group_panel_accepted(self):
        data = make_panel(np.zeros((4, 4)), [-1, 0, 1, 2],
                          group=[0, 1, np.inf, np.inf])
        assert data.group is not None
        assert np.isinf(data.group).sum() == 2


class TestTwoWayTransform:
    def test_demeaned_sums_are_zero(self):
        data = small_panel()
        dp = two_way_transform(data)
        assert dp.d_dot.sum() == pytest.approx(0.0, abs=1e-12)
        assert dp.y_dot.sum(axis=0) == pytest.approx(np.zeros(2), abs=1e-12)

    def test_treatment_demeaning_values(self):
        data = small_panel()
        dp = two_way_transform(data)
        assert dp.d_dot == pytest.approx([0.5, 0.5, -0.5, -0.5], abs=1e-14)

    def test_unit_permutation_invariance(self):
        rng = np.random.default_rng(0)
        outcomes = rng.normal(size=(6, 4))
        treat = np.array([1, 1, 0, 0, 1, 0])
        data = make_panel(outcomes, [-1, 0, 1, 2], treatment=treat)
        perm = rng.permutation(6)
        data_p = make_panel(outcomes[perm], [-1, 0, 1, 2], treatment=treat[perm])
        dp = two_way_transform(data)
        dp_p = two_way_transform(data_p)
        assert dp_p.d_dot == pytest.approx(dp.d_dot[perm], abs=1e-12)
        assert dp_p.y_dot == pytest.approx(dp.y_dot[perm], abs=1e-12)

    def test_requires_treatment_design(self):
        data = make_panel(np.zeros((3, 2)), [0, 1], group=[0, np.inf, np.inf])
        with pytest.raises(ValidationError):
            two_way_transform(data)


class TestCsvRoundTrip:
    def test_round_trip_treatment(self, tmp_path):
        rng = np.random.default_rng(1)
        outcomes = rng.normal(size=(5, 4))
        covs = rng.normal(size=(5, 2))
        data = make_panel(outcomes, [-2, -1, 0, 1], treatment=[1, 0, 1, 0, 0],
                          covariates=covs, covariate_names=("age", "size"),
                          unit_ids=("a", "b", "c", "d", "e"))
        path = tmp_path / "panel.csv"
        write_csv(data, path)
        loaded = load_csv(path, treatment_col="treat",
                          covariate_cols=("age", "size"))
        assert loaded.outcomes == pytest.approx(data.outcomes, abs=1e-12)
        assert np.array_equal(loaded.event_times, data.event_times)
        assert loaded.treatment == pytest.approx(data.treatment)
        assert loaded.covariates == pytest.approx(data.covariates, abs=1e-12)
        assert loaded.unit_ids == data.unit_ids

    def test_round_trip_group(self, tmp_path):
        rng = np.random.default_rng(2)
        outcomes = rng.normal(size=(4, 5))
        data = make_panel(outcomes, [-2, -1, 0, 1, 2],
                          group=[0, 1, np.inf, np.inf])
        path = tmp_path / "panel.csv"
        write_csv(data, path)
        loaded = load_csv(path, group_col="group")
        assert loaded.group == pytest.approx(data.group)
        assert loaded.outcomes == pytest.approx(data.outcomes, abs=1e-12)

    def test_never_treated_tokens(self, tmp_path):
        path = tmp_path / "panel.csv"
        lines = ["unit,time,outcome,group"]
        for unit, g in (("a", "0"), ("b", "never"), ("c", "Inf"), ("d", "")):
            for t in (-1, 0, 1):
                lines.append(f"{unit},{t},1.0,{g}")
        path.write_text("\n".join(lines) + "\n")
        data = load_csv(path, group_col="group")
        assert data.group == pytest.approx([0.0, np.inf, np.inf, np.inf])

    def test_unbalanced_rejected(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text(
            "unit,time,outcome,treat\n"
            "a,0,1.0,1\na,1,2.0,1\nb,0,1.5,0\n"
        )
        with pytest.raises(UnbalancedPanel):
            load_csv(path, treatment_col="treat")

    def test_duplicate_cell_rejected(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text(
            "unit,time,outcome,treat\n"
            "a,0,1.0,1\na,0,2.0,1\na,1,2.0,1\nb,0,1.5,0\nb,1,2.5,0\n"
        )
        with pytest.raises(DuplicateCell):
            load_csv(path, treatment_col="treat")

    def test_time_varying_treatment_rejected(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text(
            "unit,time,outcome,treat\n"
            "a,0,1.0,1\na,1,2.0,0\nb,0,1.5,0\nb,1,2.5,0\n"
        )
        with pytest.raises(TimeVaryingTreatment):
            load_csv(path, treatment_col="treat")

    def test_time_varying_covariate_rejected(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text(
            "unit,time,outcome,treat,age\n"
            "a,0,1.0,1,30\na,1,2.0,1,31\nb,0,1.5,0,40\nb,1,2.5,0,40\n"
        )
        with pytest.raises(TimeVaryingCovariate):
            load_csv(path, treatment_col="treat", covariate_cols=("age",))

    def test_missing_column(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text("unit,time,outcome\na,0,1.0\na,1,2.0\n")
        with pytest.raises(ValidationError):
            load_csv(path, treatment_col="treat")

    def test_non_numeric_outcome(self, tmp_path):
        path = tmp_path / "panel.csv"
        path.write_text(
            "unit,time,outcome,treat\n"
            "a,0,oops,1\na,1,2.0,1\nb,0,1.5,0\nb,1,2.5,0\n"
        )
        with pytest.raises(ValidationError):
            load_csv(path, treatment_col="treat")
