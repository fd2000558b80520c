"""Tests for natural cubic curves and tensor covariance surfaces."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import CubicSpline

from honest_esp import _kernels
from honest_esp._kernels import _fallback
from honest_esp.errors import (
    DegenerateVariance,
    DimensionMismatch,
    NonMonotoneKnots,
    OutOfDomain,
    TooFewKnots,
)
from honest_esp.spline import (
    SplineCurve,
    eval_matrix,
    natural_cubic_fit,
    second_derivative_matrix,
    tensor_fit,
)


def random_knots(rng, t, lo=-10.0, hi=10.0, min_gap=0.05):
    gaps = rng.uniform(min_gap, 1.0, t - 1)
    knots = np.concatenate([[0.0], np.cumsum(gaps)])
    return lo + (hi - lo) * knots / knots[-1]


class TestNaturalCubicFit:
    def test_hat_function_second_derivative(self):
        # Knots (-1, 0, 1), values (0, 1, 0): the single interior
        # equation (2/3) m1 = -2 gives m1 = -3.
        s = natural_cubic_fit([-1.0, 0.0, 1.0], [0.0, 1.0, 0.0])
        assert s.m == pytest.approx([0.0, -3.0, 0.0], abs=1e-14)

    def test_hat_function_midpoint_value(self):
        s = natural_cubic_fit([-1.0, 0.0, 1.0], [0.0, 1.0, 0.0])
        assert s.eval(0.5) == pytest.approx(0.6875, abs=1e-14)

    def test_interpolates_knots(self):
        rng = np.random.default_rng(0)
        knots = random_knots(rng, 9)
        values = rng.normal(size=9)
        s = natural_cubic_fit(knots, values)
        assert s.eval(knots) == pytest.approx(values, abs=1e-12)

    def test_reproduces_affine_functions(self):
        knots = np.array([-3.0, -1.0, 0.0, 2.0, 5.0])
        values = 2.0 * knots + 1.0
        s = natural_cubic_fit(knots, values)
        q = np.linspace(-3.0, 5.0, 41)
        assert s.eval(q) == pytest.approx(2.0 * q + 1.0, abs=1e-12)
        assert s.deriv(q) == pytest.approx(np.full(41, 2.0), abs=1e-12)
        assert s.m == pytest.approx(np.zeros(5), abs=1e-12)

    def test_natural_boundary_conditions(self):
        rng = np.random.default_rng(1)
        knots = random_knots(rng, 7)
        s = natural_cubic_fit(knots, rng.normal(size=7))
        assert s.deriv2(knots[0]) == pytest.approx(0.0, abs=1e-12)
        assert s.deriv2(knots[-1]) == pytest.approx(0.0, abs=1e-12)

    def test_two_knots_gives_straight_line(self):
        s = natural_cubic_fit([0.0, 4.0], [1.0, 3.0])
        q = np.linspace(0.0, 4.0, 9)
        assert s.eval(q) == pytest.approx(1.0 + 0.5 * q, abs=1e-14)
        assert s.deriv(q) == pytest.approx(np.full(9, 0.5), abs=1e-14)

    def test_matches_scipy_natural_cubic(self):
        rng = np.random.default_rng(7)
        for t in (3, 4, 9, 21):
            knots = random_knots(rng, t)
            values = rng.normal(size=t)
            s = natural_cubic_fit(knots, values)
            cs = CubicSpline(knots, values, bc_type="natural")
            q = np.linspace(knots[0], knots[-1], 57)
            assert s.eval(q) == pytest.approx(cs(q), abs=1e-10)
            assert s.deriv(q) == pytest.approx(cs(q, 1), abs=1e-10)
            assert s.deriv2(q) == pytest.approx(cs(q, 2), abs=1e-10)

    def test_too_few_knots(self):
        with pytest.raises(TooFewKnots):
            natural_cubic_fit([1.0], [2.0])

    def test_non_monotone_knots(self):
        with pytest.raises(NonMonotoneKnots):
            natural_cubic_fit([0.0, 2.0, 1.0], [1.0, 2.0, 3.0])
        with pytest.raises(NonMonotoneKnots):
            natural_cubic_fit([0.0, 0.0, 1.0], [1.0, 2.0, 3.0])

    def test_no_extrapolation(self):
        s = natural_cubic_fit([-1.0, 0.0, 1.0], [0.0, 1.0, 0.0])
        with pytest.raises(OutOfDomain):
            s.eval(1.5)
        with pytest.raises(OutOfDomain):
            s.eval(-1.0001)
        with pytest.raises(OutOfDomain):
            s.deriv(np.array([0.0, 2.0]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            natural_cubic_fit([0.0, 1.0, 2.0], [1.0, 2.0])

    @given(st.integers(min_value=3, max_value=8), st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=40, deadline=None)
    def test_c2_continuity_at_interior_knots(self, t, seed):
        rng = np.random.default_rng(seed)
        knots = random_knots(rng, t)
        values = rng.uniform(-100.0, 100.0, t)
        s = natural_cubic_fit(knots, values)
        eps = 1e-7
        # deriv2 is piecewise linear in t, so its change over 2 eps is
        # bounded by the steepest slope of m between knots.
        m_slope = np.max(np.abs(np.diff(s.m) / np.diff(knots))) + 1.0
        for k in knots[1:-1]:
            lo, hi = k - eps, k + eps
            m_scale = np.max(np.abs(s.m)) + 1.0
            d_scale = np.abs(s.deriv(k)) + 1.0
            assert abs(s.eval(hi) - s.eval(lo)) <= 4.0 * d_scale * eps
            assert abs(s.deriv(hi) - s.deriv(lo)) <= 4.0 * m_scale * eps
            assert abs(s.deriv2(hi) - s.deriv2(lo)) <= 4.0 * m_slope * eps


class TestEvalMatrix:
    def test_matches_direct_evaluation(self):
        rng = np.random.default_rng(3)
        knots = random_knots(rng, 8)
        values = rng.normal(size=8)
        grid = np.linspace(knots[0], knots[-1], 33)
        s = natural_cubic_fit(knots, values)
        E = eval_matrix(knots, grid)
        assert E @ values == pytest.approx(s.eval(grid), abs=1e-12)
        E1 = eval_matrix(knots, grid, nu=1)
        assert E1 @ values == pytest.approx(s.deriv(grid), abs=1e-12)

    def test_rows_at_knots_are_unit_vectors(self):
        knots = np.linspace(-5.0, 5.0, 11)
        E = eval_matrix(knots, knots)
        assert E == pytest.approx(np.eye(11), abs=1e-12)

    def test_second_derivative_matrix_maps_values(self):
        rng = np.random.default_rng(4)
        knots = random_knots(rng, 6)
        values = rng.normal(size=6)
        K = second_derivative_matrix(knots)
        s = natural_cubic_fit(knots, values)
        assert values @ K == pytest.approx(s.m, abs=1e-12)


class TestTensorSurface:
    def test_reproduces_node_values(self):
        rng = np.random.default_rng(5)
        knots = random_knots(rng, 7)
        raw = rng.normal(size=(7, 7))
        C = raw @ raw.T
        surf = tensor_fit(knots, C)
        for i in (0, 3, 6):
            for j in (1, 4):
                assert surf.eval(knots[i], knots[j]) == pytest.approx(C[i, j], abs=1e-12)

    def test_symmetric_input_gives_symmetric_surface(self):
        rng = np.random.default_rng(6)
        knots = random_knots(rng, 6)
        raw = rng.normal(size=(6, 6))
        C = raw @ raw.T
        surf = tensor_fit(knots, C)
        s = rng.uniform(knots[0], knots[-1], 20)
        t = rng.uniform(knots[0], knots[-1], 20)
        assert surf.eval(s, t) == pytest.approx(surf.eval(t, s), abs=1e-10)

    def test_rank_one_separates(self):
        # For C = u u', the tensor fit factorizes into the product of
        # the one-dimensional interpolants of u.
        rng = np.random.default_rng(8)
        knots = random_knots(rng, 8)
        u = rng.uniform(0.5, 2.0, 8)
        surf = tensor_fit(knots, np.outer(u, u))
        s1d = natural_cubic_fit(knots, u)
        s = rng.uniform(knots[0], knots[-1], 15)
        t = rng.uniform(knots[0], knots[-1], 15)
        assert surf.eval(s, t) == pytest.approx(s1d.eval(s) * s1d.eval(t), abs=1e-10)

    def test_mixed_partial_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        knots = np.linspace(-4.0, 4.0, 9)
        raw = rng.normal(size=(9, 9))
        C = raw @ raw.T
        surf = tensor_fit(knots, C)
        h = 1e-5
        for s0, t0 in [(-1.3, 0.7), (2.1, 2.9), (-3.5, 3.2)]:
            fd = (
                surf.eval(s0 + h, t0 + h)
                - surf.eval(s0 + h, t0 - h)
                - surf.eval(s0 - h, t0 + h)
                + surf.eval(s0 - h, t0 - h)
            ) / (4.0 * h * h)
            exact = surf.mixed_partial(s0, t0)
            assert exact == pytest.approx(fd, rel=1e-4, abs=1e-4)

    def test_diag_matches_eval(self):
        rng = np.random.default_rng(10)
        knots = random_knots(rng, 7)
        raw = rng.normal(size=(7, 7))
        C = raw @ raw.T
        surf = tensor_fit(knots, C)
        grid = np.linspace(knots[0], knots[-1], 25)
        assert surf.diag(grid) == pytest.approx(surf.eval(grid, grid), abs=1e-12)

    def test_out_of_domain(self):
        surf = tensor_fit([0.0, 1.0, 2.0], np.eye(3))
        with pytest.raises(OutOfDomain):
            surf.eval(0.5, 2.5)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            tensor_fit([0.0, 1.0, 2.0], np.eye(4))


class TestCorrRoughness:
    def test_perfect_correlation_gives_zero(self):
        # Rank-one covariance means correlation one everywhere, so the
        # standardized process has no local variation.
        rng = np.random.default_rng(11)
        knots = random_knots(rng, 9)
        u = rng.uniform(0.5, 2.0, 9)
        surf = tensor_fit(knots, np.outer(u, u))
        assert surf.corr_roughness(1.234) == pytest.approx(0.0, abs=1e-6)

    def test_squared_exponential_kernel(self):
        # For exp(-(s-t)^2 / (2 ell^2)) the standardized roughness is
        # 1/ell at every interior point.
        ell = 2.0
        grid = np.linspace(-10.0, 10.0, 81)
        C = np.exp(-((grid[:, None] - grid[None, :]) ** 2) / (2.0 * ell**2))
        surf = tensor_fit(grid, C)
        for t in (-5.0, 0.0, 3.3):
            assert surf.corr_roughness(t) == pytest.approx(1.0 / ell, rel=0.05)

    def test_nonnegative(self):
        rng = np.random.default_rng(12)
        knots = random_knots(rng, 8)
        raw = rng.normal(size=(8, 8))
        C = raw @ raw.T + 0.1 * np.eye(8)
        surf = tensor_fit(knots, C)
        taus = surf.corr_roughness(np.linspace(knots[0], knots[-1], 40))
        assert np.all(taus >= 0.0)

    def test_degenerate_variance(self):
        # Zero variance at a grid node, as at the reference period of a
        # covariance estimate, is rejected rather than divided by.
        knots = np.linspace(0.0, 4.0, 5)
        C = np.eye(5)
        C[0, 0] = 0.0
        surf = tensor_fit(knots, C)
        with pytest.raises(DegenerateVariance):
            surf.corr_roughness(0.0)


class TestBackends:
    def test_fallback_matches_active_backend(self):
        rng = np.random.default_rng(13)
        x = random_knots(rng, 11)
        y = rng.normal(size=(5, 11))
        q = np.sort(rng.uniform(x[0], x[-1], 37))
        m_active = _kernels.natural_m(x, y)
        m_fallback = _fallback.natural_m(x, y)
        assert m_active == pytest.approx(m_fallback, abs=1e-12)
        for nu in (0, 1, 2):
            a = _kernels.eval_cubic(x, y, m_active, q, nu)
            b = _fallback.eval_cubic(x, y, m_fallback, q, nu)
            assert a == pytest.approx(b, abs=1e-12)

    def test_single_row_and_batch_agree(self):
        rng = np.random.default_rng(14)
        x = random_knots(rng, 6)
        y = rng.normal(size=(3, 6))
        m = _kernels.natural_m(x, y)
        for r in range(3):
            m_row = _kernels.natural_m(x, y[r])
            assert m_row == pytest.approx(m[r], abs=1e-14)
