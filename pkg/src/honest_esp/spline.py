"""Natural cubic interpolation for curves and covariance surfaces.

Curves are stored in the second-derivative representation: knots x,
values y and knot second derivatives m, with natural boundaries
m[0] = m[-1] = 0.  Because the fit is linear in the values, evaluation
on a fixed grid is a matrix product, which is what the bootstrap code
relies on.  Covariance surfaces are tensor-product fits of the same
one-dimensional scheme, evaluated through cardinal weight vectors so
that mixed partial derivatives are exact.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    DegenerateVariance,
    DimensionMismatch,
    NonMonotoneKnots,
    OutOfDomain,
    TooFewKnots,
)

RIDGE_FACTOR = 1e-10


def _check_knots(knots):
    knots = np.asarray(knots, dtype=np.float64)
    if knots.ndim != 1:
        raise DimensionMismatch(f"knots must be 1-D, got shape {knots.shape}")
    if knots.shape[0] < 2:
        raise TooFewKnots(f"need at least 2 knots, got {knots.shape[0]}")
    if not np.all(np.diff(knots) > 0):
        raise NonMonotoneKnots("knots must be strictly increasing")
    return knots


def _check_domain(knots, t):
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    # Tiny absolute slack so grids that round-tripped through JSON
    # still count as inside the domain; never an extrapolation.
    tol = 1e-12 * max(1.0, abs(knots[0]), abs(knots[-1]))
    if np.any(t < knots[0] - tol) or np.any(t > knots[-1] + tol):
        bad = t[(t < knots[0] - tol) | (t > knots[-1] + tol)][0]
        raise OutOfDomain(
            f"point {bad} outside domain [{knots[0]}, {knots[-1]}]"
        )
    return np.clip(t, knots[0], knots[-1])


def second_derivative_matrix(knots):
    """Map from knot values to knot second derivatives.

    Row j is the second-derivative vector of the cardinal spline
    through the j-th unit vector, so values @ matrix gives m.
    """
    knots = _check_knots(knots)
    return _kernels.natural_m(knots, np.eye(knots.shape[0]))


@dataclass(frozen=True)
class SplineCurve:
    """Natural cubic interpolant of values observed at knots."""

    knots: np.ndarray
    values: np.ndarray
    m: np.ndarray

    @property
    def domain(self):
        return (float(self.knots[0]), float(self.knots[-1]))

    def _eval(self, t, nu):
        t_arr = _check_domain(self.knots, t)
        out = _kernels.eval_cubic(self.knots, self.values, self.m, t_arr, nu)
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return float(out[0])
        return out

    def eval(self, t):
        return self._eval(t, 0)

    def deriv(self, t):
        return self._eval(t, 1)

    def deriv2(self, t):
        return self._eval(t, 2)

    __call__ = eval


def natural_cubic_fit(knots, values):
    """Fit the natural cubic spline through (knots, values)."""
    knots = _check_knots(knots)
    values = np.asarray(values, dtype=np.float64)
    if values.shape != knots.shape:
        raise DimensionMismatch(
            f"values shape {values.shape} != knots shape {knots.shape}"
        )
    m = _kernels.natural_m(knots, values)
    return SplineCurve(knots=knots, values=values, m=m)


def eval_matrix(knots, grid, nu=0):
    """Cardinal evaluation operator: rows are weight vectors a(t).

    For any values v at the knots, eval_matrix(knots, grid, nu) @ v
    equals the nu-th derivative of the fitted spline on the grid.
    """
    knots = _check_knots(knots)
    grid = _check_domain(knots, grid)
    return _kernels.eval_cubic(
        knots, np.eye(knots.shape[0]), second_derivative_matrix(knots), grid, nu
    ).T


@dataclass(frozen=True)
class TensorSurface:
    """Tensor-product natural cubic fit of a matrix on grid x grid."""

    knots: np.ndarray
    values: np.ndarray
    cardinal_m: np.ndarray = field(repr=False)

    @property
    def domain(self):
        return (float(self.knots[0]), float(self.knots[-1]))

    def _weights(self, t, nu):
        t_arr = _check_domain(self.knots, t)
        return _kernels.eval_cubic(
            self.knots, np.eye(self.knots.shape[0]), self.cardinal_m, t_arr, nu
        ).T

    def eval(self, s, t):
        """surface(s, t); s and t broadcast elementwise."""
        s_b, t_b = np.broadcast_arrays(np.asarray(s, dtype=np.float64),
                                       np.asarray(t, dtype=np.float64))
        ws = self._weights(s_b.ravel(), 0)
        wt = self._weights(t_b.ravel(), 0)
        out = np.einsum("ij,jk,ik->i", ws, self.values, wt)
        if s_b.ndim == 0:
            return float(out[0])
        return out.reshape(s_b.shape)

    def diag(self, grid):
        """surface(t, t) along a grid."""
        w = self._weights(grid, 0)
        return np.einsum("ij,jk,ik->i", w, self.values, w)

    def mixed_partial(self, s, t):
        """d^2 surface / ds dt, exact for the tensor fit."""
        s_b, t_b = np.broadcast_arrays(np.asarray(s, dtype=np.float64),
                                       np.asarray(t, dtype=np.float64))
        ws = self._weights(s_b.ravel(), 1)
        wt = self._weights(t_b.ravel(), 1)
        out = np.einsum("ij,jk,ik->i", ws, self.values, wt)
        if s_b.ndim == 0:
            return float(out[0])
        return out.reshape(s_b.shape)

    def ridge(self):
        """Absolute variance threshold below which points are degenerate."""
        d = float(np.max(np.abs(np.diag(self.values))))
        return RIDGE_FACTOR * d if d > 0 else RIDGE_FACTOR

    def corr_roughness(self, t, ridge=None):
        """Roughness tau(t) of the standardized process at time t.

        tau(t)^2 = d^2/du dv [surface(u,v)/sqrt(surface(u,u)surface(v,v))]
        at u = v = t, which reduces to D11/v - D1^2/v^2 with
        v = a(t)' C a(t), D1 = a'(t)' C a(t), D11 = a'(t)' C a'(t).
        """
        if ridge is None:
            ridge = self.ridge()
        t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
        w0 = self._weights(t_arr, 0)
        w1 = self._weights(t_arr, 1)
        v = np.einsum("ij,jk,ik->i", w0, self.values, w0)
        if np.any(v <= ridge):
            bad = t_arr[v <= ridge][0]
            raise DegenerateVariance(f"variance at t={bad} is below ridge {ridge}")
        d1 = np.einsum("ij,jk,ik->i", w1, self.values, w0)
        d11 = np.einsum("ij,jk,ik->i", w1, self.values, w1)
        tau2 = np.maximum(d11 / v - (d1 / v) ** 2, 0.0)
        out = np.sqrt(tau2)
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return float(out[0])
        return out


def tensor_fit(knots, matrix):
    """Fit a tensor-product natural cubic surface to matrix values."""
    knots = _check_knots(knots)
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape != (knots.shape[0], knots.shape[0]):
        raise DimensionMismatch(
            f"matrix shape {matrix.shape} incompatible with {knots.shape[0]} knots"
        )
    return TensorSurface(
        knots=knots,
        values=matrix,
        cardinal_m=second_derivative_matrix(knots),
    )
