"""NumPy implementations of the spline kernels.

Used when the compiled extension is unavailable (or forced via the
HONEST_ESP_BACKEND environment variable).  Same contracts as the
compiled module: natural cubic second derivatives and piecewise cubic
evaluation in the second-derivative representation, batched over the
leading axes of ``y``.
"""

import numpy as np
from scipy.linalg import solve_banded


def natural_m(x, y):
    """Second derivatives of the natural cubic spline through (x, y).

    x: (T,) strictly increasing knots.
    y: (..., T) values; batched over leading axes.
    Returns m with the same shape as y, m[..., 0] = m[..., -1] = 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    T = x.shape[0]
    out = np.zeros_like(y)
    if T < 3:
        return out
    h = np.diff(x)
    K = T - 2
    ab = np.zeros((3, K))
    ab[1, :] = (h[:-1] + h[1:]) / 3.0
    if K > 1:
        ab[0, 1:] = h[1:K] / 6.0
        ab[2, :-1] = h[1:K] / 6.0
    flat = y.reshape(-1, T)
    slopes = np.diff(flat, axis=1) / h
    rhs = (slopes[:, 1:] - slopes[:, :-1]).T
    sol = solve_banded((1, 1), ab, rhs)
    out.reshape(-1, T)[:, 1:-1] = sol.T
    return out


def eval_cubic(x, y, m, q, nu=0):
    """Evaluate the piecewise cubic (or a derivative) at query points.

    x: (T,) knots; y, m: (..., T) values and second derivatives;
    q: (M,) query points inside [x[0], x[-1]]; nu in {0, 1, 2}.
    Returns (..., M).  Domain checking is the caller's job.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    T = x.shape[0]
    idx = np.clip(np.searchsorted(x, q, side="right") - 1, 0, T - 2)
    h = x[idx + 1] - x[idx]
    A = (x[idx + 1] - q) / h
    B = (q - x[idx]) / h
    y0 = y[..., idx]
    y1 = y[..., idx + 1]
    m0 = m[..., idx]
    m1 = m[..., idx + 1]
    if nu == 0:
        return A * y0 + B * y1 + (h * h / 6.0) * ((A**3 - A) * m0 + (B**3 - B) * m1)
    if nu == 1:
        return (y1 - y0) / h + (h / 6.0) * ((1.0 - 3.0 * A * A) * m0 + (3.0 * B * B - 1.0) * m1)
    if nu == 2:
        return A * m0 + B * m1
    raise ValueError(f"nu must be 0, 1 or 2, got {nu}")
