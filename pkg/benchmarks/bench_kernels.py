"""Compare the compiled spline kernels against the NumPy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Times the two hot paths (tridiagonal second-derivative solve, piecewise
cubic evaluation) over sizes that bracket real workloads, checks the
backends agree to machine precision, and prints a speedup table.
"""

import time

import numpy as np

from honest_esp._kernels import _fallback

try:
    from honest_esp._kernels import _core
except ImportError:
    _core = None


def _time(fn, *args, min_rounds=5, min_seconds=0.2):
    # one warmup, then enough rounds to fill the budget
    fn(*args)
    rounds, elapsed = 0, 0.0
    best = np.inf
    while rounds < min_rounds or elapsed < min_seconds:
        t0 = time.perf_counter()
        fn(*args)
        dt = time.perf_counter() - t0
        best = min(best, dt)
        elapsed += dt
        rounds += 1
    return best


def bench_natural_m(backend, n_knots, batch):
    rng = np.random.default_rng(0)
    knots = np.cumsum(rng.uniform(0.5, 1.5, size=n_knots))
    values = rng.normal(size=(batch, n_knots))

    def run():
        for row in values:
            backend.natural_m(knots, row)

    return _time(run)


def bench_eval_cubic(backend, n_knots, n_points):
    rng = np.random.default_rng(1)
    knots = np.cumsum(rng.uniform(0.5, 1.5, size=n_knots))
    values = rng.normal(size=n_knots)
    m = _fallback.natural_m(knots, values)
    grid = rng.uniform(knots[0], knots[-1], size=n_points)
    return _time(lambda: backend.eval_cubic(knots, values, m, grid, 0))


def check_agreement():
    rng = np.random.default_rng(2)
    knots = np.cumsum(rng.uniform(0.5, 1.5, size=41))
    values = rng.normal(size=41)
    m_fast = _core.natural_m(knots, values)
    m_ref = _fallback.natural_m(knots, values)
    grid = rng.uniform(knots[0], knots[-1], size=10_000)
    worst = 0.0
    for nu in (0, 1):
        a = _core.eval_cubic(knots, values, m_fast, grid, nu)
        b = _fallback.eval_cubic(knots, values, m_ref, grid, nu)
        worst = max(worst, float(np.max(np.abs(a - b))))
    worst = max(worst, float(np.max(np.abs(m_fast - m_ref))))
    return worst


def main():
    if _core is None:
        print("compiled backend not built; nothing to compare")
        return

    worst = check_agreement()
    print(f"backend agreement: max |compiled - numpy| = {worst:.2e}")
    print()
    print(f"{'kernel':<34}{'numpy':>10}{'compiled':>10}{'speedup':>9}")
    cases = [
        ("natural_m 11 knots x 1000", bench_natural_m, (11, 1000)),
        ("natural_m 31 knots x 1000", bench_natural_m, (31, 1000)),
        ("natural_m 201 knots x 200", bench_natural_m, (201, 200)),
        ("eval_cubic 11 knots, 100k pts", bench_eval_cubic, (11, 100_000)),
        ("eval_cubic 31 knots, 100k pts", bench_eval_cubic, (31, 100_000)),
        ("eval_cubic 201 knots, 1M pts", bench_eval_cubic, (201, 1_000_000)),
    ]
    for label, fn, args in cases:
        slow = fn(_fallback, *args)
        fast = fn(_core, *args)
        print(f"{label:<34}{slow * 1e3:>8.2f}ms{fast * 1e3:>8.2f}ms"
              f"{slow / fast:>8.1f}x")


if __name__ == "__main__":
    main()
