"""Time the numba loop kernels against their pure-numpy counterparts.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is checked for
agreement before timing; the first compiled call is excluded.
"""

import timeit

import numpy as np

from wronskian import kernels
from wronskian._accel import njit, numba

REPEATS = 5


def _cases():
    rng = np.random.default_rng(0)
    n = 4000
    diag = 2.0 + rng.random(n)
    off = -0.5 * np.ones(n - 1)
    shifts = np.linspace(0.0, 3.0, 32)
    rhs = rng.random(n)
    log_a = -0.01 * rng.random(n - 1)
    b = rng.random(n - 1)
    xs = np.linspace(0.0, 8.0, 2 * 8000 + 1)
    v_half = 0.5 * xs * xs
    energies = np.linspace(0.4, 0.6, 32)
    return {
        "sturm_counts": ((diag, off * off, shifts), kernels.sturm_counts_loop, kernels.sturm_counts_numpy),
        "tridiag_solve": ((off, diag, off, rhs), kernels.tridiag_solve_loop, kernels.tridiag_solve_numpy),
        "backward_recurrence": ((log_a, b, 0.0), kernels.backward_recurrence_loop,
                                kernels.backward_recurrence_numpy),
        "rk4_shoot": ((v_half, 8.0 / 8000, energies), kernels.rk4_shoot_loop, kernels.rk4_shoot_numpy),
    }


def _best(fn, args, number):
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=REPEATS)) / number


def main():
    if numba is None:
        print("numba not installed; only the numpy kernels can be timed")
    print(f"{'kernel':<22}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, (args, loop, vec) in _cases().items():
        compiled = njit(loop)
        a, b = compiled(*args), vec(*args)  # warm-up and agreement check
        for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
            np.testing.assert_allclose(x, y, rtol=1e-8, atol=1e-12)
        number = 3 if name == "rk4_shoot" else 10
        t_jit = _best(compiled, args, number)
        t_np = _best(vec, args, number)
        print(f"{name:<22}{1e3 * t_jit:>12.3f}{1e3 * t_np:>12.3f}{t_np / t_jit:>10.1f}")


if __name__ == "__main__":
    main()
