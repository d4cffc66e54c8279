"""Optional numba acceleration.

Set ``WRONSKIAN_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. to
debug or to compare timings (see ``benchmarks/bench_kernels.py``).
"""

import os

_FLAG = os.environ.get("WRONSKIAN_DISABLE_NUMBA", "").strip().lower()

try:  # pragma: no cover - depends on environment
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_ENABLED = numba is not None and _FLAG not in {"1", "true", "yes", "on"}


def njit(fn):
    """Compile ``fn`` in nopython mode, or return the argument unchanged when disabled."""
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def select(jit_impl, numpy_impl):
    """Pick the compiled loop kernel when numba is active, otherwise the numpy one."""
    if NUMBA_ENABLED:
        return njit(jit_impl)
    return numpy_impl
