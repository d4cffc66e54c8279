"""Hot inner loops.

Each kernel exists twice: a scalar-loop version written for numba and a
numpy version that vectorizes over the batch dimension instead.  The public
names resolve to the compiled loops unless numba is missing or disabled via
``WRONSKIAN_DISABLE_NUMBA``; both variants stay importable for benchmarking.
"""

import numpy as np
from scipy.linalg import solve_banded

from ._accel import NUMBA_ENABLED, select

__all__ = [
    "NUMBA_ENABLED",
    "sturm_counts",
    "tridiag_solve",
    "backward_recurrence",
    "rk4_shoot",
]

_TINY = 1e-300


# -- Sturm sequence counts ---------------------------------------------------

def sturm_counts_loop(diag, offdiag_sq, shifts):
    n = diag.shape[0]
    m = shifts.shape[0]
    counts = np.zeros(m, dtype=np.int64)
    for k in range(m):
        lam = shifts[k]
        q = diag[0] - lam
        c = 0
        if q < 0.0:
            c += 1
        for i in range(1, n):
            if q == 0.0:
                q = _TINY
            q = diag[i] - lam - offdiag_sq[i - 1] / q
            if q < 0.0:
                c += 1
        counts[k] = c
    return counts


def sturm_counts_numpy(diag, offdiag_sq, shifts):
    q = diag[0] - shifts
    counts = (q < 0.0).astype(np.int64)
    for i in range(1, diag.shape[0]):
        q = np.where(q == 0.0, _TINY, q)
        q = diag[i] - shifts - offdiag_sq[i - 1] / q
        counts += q < 0.0
    return counts


# -- tridiagonal solve ---------------------------------------------------------

def tridiag_solve_loop(sub, diag, sup, rhs):
    # Thomas algorithm; callers shift away from exact singularity.
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    beta = diag[0]
    if beta == 0.0:
        beta = _TINY
    cp[0] = sup[0] / beta if n > 1 else 0.0
    dp[0] = rhs[0] / beta
    for i in range(1, n):
        beta = diag[i] - sub[i - 1] * cp[i - 1]
        if beta == 0.0:
            beta = _TINY
        if i < n - 1:
            cp[i] = sup[i] / beta
        dp[i] = (rhs[i] - sub[i - 1] * dp[i - 1]) / beta
    x = np.empty(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def tridiag_solve_numpy(sub, diag, sup, rhs):
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1] = diag
    ab[2, :-1] = sub
    return solve_banded((1, 1), ab, rhs, check_finite=False)


# -- first-order linear recurrence --------------------------------------------

def backward_recurrence_loop(log_a, b, init):
    """y[n-1] = init; y[i] = exp(log_a[i]) * y[i+1] + b[i]."""
    n = b.shape[0] + 1
    y = np.empty(n)
    y[n - 1] = init
    for i in range(n - 2, -1, -1):
        y[i] = np.exp(log_a[i]) * y[i + 1] + b[i]
    return y


def backward_recurrence_numpy(log_a, b, init, span=600.0):
    # Closed form y_i = sum_j exp(L_i - L_j) b_j, evaluated blockwise so that
    # no exponent leaves [-span, span].
    n = b.shape[0] + 1
    y = np.empty(n)
    y[n - 1] = init
    end = n - 1
    while end > 0:
        run = np.abs(np.cumsum(log_a[:end][::-1]))
        over = np.nonzero(run > span)[0]
        length = max(1, int(over[0]) if over.size else end)
        start = end - length
        # L[k] = sum_{i=k}^{end-1} log_a[i], with L[end] = 0
        L = np.zeros(length + 1)
        L[:length] = np.cumsum(log_a[start:end][::-1])[::-1]
        terms = np.empty(length + 1)
        terms[:length] = np.exp(-L[:length]) * b[start:end]
        terms[length] = y[end]
        acc = np.cumsum(terms[::-1])[::-1]
        y[start:end] = np.exp(L[:length]) * acc[:length]
        end = start
    return y


# -- outward RK4 integration of psi'' = 2 (V - E) psi --------------------------

def rk4_shoot_loop(v_half, h, energies):
    nsteps = (v_half.shape[0] - 1) // 2
    m = energies.shape[0]
    psi_out = np.empty(m)
    dpsi_out = np.empty(m)
    for k in range(m):
        e = energies[k]
        psi = 1.0
        dpsi = 0.0
        for s in range(nsteps):
            v0 = 2.0 * (v_half[2 * s] - e)
            vm = 2.0 * (v_half[2 * s + 1] - e)
            v1 = 2.0 * (v_half[2 * s + 2] - e)
            k1p = dpsi
            k1d = v0 * psi
            k2p = dpsi + 0.5 * h * k1d
            k2d = vm * (psi + 0.5 * h * k1p)
            k3p = dpsi + 0.5 * h * k2d
            k3d = vm * (psi + 0.5 * h * k2p)
            k4p = dpsi + h * k3d
            k4d = v1 * (psi + h * k3p)
            psi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            dpsi += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
            mag = abs(psi) + abs(dpsi)
            if mag > 1e100:
                psi /= mag
                dpsi /= mag
        psi_out[k] = psi
        dpsi_out[k] = dpsi
    return psi_out, dpsi_out


def rk4_shoot_numpy(v_half, h, energies):
    nsteps = (v_half.shape[0] - 1) // 2
    psi = np.ones_like(energies)
    dpsi = np.zeros_like(energies)
    for s in range(nsteps):
        v0 = 2.0 * (v_half[2 * s] - energies)
        vm = 2.0 * (v_half[2 * s + 1] - energies)
        v1 = 2.0 * (v_half[2 * s + 2] - energies)
        k1p = dpsi
        k1d = v0 * psi
        k2p = dpsi + 0.5 * h * k1d
        k2d = vm * (psi + 0.5 * h * k1p)
        k3p = dpsi + 0.5 * h * k2d
        k3d = vm * (psi + 0.5 * h * k2p)
        k4p = dpsi + h * k3d
        k4d = v1 * (psi + h * k3p)
        psi = psi + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        dpsi = dpsi + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        mag = np.abs(psi) + np.abs(dpsi)
        big = mag > 1e100
        if big.any():
            psi = np.where(big, psi / mag, psi)
            dpsi = np.where(big, dpsi / mag, dpsi)
    return psi, dpsi


sturm_counts = select(sturm_counts_loop, sturm_counts_numpy)
tridiag_solve = select(tridiag_solve_loop, tridiag_solve_numpy)
backward_recurrence = select(backward_recurrence_loop, backward_recurrence_numpy)
rk4_shoot = select(rk4_shoot_loop, rk4_shoot_numpy)
