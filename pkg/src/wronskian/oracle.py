"""Independent ground-state solver for ``-psi''/2 + V psi = E psi`` on ``[0, x_max]``.

``psi'(0) = 0`` (even parity) and ``psi(x_max) = 0``.  The primary method is a
second-order finite-difference matrix whose lowest eigenvalue is isolated by
Sturm-count multisection; a shooting solver gives an independent check.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import BracketError, InputError, SolverError
from .fields import GridFunction, as_field
from .kernels import rk4_shoot, sturm_counts, tridiag_solve

__all__ = [
    "DiscretizedProblem",
    "EigenResult",
    "fd_ground_state",
    "fd_eigenvalue",
    "convergence_ratio",
    "shoot_ground_state",
    "double_well_problem",
    "harmonic_problem",
    "default_x_max",
]

_SECTIONS = 32


@dataclass(frozen=True)
class DiscretizedProblem:
    """Grid ``x_i = i h`` for ``i < n_points`` with ``h = x_max / n_points``."""

    potential: Callable
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 100:
            raise InputError("n_points must be >= 100")
        if not self.x_max > 0:
            raise InputError("x_max must be positive")
        object.__setattr__(self, "potential", as_field(self.potential))

    @property
    def h(self):
        return self.x_max / self.n_points

    @property
    def x(self):
        return np.arange(self.n_points) * self.h

    def refined(self, factor=2):
        return DiscretizedProblem(self.potential, self.x_max, self.n_points * factor)

    def matrix(self):
        """Symmetric tridiagonal ``(diag, offdiag)``.

        The ghost point ``psi_{-1} = psi_1`` makes the first row non-symmetric;
        rescaling ``psi_0 = sqrt(2) v_0`` restores symmetry.
        """
        h2 = self.h * self.h
        diag = 1.0 / h2 + np.asarray(self.potential(self.x), dtype=float)
        off = np.full(self.n_points - 1, -0.5 / h2)
        off[0] *= math.sqrt(2.0)
        return diag, off


@dataclass(frozen=True, eq=False)
class EigenResult:
    """Lowest eigenvalue on the ``n`` grid, two-grid bound and eigenvector."""

    energy: float
    discretization_bound: float
    wavefunction: GridFunction
    extrapolated: float


def default_x_max(g):
    """Well position plus several Gaussian widths ``g^(-1/2)``, at least 6."""
    return max(6.0, 1.0 + 8.0 / math.sqrt(g) + 3.0)


def double_well_problem(g, n_points=4000, x_max=None):
    if not g > 0:
        raise InputError("g must be positive")
    x_max = default_x_max(g) if x_max is None else x_max
    return DiscretizedProblem(lambda x: 0.5 * g * g * (x * x - 1.0) ** 2, x_max, n_points)


def harmonic_problem(n_points=4000, x_max=12.0):
    return DiscretizedProblem(lambda x: 0.5 * x * x, x_max, n_points)


def _lowest(diag, off, tol=1e-12):
    off_sq = off * off
    radius = np.abs(np.concatenate([[0.0], off])) + np.abs(np.concatenate([off, [0.0]]))
    lo = float(np.min(diag - radius))
    hi = float(np.min(diag + radius))  # some row's disc lies below this
    counts = sturm_counts(diag, off_sq, np.array([lo, hi]))
    if counts[0] != 0 or counts[1] < 1:
        raise SolverError("Sturm counts inconsistent with Gershgorin bounds")
    while hi - lo > tol * max(1.0, abs(hi)):
        shifts = np.linspace(lo, hi, _SECTIONS + 2)[1:-1]
        c = sturm_counts(diag, off_sq, shifts)
        if np.any(np.diff(c) < 0):
            raise SolverError("Sturm counts not monotone (arithmetic breakdown)")
        k = int(np.searchsorted(c, 1))
        new_lo = lo if k == 0 else float(shifts[k - 1])
        new_hi = hi if k == shifts.size else float(shifts[k])
        if new_hi - new_lo >= hi - lo:
            break
        lo, hi = new_lo, new_hi
    return 0.5 * (lo + hi)


def _inverse_iteration(diag, off, lam, sweeps=4):
    n = diag.size
    shift = lam - 1e-10 * max(1.0, abs(lam))
    d = diag - shift
    v = np.ones(n) / math.sqrt(n)
    for _ in range(sweeps):
        v = tridiag_solve(off, d, off, v)
        v /= np.linalg.norm(v)
    return v


def fd_eigenvalue(prob):
    """Lowest eigenvalue of the finite-difference matrix (no eigenvector)."""
    diag, off = prob.matrix()
    return _lowest(diag, off)


def fd_ground_state(prob):
    """Ground state on ``prob``'s grid with a Richardson bound from the doubled grid.

    Raises
    ------
    SolverError
        On inconsistent Sturm counts or a noded eigenvector.
    """
    diag, off = prob.matrix()
    E_n = _lowest(diag, off)
    E_2n = fd_eigenvalue(prob.refined())
    v = _inverse_iteration(diag, off, E_n)
    psi = v.copy()
    psi[0] *= math.sqrt(2.0)
    psi /= math.sqrt(prob.h)  # h * (v_0^2 + sum v_i^2) = 1 on the trapezoid rule
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    significant = np.abs(psi) > 1e-10 * np.max(np.abs(psi))
    if np.any(psi[significant] < 0):
        raise SolverError("ground-state eigenvector changes sign")
    bound = 4.0 / 3.0 * abs(E_n - E_2n)
    return EigenResult(
        energy=E_n,
        discretization_bound=bound,
        wavefunction=GridFunction(prob.x, psi),
        extrapolated=E_2n + (E_2n - E_n) / 3.0,
    )


def convergence_ratio(prob):
    """``(E_n - E_2n) / (E_2n - E_4n)``; about 4 for a second-order scheme."""
    e = [fd_eigenvalue(prob.refined(k)) if k > 1 else fd_eigenvalue(prob) for k in (1, 2, 4)]
    return (e[0] - e[1]) / (e[1] - e[2])


def _mismatch(potential, x_max, steps, energies):
    h = x_max / steps
    xs = np.linspace(0.0, x_max, 2 * steps + 1)
    v = np.asarray(potential(xs), dtype=float)
    psi, dpsi = rk4_shoot(v, h, np.asarray(energies, dtype=float))
    end = np.array([x_max, x_max * (1 + 1e-7)])
    v_end, v_next = potential(end)
    dv = (v_next - v_end) / (x_max * 1e-7)
    gap = 2.0 * (v_end - energies)
    if np.any(gap <= 0):
        raise InputError("x_max is not in the classically forbidden region")
    kappa = -np.sqrt(gap) - dv / (4.0 * (v_end - energies))
    return (dpsi - kappa * psi) / (np.abs(psi) + np.abs(dpsi))


def shoot_ground_state(potential, E_bracket, x_max, steps=8000, tol=1e-12):
    """Even ground state by outward RK4 integration and multisection.

    The mismatch is ``psi' - kappa psi`` at ``x_max``, with ``kappa`` the
    log-derivative of the decaying WKB solution there.

    Raises
    ------
    BracketError
        If the mismatch has the same sign at both ends of ``E_bracket``.
    """
    potential = as_field(potential)
    lo, hi = map(float, E_bracket)
    if not lo < hi:
        raise InputError("E_bracket must satisfy lo < hi")
    m = _mismatch(potential, x_max, steps, np.array([lo, hi]))
    if np.sign(m[0]) == np.sign(m[1]):
        raise BracketError(f"no sign change of the shooting mismatch on [{lo}, {hi}]")
    s_lo = np.sign(m[0])
    while hi - lo > tol * max(1.0, abs(hi)):
        shifts = np.linspace(lo, hi, _SECTIONS + 2)[1:-1]
        ms = _mismatch(potential, x_max, steps, shifts)
        flip = np.nonzero(np.sign(ms) != s_lo)[0]
        k = int(flip[0]) if flip.size else shifts.size
        new_lo = lo if k == 0 else float(shifts[k - 1])
        new_hi = hi if k == shifts.size else float(shifts[k])
        if new_hi - new_lo >= hi - lo:
            break
        lo, hi = new_lo, new_hi
    return 0.5 * (lo + hi)
