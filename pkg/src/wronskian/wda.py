"""Iterative perturbation engine built on the Wronskian Green's function.

Given an exactly solvable nodeless state ``phi = r * exp(-S)`` with energy
``E`` and a perturbation ``omega``, each iteration solves

    psi_{k+1} = c * phi - 2 phi int_anchor^x phi^-2(y) T(y) dy,
    T(y)      = int_y^inf phi (omega - e_{k+1}) psi_k,

with ``e_{k+1} = <phi, omega psi_k> / <phi, psi_k>`` (which makes ``T``
vanish at both ends).  Everything is carried as ``psi / phi`` on a uniform
grid; the combination ``exp(2 S(y)) T(y)`` is accumulated by a first-order
recurrence whose multipliers ``exp(-2 (S(z) - S(y)))`` never exceed one.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import DegenerateError, InputError, NumericRangeError
from .fields import GridFunction, ScalarField1D, as_field, cumulative_samples, panel_weights
from .fields import _value_at
from .kernels import backward_recurrence
from .quadrature import integrate

__all__ = [
    "ReferenceState",
    "PerturbationProblem",
    "IterationState",
    "energy_shift",
    "closure_constant",
    "initial_state",
    "iterate_once",
    "run_iterations",
    "closure_gap",
]

CLOSURES = ("orthogonality", "flz")
DOMAINS = ("half-line", "whole-line")


@dataclass(frozen=True)
class ReferenceState:
    """Nodeless reference solution ``phi = r exp(-S)`` of ``-phi''/2 + V phi = E phi``.

    Parameters
    ----------
    r, S, dS : callable
        Prefactor, exponent and ``S'``.  ``r`` must be positive on the domain.
    energy : float
        Eigenvalue ``E`` of the reference problem.
    potential : callable
        The potential ``V`` the reference state solves exactly.
    domain : {"half-line", "whole-line"}
        Half-line problems live on ``[0, inf)`` with ``phi'(0) = 0``.
    window : (float, float)
        Search range used to locate the numerical support of ``phi``.
    """

    r: Callable
    S: Callable
    dS: Callable
    energy: float
    potential: Callable
    domain: str = "half-line"
    window: tuple = (0.0, 50.0)

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise InputError(f"domain must be one of {DOMAINS}")
        lo, hi = self.window
        if self.domain == "half-line" and lo != 0.0:
            raise InputError("half-line window must start at 0")
        if not lo < hi:
            raise InputError("window must satisfy lo < hi")

    @property
    def phi(self):
        return ScalarField1D.from_split(self.r, self.S)

    def log_phi(self, x):
        x = np.asarray(x, dtype=float)
        rv = self.r(x)
        if np.any(rv <= 0):
            raise InputError("reference prefactor must be positive (nodeless state)")
        return np.log(rv) - self.S(x)

    def support(self, threshold=1e-30, probes=20001):
        """Interval outside which ``phi^2 < threshold * max phi^2``."""
        lo, hi = self.window
        x = np.linspace(lo, hi, probes)
        with np.errstate(all="ignore"):
            lp = 2.0 * self.log_phi(x)
        lp = np.where(np.isfinite(lp), lp, -np.inf)
        keep = np.nonzero(lp - lp.max() >= math.log(threshold))[0]
        i0 = 0 if self.domain == "half-line" else max(int(keep[0]) - 1, 0)
        i1 = min(int(keep[-1]) + 1, probes - 1)
        return float(x[i0]), float(x[i1])

    def grid(self, n=4000, threshold=1e-30):
        a, b = self.support(threshold)
        return np.linspace(a, b, n)

    def residual(self, x, step=1e-4):
        """``-phi''/2 + (V - E) phi`` divided by ``phi`` (fourth-order differences)."""
        x = np.asarray(x, dtype=float)
        ref = self.log_phi(x)
        h = step * (1.0 + np.abs(x))
        vals = [np.exp(self.log_phi(x + k * h) - ref) for k in (-2, -1, 0, 1, 2)]
        d2 = (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h * h)
        return -0.5 * d2 + (self.potential(x) - self.energy)


@dataclass(frozen=True)
class PerturbationProblem:
    """Perturbation ``omega``, outer-integral anchor and closure rule."""

    omega: Callable
    anchor: float = 0.0
    closure: str = "orthogonality"

    def __post_init__(self):
        if self.closure not in CLOSURES:
            raise InputError(f"closure must be one of {CLOSURES}")
        object.__setattr__(self, "omega", as_field(self.omega))
        if self.closure == "flz":
            far = abs(float(self.omega(np.array([1e6]))[0]))
            if not far < 1e-6:
                raise InputError("flz closure needs omega -> 0 at infinity")


@dataclass(frozen=True, eq=False)
class IterationState:
    """Snapshot ``(psi_k, e_k, k, c_k)``; ``ratio`` holds ``psi_k / phi`` on the grid."""

    psi: GridFunction
    e: float
    k: int
    c: float
    ratio: np.ndarray = field(repr=False)


# -- helpers on a grid -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Frame:
    x: np.ndarray
    r: np.ndarray
    S: np.ndarray
    s_min: float
    phi_hat: np.ndarray  # phi * exp(s_min)

    @classmethod
    def build(cls, ref, x):
        x = np.asarray(x, dtype=float)
        r = np.asarray(ref.r(x), dtype=float)
        if np.any(r <= 0):
            raise InputError("reference prefactor must be positive (nodeless state)")
        S = np.asarray(ref.S(x), dtype=float)
        s_min = float(S.min())
        with np.errstate(over="raise", under="ignore"):
            try:
                phi_hat = r * np.exp(-(S - s_min))
            except FloatingPointError as exc:
                raise NumericRangeError("phi overflows on the grid") from exc
        return cls(x, r, S, s_min, phi_hat)

    def integral(self, values):
        idx, w = panel_weights(self.x)
        return float(np.einsum("ij,ij->", w, np.asarray(values)[idx]))

    def to_psi(self, ratio):
        return GridFunction(self.x, self.phi_hat * ratio, -self.s_min)

    def ratio_of(self, psi):
        if psi.x.shape != self.x.shape or not np.array_equal(psi.x, self.x):
            vals = psi(self.x)
            return vals / (self.phi_hat * math.exp(-self.s_min))
        return psi.values / self.phi_hat * math.exp(psi.log_scale + self.s_min)


def _frame(ref, x):
    return _Frame.build(ref, x)


def energy_shift(phi, psi, omega):
    """``<phi, omega psi> / <phi, psi>`` over the reference state's domain.

    Invariant under ``psi -> lam * psi`` for any ``lam != 0`` (the log scale of
    ``psi`` cancels).

    Raises
    ------
    DegenerateError
        If ``<phi, psi>`` vanishes.
    """
    omega = as_field(omega)
    fr = _frame(phi, psi.x)
    w = fr.phi_hat * psi.values
    den = fr.integral(w)
    scale = np.max(np.abs(w)) * (fr.x[-1] - fr.x[0])
    if den == 0 or abs(den) <= 1e-14 * scale:
        raise DegenerateError("overlap <phi, psi> vanishes")
    return fr.integral(w * omega(fr.x)) / den


def closure_constant(phi, raw_correction, closure, tail=0.0):
    """Constant ``c`` in ``psi = c phi + raw_correction``.

    ``orthogonality``: ``c = 1 + N`` with ``N = -<phi, raw>/<phi, phi>``, so
    that ``<psi, phi> = <phi, phi>``.  ``flz``: ``c = 1 - lim raw/phi`` at the
    right end, where ``tail`` is the part of that limit beyond the grid.
    """
    if closure not in CLOSURES:
        raise InputError(f"closure must be one of {CLOSURES}")
    fr = _frame(phi, raw_correction.x)
    ratio = fr.ratio_of(raw_correction)
    if closure == "orthogonality":
        norm = fr.integral(fr.phi_hat ** 2)
        if not norm > 0:
            raise DegenerateError("<phi, phi> vanishes")
        return 1.0 - fr.integral(fr.phi_hat ** 2 * ratio) / norm
    return 1.0 - (float(ratio[-1]) + tail)


def initial_state(phi, n=4000, grid=None):
    """State ``k = 0``: ``psi = phi``, ``e = 0``, ``c = 1``."""
    x = phi.grid(n) if grid is None else np.asarray(grid, dtype=float)
    fr = _frame(phi, x)
    ratio = np.ones_like(x)
    return IterationState(fr.to_psi(ratio), 0.0, 0, 1.0, ratio)


def _tail_weighted(fr, ref, source):
    """``exp(2 S(y)) int_y^inf r^2 source exp(-2 S)`` on the grid.

    ``source`` is ``(omega - e) psi/phi``; its phi^2-weighted integral over the
    domain must vanish, so the left part is the negated integral from the
    lower end.  Each side runs in the direction where ``S`` increases.
    """
    x, r, S = fr.x, fr.r, fr.S
    n = x.size
    idx, w = panel_weights(x)
    f = r * r * source
    split = int(np.argmin(S))
    out = np.empty(n)

    # right side: y_i = e^{-2(S_{i+1}-S_i)} y_{i+1} + int_{x_i}^{x_{i+1}} f e^{-2(S-S_i)}
    if split < n - 1:
        rows = np.arange(split, n - 1)
        b = np.einsum("ij,ij->i", w[rows], f[idx[rows]] * np.exp(-2.0 * (S[idx[rows]] - S[rows, None])))
        log_a = -2.0 * (S[rows + 1] - S[rows])
        init = f[-1] / (2.0 * float(ref.dS(np.array([x[-1]]))[0]))
        out[split:] = backward_recurrence(log_a, b, init)

    # left side: y_{i+1} = e^{-2(S_i-S_{i+1})} y_i - int_{x_i}^{x_{i+1}} f e^{-2(S-S_{i+1})}
    if split > 0:
        rows = np.arange(0, split)
        b = -np.einsum("ij,ij->i", w[rows], f[idx[rows]] * np.exp(-2.0 * (S[idx[rows]] - S[rows + 1, None])))
        log_a = -2.0 * (S[rows] - S[rows + 1])
        if ref.domain == "half-line":
            init = 0.0
        else:
            init = f[0] / (2.0 * float(ref.dS(np.array([x[0]]))[0]))
        left = backward_recurrence(log_a[::-1].copy(), b[::-1].copy(), init)[::-1]
        out[:split] = left[:split]
    return out


_LAGUERRE = np.polynomial.laguerre.laggauss(40)


def _far_kernel(ref, omega, e, y, step=1e-6):
    """``phi^-2(y) int_y^inf phi^2 (omega - e)`` for ``y`` beyond the grid.

    With ``sigma = S - log r`` the substitution ``z = y + w / (2 sigma'(y))``
    leaves a smooth factor against ``exp(-w)``, integrated by Gauss-Laguerre.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    h = step * (1.0 + np.abs(y))
    sig = ref.dS(y) - (np.log(ref.r(y + h)) - np.log(ref.r(y - h))) / (2.0 * h)
    scale = 1.0 / (2.0 * sig)
    w, wt = _LAGUERRE
    z = y[:, None] + w[None, :] * scale[:, None]
    yy = np.broadcast_to(y[:, None], z.shape)
    expo = -2.0 * (ref.S(z) - ref.S(yy)) + w[None, :]
    f = (ref.r(z) / ref.r(yy)) ** 2 * (omega(z) - e) * np.exp(expo)
    # where S itself is huge the difference S(z) - S(y) cancels; the leading
    # Laplace term is then accurate to O(1 / (y sigma'))
    cancels = np.abs(ref.S(y)) * 1e-16 > 1e-10
    return np.where(cancels, (omega(y) - e) * scale, scale * (f @ wt))


def iterate_once(state, problem, phi, energy=None):
    """Advance ``state`` by one order.

    ``energy`` is ``e_{k+1}``; when omitted it is computed with
    :func:`energy_shift` from ``state.psi``.  Returns the state ``k + 1``.

    Raises
    ------
    NumericRangeError
        If the anchor lies outside the grid or intermediate values overflow.
    """
    x = state.psi.x
    if not x[0] <= problem.anchor <= x[-1]:
        raise NumericRangeError(f"anchor {problem.anchor} lies outside the grid support")
    fr = _frame(phi, x)
    ratio = state.ratio
    omega = problem.omega(x)
    e_next = energy_shift(phi, state.psi, problem.omega) if energy is None else float(energy)

    with np.errstate(over="raise", invalid="raise"):
        try:
            tilde = _tail_weighted(fr, phi, (omega - e_next) * ratio)
            W = tilde / (fr.r * fr.r)
        except FloatingPointError as exc:
            raise NumericRangeError("overflow while forming the Green's-function kernel") from exc

    F = cumulative_samples(x, W)
    raw = -2.0 * (F - _value_at(x, F, problem.anchor))
    tail = 0.0
    if problem.closure == "flz":
        rho_end = float(ratio[-1])
        tail = -2.0 * rho_end * integrate(lambda z: _far_kernel(phi, problem.omega, e_next, z), float(x[-1]))
    c = closure_constant(phi, fr.to_psi(raw), problem.closure, tail=tail)
    new_ratio = c + raw
    return IterationState(fr.to_psi(new_ratio), e_next, state.k + 1, c, new_ratio)


def run_iterations(phi, problem, k_max, n=4000, grid=None):
    """States ``1..k_max`` starting from ``psi_0 = phi``."""
    if k_max < 1:
        raise InputError("k_max must be >= 1")
    state = initial_state(phi, n, grid)
    states = []
    for _ in range(k_max):
        state = iterate_once(state, problem, phi)
        states.append(state)
    return states


def closure_gap(phi, a, b):
    """``||psi_a - psi_b|| / ||phi||`` for two states on the same grid."""
    fr = _frame(phi, a.psi.x)
    diff = fr.integral((fr.phi_hat * (a.ratio - b.ratio)) ** 2)
    return math.sqrt(abs(diff) / fr.integral(fr.phi_hat ** 2))
