"""The strong-coupling double well ``V = g^2 (x^2 - 1)^2 / 2`` on ``x >= 0``.

The reference state ``phi = exp(-(g/3)(x-1)^2(x+2)) / (1+x)`` solves the
same equation with ``V + 1/(1+x)^2`` exactly at energy ``g``, so the
perturbation is ``omega = -1/(1+x)^2``.  This module provides the finite-g
energies (first and second iterate, variational) and their ``1/g`` series.

Series route: with ``u = x - 1`` the weight ``exp(-2S)`` becomes
``exp(-2g (u^2 + u^3/3))``.  Setting ``x' = u^2 + u^3/3`` turns every
integral into a Laplace transform of a Puiseux series in ``x'^(1/2)``, the
two signs of the square root covering ``u > 0`` and ``-1 < u < 0``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .exceptions import BracketError, InputError, IntegrationError
from .fields import ScalarField1D
from .quadrature import DEFAULT_SPEC, integrate
from .series import (
    Coefficient,
    EnergyExpansion,
    PuiseuxSeries,
    appendix_forward,
    branch_density,
    gaussian_moments,
    lagrange_invert,
    oriented_pair,
    triple_series,
)
from .wda import PerturbationProblem, ReferenceState, run_iterations

__all__ = [
    "DoubleWellConfig",
    "TrialFunction",
    "omega",
    "potential",
    "effective_potential",
    "PhiTildeDiagnostic",
    "phi_tilde",
    "phi_tilde_diagnostic",
    "e1_numeric",
    "e2_numeric",
    "e1_series",
    "e2_series",
    "variational_energy",
    "variational_gradient",
    "variational_minimize",
    "variational_series",
]

MAX_SERIES_ORDER = 8


def _check_g(g):
    if not g > 0 or not math.isfinite(g):
        raise InputError(f"g must be positive and finite, got {g}")


@dataclass(frozen=True)
class DoubleWellConfig:
    g: float
    series_order: int = 4
    n_grid: int = 4000
    quad: object = DEFAULT_SPEC

    def __post_init__(self):
        _check_g(self.g)
        if not 1 <= self.series_order <= MAX_SERIES_ORDER:
            raise InputError(f"series_order must be in [1, {MAX_SERIES_ORDER}]")
        if self.n_grid < 100:
            raise InputError("n_grid must be >= 100")


def omega(x):
    """Perturbing potential ``-1/(1+x)^2``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= -1):
        raise InputError("omega is defined for x > -1 only")
    return -1.0 / (1.0 + x) ** 2


def potential(x, g):
    x = np.asarray(x, dtype=float)
    return 0.5 * g * g * (x * x - 1.0) ** 2


def effective_potential(x, g):
    """Potential solved exactly by the trial function at energy ``g``."""
    return potential(x, g) - omega(x)


@dataclass(frozen=True)
class TrialFunction:
    """``phi = r exp(-S)`` with ``r = 1/(1+x)`` and ``S = (g/3)(x-1)^2(x+2)``."""

    g: float

    def __post_init__(self):
        _check_g(self.g)

    def r(self, x):
        return 1.0 / (1.0 + np.asarray(x, dtype=float))

    def dr(self, x):
        return -1.0 / (1.0 + np.asarray(x, dtype=float)) ** 2

    def S(self, x):
        x = np.asarray(x, dtype=float)
        return self.g / 3.0 * (x - 1.0) ** 2 * (x + 2.0)

    def dS(self, x):
        x = np.asarray(x, dtype=float)
        return self.g * (x * x - 1.0)

    @property
    def field(self):
        return ScalarField1D.from_split(self.r, self.S, self.dr, self.dS)

    def __call__(self, x):
        return self.field(x)

    def log_derivative(self, x):
        return -self.r(x) - self.dS(x)

    def residual(self, x):
        """``(-phi''/2 + V_eff phi - g phi) / phi`` from the closed-form ``phi''/phi``."""
        x = np.asarray(x, dtype=float)
        L = self.log_derivative(x)
        # (log phi)'' = 1/(1+x)^2 - S''
        d2 = self.r(x) ** 2 - 2.0 * self.g * x + L * L
        return -0.5 * d2 + effective_potential(x, self.g) - self.g

    def reference(self):
        g = self.g
        return ReferenceState(
            r=self.r,
            S=self.S,
            dS=self.dS,
            energy=g,
            potential=lambda x: effective_potential(x, g),
            domain="half-line",
            window=(0.0, 1.0 + 40.0 / math.sqrt(g) + 10.0),
        )


# -- boundary-condition diagnostic ------------------------------------------------

@dataclass(frozen=True)
class PhiTildeDiagnostic:
    """Neumann defect and size of the modification making ``phi'(0) = 0``.

    ``phi_deviation`` is ``||phi~ - phi||^2 / ||phi||^2`` on ``[0, inf)``,
    the quantity that is ``O(exp(-4g/3))``; the pointwise ratio
    ``max|phi~ - phi| / max phi`` is ``O(exp(-2g/3))`` because the added
    term peaks at the origin, and is reported as ``max_deviation``.
    The ``*_printed`` fields refer to the variant without the ``1/(1+x)``
    factor on ``0 < x < 1``.
    """

    neumann_residual: float
    phi_deviation: float
    max_deviation: float
    neumann_residual_printed: float
    phi_deviation_printed: float


def phi_tilde(g, variant="corrected"):
    """Modified trial function with a vanishing slope at the origin.

    ``variant="printed"`` drops the ``1/(1+x)`` factor of the added term on
    ``0 < x < 1``, which leaves a slope defect ``(g-1)/(g+1) exp(-2g/3)``.
    """
    if variant not in ("corrected", "printed"):
        raise InputError("variant must be 'corrected' or 'printed'")
    tf = TrialFunction(g)
    amp = (g - 1.0) / (g + 1.0) * math.exp(-4.0 * g / 3.0)

    def added(x):
        inner = np.exp(tf.S(x)) * (tf.r(x) if variant == "corrected" else 1.0)
        return np.where(x < 1.0, amp * inner, amp * tf(x))

    def d_added(x):
        # derivative of the left piece; the right piece is amp * phi'
        if variant == "corrected":
            inner = (tf.dr(x) + tf.r(x) * tf.dS(x)) * np.exp(tf.S(x))
        else:
            inner = tf.dS(x) * np.exp(tf.S(x))
        return np.where(x < 1.0, amp * inner, amp * tf.field.derivative(x))

    def func(x):
        x = np.asarray(x, dtype=float)
        return tf(x) + added(x)

    def deriv(x):
        x = np.asarray(x, dtype=float)
        return tf.field.derivative(x) + d_added(x)

    return ScalarField1D(func=func, deriv=deriv), added


def phi_tilde_diagnostic(g):
    """Slope at the origin and size of ``phi~ - phi`` for both variants."""
    if not g > 1:
        raise InputError("phi_tilde_diagnostic needs g > 1")
    tf = TrialFunction(g)
    zero = np.array([0.0])
    phi0 = float(tf(zero)[0])
    norm = integrate(lambda x: tf(x) ** 2, 0.0, math.inf, points=[1.0])
    out = {}
    for variant in ("corrected", "printed"):
        pt, added = phi_tilde(g, variant)
        slope = abs(float(pt.derivative(zero)[0]))
        dev = integrate(lambda x: added(x) ** 2, 0.0, math.inf, points=[1.0]) / norm
        xs = np.linspace(0.0, 3.0, 6001)
        peak = float(np.max(np.abs(added(xs)))) / float(np.max(tf(xs)))
        out[variant] = (slope / phi0, dev, peak)
    return PhiTildeDiagnostic(
        neumann_residual=out["corrected"][0],
        phi_deviation=out["corrected"][1],
        max_deviation=out["corrected"][2],
        neumann_residual_printed=out["printed"][0],
        phi_deviation_printed=out["printed"][1],
    )


# -- finite-g energies ------------------------------------------------------------

def _weighted(g, h, f=None, spec=DEFAULT_SPEC):
    """``int_0^inf h(x) exp(-2 S_f(x) + 2 S_f(1))``; the reference factor is 1 since S(1)=0."""
    f = g if f is None else f
    tf = TrialFunction(f)
    return integrate(h, 0.0, math.inf, spec, points=[1.0],
                     exponent=lambda x: 2.0 * tf.S(x), ref=1.0)


def e1_numeric(g, spec=DEFAULT_SPEC):
    """First-order shift: Rayleigh quotient of ``omega`` in the trial state."""
    _check_g(g)
    num = _weighted(g, lambda x: -1.0 / (1.0 + x) ** 4, spec=spec)
    den = _weighted(g, lambda x: 1.0 / (1.0 + x) ** 2, spec=spec)
    return num / den


def e2_numeric(g, closure="orthogonality", n=4000, k_max=2):
    """Energy shifts ``[e_1, ..., e_kmax]`` of the iterative engine (anchor 1)."""
    _check_g(g)
    ref = TrialFunction(g).reference()
    states = run_iterations(ref, PerturbationProblem(omega, anchor=1.0, closure=closure), k_max, n=n)
    return [s.e for s in states]


def variational_energy(f, g, spec=DEFAULT_SPEC):
    """Energy expectation in the trial state with ``g`` replaced by ``f``."""
    _check_g(g)
    if not f > 0:
        raise InputError("f must be positive")

    def num(x):
        return f / (1.0 + x) ** 2 - 1.0 / (1.0 + x) ** 4 + 0.5 * (g * g - f * f) * (x - 1.0) ** 2

    return _weighted(g, num, f, spec) / _weighted(g, lambda x: 1.0 / (1.0 + x) ** 2, f, spec)


def variational_gradient(f, g, spec=DEFAULT_SPEC):
    """``dE/df`` by differentiating under the integral sign."""
    E = variational_energy(f, g, spec)

    def sigma(x):
        return 2.0 / 3.0 * (x - 1.0) ** 2 * (x + 2.0)

    def integrand(x):
        inv2 = 1.0 / (1.0 + x) ** 2
        num = f * inv2 - inv2 * inv2 + 0.5 * (g * g - f * f) * (x - 1.0) ** 2
        dnum = inv2 - f * (x - 1.0) ** 2
        return dnum - (num - E * inv2) * sigma(x)

    return _weighted(g, integrand, f, spec) / _weighted(g, lambda x: 1.0 / (1.0 + x) ** 2, f, spec)


def variational_minimize(g, spec=DEFAULT_SPEC, max_expand=30):
    """Minimize :func:`variational_energy` over ``f``.

    Brackets a sign change of :func:`variational_gradient` around ``g`` and
    polishes it with Brent's method to ``1e-12 g``.

    Returns
    -------
    (f_star, E_star)
    """
    _check_g(g)
    if g < 1:
        raise InputError("variational_minimize needs g >= 1")
    width = 0.05 * g
    lo, hi = g - width, g + width
    glo, ghi = variational_gradient(lo, g, spec), variational_gradient(hi, g, spec)
    for _ in range(max_expand):
        if glo < 0 < ghi:
            break
        if glo >= 0:
            lo = max(lo - width, 0.5 * lo)
            glo = variational_gradient(lo, g, spec)
        if ghi <= 0:
            hi += width
            ghi = variational_gradient(hi, g, spec)
        width *= 2
    else:
        raise BracketError(f"no minimum of the variational energy bracketed near f = {g}")
    f_star = brentq(variational_gradient, lo, hi, args=(g, spec), xtol=1e-12 * g, rtol=1e-14)
    return f_star, variational_energy(f_star, g, spec)


# -- 1/g series -------------------------------------------------------------------

_P = PuiseuxSeries.polynomial


@lru_cache(maxsize=None)
def _u_series(order):
    return lagrange_invert(appendix_forward(), "plus", Fraction(order + 2, 2))


@lru_cache(maxsize=None)
def _density(name, order):
    """``h(u) du/dx`` on the ``u > 0`` branch; ``u = x - 1``, ``1 + x = 2 + u``."""
    depth = 2 * order + 8
    h = {
        "phi2": lambda: _P([2, 1]).power(-2, order=depth),          # phi^2 e^{2S}
        "phi2_omega": lambda: -_P([2, 1]).power(-4, order=depth),   # phi^2 omega e^{2S}
        "inv_phi2": lambda: _P([4, 4, 1]),                          # phi^-2 e^{-2S}
        "u2": lambda: _P([0, 0, 1]),
    }[name]()
    return branch_density(h, order, _u_series(order))


def _moment(name, order):
    return gaussian_moments(_density(name, order))


@lru_cache(maxsize=None)
def _e1_t(order):
    """First-order shift as an exact series in ``t = 1/g`` known to ``t^order``."""
    dens_order = 2 * order
    return (_moment("phi2_omega", dens_order) / _moment("phi2", dens_order)).truncate(2 * order)


def e1_series(order=4):
    """``e_1 = sum c_k g^-k`` with exact rational coefficients.

    Raises
    ------
    InputError
        If ``order`` exceeds the supported depth.
    """
    _check_order(order)
    return EnergyExpansion.from_series(_e1_t(order), order)


def _check_order(order):
    if not 1 <= order <= MAX_SERIES_ORDER:
        raise InputError(f"order must be in [1, {MAX_SERIES_ORDER}]")


@lru_cache(maxsize=None)
def _e2_correction(order, cutoff):
    """``e_2 - e_1`` as a float series in ``t = 1/g``.

    With ``D = phi^2 (omega - e_1)`` and ``Q[A, B]`` the nested integral
    ``int A e^{-2gx} int_1^x phi^-2 int_y^inf B``, the second shift is
    ``e_1 + 2 (e_1 Q[phi^2, D] - Q[phi^2 omega, D]) / <phi^2>``.  The anchor
    at ``x = 1`` is the origin of the substituted variable on both branches.
    """
    dens = 2 * order
    W = oriented_pair(_density("phi2_omega", dens))
    ONE = oriented_pair(_density("phi2", dens))
    G = oriented_pair(_density("inv_phi2", dens))
    e1 = _e1_t(order + 1)
    q_ww = triple_series(W, G, W, cutoff)
    q_w1 = triple_series(W, G, ONE, cutoff)
    q_1w = triple_series(ONE, G, W, cutoff)
    q_11 = triple_series(ONE, G, ONE, cutoff)
    q_wd = q_ww - e1 * q_w1
    q_1d = q_1w - e1 * q_11
    # <phi^2> = sqrt(pi/2) g^(-1/2) R(1/g)
    norm = _moment("phi2", dens)
    return ((e1 * q_1d - q_wd) * (2.0 / math.sqrt(0.5 * math.pi))).shift(-1) / norm


def e2_series(order=4, cutoff=None):
    """Second-order shift as a ``1/g`` series.

    ``cutoff`` bounds the Gamma argument ``(m+n+p+6)/2`` of the standard
    triples kept; the default ``order - 1/2`` is the smallest value that
    fixes ``order`` coefficients.  The correction to ``e_1`` starts at
    ``g^-2``, so the first two coefficients are the exact ``e_1`` rationals.

    Raises
    ------
    IntegrationError
        If ``cutoff`` is too small for the requested order.
    """
    _check_order(order)
    cutoff = Fraction(order) - Fraction(1, 2) if cutoff is None else Fraction(cutoff)
    delta = _e2_correction(order, cutoff)
    if delta.order <= 2 * (order - 1):
        raise IntegrationError(
            f"cutoff {cutoff} leaves e2 undetermined at g^-{Fraction(delta.order, 2)}"
        )
    e1 = e1_series(order)
    coeffs = []
    for k in range(order):
        d = delta.index(2 * k)
        if k < 2:
            # the correction is O(g^-2); quadrature round-off is all that is left here
            if abs(d) > 1e-12:
                raise IntegrationError(f"spurious g^-{k} term {d} in the second-order correction")
            coeffs.append(e1.coefficients[k])
        else:
            coeffs.append(Coefficient(k, float(e1[k]) + float(d), False))
    return EnergyExpansion(tuple(coeffs))


@lru_cache(maxsize=None)
def _variational(order):
    """Exact ``f(g)`` and ``E(g)`` series from order-by-order stationarity."""
    depth = order + 3
    e1 = _e1_t(depth)
    de1 = e1.derivative()
    M = (_moment("u2", 2 * depth) / _moment("phi2", 2 * depth)).truncate(2 * depth)
    dM = M.derivative()
    T_inv = PuiseuxSeries({-2: 1})
    g2 = PuiseuxSeries({-4: 1})

    def pieces(f):
        t = f.reciprocal()
        return t, e1.compose(t), de1.compose(t), M.compose(t), dM.compose(t)

    def stationarity(f):
        t, _, de, m, dm = pieces(f)
        # dE/df with E = f + e1(1/f) + (g^2 - f^2) M(1/f) / 2
        return 1 - t * t * de - f * m - (g2 - f * f) * t * t * dm * Fraction(1, 2)

    coeffs = []
    for k in range(order + 1):
        trial = {-2: 1, **{2 * j: c for j, c in enumerate(coeffs)}}
        r0 = stationarity(PuiseuxSeries({**trial, 2 * k: 0}, 2 * k + 2))
        r1 = stationarity(PuiseuxSeries({**trial, 2 * k: 1}, 2 * k + 2))
        j = next(i for i in range(min(r0.order, r1.order)) if r0.index(i) != r1.index(i))
        if any(r0.index(i) != 0 for i in range(-4, j)):
            raise IntegrationError("stationarity residual not cancelled at lower order")
        coeffs.append(-r0.index(j) / (r1.index(j) - r0.index(j)))
    f = PuiseuxSeries({-2: 1, **{2 * j: c for j, c in enumerate(coeffs)}}, 2 * len(coeffs))
    t, e, _, m, _ = pieces(f)
    E = f + e + (g2 - f * f) * m * Fraction(1, 2) - T_inv
    return f - T_inv, E


def variational_series(order=4):
    """``(f_expansion, E_expansion)``, each with ``order`` exact coefficients.

    ``f = g + sum a_k g^-k`` and ``E = g + sum c_k g^-k``.
    """
    _check_order(order)
    f, E = _variational(order)
    return EnergyExpansion.from_series(f, order), EnergyExpansion.from_series(E, order)
