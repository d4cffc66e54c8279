"""Exact truncated series in half-integer powers.

The appendix machinery lives here:

* :class:`PuiseuxSeries` -- immutable series ``sum_k c_k y^k`` with
  ``y = x**(1/2)`` and an explicit truncation order; coefficients are
  :class:`fractions.Fraction` (floats are tolerated where a quadrature value
  enters).
* :func:`lagrange_invert` -- reversion of ``x = f(u)`` with ``f(u) ~ a u^2``.
* :func:`appendix_substitution` -- the expansions of ``1/(u+2)^2``,
  ``1/(u+2)^4`` and ``du/dx`` under ``x = u^2 + u^3/3``.
* :func:`standard_triple_value` / :func:`triple_series` -- the nested
  ``exp(-2gx) exp(+2gy) exp(-2gz)`` integrals reduced to Gamma factors times
  unit-square integrals.

The same class doubles as a series in ``t = 1/g`` (then ``y = g**(-1/2)``),
which is how energy expansions are manipulated.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from numbers import Number
from typing import Tuple

import numpy as np

from .exceptions import DegenerateError, InputError, IntegrationError

__all__ = [
    "PuiseuxSeries",
    "lagrange_invert",
    "appendix_substitution",
    "appendix_forward",
    "branch_density",
    "oriented_pair",
    "gaussian_moments",
    "StandardTriple",
    "standard_triple_value",
    "reduced_triple",
    "triple_series",
    "Coefficient",
    "EnergyExpansion",
]

INF = math.inf


def _frac(c):
    if isinstance(c, (Fraction, int)):
        return Fraction(c)
    return c


def _is_zero(c):
    return c == 0


class PuiseuxSeries:
    """Truncated series ``sum c_k y^k + O(y^order)`` with ``y = x^(1/2)``.

    Internally indices ``k`` are integers (the power of ``x`` is ``k/2``);
    ``order`` is an exclusive bound on known indices and may be ``math.inf``
    for exact (polynomial) series.
    """

    __slots__ = ("_c", "_order")

    def __init__(self, coeffs=None, order=INF):
        if order != INF:
            order = int(order)
        data = {}
        for k, c in (coeffs or {}).items():
            k = int(k)
            c = _frac(c)
            if _is_zero(c):
                continue
            if k >= order:
                continue
            data[k] = c
        self._c = dict(sorted(data.items()))
        self._order = order

    # -- construction --------------------------------------------------------
    @classmethod
    def from_powers(cls, coeffs, truncation_order=INF):
        """Build from ``{power: coefficient}`` with half-integer powers."""
        data = {}
        for p, c in coeffs.items():
            k = Fraction(p) * 2
            if k.denominator != 1:
                raise InputError(f"power {p} is not a half-integer")
            data[int(k)] = c
        order = INF if truncation_order == INF else Fraction(truncation_order) * 2
        if order != INF and order.denominator != 1:
            raise InputError("truncation order must be a half-integer")
        return cls(data, order)

    @classmethod
    def polynomial(cls, coeffs, order=INF):
        """Integer-power series ``sum coeffs[j] u^j`` (in the variable ``u = y^2``)."""
        return cls({2 * j: c for j, c in enumerate(coeffs)}, order if order == INF else 2 * order)

    @classmethod
    def constant(cls, c, order=INF):
        return cls({0: c}, order)

    @classmethod
    def monomial(cls, power, c=1, order=INF):
        return cls.from_powers({power: c}, order)

    # -- accessors ------------------------------------------------------------
    @property
    def order(self):
        """Exclusive bound on the index ``k`` (power ``k/2``)."""
        return self._order

    @property
    def truncation_order(self):
        return INF if self._order == INF else Fraction(self._order, 2)

    @property
    def valuation(self):
        return next(iter(self._c), INF)

    @property
    def is_exact(self):
        return self._order == INF

    def items(self):
        return self._c.items()

    def terms(self):
        """``[(power, coefficient)]`` with half-integer powers."""
        return [(Fraction(k, 2), c) for k, c in self._c.items()]

    def coefficient(self, power):
        k = Fraction(power) * 2
        if k.denominator != 1:
            raise InputError(f"power {power} is not a half-integer")
        k = int(k)
        if k >= self._order:
            raise InputError(f"power {power} lies beyond the truncation order")
        return self._c.get(k, Fraction(0))

    __getitem__ = coefficient

    def index(self, k):
        """Coefficient at index ``k`` (power ``k/2``)."""
        if k >= self._order:
            raise InputError(f"index {k} lies beyond the truncation order")
        return self._c.get(k, Fraction(0))

    def evaluate(self, x):
        y = np.sqrt(np.asarray(x, dtype=float))
        return sum(float(c) * y ** k for k, c in self._c.items())

    def __repr__(self):
        parts = [f"{c}*x^({Fraction(k, 2)})" for k, c in self._c.items()] or ["0"]
        tail = "" if self._order == INF else f" + O(x^({Fraction(self._order, 2)}))"
        return "PuiseuxSeries(" + " + ".join(parts) + tail + ")"

    def __eq__(self, other):
        if isinstance(other, PuiseuxSeries):
            return self._order == other._order and self._c == other._c
        return NotImplemented

    def __hash__(self):
        return hash((tuple(self._c.items()), self._order))

    # -- structural operations --------------------------------------------
    def truncate(self, order):
        return PuiseuxSeries(self._c, min(self._order, order))

    def map(self, fn):
        return PuiseuxSeries({k: fn(c) for k, c in self._c.items()}, self._order)

    def to_float(self):
        return self.map(float)

    def shift(self, k):
        """Multiply by ``y^k``."""
        return PuiseuxSeries({i + k: c for i, c in self._c.items()}, self._order + k)

    def flip(self):
        """Substitute ``x^(1/2) -> -x^(1/2)`` (the other branch of the square root)."""
        return PuiseuxSeries({k: (-c if k % 2 else c) for k, c in self._c.items()}, self._order)

    def odd_part(self):
        return PuiseuxSeries({k: c for k, c in self._c.items() if k % 2}, self._order)

    def derivative(self):
        """d/dx, lowering every index by two."""
        out = {k - 2: c * Fraction(k, 2) for k, c in self._c.items() if k != 0}
        return PuiseuxSeries(out, self._order - 2)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, PuiseuxSeries):
            return other
        if isinstance(other, Number):
            return PuiseuxSeries.constant(other)
        return NotImplemented

    def __neg__(self):
        return self.map(lambda c: -c)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self._order, other._order)
        out = dict(self._c)
        for k, c in other._c.items():
            out[k] = out.get(k, 0) + c
        return PuiseuxSeries(out, order)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return self.map(lambda c: c * _frac(other))
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        order = min(self._order + other.valuation, other._order + self.valuation)
        if order != INF:
            order = int(order)
        out = {}
        for ka, ca in self._c.items():
            for kb, cb in other._c.items():
                k = ka + kb
                if k < order:
                    out[k] = out.get(k, 0) + ca * cb
        return PuiseuxSeries(out, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self * (1 / _frac(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        return self.power(n)

    def _unit_recurrence(self, alpha, rel_order):
        """Coefficients of ``(self / leading term)^alpha`` up to ``rel_order``."""
        v = self.valuation
        lead = self._c[v]
        u = [self._c.get(v + j, 0) / lead for j in range(rel_order)]
        p = [Fraction(1)] + [Fraction(0)] * (rel_order - 1)
        # Miller's recurrence for powers of a series with unit constant term
        for k in range(1, rel_order):
            acc = Fraction(0)
            for j in range(1, k + 1):
                if not _is_zero(u[j]):
                    acc += ((alpha + 1) * j - k) * u[j] * p[k - j]
            p[k] = acc / k
        return p

    def power(self, alpha, order=None):
        """Raise to a rational power.

        The leading coefficient's ``alpha`` power is taken exactly when it is
        a perfect power (always the case for the series used here), else in
        floating point.  For exact inputs an explicit ``order`` is required.
        """
        alpha = Fraction(alpha)
        if not self._c:
            if alpha > 0:
                return PuiseuxSeries({}, self._order)
            raise DegenerateError("negative power of a zero series")
        v = self.valuation
        shift = alpha * v
        if shift.denominator != 1:
            raise InputError("power would leave half-integer exponents")
        shift = int(shift)
        if alpha.denominator == 1 and alpha >= 0 and self.is_exact:
            out = PuiseuxSeries.constant(1)
            base = self
            n = int(alpha)
            while n:
                if n & 1:
                    out = out * base
                base = base * base
                n >>= 1
            return out if order is None else out.truncate(order)
        rel = self._order - v
        target = None if order is None else order - shift
        if rel == INF:
            if target is None:
                raise InputError("order required for non-polynomial power of an exact series")
            rel = target
        elif target is not None:
            rel = min(rel, target)
        rel = max(int(rel), 0)
        lead = _rational_power(self._c[v], alpha)
        p = self._unit_recurrence(alpha, rel)
        return PuiseuxSeries({shift + j: lead * c for j, c in enumerate(p)}, shift + rel)

    def reciprocal(self, order=None):
        if not self._c:
            raise DegenerateError("reciprocal of a zero series")
        return self.power(-1, order)

    def compose(self, inner, order=None):
        """Substitute ``u = inner`` into ``self = sum c_j u^j`` (integer powers of u)."""
        if any(k % 2 or k < 0 for k in self._c):
            raise InputError("outer series must have non-negative integer powers")
        if inner.valuation <= 0:
            raise InputError("inner series must vanish at the origin")
        vin = inner.valuation
        jmax = self._order if self._order == INF else -(-self._order // 2)
        bounds = [inner._order]
        if jmax != INF:
            bounds.append(jmax * vin)
        if order is not None:
            bounds.append(order)
        cap = min(bounds)
        if cap == INF:
            cap = INF
        coeffs = [(k // 2, c) for k, c in self._c.items()]
        if not coeffs:
            return PuiseuxSeries({}, cap)
        top = max(j for j, _ in coeffs)
        table = dict(coeffs)
        acc = PuiseuxSeries.constant(table.get(top, 0), cap)
        for j in range(top - 1, -1, -1):
            acc = (acc * inner).truncate(cap) + table.get(j, 0)
        return acc.truncate(cap)


def _rational_power(c, alpha):
    if c == 1:
        return Fraction(1)
    if isinstance(c, Fraction):
        if alpha.denominator == 1:
            return c ** int(alpha)
        root = alpha.denominator
        num = round(abs(c.numerator) ** (1.0 / root))
        den = round(c.denominator ** (1.0 / root))
        if c > 0 and num ** root == c.numerator and den ** root == c.denominator:
            return Fraction(num, den) ** alpha.numerator
    return float(c) ** float(alpha)


# -- Lagrange inversion ----------------------------------------------------

def lagrange_invert(forward, branch="plus", order=Fraction(5, 2), phi=None):
    """Invert ``x = forward(u)`` (``forward ~ a u^2``) as a series in ``x^(1/2)``.

    Uses the k = 2 reversion formula: the coefficient of ``x^(n/2)`` in
    ``phi(u(x))`` is ``(1/n) [z^(n-1)] phi'(z) h(z)^(-n/2)`` with
    ``h = forward / z^2``.  ``branch`` picks the sign of the leading
    ``x^(1/2)`` term; ``phi`` defaults to the identity.

    Parameters
    ----------
    forward : PuiseuxSeries
        Series in ``u`` with integer powers, zero constant and linear terms.
    order : half-integer
        Exclusive bound on the powers of ``x`` returned.
    """
    if branch not in ("plus", "minus"):
        raise InputError("branch must be 'plus' or 'minus'")
    if any(k % 2 for k, _ in forward.items()):
        raise InputError("forward series must have integer powers of u")
    if forward.valuation != 4:
        if forward.valuation < 4:
            raise InputError("forward series must start at u^2")
        raise DegenerateError("leading u^2 coefficient vanishes")
    nmax = int(Fraction(order) * 2)
    h = forward.shift(-4)
    if h.order != INF:
        nmax = min(nmax, h.order // 2 + 1)
    if phi is None:
        dphi = PuiseuxSeries.constant(1)
        phi0 = Fraction(0)
    else:
        dphi = phi.derivative()
        phi0 = phi.index(0)
        if dphi.order != INF:
            nmax = min(nmax, dphi.order // 2 + 1)
    sign = 1 if branch == "plus" else -1
    out = {0: phi0} if phi0 else {}
    for n in range(1, nmax):
        hp = h.power(Fraction(-n, 2), order=2 * n)
        c = (dphi * hp).index(2 * (n - 1)) / n
        out[n] = c * sign ** n
    return PuiseuxSeries(out, nmax)


def appendix_forward():
    """The substitution ``x = u^2 + u^3/3`` as an exact series in ``u``."""
    return PuiseuxSeries.polynomial([0, 0, 1, Fraction(1, 3)])


def appendix_substitution(target, branch="plus", order=Fraction(3, 2)):
    """Expansion in ``x^(1/2)`` under ``x = u^2 + u^3/3``.

    ``target`` is ``"inv_sq"`` for ``1/(u+2)^2``, ``"inv_quad"`` for
    ``1/(u+2)^4``, ``"du"`` for ``du/dx`` or ``"u"`` for ``u`` itself.
    ``branch="minus"`` gives the ``u < 0`` expansions (``du/dx`` keeps its
    sign, i.e. is negative there).
    """
    order = Fraction(order)
    if order < Fraction(3, 2):
        raise InputError("order must be at least 3/2")
    forward = appendix_forward()
    if target == "u":
        return lagrange_invert(forward, branch, order)
    if target == "du":
        return lagrange_invert(forward, branch, order + 1).derivative()
    exps = {"inv_sq": -2, "inv_quad": -4}
    if target not in exps:
        raise InputError(f"unknown target {target!r}")
    depth = int(2 * order) + 2
    phi = PuiseuxSeries.polynomial([2, 1]).power(exps[target], order=2 * depth)
    return lagrange_invert(forward, branch, order, phi=phi)


def branch_density(h, order, u_series=None):
    """``h(u(x)) du/dx`` on the ``u > 0`` branch, truncated at index ``order``.

    ``h`` is an integer-power series in ``u``.  The ``u < 0`` branch, with the
    orientation that makes it a positive measure, is ``-density.flip()``.
    """
    if u_series is None:
        u_series = lagrange_invert(appendix_forward(), "plus", Fraction(order + 2, 2))
    du = u_series.derivative().truncate(order)
    return (h.compose(u_series, order=order + 2) * du).truncate(order)


def oriented_pair(density):
    """``(plus, minus)`` densities, the minus one oriented as a positive measure."""
    return density, -density.flip()


def gaussian_moments(density):
    """Two-branch Laplace transform ``int_0^inf [P(x) - P_flip(x)] e^{-2gx} dx``.

    Returns a rational series ``R`` in ``t = 1/g`` (integer powers) with the
    integral equal to ``sqrt(pi/2) g^(-1/2) R(1/g)``: only odd indices of
    ``density`` survive the branch sum, and their Gamma factors are
    ``sqrt(pi/2)`` times rationals.
    """
    out = {}
    order = density.order
    for k, c in density.items():
        if k % 2 == 0:
            continue
        m = (k + 1) // 2
        dfact = math.prod(range(2 * m - 1, 0, -2)) if m > 0 else 1
        out[2 * m] = 2 * c * Fraction(dfact, 4 ** m)
    t_order = INF if order == INF else 2 * ((order + 2) // 2)
    return PuiseuxSeries(out, t_order)


# -- standard triple integrals ------------------------------------------------

@dataclass(frozen=True)
class StandardTriple:
    """Exponents of ``int x^(m/2) e^{-2gx} int_0^x y^(n/2) e^{2gy} int_y^inf z^(p/2) e^{-2gz}``."""

    m: int
    n: int
    p: int

    def __post_init__(self):
        if min(self.m, self.n, self.p) < -1:
            raise InputError("m, n, p must be integers >= -1")
        if self.m + self.n + self.p + 6 <= 0:
            raise InputError("Gamma argument (m+n+p+6)/2 must be positive")

    @property
    def gamma_arg(self):
        return Fraction(self.m + self.n + self.p + 6, 2)


_GL_NODES = 48


@lru_cache(maxsize=None)
def _unit_square(a2, n, k2, nodes=_GL_NODES):
    # int_0^1 int_0^1 s^(a2/2) t^(n/2) (1 + s - s t)^(-k2/2) ds dt with
    # s = sigma^2, t = tau^2 so the integrand is polynomial-times-analytic.
    x, w = np.polynomial.legendre.leggauss(nodes)
    sig = 0.5 * (x + 1.0)
    ws = 0.5 * w
    S, T = np.meshgrid(sig, sig, indexing="ij")
    s = S * S
    t = T * T
    f = 4.0 * S ** (a2 + 1) * T ** (n + 1) * (1.0 + s - s * t) ** (-0.5 * k2)
    return float(ws @ f @ ws)


def reduced_triple(t, nodes=_GL_NODES):
    """``(2g)^k`` times the triple integral, ``k = (m+n+p+6)/2``; independent of g."""
    k2 = t.m + t.n + t.p + 6
    first = _unit_square(t.m + t.n + 2, t.n, k2, nodes)
    second = _unit_square(t.n + t.p + 2, t.n, k2, nodes)
    value = math.gamma(k2 / 2) * (first + second)
    if not math.isfinite(value):
        raise InputError(f"non-convergent reduction for {t}")
    check = math.gamma(k2 / 2) * (
        _unit_square(t.m + t.n + 2, t.n, k2, nodes // 2) + _unit_square(t.n + t.p + 2, t.n, k2, nodes // 2)
    )
    if abs(check - value) > 1e-9 * abs(value):
        raise IntegrationError(f"unit-square rule not converged for {t}", value, abs(check - value))
    return value


def standard_triple_value(t, g):
    """Value of the nested standard-form integral for exponents ``t`` at coupling ``g``.

    Substituting ``x = z s, y = z s t`` on ``z >= x`` and ``y = x s t, z = x s``
    on ``y <= z <= x`` and integrating the radial variable gives
    ``Gamma(k) (2g)^-k [I((m+n+2)/2) + I((n+p+2)/2)]`` with
    ``I(a) = int int s^a t^(n/2) (1 + s - s t)^-k ds dt`` over the unit square.
    """
    if g <= 0:
        raise InputError("g must be positive")
    k = float(t.gamma_arg)
    return reduced_triple(t) / (2.0 * g) ** k


def _as_pair(s):
    return s if isinstance(s, tuple) else (s,)


def triple_series(outer, middle, inner, cutoff):
    """Asymptotic series of ``int A e^{-2gx} int_0^x B e^{2gy} int_y^inf C e^{-2gz}``.

    Each density is a :class:`PuiseuxSeries` in ``x^(1/2)`` or a tuple of them
    (one per branch, oriented; the branch contributions are summed).  Terms
    with ``(m+n+p+6)/2 <= cutoff`` are kept.  The result is a float series in
    ``t = 1/g`` with half-integer powers; its ``order`` records how far the
    inputs' truncation allows it to be trusted.
    """
    cutoff = Fraction(cutoff)
    kmax = int(2 * cutoff)
    weights = {}
    order = kmax + 1
    for A, B, C in zip(_as_pair(outer), _as_pair(middle), _as_pair(inner)):
        vA, vB, vC = A.valuation, B.valuation, C.valuation
        if min(vA, vB, vC) < -1:
            raise InputError("densities must not be more singular than x^(-1/2)")
        if max(vA, vB, vC) == INF:
            continue
        order = min(order, A.order + vB + vC + 6, vA + B.order + vC + 6, vA + vB + C.order + 6)
        for (m, a), (n, b), (p, c) in product(A.items(), B.items(), C.items()):
            if m + n + p + 6 <= kmax:
                # summed exactly first so that branch cancellations are exact
                weights[m, n, p] = weights.get((m, n, p), 0) + a * b * c
    out = {}
    for (m, n, p), wgt in weights.items():
        if _is_zero(wgt):
            continue
        K = m + n + p + 6
        val = reduced_triple(StandardTriple(m, n, p)) / 2.0 ** (K / 2)
        out[K] = out.get(K, 0.0) + float(wgt) * val
    return PuiseuxSeries(out, order)


# -- energy expansions ---------------------------------------------------------

@dataclass(frozen=True)
class Coefficient:
    power: int
    value: object
    exact: bool

    @property
    def rational(self):
        return str(self.value) if self.exact else None


@dataclass(frozen=True)
class EnergyExpansion:
    """``leading * g + sum_k c_k g^(-k)`` with per-coefficient provenance."""

    coefficients: Tuple[Coefficient, ...]
    leading: int = 1

    def __post_init__(self):
        powers = [c.power for c in self.coefficients]
        if powers != list(range(len(powers))):
            raise InputError("powers must be consecutive from 0")

    @classmethod
    def from_series(cls, series, order, leading=1):
        """Take ``order`` integer-power coefficients of a series in ``t = 1/g``."""
        if series.order != INF and series.order < 2 * order:
            raise IntegrationError(
                f"series known only to t^{Fraction(series.order, 2)}, need {order} coefficients"
            )
        coeffs = []
        for k in range(order):
            v = series.index(2 * k)
            exact = isinstance(v, (Fraction, int))
            coeffs.append(Coefficient(k, Fraction(v) if exact else float(v), exact))
        return cls(tuple(coeffs), leading)

    @property
    def order(self):
        return len(self.coefficients)

    def values(self):
        return [float(c.value) for c in self.coefficients]

    def __getitem__(self, k):
        return self.coefficients[k].value

    def evaluate(self, g):
        return self.leading * g + sum(float(c.value) * g ** (-c.power) for c in self.coefficients)

    def shift_value(self, g):
        """The series without the ``leading * g`` term."""
        return self.evaluate(g) - self.leading * g
