"""Second-order linear ODEs ``y'' + p y' + q y = f`` via the Wronskian.

Abel's identity gives the Wronskian of any two homogeneous solutions in
closed form, which in turn yields a second solution from a first one and the
variation-of-parameters particular solution.  The resonance functional
``int y1 f / W`` is the solvability condition for boundary problems whose
homogeneous solution already satisfies both boundary conditions.
"""

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .exceptions import InputError, SingularIntegrandError
from .fields import GridFunction, ScalarField1D, as_field
from .quadrature import DEFAULT_SPEC, cumulative, integrate

__all__ = [
    "LinearODE2",
    "BoundarySpec",
    "WronskianPair",
    "abel_wronskian",
    "second_solution",
    "wronskian_pair",
    "variation_of_parameters",
    "resonant_residual",
]


@dataclass(frozen=True)
class LinearODE2:
    """``y'' + p(x) y' + q(x) y = f(x)`` on ``[a, b]`` (``b`` may be ``inf``)."""

    p: ScalarField1D
    q: ScalarField1D
    f: ScalarField1D
    interval: Tuple[float, float]

    def __post_init__(self):
        a, b = self.interval
        if not a < b:
            raise InputError("interval must satisfy a < b")
        for name in ("p", "q", "f"):
            object.__setattr__(self, name, as_field(getattr(self, name)))

    def residual(self, y: GridFunction):
        """Pointwise residual of a sampled solution (spline slope, three-point curvature)."""
        x = y.x
        d1 = y.spline_derivative()
        d2 = y.second_derivative()
        return d2.dense + self.p(x) * d1.dense + self.q(x) * y.dense - self.f(x)


@dataclass(frozen=True)
class BoundarySpec:
    """Robin data ``alpha y(a) + beta y'(a) = 0``, ``gamma y(b) + delta y'(b) = 0``."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    domain: str = "finite"

    def __post_init__(self):
        if self.alpha == 0 and self.beta == 0:
            raise InputError("(alpha, beta) must not both vanish")
        if self.gamma == 0 and self.delta == 0:
            raise InputError("(gamma, delta) must not both vanish")
        if self.domain not in ("finite", "half-line", "whole-line"):
            raise InputError(f"unknown domain {self.domain!r}")

    @classmethod
    def neumann_dirichlet(cls):
        """``y'(0) = 0`` and decay at infinity: the even-parity ground-state setup."""
        return cls(0.0, 1.0, 1.0, 0.0, "half-line")

    @classmethod
    def decaying(cls):
        """Decay at both infinities."""
        return cls(1.0, 0.0, 1.0, 0.0, "whole-line")


@dataclass(frozen=True)
class WronskianPair:
    """Two homogeneous solutions and their Wronskian ``delta = y1 y2' - y2 y1'``."""

    y1: Callable
    y2: Callable
    delta: ScalarField1D

    def __post_init__(self):
        object.__setattr__(self, "delta", as_field(self.delta))

    def check(self, rtol=1e-6):
        """Max relative mismatch between the sampled Wronskian and ``delta``."""
        if not isinstance(self.y1, GridFunction) or not isinstance(self.y2, GridFunction):
            raise InputError("check needs sampled solutions")
        x = self.y1.x
        w = (self.y1.dense * self.y2.spline_derivative().dense
             - self.y2.dense * self.y1.spline_derivative().dense)
        d = self.delta(x)
        if np.any(d == 0):
            raise SingularIntegrandError("Wronskian vanishes: solutions are dependent")
        err = float(np.max(np.abs(w - d) / np.abs(d)))
        return err, err <= rtol


def abel_wronskian(p, a, delta_a, x, spec=DEFAULT_SPEC):
    """``delta_a * exp(-int_a^x p)`` for scalar or array ``x``."""
    p = as_field(p)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([delta_a * math.exp(-integrate(p, a, xi, spec)) for xi in xs])
    return out if np.ndim(x) else float(out[0])


def _abel_on_grid(p, anchor, delta_a, grid):
    P = cumulative(p, anchor, grid)
    return P.with_values(delta_a * np.exp(-P.values))


def second_solution(y1, p, anchor, delta_a=1.0, *, grid):
    """``y2 = y1 * int_anchor^x W / y1^2`` sampled on ``grid``.

    Raises
    ------
    SingularIntegrandError
        If ``y1`` vanishes or changes sign on the grid.
    """
    y1 = as_field(y1)
    p = as_field(p)
    grid = np.asarray(grid, dtype=float)
    v = y1(grid)
    if np.any(v == 0) or np.any(np.sign(v[1:]) != np.sign(v[:-1])):
        raise SingularIntegrandError("y1 has a zero inside the range; 1/y1^2 is not integrable")
    W = _abel_on_grid(p, anchor, delta_a, grid)

    def integrand(x):
        return W(x) / y1(x) ** 2

    F = cumulative(integrand, anchor, grid)
    return F.with_values(v * F.values)


def wronskian_pair(y1, p, anchor, grid, delta_a=1.0):
    """Sample ``y1`` on ``grid`` and pair it with :func:`second_solution`."""
    y1 = as_field(y1)
    grid = np.asarray(grid, dtype=float)
    y2 = second_solution(y1, p, anchor, delta_a, grid=grid)
    W = _abel_on_grid(as_field(p), anchor, delta_a, grid)
    return WronskianPair(GridFunction(grid, y1(grid)), y2, ScalarField1D(W))


def variation_of_parameters(pair, f, lower_B, lower_A, x, spec=DEFAULT_SPEC):
    """Particular solution ``-y1 int_B^x y2 f / W + y2 int_A^x y1 f / W``.

    Either lower bound may be ``+inf`` or ``-inf``.
    """
    f = as_field(f)
    y1, y2, W = pair.y1, pair.y2, pair.delta

    def first(t):
        return y2(t) * f(t) / W(t)

    def second(t):
        return y1(t) * f(t) / W(t)

    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for i, xi in enumerate(xs):
        arr = np.array([xi])
        out[i] = (-float(y1(arr)[0]) * integrate(first, lower_B, xi, spec)
                  + float(y2(arr)[0]) * integrate(second, lower_A, xi, spec))
    return out if np.ndim(x) else float(out[0])


def resonant_residual(y1, f, delta, interval, spec=DEFAULT_SPEC):
    """``int_a^b y1 f / W``; zero means the boundary problem is solvable."""
    y1, f, delta = as_field(y1), as_field(f), as_field(delta)
    a, b = interval
    return integrate(lambda t: y1(t) * f(t) / delta(t), a, b, spec)
