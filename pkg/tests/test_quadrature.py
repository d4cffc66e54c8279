import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wronskian.exceptions import InputError, IntegrationError
from wronskian.quadrature import QuadratureSpec, cumulative, integrate, watson_expand


@pytest.mark.parametrize(
    "f, a, b, expected",
    [
        (lambda x: np.exp(-x), 0.0, math.inf, 1.0),
        (lambda x: 1.0 / (1.0 + x) ** 2, 0.0, math.inf, 1.0),
        (lambda x: x ** -0.5 * np.exp(-6.0 * x), 0.0, math.inf, math.sqrt(math.pi) / math.sqrt(6.0)),
        (lambda x: np.exp(-x * x), -math.inf, math.inf, math.sqrt(math.pi)),
        (np.sin, 0.0, math.pi, 2.0),
    ],
)
def test_integrate_examples(f, a, b, expected):
    assert integrate(f, a, b) == pytest.approx(expected, rel=1e-10)


def test_integrate_reversed_bounds():
    assert integrate(np.cos, 1.0, 0.0) == pytest.approx(-math.sin(1.0), rel=1e-12)


def test_integrate_exponent_channel_keeps_huge_weights_finite():
    # int_0^inf exp(-(x - 1000)^2) with the weight factored at its peak
    val = integrate(lambda x: np.ones_like(x), 0.0, math.inf, points=[1000.0],
                    exponent=lambda x: (x - 1000.0) ** 2, ref=1000.0)
    assert val == pytest.approx(math.sqrt(math.pi), rel=1e-10)


def test_integrate_accuracy_failure_carries_estimate():
    spec = QuadratureSpec(rel_tol=1e-15, abs_tol=1e-300, max_refinement_depth=1)
    with pytest.raises(IntegrationError) as info:
        integrate(lambda x: np.abs(np.sin(50 * x)), 0.0, 3.0, spec)
    assert math.isfinite(info.value.estimate)


def test_quadrature_spec_validation():
    with pytest.raises(InputError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(InputError):
        QuadratureSpec(max_refinement_depth=0)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), c=st.floats(-3, 3))
def test_integrate_additive(a, b, c):
    def f(x):
        return np.exp(-0.3 * x) * np.cos(2 * x)
    lhs = integrate(f, a, b) + integrate(f, b, c)
    assert lhs == pytest.approx(integrate(f, a, c), abs=1e-11)


@settings(max_examples=20, deadline=None)
@given(k=st.floats(0.2, 5.0), lam=st.floats(0.5, 4.0))
def test_integrate_matches_mpmath_on_halfline(k, lam):
    def f(x):
        return np.cos(k * x) * np.exp(-lam * x) / (1.0 + x)
    # plain QUADPACK loses ~1e-8 on the slowly damped oscillation, so sum between zeros instead
    with mpmath.workdps(25):
        ref = float(mpmath.quadosc(lambda x: mpmath.cos(k * x) * mpmath.exp(-lam * x) / (1 + x),
                                   [0, mpmath.inf], omega=k))
    assert integrate(f, 0.0, math.inf) == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_cumulative_examples():
    grid = np.linspace(0.0, 1.0, 1001)
    F = cumulative(lambda x: np.ones_like(x), 0.0, grid)
    assert np.allclose(F.dense, grid, atol=1e-14)
    F = cumulative(np.cos, 0.0, grid)
    assert np.max(np.abs(F.dense - np.sin(grid))) < 1e-8
    F = cumulative(lambda x: 2 * x, 1.0, grid)
    assert np.max(np.abs(F.dense - (grid ** 2 - 1))) < 1e-12


def test_cumulative_anchor_between_nodes():
    grid = np.linspace(0.0, 2.0, 101)
    F = cumulative(np.exp, 0.7345, grid)
    assert np.max(np.abs(F.dense - (np.exp(grid) - math.exp(0.7345)))) < 1e-12


@pytest.mark.parametrize("f", [np.sin, np.exp, lambda x: 1.0 / (1.0 + x * x)])
def test_cumulative_then_difference_recovers_integrand(f):
    grid = np.linspace(0.0, 1.0, 1001)
    F = cumulative(f, 0.0, grid)
    d = F.derivative().dense[1:-1]
    ref = f(grid[1:-1])
    assert np.max(np.abs(d - ref)) < 1e-6 * np.max(np.abs(ref))


def test_cumulative_rejects_bad_grid():
    with pytest.raises(InputError):
        cumulative(np.sin, 0.0, np.array([0.0, 0.5, 0.4, 1.0]))
    with pytest.raises(InputError):
        cumulative(np.sin, 2.0, np.linspace(0.0, 1.0, 10))


def test_watson_examples():
    assert watson_expand([1.0], 4.0, 1).value == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    assert watson_expand([0.0, 2.0], 1.0, 2).value == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    cos_taylor = [1.0, -1.0, 1.0, -1.0]
    ref = integrate(lambda x: np.cos(x) * np.exp(-10.0 * x * x), -math.inf, math.inf)
    assert watson_expand(cos_taylor, 10.0, 3).value == pytest.approx(ref, rel=1e-4)


def test_watson_term_structure():
    exp = watson_expand([1.0, 1.0, 1.0], 2.0, 3)
    powers = [p for p, _ in exp.coefficients]
    assert powers == sorted(powers, reverse=True)
    assert len(exp.coefficients) == exp.order == 3
    assert float(powers[0]) == -0.5


@pytest.mark.parametrize("k", [1, 2, 3])
def test_watson_remainder_ratio(k):
    # f(x) = exp(-x^2/2): f^(2n)(0) = (-1)^n (2n)! / (2^n n!)
    taylor = [(-1) ** n * math.factorial(2 * n) / (2 ** n * math.factorial(n)) for n in range(k)]

    def remainder(g):
        exact = math.sqrt(math.pi / (g + 0.5))
        return abs(watson_expand(taylor, g, k).value - exact)

    g = 40.0
    ratio = remainder(4 * g) / remainder(g)
    ideal = 4.0 ** (-k - 0.5)
    assert ideal / 2 < ratio < ideal * 2


def test_watson_rejects_bad_input():
    with pytest.raises(InputError):
        watson_expand([1.0], 1.0, 0)
    with pytest.raises(InputError):
        watson_expand([1.0], 1.0, 2)
    with pytest.raises(InputError):
        watson_expand([1.0], -1.0, 1)
