import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from wronskian.exceptions import DegenerateError, InputError, IntegrationError
from wronskian.series import (
    Coefficient,
    EnergyExpansion,
    PuiseuxSeries,
    StandardTriple,
    appendix_forward,
    appendix_substitution,
    branch_density,
    gaussian_moments,
    lagrange_invert,
    oriented_pair,
    reduced_triple,
    standard_triple_value,
    triple_series,
)

DATA = Path(__file__).parent / "data"
F = Fraction

rationals = st.fractions(min_value=-3, max_value=3, max_denominator=12)


# -- PuiseuxSeries -------------------------------------------------------------------

def test_construction_and_accessors():
    s = PuiseuxSeries.from_powers({F(-1, 2): 2, 0: F(1, 3), F(3, 2): 5}, truncation_order=2)
    assert s.valuation == -1
    assert s.order == 4
    assert s.truncation_order == 2
    assert s[F(-1, 2)] == 2
    assert s.coefficient(1) == 0
    assert s.terms() == [(F(-1, 2), 2), (F(0), F(1, 3)), (F(3, 2), 5)]
    with pytest.raises(InputError):
        s.coefficient(2)
    with pytest.raises(InputError):
        s.coefficient(F(1, 3))


def test_arithmetic_respects_truncation():
    a = PuiseuxSeries({0: 1, 1: 2}, 4)
    b = PuiseuxSeries({1: 1, 2: 3}, 6)
    assert (a + b).order == 4
    prod = a * b
    # (1 + 2y + O(y^4)) (y + 3y^2 + O(y^6)) is known to y^5
    assert prod.order == 5
    assert [prod.index(k) for k in range(5)] == [0, 1, 5, 6, 0]


@settings(max_examples=30, deadline=None)
@given(c=st.lists(rationals, min_size=3, max_size=6), n=st.integers(3, 8))
def test_reciprocal_is_multiplicative_inverse(c, n):
    c[0] = c[0] or F(1)
    s = PuiseuxSeries({k: v for k, v in enumerate(c)}, n)
    one = s * s.reciprocal()
    assert one == PuiseuxSeries.constant(1, n)


@settings(max_examples=30, deadline=None)
@given(c=st.lists(rationals, min_size=2, max_size=5), alpha=st.sampled_from([F(1, 2), F(-3, 2), F(2, 3), F(-2)]))
def test_power_laws(c, alpha):
    s = PuiseuxSeries({k: v for k, v in enumerate([F(1)] + c)}, 8)
    assert s.power(alpha) * s.power(1 - alpha) == s
    assert s.power(alpha).power(1 / alpha) == s


def test_flip_and_derivative():
    s = PuiseuxSeries({-1: 1, 0: 2, 1: 3, 4: 1})
    assert s.flip() == PuiseuxSeries({-1: -1, 0: 2, 1: -3, 4: 1})
    assert s.derivative() == PuiseuxSeries({-3: F(-1, 2), -1: F(3, 2), 2: 2})


def test_compose_horner():
    outer = PuiseuxSeries.polynomial([1, 1, 1])
    inner = PuiseuxSeries({1: 1})
    assert outer.compose(inner) == PuiseuxSeries({0: 1, 1: 1, 2: 1})
    with pytest.raises(InputError):
        outer.compose(PuiseuxSeries.constant(1))


def test_zero_series_errors():
    with pytest.raises(DegenerateError):
        PuiseuxSeries({}, 4).reciprocal()


# -- Lagrange inversion ------------------------------------------------------------

@settings(max_examples=10, deadline=None)
@given(lead=st.sampled_from([F(1), F(4), F(1, 9), F(9, 4), F(25)]),
       rest=st.lists(rationals, min_size=1, max_size=4),
       branch=st.sampled_from(["plus", "minus"]))
def test_lagrange_round_trip(lead, rest, branch):
    forward = PuiseuxSeries.polynomial([0, 0, lead, *rest])
    u = lagrange_invert(forward, branch, F(7, 2))
    back = forward.compose(u)
    assert back.order >= 6
    assert back == PuiseuxSeries({2: 1}, back.order)


@pytest.mark.parametrize(
    "target, powers, golden",
    [
        ("inv_sq", (0, F(1, 2), 1), (F(1, 4), F(-1, 4), F(11, 48))),
        ("inv_quad", (0, F(1, 2), 1), (F(1, 16), F(-1, 8), F(17, 96))),
        ("du", (F(-1, 2), 0, F(1, 2)), (F(1, 2), F(-1, 6), F(5, 48))),
    ],
)
def test_substitution_goldens_exact(target, powers, golden):
    s = appendix_substitution(target, "plus", F(3, 2))
    got = tuple(s.coefficient(p) for p in powers)
    assert got == golden
    assert all(isinstance(c, Fraction) for c in got)


def test_minus_branch_is_flip():
    for target in ("inv_sq", "inv_quad", "du", "u"):
        assert appendix_substitution(target, "minus", 3) == appendix_substitution(target, "plus", 3).flip()


def test_lagrange_rejects_bad_forward():
    with pytest.raises(InputError):
        lagrange_invert(PuiseuxSeries.polynomial([0, 1, 1]))
    with pytest.raises(InputError):
        lagrange_invert(appendix_forward(), branch="up")
    with pytest.raises(InputError):
        appendix_substitution("inv_sq", order=1)


def test_gaussian_moments_of_unit_weight():
    # both branches of int exp(-2g (u^2 + u^3/3)) du; only odd density indices contribute
    R = gaussian_moments(branch_density(PuiseuxSeries.constant(1), 6))
    assert R.index(0) == 1
    # next term: 2 * (5/48) * 1/4 from the x^(1/2) coefficient of du/dx
    assert R.index(2) == 2 * F(5, 48) * F(1, 4)


def test_oriented_pair():
    d = PuiseuxSeries({-1: 1, 0: 2})
    plus, minus = oriented_pair(d)
    assert plus is d
    assert minus == PuiseuxSeries({-1: 1, 0: -2})


# -- standard triples ------------------------------------------------------------------

@pytest.mark.parametrize("g", [1.0, 2.0, 5.0])
def test_standard_triple_closed_form(g):
    v = standard_triple_value(StandardTriple(0, 0, 0), g)
    assert abs(v * 8 * g ** 3 - 1) < 1e-10


@settings(max_examples=25, deadline=None)
@given(m=st.integers(-1, 3), n=st.integers(-1, 3), p=st.integers(-1, 3))
def test_standard_triple_homogeneity(m, n, p):
    t = StandardTriple(m, n, p)
    k = float(t.gamma_arg)
    a = standard_triple_value(t, 1.0)
    b = standard_triple_value(t, 7.0) * 7.0 ** k
    assert b == pytest.approx(a, rel=1e-12)


def _goldens():
    path = DATA / "standard_triples.json"
    return json.loads(path.read_text())["entries"] if path.exists() else []


@pytest.mark.parametrize("entry", _goldens(), ids=lambda e: f"{e['m']}{e['n']}{e['p']}-g{e['g']}")
def test_standard_triple_matches_nested_quadrature(entry):
    t = StandardTriple(entry["m"], entry["n"], entry["p"])
    assert standard_triple_value(t, entry["g"]) == pytest.approx(float(entry["value"]), rel=1e-6)


def test_golden_file_covers_the_grid():
    keys = {(e["m"], e["n"], e["p"], e["g"]) for e in _goldens()}
    assert len(keys) == 4 ** 3 * 2


def test_standard_triple_invariants():
    with pytest.raises(InputError):
        StandardTriple(-2, 0, 0)
    with pytest.raises(InputError):
        standard_triple_value(StandardTriple(0, 0, 0), 0.0)
    assert StandardTriple(-1, -1, -1).gamma_arg == F(3, 2)
    assert reduced_triple(StandardTriple(0, 0, 0)) == pytest.approx(1.0, rel=1e-13)


def test_triple_series_single_term():
    one = PuiseuxSeries.constant(1, 4)
    s = triple_series(one, one, one, 3)
    # only (0, 0, 0) survives; its value is 1/(8 g^3), i.e. t^3 / 8
    assert s.index(6) == pytest.approx(1 / 8, rel=1e-13)
    assert all(s.index(k) == 0 for k in range(6))


def test_triple_series_rejects_strong_singularity():
    with pytest.raises(InputError):
        triple_series(PuiseuxSeries({-2: 1}, 4), PuiseuxSeries.constant(1, 4), PuiseuxSeries.constant(1, 4), 3)


# -- EnergyExpansion ---------------------------------------------------------------------

def test_energy_expansion():
    exp = EnergyExpansion.from_series(PuiseuxSeries({0: F(-1, 4), 2: F(-9, 64), 4: 0.5}, 6), 3)
    assert [c.exact for c in exp.coefficients] == [True, True, False]
    assert exp.coefficients[1].rational == "-9/64"
    assert exp.coefficients[2].rational is None
    assert exp.evaluate(2.0) == pytest.approx(2.0 - 0.25 - 9 / 128 + 0.125)
    assert exp.shift_value(2.0) == pytest.approx(-0.25 - 9 / 128 + 0.125)
    with pytest.raises(IntegrationError):
        EnergyExpansion.from_series(PuiseuxSeries({0: 1}, 4), 3)
    with pytest.raises(InputError):
        EnergyExpansion((Coefficient(1, F(1), True),))
