import math

import numpy as np
import pytest

from wronskian.exceptions import BracketError, InputError
from wronskian.oracle import (
    DiscretizedProblem,
    convergence_ratio,
    default_x_max,
    double_well_problem,
    fd_eigenvalue,
    fd_ground_state,
    harmonic_problem,
    shoot_ground_state,
)

# [DERIVED] Richardson-extrapolated finite-difference values, confirmed by shooting to 1e-10
GOLDEN = {4.0: 3.6016269893, 10.0: 9.733649777, 20.0: 19.742491082}


def _dw(g):
    return lambda x: 0.5 * g * g * (x * x - 1.0) ** 2


def test_harmonic_ground_state():
    res = fd_ground_state(harmonic_problem())
    assert res.energy == pytest.approx(0.5, abs=1e-6)
    assert res.extrapolated == pytest.approx(0.5, abs=1e-9)
    assert res.discretization_bound < 1e-6


def test_box_cosine_mode():
    # at h = 1e-3 the round-off floor eps * ||A|| ~ eps / h^2 is still well below 1e-9
    prob = DiscretizedProblem(lambda x: np.zeros_like(x), 1.0, 1000)
    assert fd_ground_state(prob).extrapolated == pytest.approx(math.pi ** 2 / 8, rel=1e-9)


@pytest.mark.parametrize("prob", [harmonic_problem(1000), double_well_problem(10.0, 1000)])
def test_two_grid_ratio(prob):
    assert 3.5 <= convergence_ratio(prob) <= 4.5


def test_eigenvector_normalized_and_nodeless():
    res = fd_ground_state(double_well_problem(10.0))
    psi = res.wavefunction
    assert np.all(psi.dense >= -1e-12 * np.max(psi.dense))
    h = psi.x[1] - psi.x[0]
    # trapezoid rule with the Neumann end counted once
    norm = h * (np.sum(psi.dense ** 2) - 0.5 * psi.dense[0] ** 2)
    assert norm == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("g", sorted(GOLDEN))
def test_double_well_goldens(g):
    assert fd_ground_state(double_well_problem(g)).extrapolated == pytest.approx(GOLDEN[g], abs=2e-9)


@pytest.mark.parametrize("g", [4.0, 10.0, 20.0])
def test_domain_truncation_insensitive(g):
    a = fd_eigenvalue(double_well_problem(g, 4000))
    xm = default_x_max(g)
    b = fd_eigenvalue(double_well_problem(g, 6000, 1.5 * xm))
    assert abs(a - b) < 1e-10


def test_shooting_harmonic():
    assert shoot_ground_state(lambda x: 0.5 * x * x, (0.4, 0.6), 10.0) == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize("g, bracket", [(4.0, (3.0, 4.0)), (10.0, (9.5, 9.9)), (20.0, (19.5, 19.9))])
def test_shooting_agrees_with_fd(g, bracket):
    shoot = shoot_ground_state(_dw(g), bracket, default_x_max(g))
    assert shoot == pytest.approx(fd_ground_state(double_well_problem(g)).extrapolated, abs=1e-6)


@pytest.mark.parametrize("n", [2000, 4000])
def test_discretization_bound_estimates_raw_error(n):
    g = 10.0
    res = fd_ground_state(double_well_problem(g, n))
    shoot = shoot_ground_state(_dw(g), (9.5, 9.9), default_x_max(g))
    assert 0.9 <= abs(res.energy - shoot) / res.discretization_bound <= 1.1


def test_shooting_bracket_failure():
    with pytest.raises(BracketError):
        shoot_ground_state(lambda x: 0.5 * x * x, (0.6, 0.7), 10.0)
    with pytest.raises(InputError):
        shoot_ground_state(lambda x: 0.5 * x * x, (0.6, 0.4), 10.0)


def test_problem_invariants():
    with pytest.raises(InputError):
        DiscretizedProblem(lambda x: x, 1.0, 50)
    with pytest.raises(InputError):
        DiscretizedProblem(lambda x: x, 0.0, 200)
    with pytest.raises(InputError):
        double_well_problem(0.0)
    assert default_x_max(100.0) == 6.0
    assert default_x_max(1.0) == 12.0


def test_matrix_is_symmetric_form_of_ghost_point_scheme():
    prob = DiscretizedProblem(lambda x: np.zeros_like(x), 1.0, 100)
    diag, off = prob.matrix()
    h2 = prob.h ** 2
    assert diag[0] == pytest.approx(1.0 / h2)
    assert off[0] == pytest.approx(-math.sqrt(2.0) * 0.5 / h2)
    assert off[1] == pytest.approx(-0.5 / h2)
