"""
Tests for the dense Bland-rule simplex
"""
import numpy as np
import pytest
from scipy.optimize import linprog

from core.exceptions import NumericalFailure
from engine.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, DenseSimplex, simplex_minimize


def test_covering_problem():
    """min 3x1 + 4x2 s.t. x1 + x2 >= 2, 2x1 + x2 >= 3, written with surplus columns."""
    A = [[1, 1, -1, 0], [2, 1, 0, -1]]
    b = [2, 3]
    c = [3, 4, 0, 0]
    result = simplex_minimize(A, b, c)
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(6.0)
    assert result.x[:2] == pytest.approx([2.0, 0.0])
    assert result.duals == pytest.approx([3.0, 0.0])


def test_negative_rhs_rows_are_flipped():
    # -x1 - x2 = -2 is the same row as x1 + x2 = 2
    result = simplex_minimize([[-1, -1]], [-2], [1, 2])
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(2.0)
    assert result.duals == pytest.approx([-1.0])


def test_infeasible():
    result = simplex_minimize([[1, 1]], [-1], [1, 1])
    assert result.status == INFEASIBLE
    assert result.x is None


def test_unbounded():
    result = simplex_minimize([[1, -1]], [0], [-1, 0])
    assert result.status == UNBOUNDED


def test_beale_cycling_example_terminates():
    A = [
        [0.25, -8, -1, 9, 1, 0, 0],
        [0.5, -12, -0.5, 3, 0, 1, 0],
        [0, 0, 1, 0, 0, 0, 1],
    ]
    b = [0, 0, 1]
    c = [-0.75, 20, -0.5, 6, 0, 0, 0]
    result = simplex_minimize(A, b, c)
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(-1.25)


def test_redundant_rows_are_tolerated():
    A = [[1, 1, 0], [2, 2, 0], [0, 1, 1]]
    b = [1, 2, 1]
    c = [1, 0, 3]
    result = simplex_minimize(A, b, c)
    reference = linprog(c, A_eq=A, b_eq=b, method="highs")
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(reference.fun)


def test_random_programs_match_linprog():
    rng = np.random.default_rng(17)
    for _ in range(30):
        m, n = 3, 7
        A = rng.uniform(0.1, 2.0, size=(m, n))
        b = A @ rng.uniform(0.0, 1.0, size=n)
        c = rng.uniform(0.0, 5.0, size=n)
        result = simplex_minimize(A, b, c)
        reference = linprog(c, A_eq=A, b_eq=b, method="highs")
        assert result.status == OPTIMAL
        assert result.objective == pytest.approx(reference.fun, abs=1e-7)
        assert A @ result.x == pytest.approx(b, abs=1e-7)


def test_iteration_cap():
    solver = DenseSimplex([[1, 1, -1, 0], [2, 1, 0, -1]], [2, 3], [3, 4, 0, 0], max_iterations=0)
    with pytest.raises(NumericalFailure):
        solver.solve()
