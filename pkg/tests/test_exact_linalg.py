from fractions import Fraction

import pytest

from exact_linalg import bareiss_det, integer_normal, is_feasible, primitive, rank, rref, solve


def test_rref_and_rank():
    rows, pivots = rref([[2, 4, 2], [1, 2, 3], [3, 6, 5]])
    assert pivots == [0, 2]
    assert rows == [[1, 2, 0], [0, 0, 1]]
    assert all(isinstance(x, Fraction) for x in rows[0])
    assert rank([[1, 2], [2, 4]]) == 1
    assert rank([]) == 0
    assert rref([]) == ([], [])


def test_bareiss_determinant():
    assert bareiss_det([[2, 0, 1], [1, 3, 2], [1, 1, 2]]) == 6
    assert bareiss_det([[1, 2], [2, 4]]) == 0
    assert bareiss_det([]) == 1


def test_primitive_and_integer_normal():
    assert primitive([Fraction(1, 2), Fraction(-3, 4)]) == (2, -3)
    with pytest.raises(ValueError):
        primitive([0, 0])
    normal = integer_normal([[1, 0, 1], [0, 1, 1]])
    assert normal in {(1, 1, -1), (-1, -1, 1)}
    assert integer_normal([[1, 2, 3], [2, 4, 6]]) == (0, 0, 0)


def test_solve_square_systems():
    assert solve([[2, 1], [1, 3]], [3, 5]) == (Fraction(4, 5), Fraction(7, 5))
    assert solve([[1, 2], [2, 4]], [1, 2]) is None


def test_feasibility_is_exact():
    # x >= 1/3, y >= 0, x + y <= 1/3 leaves only the vertex (1/3, 0)
    inequalities = [((1, 0), Fraction(1, 3)), ((0, 1), 0), ((-1, -1), Fraction(-1, 3))]
    assert is_feasible(inequalities, [], 2)
    assert not is_feasible(inequalities + [((0, 1), Fraction(1, 10**12))], [], 2)
    assert is_feasible([], [((1, -1), 0)], 2)
    assert not is_feasible([((0, 0), 1)], [], 2)
    assert is_feasible([((0, 0), -1)], [], 2)
