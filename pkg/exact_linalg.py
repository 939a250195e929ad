"""
Exact linear algebra over the rationals
Thin layer over sympy matrices and its rational simplex; callers work with
Fraction tuples and never see sympy objects
"""

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import List, Optional, Sequence, Tuple

import sympy as sp
from sympy.solvers.simplex import InfeasibleLPError, UnboundedLPError, lpmin

Vector = Tuple[Fraction, ...]
# a constraint (a, beta) reads  <a, z> >= beta
Constraint = Tuple[Tuple[Fraction, ...], Fraction]


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def to_fraction(value) -> Fraction:
    """sympy Rational (or any rational number) to Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, sp.Rational):
        return Fraction(int(value.p), int(value.q))
    return Fraction(value)


def to_rational(value) -> sp.Rational:
    value = Fraction(value)
    return sp.Rational(value.numerator, value.denominator)


def _matrix(rows: Sequence[Sequence]) -> sp.Matrix:
    return sp.Matrix([[to_rational(x) for x in row] for row in rows])


def lcm_of_denominators(values) -> int:
    """Least common multiple of the denominators of rational values"""
    result = 1
    for value in values:
        den = Fraction(value).denominator
        result = result * den // gcd(result, den)
    return result


def primitive(vector: Sequence) -> Tuple[int, ...]:
    """Scale a nonzero rational vector to the primitive integer vector with the same direction"""
    scale = lcm_of_denominators(vector)
    ints = [int(Fraction(v) * scale) for v in vector]
    g = reduce(gcd, (abs(v) for v in ints), 0)
    if g == 0:
        raise ValueError("primitive() of the zero vector")
    return tuple(v // g for v in ints)


def rref(rows: Sequence[Sequence]) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form; returns the nonzero rows and the pivot columns"""
    if not rows:
        return [], []
    reduced, pivots = _matrix(rows).rref()
    return ([[to_fraction(x) for x in reduced.row(r)] for r in range(len(pivots))],
            list(pivots))


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return _matrix(rows).rank()


def bareiss_det(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free determinant of a square integer matrix"""
    if not matrix:
        return 1
    return int(sp.Matrix(matrix).det(method="bareiss"))


def integer_normal(rows: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    """
    Primitive integer vector orthogonal to k-1 integer rows in Z^k;
    zero vector when the rows are dependent
    """
    k = len(rows) + 1
    if k == 1:
        return (1,)
    kernel = _matrix(rows).nullspace()
    if len(kernel) != 1:
        return (0,) * k
    return primitive([to_fraction(x) for x in kernel[0]])


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> Optional[Vector]:
    """Unique solution of a square system, or None when singular"""
    system = _matrix(matrix)
    if system.rank() < len(matrix):
        return None
    solution = system.LUsolve(sp.Matrix([to_rational(b) for b in rhs]))
    return tuple(to_fraction(x) for x in solution)


def is_feasible(inequalities: Sequence[Constraint], equalities: Sequence[Constraint],
                dim: int) -> bool:
    """Exact feasibility of {<a,z> >= beta} and {<c,z> = gamma} over Q^dim"""
    z = sp.symbols(f"z0:{dim}") if dim else ()
    constraints = []
    for rows, relation in ((inequalities, sp.Ge), (equalities, sp.Eq)):
        for a, beta in rows:
            beta = to_rational(beta)
            if all(x == 0 for x in a):
                # 0 >= beta or 0 = beta decides on its own
                if not (beta <= 0 if relation is sp.Ge else beta == 0):
                    return False
                continue
            expr = sp.Add(*(to_rational(x) * zi for x, zi in zip(a, z) if x != 0))
            constraints.append(relation(expr, beta))
    if not constraints:
        return True
    try:
        lpmin(z[0], constraints)
    except InfeasibleLPError:
        return False
    except UnboundedLPError:
        return True
    return True
