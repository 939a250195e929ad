import random
from itertools import permutations
from math import factorial, prod

import pytest

from constants import ALGORITHM_CELLS, ALGORITHM_IE
from error_handler import DimensionMismatchError
from mixed_volume import mixed_cells, mixed_volume, mixed_volume_cells, mixed_volume_ie
from polytope import convex_hull, minkowski_sum, volume

E1 = convex_hull([(0, 0), (1, 0)])
E2 = convex_hull([(0, 0), (0, 1)])


def simplex(d: int, k: int = 1):
    points = [tuple(0 for _ in range(d))]
    for i in range(d):
        points.append(tuple(k if j == i else 0 for j in range(d)))
    return convex_hull(points)


def random_polytope(rng: random.Random, d: int, max_points: int = 8, bound: int = 5):
    return convex_hull([tuple(rng.randint(0, bound) for _ in range(d))
                        for _ in range(rng.randint(1, max_points))])


def both(polytopes, seed: int = 1):
    return mixed_volume_ie(polytopes).value, mixed_volume_cells(polytopes, seed).value


def test_unit_segments():
    assert both([E1, E2]) == (1, 1)
    (cell,) = mixed_cells([E1, E2], seed=1)
    assert cell.volume == 1
    assert cell.edges == (((0, 0), (1, 0)), ((0, 0), (0, 1)))


def test_doubled_triangles():
    twice = simplex(2, 2)
    assert both([twice, twice]) == (4, 4)
    assert sum(cell.volume for cell in mixed_cells([twice, twice], seed=1)) == 4


def test_unit_simplices_in_three_dimensions():
    unit = simplex(3)
    assert both([unit, unit, unit]) == (1, 1)


def test_point_summand_gives_zero():
    assert both([simplex(2, 2), convex_hull([(1, 1)])]) == (0, 0)
    assert mixed_cells([simplex(2, 2), convex_hull([(1, 1)])], seed=1) == ()


def test_dimension_checks():
    with pytest.raises(DimensionMismatchError):
        mixed_volume_ie([E1, simplex(3)])


def test_dispatch_rejects_unknown_algorithm():
    with pytest.raises(ValueError):
        mixed_volume([E1, E2], "tropical")


@pytest.mark.parametrize("algorithm", [ALGORITHM_IE, ALGORITHM_CELLS])
def test_bezout_on_scaled_simplices(algorithm):
    for d in (2, 3):
        for degrees in ((1, 4), (2, 3), (3, 3)) if d == 2 else ((1, 2, 2), (2, 2, 3), (1, 1, 4)):
            polytopes = [simplex(d, k) for k in degrees]
            assert mixed_volume(polytopes, algorithm, seed=3).value == prod(degrees)


def test_diagonal_is_scaled_volume():
    rng = random.Random(17)
    for _ in range(10):
        d = rng.randint(2, 3)
        polytope = random_polytope(rng, d)
        assert mixed_volume_ie([polytope] * d).value == factorial(d) * volume(polytope)


def test_symmetry_under_permutation():
    rng = random.Random(19)
    polytopes = [random_polytope(rng, 3) for _ in range(3)]
    expected = mixed_volume_ie(polytopes).value
    for order in permutations(range(3)):
        permuted = [polytopes[i] for i in order]
        assert mixed_volume_ie(permuted).value == expected
        assert mixed_volume_cells(permuted, seed=5).value == expected


def test_translation_invariance():
    rng = random.Random(23)
    for _ in range(10):
        polytopes = [random_polytope(rng, 2) for _ in range(2)]
        moved = [polytopes[0].translate((rng.randint(-3, 3), rng.randint(-3, 3))), polytopes[1]]
        assert both(moved) == both(polytopes)


def test_multilinearity_in_first_argument():
    rng = random.Random(29)
    for _ in range(10):
        d = rng.randint(2, 3)
        p, q = random_polytope(rng, d), random_polytope(rng, d)
        others = [random_polytope(rng, d) for _ in range(d - 1)]
        combined = minkowski_sum(p, q)
        for algorithm in (ALGORITHM_IE, ALGORITHM_CELLS):
            lhs = mixed_volume([combined] + others, algorithm, seed=2).value
            rhs = (mixed_volume([p] + others, algorithm, seed=2).value
                   + mixed_volume([q] + others, algorithm, seed=2).value)
            assert lhs == rhs


def test_monotone_under_inclusion():
    rng = random.Random(31)
    for _ in range(15):
        d = rng.randint(2, 3)
        inner = random_polytope(rng, d)
        outer = convex_hull(list(inner.vertices) + [tuple(rng.randint(0, 5) for _ in range(d))])
        others = [random_polytope(rng, d) for _ in range(d - 1)]
        assert mixed_volume_ie([outer] + others).value >= mixed_volume_ie([inner] + others).value


def test_cells_are_deterministic_across_workers():
    rng = random.Random(37)
    polytopes = [random_polytope(rng, 3) for _ in range(3)]
    serial = mixed_volume_cells(polytopes, seed=4, workers=1)
    threaded = mixed_volume_cells(polytopes, seed=4, workers=3)
    assert serial.value == threaded.value
    assert [cell.key for cell in serial.cells] == [cell.key for cell in threaded.cells]


@pytest.mark.slow
def test_algorithms_agree_on_random_ensembles():
    rng = random.Random(41)
    for trial in range(100):
        d = rng.randint(2, 4)
        polytopes = [random_polytope(rng, d) for _ in range(d)]
        ie, cells = both(polytopes, seed=trial)
        assert ie == cells, f"trial {trial}: {[p.vertices for p in polytopes]}"
