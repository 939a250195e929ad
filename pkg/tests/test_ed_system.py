import random
from fractions import Fraction
from math import gcd
from functools import reduce

import pytest

from conftest import fixture_problem
from constants import ALGORITHM_CELLS, ALGORITHM_IE, FACE_PROFILE_SAMPLES
from ed_system import (
    EDProblem,
    build_lagrange_system,
    candidate_directions,
    classification_mismatches,
    classify_case,
    ed_degree_bound,
    ed_polytopes,
    face_profile,
    face_profiles,
    facial_system,
    hypersurface_stationarity_supports,
    sample_u,
)
from error_handler import ConstantPolynomialError, ProblemValidationError, ZeroDirectionError
from polynomial import parse_polynomial
from problem_manager import problem_manager

CORPUS = ("circle", "line", "conic", "cubic", "sparse", "quadrics3")
XYL = ("x", "y", "l")


def problem_from(text: str):
    return problem_manager.parse_problem_text(text)


def lagrange(text: str, names=XYL):
    return parse_polynomial(text, names)


def random_direction(rng: random.Random, size: int):
    while True:
        w = tuple(rng.randint(-4, 4) for _ in range(size))
        if any(w):
            return w


def test_circle_lagrange_system(circle):
    system = build_lagrange_system(circle)
    assert system.stationarity == (lagrange("x - 3 + 2*l*x"), lagrange("y - 4 + 2*l*y"))
    assert system.equations == (lagrange("x^2 + y^2 - 1"),)
    assert system.variables == ("x", "y", "lambda1")


def test_line_lagrange_system():
    problem = problem_from("vars = x, y\nf1 = x + 2*y - 5\nu = 1, 1")
    system = build_lagrange_system(problem)
    assert system.stationarity == (lagrange("x - 1 + l"), lagrange("y - 1 + 2*l"))


def test_coordinate_planes_lagrange_system():
    problem = problem_from("vars = a, b, c\nf1 = a\nf2 = b\nu = 1, 2, 3")
    names = ("a", "b", "c", "p", "q")
    system = build_lagrange_system(problem)
    assert system.stationarity == (
        parse_polynomial("a - 1 + p", names),
        parse_polynomial("b - 2 + q", names),
        parse_polynomial("c - 3", names),
    )


def test_circle_polytopes(circle):
    polytopes = ed_polytopes(circle)
    assert set(polytopes.equations[0].vertices) == {(2, 0, 0), (0, 2, 0), (0, 0, 0)}
    assert set(polytopes.stationarity[0].vertices) == {(1, 0, 0), (0, 0, 0), (1, 0, 1)}


def test_line_polytope():
    problem = problem_from("vars = x, y\nf1 = x + 2*y - 5\nu = 1, 1")
    assert set(ed_polytopes(problem).stationarity[0].vertices) == {(1, 0, 0), (0, 0, 0), (0, 0, 1)}


@pytest.mark.parametrize("name, expected", [("circle", 4), ("conic", 4), ("line", 1), ("cubic", 9)])
def test_bound_on_plane_curves(name, expected):
    problem = fixture_problem(name)
    assert ed_degree_bound(problem, ALGORITHM_IE) == expected
    assert ed_degree_bound(problem, ALGORITHM_CELLS) == expected


def test_bound_for_two_quadrics_agrees_across_algorithms():
    problem = fixture_problem("quadrics3")
    assert ed_degree_bound(problem, ALGORITHM_IE) == ed_degree_bound(problem, ALGORITHM_CELLS)


def test_bound_ignores_equation_order():
    problem = fixture_problem("quadrics3")
    swapped = EDProblem(problem.variables, problem.polynomials[::-1], problem.u, problem.seed)
    assert ed_degree_bound(swapped) == ed_degree_bound(problem)


def test_bound_ignores_variable_relabeling():
    problem = fixture_problem("sparse")
    f = problem.polynomials[0]
    relabeled = EDProblem(("x", "y"), (parse_polynomial(f.to_text(("x", "y")), ("y", "x")),),
                          problem.u[::-1], problem.seed)
    assert ed_degree_bound(relabeled) == ed_degree_bound(problem)


def test_zero_data_coordinate_is_rejected(circle):
    with pytest.raises(ProblemValidationError):
        ed_degree_bound(circle.with_u((0, 4)))
    with pytest.raises(ProblemValidationError):
        face_profile(circle.with_u((3, 0)), (1, 1, 1))


def test_problem_invariants():
    with pytest.raises(ProblemValidationError):
        problem_from("vars = x, y\nf1 = x\nf2 = y\nu = 1, 1")
    with pytest.raises(ConstantPolynomialError):
        problem_from("vars = x, y\nf1 = 3\nu = 1, 1")


def test_sampled_data_point_is_seeded_and_nonzero():
    assert sample_u(4, 7) == sample_u(4, 7)
    assert all(x != 0 and abs(x) <= 10 and x.denominator <= 64 for x in sample_u(50, 3))


def test_classify_case_covers_every_pattern():
    assert classify_case(1, 2) == 'C3'
    assert classify_case(-2, 1) == 'C4'
    assert classify_case(0, -1) == 'C5'
    assert classify_case(0, 3) == 'C6'
    assert classify_case(2, 0) == 'C7'
    assert classify_case(-1, -1) == 'C8'
    assert classify_case(0, 0) == 'C9'
    assert classify_case(5, None) == 'C3'
    assert classify_case(-5, None) == 'C4'
    assert classify_case(0, None) == 'C6'


def test_circle_face_profiles(circle):
    up = face_profile(circle, (0, 0, 1))
    assert up.e == 1
    assert up.e_partial == (1, 1)
    assert up.cases == ('C6', 'C6')
    assert up.predicted[0] == lagrange("x - 3")

    down = face_profile(circle, (0, 0, -1))
    assert down.e_partial[0] == -1
    assert down.cases[0] == 'C5'
    assert down.predicted[0] == lagrange("2*l*x")


def test_positive_direction_leaves_constants(circle):
    profile = face_profile(circle, (1, 2, 3))
    assert profile.cases == ('C3', 'C3')
    assert profile.predicted == (lagrange("-3"), lagrange("-4"))


def test_face_profile_rejects_zero_direction(circle):
    with pytest.raises(ZeroDirectionError):
        face_profile(circle, (0, 0, 0))


def test_facial_system_examples(circle):
    assert facial_system(circle, (0, 0, 1)) == (
        lagrange("x^2 + y^2 - 1"), lagrange("x - 3"), lagrange("y - 4"))
    assert facial_system(circle, (-1, -1, 0)) == (
        lagrange("x^2 + y^2"), lagrange("x + 2*l*x"), lagrange("y + 2*l*y"))


def test_candidate_directions(circle):
    directions = candidate_directions(circle)
    assert (0, 0, 1) in directions and (0, 0, -1) in directions
    line = candidate_directions(fixture_problem("line"))
    assert len(line) >= 4 and all(len(w) == 3 for w in line)
    for w in candidate_directions(fixture_problem("conic")):
        assert reduce(gcd, (abs(x) for x in w)) == 1


@pytest.mark.parametrize("name", CORPUS)
def test_classifier_matches_direct_faces(name):
    problem = fixture_problem(name)
    system = build_lagrange_system(problem)
    rng = random.Random(f"faces:{name}")
    for _ in range(FACE_PROFILE_SAMPLES):
        profile = face_profile(problem, random_direction(rng, problem.n + problem.m))
        assert classification_mismatches(problem, profile, system) == []
        assert profile.order_bound_holds(), profile.order_bound_violations()
        assert profile.origin_property_holds(problem)


def test_face_profiles_are_ordered_and_thread_independent(circle):
    directions = [(0, 0, 1), (-1, -1, 0), (1, 0, 0), (0, 0, -1)]
    serial = face_profiles(circle, directions, workers=1)
    threaded = face_profiles(circle, directions, workers=3)
    assert [p.direction for p in serial] == sorted(directions)
    assert serial == threaded


def test_hypersurface_construction_matches_structural_supports():
    for name in ("conic", "cubic", "sparse"):
        problem = fixture_problem(name)
        system = build_lagrange_system(problem)
        assert hypersurface_stationarity_supports(problem) == system.structural_supports


def test_hypersurface_construction_needs_one_equation():
    with pytest.raises(ProblemValidationError):
        hypersurface_stationarity_supports(fixture_problem("quadrics3"))


def test_structural_support_survives_cancellation():
    problem = EDProblem(("x", "y"), (parse_polynomial("x^2 + y^2 - 1", ("x", "y")),),
                        (Fraction(3), Fraction(4)))
    # L_1 = x - 3 + 2 l x keeps all three exponents
    assert len(build_lagrange_system(problem).structural_supports[0]) == 3
