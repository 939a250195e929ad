"""
Euclidean distance degree Lagrange system
Builds the critical-point system of the squared distance, its Newton
polytopes, the mixed-volume bound and the face-function classification
"""

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, List, Optional, Sequence, Tuple

from constants import ALGORITHM_IE, DEFAULT_SEED, U_SAMPLING
from error_handler import (
    ConstantPolynomialError,
    DimensionMismatchError,
    ProblemValidationError,
    ZeroDirectionError,
)
from logger import logger
from mixed_volume import MixedVolumeResult, mixed_volume
from polynomial import (
    EXACT,
    ExponentVector,
    Polynomial,
    SupportSet,
    face_polynomial,
    partial_derivative,
    support,
    weighted_value,
)
from polytope import Polytope, convex_hull, facet_normals, minkowski_sum

INFINITY = None  # h_j^i and e_i use None for +infinity


@dataclass(frozen=True)
class EDProblem:
    """X = {f_1 = ... = f_m = 0} in n variables with a data point u"""

    variables: Tuple[str, ...]
    polynomials: Tuple[Polynomial, ...]
    u: Tuple[Fraction, ...]
    seed: int = DEFAULT_SEED
    randomized: bool = False
    texts: Tuple[str, ...] = field(default=(), compare=False)
    u_sampled: bool = field(default=False, compare=False)
    tolerances: Tuple[Tuple[str, float], ...] = field(default=(), compare=False)

    def __post_init__(self):
        n, m = len(self.variables), len(self.polynomials)
        if len(set(self.variables)) != n:
            raise ProblemValidationError(f"duplicate variable names in {list(self.variables)}")
        if m < 1:
            raise ProblemValidationError("at least one equation is required")
        if n <= m:
            raise ProblemValidationError(f"need n > m, got n = {n} variables and m = {m} equations")
        for j, f in enumerate(self.polynomials):
            if f.arity != n:
                raise DimensionMismatchError(f"f{j + 1} has arity {f.arity}, expected {n}")
            if f.domain != EXACT:
                raise ProblemValidationError(f"f{j + 1} must have exact coefficients")
            if f.is_zero() or f.is_constant():
                raise ConstantPolynomialError(f"f{j + 1} is constant")
        if len(self.u) != n:
            raise DimensionMismatchError(f"data point has {len(self.u)} coordinates, expected {n}")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def m(self) -> int:
        return len(self.polynomials)

    def multiplier_names(self) -> Tuple[str, ...]:
        names = []
        for j in range(self.m):
            name = f"lambda{j + 1}"
            while name in self.variables:
                name = "_" + name
            names.append(name)
        return tuple(names)

    def with_u(self, u: Sequence) -> "EDProblem":
        return EDProblem(self.variables, self.polynomials, tuple(Fraction(x) for x in u),
                         self.seed, self.randomized, self.texts, False, self.tolerances)


def sample_u(n: int, seed: int) -> Tuple[Fraction, ...]:
    """Real rational data point in [-BOUND, BOUND], denominators <= MAX_DENOMINATOR, no zeros"""
    rng = random.Random(f"u:{seed}")
    bound, max_den = U_SAMPLING['BOUND'], U_SAMPLING['MAX_DENOMINATOR']
    u = []
    while len(u) < n:
        den = rng.randint(1, max_den)
        num = rng.randint(-bound * den, bound * den)
        if num != 0:
            u.append(Fraction(num, den))
    return tuple(u)


# --- Lagrange system -----------------------------------------------------------

def _unit(length: int, index: int) -> ExponentVector:
    return tuple(1 if k == index else 0 for k in range(length))


@dataclass(frozen=True)
class LagrangeSystem:
    """F_1..F_m and L_1..L_n in variables (x_1..x_n, lambda_1..lambda_m)"""

    n: int
    m: int
    equations: Tuple[Polynomial, ...]
    stationarity: Tuple[Polynomial, ...]
    structural_supports: Tuple[SupportSet, ...]
    variables: Tuple[str, ...]

    @property
    def polynomials(self) -> Tuple[Polynomial, ...]:
        return self.equations + self.stationarity


def structural_support(problem: EDProblem, i: int) -> SupportSet:
    """{e_i} u {0 if u_i != 0} u {(alpha - e_i) + eta_j : alpha in supp f_j, alpha_i >= 1}"""
    n, m = problem.n, problem.m
    points = {_unit(n + m, i)}
    if problem.u[i] != 0:
        points.add((0,) * (n + m))
    for j, f in enumerate(problem.polynomials):
        eta = _unit(m, j)
        for alpha in support(f):
            if alpha[i] >= 1:
                points.add(alpha[:i] + (alpha[i] - 1,) + alpha[i + 1:] + eta)
    return frozenset(points)


def build_lagrange_system(problem: EDProblem) -> LagrangeSystem:
    """L_i = x_i - u_i + sum_j lambda_j d_i f_j, everything lifted to n + m variables"""
    n, m = problem.n, problem.m
    arity = n + m
    equations = tuple(f.lift(arity) for f in problem.polynomials)
    multipliers = [Polynomial.variable(arity, n + j) for j in range(m)]
    stationarity = []
    supports = []
    for i in range(n):
        L = Polynomial.variable(arity, i) - problem.u[i]
        for j, f in enumerate(problem.polynomials):
            L = L + multipliers[j] * partial_derivative(f, i).lift(arity)
        stationarity.append(L)
        structural = structural_support(problem, i)
        supports.append(structural)
        if support(L) != structural:
            logger.warning(f"L{i + 1}: actual support differs from its structural support "
                           f"({len(support(L))} vs {len(structural)} exponents)")
    return LagrangeSystem(n, m, equations, tuple(stationarity), tuple(supports),
                          problem.variables + problem.multiplier_names())


# --- polytopes and the bound -----------------------------------------------------

@dataclass(frozen=True)
class EDPolytopes:
    """P_1..P_m (zero multiplier block) and P'_1..P'_n, all in R^(n+m)"""

    equations: Tuple[Polytope, ...]
    stationarity: Tuple[Polytope, ...]

    @property
    def all(self) -> Tuple[Polytope, ...]:
        return self.equations + self.stationarity


def _require_nonzero_u(problem: EDProblem):
    zeros = [i + 1 for i, x in enumerate(problem.u) if x == 0]
    if zeros:
        raise ProblemValidationError(
            f"data point has zero coordinates at positions {zeros}; the bound needs u_i != 0")


def ed_polytopes(problem: EDProblem) -> EDPolytopes:
    _require_nonzero_u(problem)
    m = problem.m
    equations = tuple(convex_hull(alpha + (0,) * m for alpha in support(f))
                      for f in problem.polynomials)
    stationarity = tuple(convex_hull(structural_support(problem, i)) for i in range(problem.n))
    return EDPolytopes(equations, stationarity)


def ed_degree_bound_result(problem: EDProblem, algorithm: str = ALGORITHM_IE,
                           seed: Optional[int] = None, workers: int = 1) -> MixedVolumeResult:
    """MV(P_1, ..., P_m, P'_1, ..., P'_n) with its algorithm metadata"""
    polytopes = ed_polytopes(problem)
    result = mixed_volume(polytopes.all, algorithm,
                          problem.seed if seed is None else seed, workers)
    logger.info(f"ED degree bound {result.value} ({algorithm}, {result.elapsed:.3f}s)")
    return result


def ed_degree_bound(problem: EDProblem, algorithm: str = ALGORITHM_IE,
                    seed: Optional[int] = None, workers: int = 1) -> int:
    return int(ed_degree_bound_result(problem, algorithm, seed, workers).value)


def hypersurface_stationarity_supports(problem: EDProblem) -> Tuple[SupportSet, ...]:
    """For m = 1: supports read off x_i - u_i + lambda d_i f after expansion"""
    if problem.m != 1:
        raise ProblemValidationError("the hypersurface construction needs exactly one equation")
    arity = problem.n + 1
    lam = Polynomial.variable(arity, problem.n)
    f = problem.polynomials[0]
    return tuple(
        support(Polynomial.variable(arity, i) - problem.u[i] + lam * partial_derivative(f, i).lift(arity))
        for i in range(problem.n)
    )


# --- face functions --------------------------------------------------------------

def _min_optional(values) -> Optional[int]:
    finite = [v for v in values if v is not INFINITY]
    return min(finite) if finite else INFINITY


def classify_case(w_i, e_i) -> str:
    """Tag of the face function of L_i from the pattern of (w_i, 0, e_i)"""
    if e_i is INFINITY:
        if w_i > 0:
            return 'C3'
        return 'C4' if w_i < 0 else 'C6'
    if w_i > 0 and e_i > 0:
        return 'C3'
    if w_i < 0 and w_i < e_i:
        return 'C4'
    if e_i < 0 and e_i < w_i:
        return 'C5'
    if w_i == 0 and e_i > 0:
        return 'C6'
    if e_i == 0 and w_i > 0:
        return 'C7'
    if w_i == e_i and w_i < 0:
        return 'C8'
    return 'C9'


@dataclass(frozen=True)
class FaceProfile:
    """Weighted values and case tags of the Lagrange system under w = (w, v)"""

    n: int
    m: int
    direction: Tuple[int, ...]
    h: Tuple[int, ...]
    h_partial: Tuple[Tuple[Optional[int], ...], ...]  # [j][i]
    e: int
    e_partial: Tuple[Optional[int], ...]
    S: FrozenSet[int]
    S_partial: Tuple[FrozenSet[int], ...]
    cases: Tuple[str, ...]
    predicted: Tuple[Polynomial, ...]
    constant_faces: Tuple[int, ...]
    face_supports: Tuple[FrozenSet[ExponentVector], ...]

    def order_bound_violations(self) -> List[Tuple[int, int]]:
        """(j, i) pairs breaking h_j^i >= h_j - w_i, or equality when the face has alpha_i >= 1"""
        bad = []
        for j in range(self.m):
            for i in range(self.n):
                hji = self.h_partial[j][i]
                if hji is INFINITY:
                    continue
                bound = self.h[j] - self.direction[i]
                if hji < bound:
                    bad.append((j, i))
                elif any(alpha[i] >= 1 for alpha in self.face_supports[j]) and hji != bound:
                    bad.append((j, i))
        return bad

    def order_bound_holds(self) -> bool:
        return not self.order_bound_violations()

    def origin_property_holds(self, problem: EDProblem) -> bool:
        """h_j <= 0 whenever 0 lies in supp f_j"""
        origin = (0,) * problem.n
        return all(self.h[j] <= 0 for j, f in enumerate(problem.polynomials) if origin in support(f))


def _check_direction(problem: EDProblem, w: Sequence[int]) -> Tuple[int, ...]:
    w = tuple(int(x) for x in w)
    if len(w) != problem.n + problem.m:
        raise DimensionMismatchError(f"direction of length {len(w)}, expected {problem.n + problem.m}")
    if all(x == 0 for x in w):
        raise ZeroDirectionError("face direction is zero")
    return w


def face_profile(problem: EDProblem, w: Sequence[int]) -> FaceProfile:
    w = _check_direction(problem, w)
    _require_nonzero_u(problem)
    n, m = problem.n, problem.m
    arity = n + m
    v = w[n:]

    h, face_supports, constant_faces = [], [], []
    h_partial = []
    for j, f in enumerate(problem.polynomials):
        lifted = f.lift(arity)
        h.append(weighted_value(lifted, w))
        face = face_polynomial(lifted, w)
        face_supports.append(frozenset(alpha[:n] for alpha in support(face)))
        if face.is_constant():
            constant_faces.append(j)
        row = []
        for i in range(n):
            derivative = partial_derivative(f, i)
            row.append(INFINITY if derivative.is_zero() else weighted_value(derivative.lift(arity), w))
        h_partial.append(tuple(row))

    e = min(v[j] + h[j] for j in range(m))
    S = frozenset(j for j in range(m) if v[j] + h[j] == e)

    e_partial, S_partial, cases, predicted = [], [], [], []
    for i in range(n):
        shifted = [INFINITY if h_partial[j][i] is INFINITY else v[j] + h_partial[j][i] for j in range(m)]
        e_i = _min_optional(shifted)
        S_i = frozenset(j for j in range(m) if e_i is not INFINITY and shifted[j] == e_i)
        tag = classify_case(w[i], e_i)
        e_partial.append(e_i)
        S_partial.append(S_i)
        cases.append(tag)
        predicted.append(_predicted_face(problem, w, i, tag, S_i))

    return FaceProfile(
        n=n, m=m, direction=w, h=tuple(h), h_partial=tuple(h_partial),
        e=e, e_partial=tuple(e_partial), S=S, S_partial=tuple(S_partial),
        cases=tuple(cases), predicted=tuple(predicted),
        constant_faces=tuple(constant_faces), face_supports=tuple(face_supports),
    )


def _predicted_face(problem: EDProblem, w: Tuple[int, ...], i: int, tag: str,
                    S_i: FrozenSet[int]) -> Polynomial:
    arity = problem.n + problem.m
    x_i = Polynomial.variable(arity, i)
    u_i = Polynomial.constant(arity, problem.u[i])
    multiplier_part = Polynomial.zero(arity)
    for k in sorted(S_i):
        term = Polynomial.variable(arity, problem.n + k) * partial_derivative(problem.polynomials[k], i).lift(arity)
        multiplier_part = multiplier_part + face_polynomial(term, w)
    return {
        'C3': -u_i,
        'C4': x_i,
        'C5': multiplier_part,
        'C6': x_i - u_i,
        'C7': multiplier_part - u_i,
        'C8': x_i + multiplier_part,
        'C9': x_i - u_i + multiplier_part,
    }[tag]


def classification_mismatches(problem: EDProblem, profile: FaceProfile,
                              system: Optional[LagrangeSystem] = None) -> List[int]:
    """Indices i where the predicted face differs from face_polynomial(L_i, w)"""
    system = system or build_lagrange_system(problem)
    return [i for i, L in enumerate(system.stationarity)
            if face_polynomial(L, profile.direction) != profile.predicted[i]]


def face_profiles(problem: EDProblem, directions: Sequence[Sequence[int]],
                  workers: int = 1) -> List[FaceProfile]:
    """Profiles for many directions, ordered by direction"""
    ordered = sorted({tuple(int(x) for x in w) for w in directions})
    if workers > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(lambda w: face_profile(problem, w), ordered))
    return [face_profile(problem, w) for w in ordered]


def facial_system(problem: EDProblem, w: Sequence[int]) -> Tuple[Polynomial, ...]:
    """(f_1)_w, ..., (f_m)_w, (L_1)_w, ..., (L_n)_w in n + m variables"""
    w = _check_direction(problem, w)
    system = build_lagrange_system(problem)
    return tuple(face_polynomial(p, w) for p in system.polynomials)


def candidate_directions(problem: EDProblem) -> Tuple[Tuple[int, ...], ...]:
    """
    Facet normals of P_1 + ... + P_m + P'_1 + ... + P'_n. Sound but
    incomplete: lower-dimensional cones of the normal fan are not enumerated
    """
    polytopes = ed_polytopes(problem).all
    # same fold order as mixed_volume_ie, so the hull cache is shared
    total = polytopes[-1]
    for polytope in reversed(polytopes[:-1]):
        total = minkowski_sum(total, polytope)
    return facet_normals(total)
