"""
Numeric critical-point counting
Total-degree homotopy continuation in projective coordinates, endpoint
refinement, deduplication and torus/regularity classification, plus
random-start Newton probes for facial and degenerate face systems
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from constants import PROBE_LIMITS, SOLVER_TOLERANCES, TRACKER_LIMITS
from ed_system import EDProblem, build_lagrange_system, facial_system
from error_handler import ConstantPolynomialError, DimensionMismatchError, EmptyInputError
from logger import logger
from polynomial import NUMERIC, Polynomial, face_polynomial, partial_derivative

CONVERGED = "Converged"
DIVERGED = "Diverged"
FAILED = "Failed"

SOLUTION_FOUND = "SolutionFound"
DEGENERATE_WITNESS = "DegenerateWitness"
NONE_FOUND = "NoneFoundHeuristic"


@dataclass(frozen=True)
class SolverOptions:
    residual: float = SOLVER_TOLERANCES['RESIDUAL']
    dedup_radius: float = SOLVER_TOLERANCES['DEDUP_RADIUS']
    torus: float = SOLVER_TOLERANCES['TORUS']
    rank: float = SOLVER_TOLERANCES['RANK']
    min_step: float = SOLVER_TOLERANCES['MIN_STEP']
    max_step: float = SOLVER_TOLERANCES['MAX_STEP']
    divergence_norm: float = SOLVER_TOLERANCES['DIVERGENCE_NORM']
    max_failed_fraction: float = TRACKER_LIMITS['MAX_FAILED_FRACTION']
    workers: int = 1

    @classmethod
    def from_settings(cls, settings: Dict[str, Any], residual: Optional[float] = None,
                      workers: Optional[int] = None) -> "SolverOptions":
        """Options from merged settings; explicit arguments (CLI flags) win"""
        tolerances = settings.get("tolerances", {})
        base = cls()
        return cls(
            residual=float(residual if residual is not None else tolerances.get("residual", base.residual)),
            dedup_radius=float(tolerances.get("dedup_radius", base.dedup_radius)),
            torus=float(tolerances.get("torus", base.torus)),
            rank=float(tolerances.get("rank", base.rank)),
            min_step=float(tolerances.get("min_step", base.min_step)),
            max_step=float(tolerances.get("max_step", base.max_step)),
            divergence_norm=float(tolerances.get("divergence_norm", base.divergence_norm)),
            max_failed_fraction=float(settings.get("max_failed_fraction", base.max_failed_fraction)),
            workers=max(1, int(workers if workers is not None else settings.get("threads", 1) or 1)),
        )

    def tolerances(self) -> Dict[str, float]:
        """Every threshold that shapes a count, for reports"""
        return {
            "residual": self.residual,
            "dedup_radius": self.dedup_radius,
            "torus": self.torus,
            "rank": self.rank,
            "min_step": self.min_step,
            "max_step": self.max_step,
            "divergence_norm": self.divergence_norm,
            "max_failed_fraction": self.max_failed_fraction,
        }


class PolynomialSystem:
    """Vectorized evaluation and Jacobian of numeric polynomials sharing one arity"""

    def __init__(self, polys: Sequence[Polynomial]):
        if not polys:
            raise EmptyInputError("empty polynomial system")
        arity = polys[0].arity
        if any(p.arity != arity for p in polys):
            raise DimensionMismatchError("polynomials of different arities in one system")
        exponents, rows, coefficients = [], [], []
        for r, p in enumerate(polys):
            for e, c in p.to_numeric().terms:
                exponents.append(e)
                rows.append(r)
                coefficients.append(c)
        count = len(exponents)
        self.arity = arity
        self.size = len(polys)
        self.exponents = np.array(exponents, dtype=np.int64).reshape(count, arity)
        self.coefficients = np.zeros((self.size, count), dtype=np.complex128)
        self.coefficients[rows, np.arange(count)] = coefficients
        shift = np.eye(arity, dtype=np.int64)[:, np.newaxis, :]
        self.derivative_exponents = np.maximum(self.exponents[np.newaxis, :, :] - shift, 0)
        self.derivative_coefficients = (self.coefficients[np.newaxis, :, :]
                                        * self.exponents.T[:, np.newaxis, :])

    def __call__(self, x: np.ndarray) -> np.ndarray:
        monomials = np.prod(np.power(x[np.newaxis, :], self.exponents), axis=1)
        return self.coefficients @ monomials

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        monomials = np.prod(np.power(x[np.newaxis, np.newaxis, :], self.derivative_exponents), axis=2)
        return np.einsum('krt,kt->rk', self.derivative_coefficients, monomials)


@dataclass
class TrackedPath:
    index: int
    start: Tuple[complex, ...]
    endpoint: Optional[np.ndarray]
    status: str
    residual: float
    newton_iterations: int
    steps: int
    final_t: float


@dataclass
class SolutionSet:
    """Distinct refined solutions with multiplicities and per-solution diagnostics"""

    solutions: List[np.ndarray]
    multiplicities: List[int]
    torus: List[bool]
    paths: List[TrackedPath]
    options: SolverOptions
    seed: int
    ranks: Optional[List[int]] = None
    rank_ratios: Optional[List[float]] = None
    ambiguous: Optional[List[bool]] = None
    expected_rank: Optional[int] = None
    elapsed: float = 0.0
    gamma: complex = field(default=1 + 0j, repr=False)
    # solutions added by conjugate closure rather than reached by a path
    recovered: int = 0

    @property
    def total(self) -> int:
        return len(self.solutions)

    @property
    def torus_count(self) -> int:
        return sum(self.torus)

    @property
    def regular(self) -> List[bool]:
        """Unclassified solutions count as regular"""
        if self.ranks is None:
            return [True] * self.total
        return [r == self.expected_rank for r in self.ranks]

    @property
    def regular_count(self) -> int:
        return sum(self.regular)

    @property
    def regular_torus_count(self) -> int:
        return sum(1 for r, t in zip(self.regular, self.torus) if r and t)

    @property
    def ambiguous_count(self) -> int:
        return sum(self.ambiguous) if self.ambiguous else 0

    @property
    def path_count(self) -> int:
        return len(self.paths)

    def status_count(self, status: str) -> int:
        return sum(1 for p in self.paths if p.status == status)

    @property
    def failed_count(self) -> int:
        return self.status_count(FAILED)

    @property
    def failed_fraction(self) -> float:
        return self.failed_count / self.path_count if self.paths else 0.0

    @property
    def reliable(self) -> bool:
        return self.failed_fraction <= self.options.max_failed_fraction


# --- homotopy ----------------------------------------------------------------------

def _homogenize(p: Polynomial, degree: int) -> Polynomial:
    """X_0^degree p(X/X_0) with the homogenizing coordinate first"""
    terms = [((degree - sum(e),) + e, c) for e, c in p.to_numeric().terms]
    return Polynomial.from_terms(p.arity + 1, terms, NUMERIC)


def _relative_x0(X: np.ndarray) -> float:
    norm = np.linalg.norm(X)
    return abs(X[0]) / norm if norm > 0 else 0.0


class _Homotopy:
    """H(X, t) = (1 - t) gamma G(X) + t F(X) on the affine patch <a, X> = 1"""

    def __init__(self, target: PolynomialSystem, start: PolynomialSystem,
                 gamma: complex, patch: np.ndarray):
        self.target = target
        self.start = start
        self.gamma = gamma
        self.patch = patch

    def residual(self, X: np.ndarray, t: float) -> np.ndarray:
        body = (1 - t) * self.gamma * self.start(X) + t * self.target(X)
        return np.append(body, self.patch @ X - 1)

    def jacobian(self, X: np.ndarray, t: float) -> np.ndarray:
        body = (1 - t) * self.gamma * self.start.jacobian(X) + t * self.target.jacobian(X)
        return np.vstack([body, self.patch])

    def velocity(self, X: np.ndarray, t: float) -> np.ndarray:
        dt = np.append(self.target(X) - self.gamma * self.start(X), 0)
        return np.linalg.solve(self.jacobian(X, t), -dt)

    def correct(self, X: np.ndarray, t: float) -> Tuple[np.ndarray, bool, int]:
        previous = None
        for iteration in range(1, TRACKER_LIMITS['CORRECTOR_ITERATIONS'] + 1):
            delta = np.linalg.solve(self.jacobian(X, t), -self.residual(X, t))
            X = X + delta
            size = np.linalg.norm(delta)
            if previous is not None and size > 0.5 * previous:
                return X, False, iteration
            if size <= TRACKER_LIMITS['CORRECTOR_TOLERANCE'] * (1 + np.linalg.norm(X)):
                return X, True, iteration
            previous = size
        return X, False, TRACKER_LIMITS['CORRECTOR_ITERATIONS']


def _newton_refine(system: PolynomialSystem, x: np.ndarray) -> Tuple[np.ndarray, float, int]:
    iterations = 0
    for iterations in range(1, TRACKER_LIMITS['REFINE_ITERATIONS'] + 1):
        delta = np.linalg.lstsq(system.jacobian(x), -system(x), rcond=None)[0]
        x = x + delta
        if not np.all(np.isfinite(x)):
            break
        if np.linalg.norm(delta) <= 1e-15 * (1 + np.linalg.norm(x)):
            break
    residual = float(np.max(np.abs(system(x)))) if np.all(np.isfinite(x)) else float("inf")
    return x, residual, iterations


def _track(index: int, start: np.ndarray, homotopy: _Homotopy, affine: PolynomialSystem,
           options: SolverOptions) -> TrackedPath:
    X = start.copy()
    t, step, streak, steps, newton = 0.0, TRACKER_LIMITS['INITIAL_STEP'], 0, 0, 0
    checkpoint_t = 1 - TRACKER_LIMITS['ENDGAME_CHECKPOINT']
    checkpoint = None

    while 1 - t >= TRACKER_LIMITS['END_GAP'] and steps < TRACKER_LIMITS['MAX_STEPS']:
        steps += 1
        t_next = 1.0 if min(step, options.max_step) >= 1 - t else t + min(step, options.max_step)
        if checkpoint is None and t < checkpoint_t < t_next:
            # land on the checkpoint instead of jumping over it
            t_next = checkpoint_t
        h = t_next - t
        try:
            k1 = homotopy.velocity(X, t)
            k2 = homotopy.velocity(X + h / 2 * k1, t + h / 2)
            k3 = homotopy.velocity(X + h / 2 * k2, t + h / 2)
            k4 = homotopy.velocity(X + h * k3, t + h)
            predicted = X + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            corrected, ok, iterations = homotopy.correct(predicted, t + h)
            newton += iterations
            ok = ok and bool(np.all(np.isfinite(corrected)))
        except np.linalg.LinAlgError:
            ok = False
        if ok:
            X = corrected
            t = t_next
            streak += 1
            if streak >= TRACKER_LIMITS['EXPANSION_STREAK']:
                step, streak = min(2 * step, options.max_step), 0
            if checkpoint is None and t >= checkpoint_t:
                checkpoint = _relative_x0(X)
        else:
            step, streak = step / 2, 0
            if step < options.min_step:
                break

    start_point = tuple(complex(z) for z in start[1:] / start[0])
    reached = 1 - t < TRACKER_LIMITS['END_GAP']
    x0 = _relative_x0(X)
    heading_out = checkpoint is not None and checkpoint > 0 and x0 < TRACKER_LIMITS['INFINITY_RATIO'] * checkpoint
    if x0 < TRACKER_LIMITS['AT_INFINITY'] or heading_out:
        return TrackedPath(index, start_point, None, DIVERGED, float("inf"), newton, steps, t)
    if not reached:
        return TrackedPath(index, start_point, None, FAILED, float("inf"), newton, steps, t)

    x = X[1:] / X[0]
    if np.linalg.norm(x) > options.divergence_norm:
        return TrackedPath(index, start_point, None, DIVERGED, float("inf"), newton, steps, t)
    x, residual, iterations = _newton_refine(affine, x)
    newton += iterations
    status = CONVERGED if residual <= options.residual else FAILED
    return TrackedPath(index, start_point, x if status == CONVERGED else None, status,
                       residual, newton, steps, t)


def _nearest(representatives: List[np.ndarray], x: np.ndarray, radius: float) -> Optional[int]:
    """Index of the first representative within the relative dedup radius of x"""
    for k, rep in enumerate(representatives):
        if np.linalg.norm(x - rep) <= radius * max(1.0, np.linalg.norm(rep)):
            return k
    return None


def _cluster(points: List[np.ndarray], radius: float) -> Tuple[List[np.ndarray], List[int]]:
    """Greedy clustering in path order; the first member represents its cluster"""
    representatives, sizes = [], []
    for x in points:
        k = _nearest(representatives, x, radius)
        if k is None:
            representatives.append(x)
            sizes.append(1)
        else:
            sizes[k] += 1
    return representatives, sizes


def _conjugate_closure(system: PolynomialSystem, solutions: List[np.ndarray], multiplicities: List[int],
                       radius: float, residual: float) -> Tuple[List[np.ndarray], List[int], int]:
    """
    Real-coefficient systems have conjugation-symmetric solution sets; a
    representative whose conjugate was missed is refined from x-bar and added
    """
    if np.any(system.coefficients.imag != 0):
        return list(solutions), list(multiplicities), 0
    solutions, multiplicities = list(solutions), list(multiplicities)
    recovered = 0
    for x in list(solutions):
        mirror = np.conj(x)
        if _nearest(solutions, mirror, radius) is not None:
            continue
        refined, error, _ = _newton_refine(system, mirror)
        if error <= residual and _nearest(solutions, refined, radius) is None:
            solutions.append(refined)
            multiplicities.append(1)
            recovered += 1
    return solutions, multiplicities, recovered


def solve_square_system(polys: Sequence[Polynomial], seed: int,
                        options: Optional[SolverOptions] = None) -> SolutionSet:
    """All isolated solutions reached by a gamma-twisted total-degree homotopy"""
    options = options or SolverOptions()
    started = time.perf_counter()
    if not polys:
        raise EmptyInputError("empty polynomial system")
    size = len(polys)
    if any(p.arity != size for p in polys):
        raise DimensionMismatchError(f"system of {size} equations is not square")
    degrees = [p.degree() for p in polys]
    if min(degrees) < 1:
        raise ConstantPolynomialError("every equation of a square system needs degree >= 1")

    rng = np.random.default_rng(seed)
    gamma = complex(np.exp(2j * np.pi * rng.random()))
    patch = rng.normal(size=size + 1) + 1j * rng.normal(size=size + 1)

    target = PolynomialSystem([_homogenize(p, d) for p, d in zip(polys, degrees)])
    start_polys = []
    for i, d in enumerate(degrees):
        terms = [(tuple(d if k == i + 1 else 0 for k in range(size + 1)), 1),
                 (tuple(d if k == 0 else 0 for k in range(size + 1)), -1)]
        start_polys.append(Polynomial.from_terms(size + 1, terms, NUMERIC))
    homotopy = _Homotopy(target, PolynomialSystem(start_polys), gamma, patch)
    affine = PolynomialSystem(list(polys))

    starts = []
    for exponents in product(*(range(d) for d in degrees)):
        roots = np.exp(2j * np.pi * np.array(exponents) / np.array(degrees))
        X = np.concatenate([[1.0 + 0j], roots])
        starts.append(X / (patch @ X))

    logger.debug(f"Tracking {len(starts)} paths (degrees {degrees}, seed {seed})")
    if options.workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as executor:
            paths = list(executor.map(lambda item: _track(item[0], item[1], homotopy, affine, options),
                                      enumerate(starts)))
    else:
        paths = [_track(k, X, homotopy, affine, options) for k, X in enumerate(starts)]

    for path in paths:
        if path.status == FAILED:
            logger.warning(f"Path {path.index} failed at t = {path.final_t:.3e} "
                           f"after {path.steps} steps (residual {path.residual:.2e})")

    converged = [p.endpoint for p in paths if p.status == CONVERGED]
    solutions, multiplicities = _cluster(converged, options.dedup_radius)
    solutions, multiplicities, recovered = _conjugate_closure(
        affine, solutions, multiplicities, options.dedup_radius, options.residual)
    if recovered:
        logger.info(f"Recovered {recovered} solutions as conjugates of tracked endpoints")
    torus = [bool(np.all(np.abs(x) > options.torus)) for x in solutions]
    result = SolutionSet(solutions, multiplicities, torus, paths, options, seed,
                         elapsed=time.perf_counter() - started, gamma=gamma, recovered=recovered)
    logger.info(f"{result.path_count} paths: {len(converged)} converged, "
                f"{result.status_count(DIVERGED)} diverged, {result.failed_count} failed; "
                f"{result.total} distinct solutions, {result.torus_count} in the torus")
    return result


# --- rank and regularity -----------------------------------------------------------

def jacobian_singular_values(polys: Sequence[Polynomial], x: Sequence[complex]) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if len(x) != polys[0].arity:
        raise DimensionMismatchError(f"point of length {len(x)} for arity {polys[0].arity}")
    return np.linalg.svd(PolynomialSystem(polys).jacobian(x), compute_uv=False)


def jacobian_rank_estimate(polys: Sequence[Polynomial], x: Sequence[complex],
                           tol: float = SOLVER_TOLERANCES['RANK']) -> int:
    """Number of singular values above tol times the largest one"""
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    values = jacobian_singular_values(polys, x)
    if values.size == 0 or values[0] == 0:
        return 0
    return int(np.sum(values > tol * values[0]))


def _rank_ratio(polys: Sequence[Polynomial], x: np.ndarray, m: int) -> float:
    values = jacobian_singular_values(polys, x)
    if values.size < m or values[0] == 0:
        return 0.0
    return float(values[m - 1] / values[0])


def count_ed_critical_points(problem: EDProblem, seed: Optional[int] = None,
                             options: Optional[SolverOptions] = None) -> Tuple[int, SolutionSet]:
    """Distinct critical points whose x is not numerically singular on X"""
    options = options or SolverOptions()
    seed = problem.seed if seed is None else seed
    system = build_lagrange_system(problem)
    solved = solve_square_system(system.polynomials, seed, options)

    n, m = problem.n, problem.m
    ranks, ratios, ambiguous = [], [], []
    factor = SOLVER_TOLERANCES['AMBIGUITY_FACTOR']
    for x in solved.solutions:
        rank = jacobian_rank_estimate(problem.polynomials, x[:n], options.rank)
        ratio = _rank_ratio(problem.polynomials, x[:n], m)
        ranks.append(rank)
        ratios.append(ratio)
        ambiguous.append(options.rank <= ratio < options.rank * factor)
    solved = replace(solved, ranks=ranks, rank_ratios=ratios, ambiguous=ambiguous, expected_rank=m)
    if solved.ambiguous_count:
        logger.warning(f"{solved.ambiguous_count} solutions have a Jacobian rank ratio "
                       f"within a factor {factor:g} of the rank threshold")
    logger.info(f"ED critical points: {solved.regular_count} regular, "
                f"{solved.torus_count} in the torus")
    return solved.regular_count, solved


# --- facial and degeneracy probes -------------------------------------------------

@dataclass(frozen=True)
class ProbeVerdict:
    """SolutionFound/DegenerateWitness carry a residual-checked witness; NoneFoundHeuristic certifies nothing"""

    kind: str
    witness: Optional[Tuple[complex, ...]] = None
    residual: Optional[float] = None
    reason: str = ""

    @property
    def found(self) -> bool:
        return self.kind != NONE_FOUND


def _symbolic_obstruction(polys: Sequence[Polynomial]) -> Optional[str]:
    """A nonzero constant or a single monomial has no zero in the torus"""
    for k, p in enumerate(polys):
        if p.is_zero():
            continue
        if p.is_constant():
            return f"equation {k + 1} is the nonzero constant {p.to_text()}"
        if len(p.terms) == 1:
            return f"equation {k + 1} is the single monomial {p.to_text()}"
    return None


def _random_slice(arity: int, columns: Sequence[int], rng: np.random.Generator) -> Polynomial:
    coefficients = rng.normal(size=len(columns)) + 1j * rng.normal(size=len(columns))
    terms = [(tuple(1 if k == c else 0 for k in range(arity)), a) for c, a in zip(columns, coefficients)]
    terms.append(((0,) * arity, -1))
    return Polynomial.from_terms(arity, terms, NUMERIC)


def _gauss_newton_search(polys: Sequence[Polynomial], torus_columns: Sequence[int],
                         rng: np.random.Generator, torus_tol: float):
    """Random-start Gauss-Newton; first residual-checked torus witness or None"""
    system = PolynomialSystem([p.to_numeric() for p in polys])
    target = PROBE_LIMITS['WITNESS_RESIDUAL']
    best = float("inf")
    for _ in range(PROBE_LIMITS['STARTS']):
        x = rng.normal(size=system.arity) + 1j * rng.normal(size=system.arity)
        for _ in range(PROBE_LIMITS['NEWTON_ITERATIONS']):
            values = system(x)
            if np.max(np.abs(values)) < target * 1e-3:
                break
            delta = np.linalg.lstsq(system.jacobian(x), -values, rcond=None)[0]
            x = x + delta
            if not np.all(np.isfinite(x)) or np.linalg.norm(delta) <= 1e-15 * (1 + np.linalg.norm(x)):
                break
        if not np.all(np.isfinite(x)):
            continue
        residual = float(np.max(np.abs(system(x))))
        best = min(best, residual)
        if residual < target and np.all(np.abs(x[list(torus_columns)]) > torus_tol):
            return x, residual
    logger.debug(f"No torus witness after {PROBE_LIMITS['STARTS']} starts (best residual {best:.2e})")
    return None


def facial_solution_probe(problem: EDProblem, w: Sequence[int], seed: int,
                          options: Optional[SolverOptions] = None) -> ProbeVerdict:
    """Best-effort search for a torus solution of the facial system under w"""
    options = options or SolverOptions()
    polys = facial_system(problem, w)
    reason = _symbolic_obstruction(polys)
    if reason:
        return ProbeVerdict(NONE_FOUND, reason=reason)
    arity = problem.n + problem.m
    rng = np.random.default_rng(seed)
    # face systems are weighted homogeneous, so solutions come in orbits: slice once
    sliced = list(polys) + [_random_slice(arity, range(arity), rng)]
    found = _gauss_newton_search(sliced, range(arity), rng, options.torus)
    if found is None:
        return ProbeVerdict(NONE_FOUND, reason="random-start Newton found no torus solution")
    x, residual = found
    return ProbeVerdict(SOLUTION_FOUND, tuple(complex(z) for z in x), residual)


def degeneracy_probe(polys: Sequence[Polynomial], q: Sequence[int], seed: int,
                     options: Optional[SolverOptions] = None) -> ProbeVerdict:
    """
    Search for a torus point where the face system f_q vanishes and its
    Jacobian drops below rank m; witness is x followed by the kernel covector
    """
    options = options or SolverOptions()
    if not polys:
        raise EmptyInputError("empty polynomial system")
    n, m = polys[0].arity, len(polys)
    faces = [face_polynomial(f, q) for f in polys]
    reason = _symbolic_obstruction(faces)
    if reason:
        return ProbeVerdict(NONE_FOUND, reason=reason)

    arity = n + m
    covector = [Polynomial.variable(arity, n + j, faces[0].domain) for j in range(m)]
    equations = [face.lift(arity) for face in faces]
    for i in range(n):
        combination = Polynomial.zero(arity, faces[0].domain)
        for j, face in enumerate(faces):
            combination = combination + covector[j] * partial_derivative(face, i).lift(arity)
        equations.append(combination)
    equations = [p.to_numeric() for p in equations]
    rng = np.random.default_rng(seed)
    equations.append(_random_slice(arity, range(n), rng))
    equations.append(_random_slice(arity, range(n, arity), rng))
    found = _gauss_newton_search(equations, range(n), rng, options.torus)
    if found is None:
        return ProbeVerdict(NONE_FOUND, reason="random-start Newton found no singular torus point")
    x, residual = found
    return ProbeVerdict(DEGENERATE_WITNESS, tuple(complex(z) for z in x), residual)
