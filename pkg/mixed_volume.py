"""
Normalized mixed volume of d polytopes in R^d
Inclusion-exclusion over Minkowski sums (reference) and mixed-cell
enumeration of a randomly lifted fine mixed subdivision (fast path)
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from constants import ALGORITHM_CELLS, ALGORITHM_IE, LIFTING, MV_NORMALIZATION
from error_handler import DimensionMismatchError, EmptyInputError, NonGenericLiftingError
from exact_linalg import bareiss_det, dot, is_feasible, lcm_of_denominators, rank, solve, sub
from logger import logger
from polytope import Polytope, minkowski_sum, volume


@dataclass(frozen=True)
class LiftedConfiguration:
    """Per-polytope points with the integer lifting drawn for them"""

    points: Tuple[Tuple[Tuple, ...], ...]
    liftings: Tuple[Tuple[int, ...], ...]
    seed: int


@dataclass(frozen=True)
class MixedCell:
    """One edge per polytope (input order); volume is |det| of the edge vectors"""

    edges: Tuple[Tuple[Tuple, Tuple], ...]
    volume: object
    inner_normal: Tuple[Fraction, ...]
    key: Tuple[Tuple[int, int], ...] = field(compare=False, default=())


@dataclass
class MixedVolumeResult:
    value: object
    algorithm: str
    cells: Tuple[MixedCell, ...] = ()
    seed: Optional[int] = None
    seeds_tried: Tuple[int, ...] = ()
    lifting: Optional[LiftedConfiguration] = None
    elapsed: float = 0.0
    normalization: str = MV_NORMALIZATION


class _NonGenericLifting(Exception):
    """The current lifting produced a lower cell that is not a fine mixed cell"""


def _integral(value: Fraction):
    return value.numerator if value.denominator == 1 else value


def _check_input(polytopes: Sequence[Polytope]) -> int:
    if not polytopes:
        raise EmptyInputError("mixed volume of an empty sequence")
    d = len(polytopes)
    for i, polytope in enumerate(polytopes):
        if polytope.ambient_dim != d:
            raise DimensionMismatchError(
                f"polytope {i} lives in dimension {polytope.ambient_dim}, expected {d} for {d} polytopes")
        if not polytope.vertices:
            raise EmptyInputError(f"polytope {i} is empty")
    return d


def mixed_volume_ie(polytopes: Sequence[Polytope]) -> MixedVolumeResult:
    """
    MV = sum over nonempty S of (-1)^(d-|S|) vol(sum_{i in S} P_i),
    normalized so that MV(P, ..., P) = d! vol(P)
    """
    start = time.perf_counter()
    d = _check_input(polytopes)
    sums = {}
    total = Fraction(0)
    for mask in range(1, 1 << d):
        low = mask & -mask
        index = low.bit_length() - 1
        rest = mask ^ low
        sums[mask] = polytopes[index] if rest == 0 else minkowski_sum(sums[rest], polytopes[index])
        sign = -1 if (d - bin(mask).count("1")) % 2 else 1
        total += sign * volume(sums[mask])
    elapsed = time.perf_counter() - start
    logger.debug(f"Inclusion-exclusion MV over {(1 << d) - 1} Minkowski sums in {elapsed:.3f}s")
    return MixedVolumeResult(value=_integral(total), algorithm=ALGORITHM_IE, elapsed=elapsed)


class _CellEnumerator:
    """Depth-first search over lower edges, pruned by exact feasibility"""

    def __init__(self, points: List[List[Tuple[int, ...]]], liftings: List[List[int]]):
        self.points = points
        self.liftings = liftings
        self.d = len(points)

    def edge_constraints(self, i: int, a: int, b: int):
        pts, omega = self.points[i], self.liftings[i]
        equality = (sub(pts[b], pts[a]), omega[a] - omega[b])
        inequalities = [(sub(pts[c], pts[a]), omega[a] - omega[c])
                        for c in range(len(pts)) if c != a and c != b]
        return equality, inequalities

    def lower_edges(self, i: int) -> List[Tuple[int, int]]:
        edges = []
        for a, b in combinations(range(len(self.points[i])), 2):
            equality, inequalities = self.edge_constraints(i, a, b)
            if is_feasible(inequalities, [equality], self.d):
                edges.append((a, b))
        return edges

    def search(self, order: List[int], lower: List[List[Tuple[int, int]]],
               first_edges: List[Tuple[int, int]]):
        cells = []
        for edge in first_edges:
            self._descend(order, lower, [(order[0], edge)], cells)
        return cells

    def _descend(self, order, lower, chosen, cells):
        equalities, inequalities, vectors = [], [], []
        for i, (a, b) in chosen:
            equality, ineqs = self.edge_constraints(i, a, b)
            equalities.append(equality)
            inequalities.extend(ineqs)
            vectors.append(equality[0])

        if rank(vectors) < len(vectors):
            if is_feasible(inequalities, equalities, self.d):
                raise _NonGenericLifting(f"dependent lower edges {chosen}")
            return

        if len(chosen) == self.d:
            self._leaf(chosen, equalities, cells)
            return

        if not is_feasible(inequalities, equalities, self.d):
            return

        i = order[len(chosen)]
        for edge in lower[i]:
            self._descend(order, lower, chosen + [(i, edge)], cells)

    def _leaf(self, chosen, equalities, cells):
        gamma = solve([eq[0] for eq in equalities], [eq[1] for eq in equalities])
        tight = False
        for i, (a, b) in chosen:
            pts, omega = self.points[i], self.liftings[i]
            base = dot(gamma, pts[a]) + omega[a]
            for c in range(len(pts)):
                if c == a or c == b:
                    continue
                slack = dot(gamma, pts[c]) + omega[c] - base
                if slack < 0:
                    return
                if slack == 0:
                    tight = True
        if tight:
            raise _NonGenericLifting(f"lower cell through {chosen} is not fine")
        by_polytope = dict(chosen)
        key = tuple(by_polytope[i] for i in range(self.d))
        det = abs(bareiss_det([sub(self.points[i][b], self.points[i][a]) for i, (a, b) in
                               ((i, by_polytope[i]) for i in range(self.d))]))
        cells.append((key, det, gamma))


def _draw_lifting(points, seed: int, attempt: int):
    rng = np.random.default_rng(seed + attempt)
    bound = LIFTING['INITIAL_RANGE'] * LIFTING['RANGE_GROWTH'] ** attempt
    return [[int(x) for x in rng.integers(1, bound, size=len(pts))] for pts in points]


def _enumerate_cells(polytopes: Sequence[Polytope], seed: int, workers: int = 1):
    d = _check_input(polytopes)
    scale = lcm_of_denominators(x for p in polytopes for v in p.vertices for x in v)
    points = [[tuple(int(x * scale) for x in v) for v in p.vertices] for p in polytopes]
    seeds_tried = []

    if any(len(pts) < 2 for pts in points):
        # a point summand admits no edge, hence no mixed cell
        return [], seeds_tried, None, scale

    for attempt in range(LIFTING['RETRY_BUDGET']):
        attempt_seed = seed + attempt
        seeds_tried.append(attempt_seed)
        liftings = _draw_lifting(points, seed, attempt)
        enumerator = _CellEnumerator(points, liftings)
        try:
            lower = [enumerator.lower_edges(i) for i in range(d)]
            order = sorted(range(d), key=lambda i: (len(lower[i]), i))
            first = lower[order[0]]
            chunks = [first[w::max(workers, 1)] for w in range(max(workers, 1))]
            if workers > 1 and len(first) > 1:
                with ThreadPoolExecutor(max_workers=workers) as executor:
                    parts = list(executor.map(lambda chunk: enumerator.search(order, lower, chunk), chunks))
            else:
                parts = [enumerator.search(order, lower, first)]
        except _NonGenericLifting as e:
            logger.warning(f"Lifting with seed {attempt_seed} is not generic ({e}); reseeding")
            continue
        raw = sorted((cell for part in parts for cell in part), key=lambda cell: cell[0])
        lifting = LiftedConfiguration(
            points=tuple(tuple(p.vertices) for p in polytopes),
            liftings=tuple(tuple(w) for w in liftings),
            seed=attempt_seed,
        )
        cells = []
        for key, det, gamma in raw:
            edges = tuple((polytopes[i].vertices[a], polytopes[i].vertices[b]) for i, (a, b) in enumerate(key))
            cells.append(MixedCell(
                edges=edges,
                volume=_integral(Fraction(det, scale ** d)),
                inner_normal=tuple(scale * g for g in gamma),
                key=key,
            ))
        return cells, seeds_tried, lifting, scale

    raise NonGenericLiftingError("no generic lifting found within the retry budget", seeds_tried)


def mixed_cells(polytopes: Sequence[Polytope], seed: int, workers: int = 1) -> Tuple[MixedCell, ...]:
    """Mixed cells of the fine mixed subdivision induced by the seeded lifting"""
    cells, _, _, _ = _enumerate_cells(polytopes, seed, workers)
    return tuple(cells)


def mixed_volume_cells(polytopes: Sequence[Polytope], seed: int, workers: int = 1) -> MixedVolumeResult:
    """Sum of mixed cell volumes; equals mixed_volume_ie on the same input"""
    start = time.perf_counter()
    cells, seeds_tried, lifting, _ = _enumerate_cells(polytopes, seed, workers)
    total = sum((Fraction(cell.volume) for cell in cells), Fraction(0))
    elapsed = time.perf_counter() - start
    logger.debug(f"Mixed-cell MV from {len(cells)} cells in {elapsed:.3f}s")
    return MixedVolumeResult(
        value=_integral(total),
        algorithm=ALGORITHM_CELLS,
        cells=tuple(cells),
        seed=seed,
        seeds_tried=tuple(seeds_tried),
        lifting=lifting,
        elapsed=elapsed,
    )


def mixed_volume(polytopes: Sequence[Polytope], algorithm: str = ALGORITHM_IE,
                 seed: int = 0, workers: int = 1) -> MixedVolumeResult:
    """Dispatch on the algorithm tag"""
    if algorithm == ALGORITHM_IE:
        return mixed_volume_ie(polytopes)
    if algorithm == ALGORITHM_CELLS:
        return mixed_volume_cells(polytopes, seed, workers)
    raise ValueError(f"unknown mixed volume algorithm {algorithm!r}")
