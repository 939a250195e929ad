"""
Exact rational polyhedral geometry
Convex hulls (beneath-beyond), faces, Minkowski sums, placing
triangulations, volumes and facet normals; no tolerances anywhere
"""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, List, Sequence, Tuple

from cache_manager import cache_manager
from error_handler import DimensionMismatchError, EmptyInputError, ZeroDirectionError
from exact_linalg import (
    bareiss_det,
    dot,
    integer_normal,
    lcm_of_denominators,
    primitive,
    rank,
    rref,
    solve,
    sub,
)

Point = Tuple  # rational coordinates, ints where integral


def _normalize(value):
    value = Fraction(value)
    return value.numerator if value.denominator == 1 else value


def _as_point(coords: Iterable) -> Point:
    return tuple(_normalize(x) for x in coords)


@dataclass(frozen=True)
class Polytope:
    """V-representation: irredundant, canonically sorted vertex tuple"""

    ambient_dim: int
    vertices: Tuple[Point, ...]

    @property
    def affine_dim(self) -> int:
        return _affine_frame(self.vertices)[2]

    def is_full_dimensional(self) -> bool:
        return self.affine_dim == self.ambient_dim

    def translate(self, vector: Sequence) -> "Polytope":
        if len(vector) != self.ambient_dim:
            raise DimensionMismatchError(f"translation of length {len(vector)} in dimension {self.ambient_dim}")
        shift = _as_point(vector)
        return Polytope(self.ambient_dim, tuple(sorted(
            _as_point(a + b for a, b in zip(v, shift)) for v in self.vertices)))

    def scale(self, factor) -> "Polytope":
        """Homothety about the origin by a positive factor"""
        factor = Fraction(factor)
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Polytope(self.ambient_dim, tuple(sorted(
            _as_point(factor * x for x in v) for v in self.vertices)))


@dataclass(frozen=True)
class Triangulation:
    """Simplices as index tuples into the polytope's vertex tuple"""

    polytope: Polytope
    simplices: Tuple[Tuple[int, ...], ...]


def _affine_frame(points: Sequence[Point]):
    """Base point, reduced basis of the difference space, its pivot columns and dimension"""
    base = points[0]
    differences = [sub(p, base) for p in points[1:]]
    basis, pivots = rref(differences) if differences else ([], [])
    return base, (basis, pivots), len(pivots)


def _projected_integer_points(points: Sequence[Point], pivots: Sequence[int]):
    """Project onto pivot coordinates and clear denominators"""
    projected = [tuple(p[c] for c in pivots) for p in points]
    scale = lcm_of_denominators(x for p in projected for x in p)
    return [tuple(int(x * scale) for x in p) for p in projected], scale


class _BeneathBeyond:
    """
    Incremental hull of integer points spanning Z^k.

    The boundary is kept as simplicial facets (vertex index tuple, inner
    normal, offset) with <normal, x> >= offset on the hull. Inserting a point
    replaces the facets it sees by cones over the horizon; with
    collect_simplices the same pass yields the placing triangulation.
    """

    def __init__(self, points: List[Tuple[int, ...]], collect_simplices: bool = False):
        self.points = points
        self.k = len(points[0])
        self.facets: List[Tuple[Tuple[int, ...], Tuple[int, ...], int]] = []
        self.simplices: List[Tuple[int, ...]] = []
        self.collect = collect_simplices
        self._build()

    def _initial_simplex(self) -> List[int]:
        chosen = [0]
        differences = []
        for idx in range(1, len(self.points)):
            candidate = differences + [sub(self.points[idx], self.points[0])]
            if rank(candidate) == len(candidate):
                differences = candidate
                chosen.append(idx)
                if len(chosen) == self.k + 1:
                    return chosen
        raise DimensionMismatchError("points do not span their ambient space")

    def _make_facet(self, indices: Tuple[int, ...]):
        pts = [self.points[i] for i in indices]
        normal = integer_normal([sub(p, pts[0]) for p in pts[1:]])
        offset = dot(normal, pts[0])
        # the centroid of the initial simplex stays interior
        if dot(normal, self._interior_sum) < self._interior_weight * offset:
            normal = tuple(-x for x in normal)
            offset = -offset
        return tuple(sorted(indices)), normal, offset

    def _build(self):
        simplex = self._initial_simplex()
        self._interior_sum = tuple(sum(self.points[i][c] for i in simplex) for c in range(self.k))
        self._interior_weight = len(simplex)
        for omitted in simplex:
            self.facets.append(self._make_facet(tuple(i for i in simplex if i != omitted)))
        if self.collect:
            self.simplices.append(tuple(sorted(simplex)))

        in_simplex = set(simplex)
        for idx in range(len(self.points)):
            if idx not in in_simplex:
                self._insert(idx)

    def _insert(self, idx: int):
        p = self.points[idx]
        visible = [f for f in self.facets if dot(f[1], p) < f[2]]
        if not visible:
            return
        ridges = Counter()
        for vertices, _, _ in visible:
            for pos in range(len(vertices)):
                ridges[vertices[:pos] + vertices[pos + 1:]] += 1
        visible_keys = {f[0] for f in visible}
        self.facets = [f for f in self.facets if f[0] not in visible_keys]
        for ridge, count in ridges.items():
            if count == 1:
                self.facets.append(self._make_facet(ridge + (idx,)))
        if self.collect:
            for vertices, _, _ in visible:
                self.simplices.append(tuple(sorted(vertices + (idx,))))

    def vertex_indices(self) -> List[int]:
        """Boundary points whose incident facet normals span Z^k"""
        on_boundary = sorted({i for f in self.facets for i in f[0]})
        distinct = {(normal, offset) for _, normal, offset in self.facets}
        result = []
        for i in on_boundary:
            p = self.points[i]
            incident = [normal for normal, offset in distinct if dot(normal, p) == offset]
            if rank(incident) == self.k:
                result.append(i)
        return result

    def distinct_facets(self) -> List[Tuple[Tuple[int, ...], int]]:
        return sorted({(normal, offset) for _, normal, offset in self.facets})


def convex_hull(points: Iterable[Sequence]) -> Polytope:
    """Irredundant vertex set of the hull, exact"""
    unique = sorted({_as_point(p) for p in points})
    if not unique:
        raise EmptyInputError("convex hull of an empty point set")
    dims = {len(p) for p in unique}
    if len(dims) != 1:
        raise DimensionMismatchError(f"points of mixed dimensions {sorted(dims)}")
    ambient = dims.pop()
    key = ("hull", tuple(unique))
    return cache_manager.get_or_compute(key, lambda: _convex_hull(unique, ambient))


def _convex_hull(unique: List[Point], ambient: int) -> Polytope:
    if len(unique) == 1:
        return Polytope(ambient, tuple(unique))
    _, (_, pivots), k = _affine_frame(unique)
    if k == 0:
        return Polytope(ambient, (unique[0],))
    projected, _ = _projected_integer_points(unique, pivots)
    hull = _BeneathBeyond(projected)
    vertices = tuple(sorted(unique[i] for i in hull.vertex_indices()))
    return Polytope(ambient, vertices)


def face(polytope: Polytope, direction: Sequence) -> Polytope:
    """Sub-polytope of the vertices minimizing <w, .>"""
    if len(direction) != polytope.ambient_dim:
        raise DimensionMismatchError(
            f"direction of length {len(direction)} in dimension {polytope.ambient_dim}")
    w = _as_point(direction)
    if all(x == 0 for x in w):
        raise ZeroDirectionError("face direction is zero")
    values = [dot(w, v) for v in polytope.vertices]
    minimum = min(values)
    return Polytope(polytope.ambient_dim,
                    tuple(v for v, value in zip(polytope.vertices, values) if value == minimum))


def minkowski_sum(first: Polytope, second: Polytope) -> Polytope:
    """Hull of all pairwise vertex sums"""
    if first.ambient_dim != second.ambient_dim:
        raise DimensionMismatchError(
            f"Minkowski sum of polytopes in dimensions {first.ambient_dim} and {second.ambient_dim}")
    return convex_hull(tuple(a + b for a, b in zip(p, q))
                       for p in first.vertices for q in second.vertices)


def triangulate(polytope: Polytope) -> Triangulation:
    """Placing triangulation, vertices placed in canonical (sorted) order"""
    return cache_manager.get_or_compute(("triangulation", polytope), lambda: _triangulate(polytope))


def _triangulate(polytope: Polytope) -> Triangulation:
    vertices = polytope.vertices
    _, (_, pivots), k = _affine_frame(vertices)
    if k == 0:
        return Triangulation(polytope, ((0,),))
    projected, _ = _projected_integer_points(vertices, pivots)
    hull = _BeneathBeyond(projected, collect_simplices=True)
    return Triangulation(polytope, tuple(hull.simplices))


def volume(polytope: Polytope) -> Fraction:
    """Ambient Euclidean volume; zero unless full-dimensional"""
    return cache_manager.get_or_compute(("volume", polytope), lambda: _volume(polytope))


def _volume(polytope: Polytope) -> Fraction:
    d = polytope.ambient_dim
    if polytope.affine_dim < d:
        return Fraction(0)
    points, scale = _projected_integer_points(polytope.vertices, list(range(d)))
    total = 0
    for simplex in triangulate(polytope).simplices:
        base = points[simplex[0]]
        total += abs(bareiss_det([sub(points[i], base) for i in simplex[1:]]))
    return Fraction(total, factorial(d) * scale ** d)


def facet_normals(polytope: Polytope) -> Tuple[Tuple[int, ...], ...]:
    """
    Primitive inner normals of the facets, relative to the affine hull for
    lower-dimensional polytopes (normals then lie in the hull's direction space)
    """
    return cache_manager.get_or_compute(("facet_normals", polytope), lambda: _facet_normals(polytope))


def _facet_normals(polytope: Polytope) -> Tuple[Tuple[int, ...], ...]:
    vertices = polytope.vertices
    _, (basis, pivots), k = _affine_frame(vertices)
    if k == 0:
        return ()
    projected, _ = _projected_integer_points(vertices, pivots)
    hull = _BeneathBeyond(projected)
    gram = [[dot(a, b) for b in basis] for a in basis]
    normals = set()
    for normal, _ in hull.distinct_facets():
        if k == polytope.ambient_dim:
            normals.add(tuple(normal))
            continue
        weights = solve(gram, normal)
        ambient = [sum(weights[r] * basis[r][c] for r in range(k)) for c in range(polytope.ambient_dim)]
        normals.add(primitive(ambient))
    return tuple(sorted(normals))
