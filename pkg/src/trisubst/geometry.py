"""Lattice points in Z^(n-1), rigid motions, prototiles and exact predicates.

A point is an integer tuple c with plane position sum(c[i] * u_i), where
u_i = (cos(i pi/n), sin(i pi/n)), i = 0..n-2. For prime n this map is
injective, so points compare exactly by their tuples.

Predicates first try a float evaluation; anything within ``EPS`` of zero is
re-decided in Z[a_2]: with s = sin(pi/n), x = X/2 and y = s*Y where X, Y are
integer polynomials in a_2, so a cross product is (s/2)(X1 Y2 - X2 Y1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

from .cyclotomic import (
    InflationFactor,
    check_order,
    chebyshev_lengths,
    exact_sign,
    length_class,
    minimal_polynomial,
    mulmod,
    normalize_triple,
    reduce_poly,
)

LatticePoint = tuple[int, ...]

EPS = 1e-6


class Lattice:
    """Precomputed integer and float tables for one order of symmetry."""

    def __init__(self, n: int):
        check_order(n)
        self.n = n
        self.dim = n - 1
        self.d = (n - 1) // 2
        dim = self.dim
        unit = [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
        # u_{n-1} from the 2n-th cyclotomic relation: alternating signs
        last = tuple((-1) ** (j + 1) for j in range(dim))
        half = unit + [last]
        self.dirs = tuple(half + [tuple(-c for c in v) for v in half])
        self.zero = (0,) * dim
        self._rot = [self._matrix(lambda j, r=r: self.direction(j + r)) for r in range(2 * n)]
        self._flip = self._matrix(lambda j: self.direction(-j))
        self._scale = {k: self._matrix(lambda j, k=k: scaled_direction(n, k, j, self)) for k in range(1, self.d + 1)}
        self.cos = tuple(math.cos(i * math.pi / n) for i in range(dim))
        self.sin = tuple(math.sin(i * math.pi / n) for i in range(dim))
        q = minimal_polynomial(n).coeffs
        self.q = q
        polys = chebyshev_lengths(n)  # polys[k + 1] = a_k

        def vec(p):
            return tuple(int(c) for c in reduce_poly(list(p), q))

        def sub(a, b):
            m = max(len(a), len(b))
            return [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(m)]

        self.xcoef = tuple(vec(sub(polys[j + 2], polys[j])) for j in range(dim))  # 2cos(j pi/n)
        self.ycoef = tuple(vec(polys[j + 1]) for j in range(dim))  # sin(j pi/n)/sin(pi/n)
        a2sq = mulmod([0, 1], [0, 1], q)
        self.four_minus_a2sq = tuple(int(c) for c in reduce_poly([4 - a2sq[0]] + [-c for c in a2sq[1:]], q))
        self._fcache: dict[LatticePoint, tuple[float, float]] = {}

    def _matrix(self, column):
        # columns: image of each basis vector
        return tuple(column(j) for j in range(self.dim))

    def direction(self, m: int) -> LatticePoint:
        return self.dirs[m % (2 * self.n)]

    @staticmethod
    def _apply_columns(cols, p: Sequence[int]) -> LatticePoint:
        out = [0] * len(cols)
        for c, col in zip(p, cols):
            if c:
                for i, x in enumerate(col):
                    if x:
                        out[i] += c * x
        return tuple(out)

    def rotate(self, p, r: int) -> LatticePoint:
        return self._apply_columns(self._rot[r % (2 * self.n)], p)

    def reflect(self, p) -> LatticePoint:
        return self._apply_columns(self._flip, p)

    def scale_length(self, p, k: int) -> LatticePoint:
        return self._apply_columns(self._scale[k], p)

    def scale(self, lam: InflationFactor, p) -> LatticePoint:
        out = self.zero
        for k, c in enumerate(lam.coeffs_by_length, start=1):
            if c:
                out = add(out, mul(self.scale_length(p, k), c))
        return out

    def embed(self, p) -> tuple[float, float]:
        hit = self._fcache.get(p)
        if hit is None:
            x = y = 0.0
            for c, cs, sn in zip(p, self.cos, self.sin):
                if c:
                    x += c * cs
                    y += c * sn
            hit = (x, y)
            if len(self._fcache) < 1_000_000:
                self._fcache[p] = hit
        return hit

    def xy_exact(self, p):
        """Integer coefficient vectors X, Y with x = X/2 and y = sin(pi/n) * Y."""
        d = self.d
        xs = [0] * d
        ys = [0] * d
        for c, xc, yc in zip(p, self.xcoef, self.ycoef):
            if c:
                for i in range(d):
                    xs[i] += c * xc[i]
                    ys[i] += c * yc[i]
        return xs, ys

    def cross_exact(self, u, v) -> list[int]:
        """Coefficients of (2/sin(pi/n)) * cross(u, v) in Z[a_2]."""
        xu, yu = self.xy_exact(u)
        xv, yv = self.xy_exact(v)
        a = mulmod(xu, yv, self.q)
        b = mulmod(xv, yu, self.q)
        return [s - t for s, t in zip(a, b)]

    def dot_exact(self, u, v) -> list[int]:
        """Coefficients of 4 * dot(u, v) in Z[a_2]."""
        xu, yu = self.xy_exact(u)
        xv, yv = self.xy_exact(v)
        a = mulmod(xu, xv, self.q)
        b = mulmod(mulmod(yu, yv, self.q), self.four_minus_a2sq, self.q)
        return [s + t for s, t in zip(a, b)]

    def orient_exact(self, p, q, r) -> int:
        return exact_sign(self.n, self.cross_exact(sub(q, p), sub(r, p)))

    def orient(self, p, q, r) -> int:
        px, py = self.embed(p)
        qx, qy = self.embed(q)
        rx, ry = self.embed(r)
        c = (qx - px) * (ry - py) - (qy - py) * (rx - px)
        if c > EPS:
            return 1
        if c < -EPS:
            return -1
        return _orient_cached(self.n, sub(q, p), sub(r, p))

    def dot_sign(self, u, v) -> int:
        ux, uy = self.embed(u)
        vx, vy = self.embed(v)
        c = ux * vx + uy * vy
        if c > EPS:
            return 1
        if c < -EPS:
            return -1
        return exact_sign(self.n, self.dot_exact(u, v))


@lru_cache(maxsize=None)
def lattice(n: int) -> Lattice:
    return Lattice(n)


@lru_cache(maxsize=200_000)
def _orient_cached(n: int, u, v) -> int:
    return lattice(n).orient_exact(lattice(n).zero, u, v)


def add(a, b) -> LatticePoint:
    return tuple(x + y for x, y in zip(a, b))


def sub(a, b) -> LatticePoint:
    return tuple(x - y for x, y in zip(a, b))


def mul(a, c: int) -> LatticePoint:
    return tuple(x * c for x in a)


def unit_vector(n: int, i: int) -> LatticePoint:
    return lattice(n).direction(i)


def scaled_direction(n: int, k: int, i: int, lat: Lattice | None = None) -> LatticePoint:
    """a_k * u_i as sum_{j<k} u_{i-k+1+2j}."""
    lat = lat or lattice(n)
    if not 1 <= k <= (n - 1) // 2:
        raise ValueError(f"length index {k} outside 1..{(n - 1) // 2}")
    out = lat.zero
    for j in range(k):
        out = add(out, lat.direction(i - k + 1 + 2 * j))
    return out


@dataclass(frozen=True)
class RigidMotion:
    """p -> R^rot F^flip p + shift, with F the reflection across the x-axis."""

    rot: int
    flip: bool
    shift: LatticePoint

    def compose(self, n: int, inner: RigidMotion) -> RigidMotion:
        """self after inner."""
        lat = lattice(n)
        rot = (self.rot + (-inner.rot if self.flip else inner.rot)) % (2 * n)
        return RigidMotion(rot, self.flip != inner.flip, add(apply_motion(n, RigidMotion(self.rot, self.flip, lat.zero), inner.shift), self.shift))

    def inverse(self, n: int) -> RigidMotion:
        lat = lattice(n)
        rot = self.rot if self.flip else (-self.rot) % (2 * n)
        lin = RigidMotion(rot, self.flip, lat.zero)
        return RigidMotion(rot, self.flip, mul(apply_motion(n, lin, self.shift), -1))

    def map_direction(self, n: int, m: int) -> int:
        return ((-m if self.flip else m) + self.rot) % (2 * n)


def identity_motion(n: int) -> RigidMotion:
    return RigidMotion(0, False, lattice(n).zero)


def apply_motion(n: int, g: RigidMotion, p) -> LatticePoint:
    lat = lattice(n)
    if g.flip:
        p = lat.reflect(p)
    if g.rot % (2 * n):
        p = lat.rotate(p, g.rot)
    return add(p, g.shift)


def scale_by(lam: InflationFactor, p) -> LatticePoint:
    return lattice(lam.n).scale(lam, p)


def embed(n: int, p, prec: int | None = None):
    """Plane coordinates of p; double precision unless ``prec`` bits are asked for."""
    if prec is None:
        return lattice(n).embed(tuple(p))
    import mpmath

    with mpmath.workprec(prec):
        x = mpmath.fsum(c * mpmath.cos(i * mpmath.pi / n) for i, c in enumerate(p))
        y = mpmath.fsum(c * mpmath.sin(i * mpmath.pi / n) for i, c in enumerate(p))
    return x, y


def orientation_sign(n: int, p, q, r) -> int:
    """Sign of the signed area of (p, q, r): +1 counterclockwise."""
    return lattice(n).orient(tuple(p), tuple(q), tuple(r))


def orientation_sign_exact(n: int, p, q, r) -> int:
    return lattice(n).orient_exact(tuple(p), tuple(q), tuple(r))


class Edge(NamedTuple):
    """Directed segment; for open edges the uncovered side is on the left."""

    start: LatticePoint
    end: LatticePoint
    length: int  # length class k, segment length a_k
    direction: int  # index m with end - start = a_k * u_m
    owner: int = -1  # index of the tile in the patch, -1 for starters
    side: int = -1  # edge index within the owner's prototile

    def key(self):
        return (self.start, self.end) if self.start <= self.end else (self.end, self.start)

    def reversed(self) -> Edge:
        return self._replace(start=self.end, end=self.start, direction=(self.direction + len(self.start) + 1) % (2 * (len(self.start) + 1)))


def _strictly_between(lat: Lattice, a, b, p) -> bool:
    """p strictly inside segment ab, given the three points are collinear."""
    if p == a or p == b:
        return False
    return lat.dot_sign(sub(p, a), sub(b, a)) > 0 and lat.dot_sign(sub(p, b), sub(a, b)) > 0


def _on_closed_segment(lat, a, b, p) -> bool:
    return p == a or p == b or _strictly_between(lat, a, b, p)


def segment_relation(n: int, e1, e2, exact: bool = True) -> str:
    """One of disjoint, equal, shared_endpoint_only, collinear_overlap, crossing, touching."""
    lat = lattice(n)
    orient = lat.orient_exact if exact else lat.orient
    p1, q1 = tuple(e1[0]), tuple(e1[1])
    p2, q2 = tuple(e2[0]), tuple(e2[1])
    if {p1, q1} == {p2, q2}:
        return "equal"
    o1 = orient(p1, q1, p2)
    o2 = orient(p1, q1, q2)
    o3 = orient(p2, q2, p1)
    o4 = orient(p2, q2, q1)
    shared = len({p1, q1} & {p2, q2})
    if o1 == 0 and o2 == 0:
        # collinear: compare interval overlap along the common line
        inner = [
            _strictly_between(lat, p1, q1, p2),
            _strictly_between(lat, p1, q1, q2),
            _strictly_between(lat, p2, q2, p1),
            _strictly_between(lat, p2, q2, q1),
        ]
        if any(inner):
            return "collinear_overlap"
        return "shared_endpoint_only" if shared else "disjoint"
    if shared:
        return "shared_endpoint_only"
    if o1 * o2 < 0 and o3 * o4 < 0:
        return "crossing"
    if (o1 == 0 and _strictly_between(lat, p1, q1, p2)) or (o2 == 0 and _strictly_between(lat, p1, q1, q2)):
        return "touching"
    if (o3 == 0 and _strictly_between(lat, p2, q2, p1)) or (o4 == 0 and _strictly_between(lat, p2, q2, q1)):
        return "touching"
    return "disjoint"


@dataclass(frozen=True)
class Triangle:
    """Triangle with angles k_i pi/n; vertex i has angle angles[i], vertices counterclockwise.

    Edge i joins the two vertices other than vertex i, running from vertex
    i+1 to vertex i+2, and has length class of a_{angles[i]}.
    """

    n: int
    angles: tuple[int, int, int]
    vertices: tuple[LatticePoint, LatticePoint, LatticePoint]

    def edge(self, i: int) -> tuple[LatticePoint, LatticePoint]:
        return self.vertices[(i + 1) % 3], self.vertices[(i + 2) % 3]

    def edge_lengths(self) -> tuple[int, int, int]:
        return tuple(length_class(self.n, k) for k in self.angles)

    def float_vertices(self):
        lat = lattice(self.n)
        return [lat.embed(v) for v in self.vertices]


def canonical_prototile(n: int, triple) -> Triangle:
    """Vertex 0 at the origin, vertex 1 on the positive x-axis at distance a_{k3}."""
    k1, k2, k3 = normalize_triple(n, triple)
    lat = lattice(n)
    v1 = scaled_direction(n, length_class(n, k3), 0, lat)
    v2 = scaled_direction(n, length_class(n, k2), k1, lat)
    tri = Triangle(n, (k1, k2, k3), (lat.zero, v1, v2))
    if lat.orient_exact(*tri.vertices) != 1:  # pragma: no cover - construction guarantees ccw
        raise AssertionError("prototile vertices are not counterclockwise")
    return tri


def prototile_edge_directions(n: int, triple) -> tuple[int, int, int]:
    """Direction index of edge i (vertex i+1 -> vertex i+2) of the canonical prototile."""
    k1, k2, k3 = normalize_triple(n, triple)
    return ((n - k2) % (2 * n), (n + k1) % (2 * n), 0)


def transform_triangle(tri: Triangle, g: RigidMotion) -> tuple[LatticePoint, ...]:
    return tuple(apply_motion(tri.n, g, v) for v in tri.vertices)


def point_in_closed_triangle(n: int, p, tri: Sequence, exact: bool = True) -> bool:
    lat = lattice(n)
    orient = lat.orient_exact if exact else lat.orient
    a, b, c = (tuple(v) for v in tri)
    s = orient(a, b, c)
    return all(orient(u, v, tuple(p)) * s >= 0 for u, v in ((a, b), (b, c), (c, a)))


def interiors_overlap(n: int, t1: Sequence, t2: Sequence, exact: bool = True) -> bool:
    """True iff the open triangles intersect (separating-axis test over all six edges)."""
    lat = lattice(n)
    orient = lat.orient_exact if exact else lat.orient
    for tri, other in ((t1, t2), (t2, t1)):
        a, b, c = (tuple(v) for v in tri)
        s = orient(a, b, c)
        for u, v in ((a, b), (b, c), (c, a)):
            if all(orient(u, v, tuple(w)) * s <= 0 for w in other):
                return False
    return True


def triangle_predicates(n: int, t: Sequence, u, region: Sequence) -> dict:
    """Overlap of t with triangle u (or containment of point u) and containment in region."""
    out = {}
    if len(u) == 3 and not isinstance(u[0], int):
        out["interiors_overlap"] = interiors_overlap(n, t, u)
        out["point_in_closed_region"] = all(point_in_closed_triangle(n, v, region) for v in u)
    else:
        out["interiors_overlap"] = False
        out["point_in_closed_region"] = point_in_closed_triangle(n, u, region)
    return out


def special_set(n: int) -> list[tuple[int, int, int]]:
    """Triangles with an angle of (n-1)/2 or (n+1)/2, i.e. an edge of maximal length."""
    if n % 2 == 0 or n < 3:
        raise ValueError("special prototile set needs odd n")
    big = {(n - 1) // 2, (n + 1) // 2}
    out = []
    for k1 in range(1, n):
        for k2 in range(k1, n):
            k3 = n - k1 - k2
            if k3 >= k2 and big & {k1, k2, k3}:
                out.append((k1, k2, k3))
    return out


def is_isosceles(triple) -> bool:
    return len(set(triple)) < 3


def axis_reflection(n: int, triple) -> RigidMotion | None:
    """The reflection mapping an isosceles canonical prototile onto itself."""
    tri = canonical_prototile(n, triple)
    k1, k2, k3 = tri.angles
    if not is_isosceles(tri.angles):
        return None
    v = tri.vertices
    if k1 == k2:
        swap = (1, 0, 2)
    elif k2 == k3:
        swap = (0, 2, 1)
    else:
        swap = (2, 1, 0)
    # a reflection is determined by where it sends two points; search the 2n flips
    for rot in range(2 * n):
        lin = RigidMotion(rot, True, lattice(n).zero)
        img0 = apply_motion(n, lin, v[0])
        shift = sub(v[swap[0]], img0)
        g = RigidMotion(rot, True, shift)
        if all(apply_motion(n, g, v[i]) == v[swap[i]] for i in range(3)):
            return g
    raise AssertionError("no axis reflection found")  # pragma: no cover


def squared_length(n: int, p, q) -> float:
    x, y = lattice(n).embed(sub(tuple(q), tuple(p)))
    return x * x + y * y
