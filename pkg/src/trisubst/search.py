"""Backtracking search filling an inflated prototile with prototile copies.

Tiles are always laid against the last open edge. A cursor (proto, flip,
second) enumerates the candidate placements at each level; backtracking
recovers the cursor from the popped tile itself, and edge bookkeeping is
undone from what the closed-edge stack recorded when the tile went in.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional

from .cyclotomic import (
    InflationFactor,
    length_class,
    length_matrix,
    normalize_triple,
    substitution_matrix,
)
from .geometry import (
    EPS,
    Edge,
    LatticePoint,
    RigidMotion,
    add,
    canonical_prototile,
    lattice,
    prototile_edge_directions,
    sub,
)

log = logging.getLogger(__name__)


class SearchFault(RuntimeError):
    """Edge bookkeeping became inconsistent; never a normal search outcome."""


@dataclass(frozen=True)
class SearchConfig:
    n: int
    prototiles: tuple[tuple[int, int, int], ...]
    lam: InflationFactor
    orientation: bool = True
    frontier_cut: bool = False
    starter_side: int = 0
    max_nodes: Optional[int] = None
    max_results: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "prototiles", tuple(normalize_triple(self.n, t) for t in self.prototiles))
        if self.lam.n != self.n:
            raise ValueError("inflation factor belongs to a different n")
        if self.starter_side not in (0, 1, 2):
            raise ValueError("starter side must be 0, 1 or 2")


class Placement(NamedTuple):
    """Serializable identity of a placed tile."""

    proto: int
    rot: int
    flip: bool
    shift: LatticePoint


class PlacedTile(NamedTuple):
    proto: int
    rot: int
    flip: bool
    shift: LatticePoint
    second: bool
    edge: int  # prototile edge laid against the open edge
    vertices: tuple  # images of canonical vertices 0, 1, 2
    fverts: tuple  # float coordinates, same order
    bbox: tuple

    @property
    def cursor(self) -> int:
        return self.proto * 4 + self.flip * 2 + self.second

    @property
    def motion(self) -> RigidMotion:
        return RigidMotion(self.rot, self.flip, self.shift)

    def placement(self) -> Placement:
        return Placement(self.proto, self.rot, self.flip, self.shift)

    def ccw(self):
        if self.flip:
            return (self.vertices[0], self.vertices[2], self.vertices[1]), (self.fverts[0], self.fverts[2], self.fverts[1])
        return self.vertices, self.fverts


class ClosedEntry(NamedTuple):
    edge: Edge
    reopen_at: int  # position in the open stack before closing, -1 if it never was open
    placer: int  # patch index of the tile whose placement closed it


class Starter(NamedTuple):
    length: int
    edge: Edge


@dataclass(frozen=True)
class Result:
    """A completed patch with support equal to the inflated prototile."""

    t0: int
    starter: int
    tiles: tuple[Placement, ...]
    orientation: tuple[tuple[int, int], ...] = ()

    def census(self, count: int) -> tuple[int, ...]:
        out = [0] * count
        for t in self.tiles:
            out[t.proto] += 1
        return tuple(out)


class ProtoTable:
    """Per-prototile placement tables for all 4n linear motions."""

    def __init__(self, n: int, triple):
        self.triple = triple
        self.tri = canonical_prototile(n, triple)
        self.lengths = self.tri.edge_lengths()
        self.dirs = prototile_edge_directions(n, triple)
        self.by_class: dict[int, list[int]] = {}
        for e, k in enumerate(self.lengths):
            self.by_class.setdefault(k, []).append(e)
        lat = lattice(n)
        self.verts = [
            [tuple(lat.rotate(lat.reflect(v) if f else v, r) for v in self.tri.vertices) for f in (0, 1)]
            for r in range(2 * n)
        ]


class SearchContext:
    """Everything shared by all searches of one (prototiles, factor) campaign."""

    def __init__(self, config: SearchConfig):
        self.config = config
        self.n = n = config.n
        self.lat = lattice(n)
        self.M = substitution_matrix(n, config.prototiles, config.lam)
        self.X = length_matrix(n, config.lam)
        self.protos = [ProtoTable(n, t) for t in config.prototiles]
        self.nvars = 3 * len(self.protos)
        self.inflated = [tuple(self.lat.scale(config.lam, v) for v in p.tri.vertices) for p in self.protos]

    def column(self, t0: int) -> tuple[int, ...]:
        return tuple(row[t0] for row in self.M)

    def edge_vars(self, proto: int, e: int) -> int:
        return 3 * proto + e

    def tile_from_motion(self, proto: int, rot: int, flip: bool, shift, second=False, edge=-1) -> PlacedTile:
        base = self.protos[proto].verts[rot % (2 * self.n)][int(flip)]
        verts = tuple(add(v, shift) for v in base)
        fv = tuple(self.lat.embed(v) for v in verts)
        xs = [p[0] for p in fv]
        ys = [p[1] for p in fv]
        return PlacedTile(proto, rot % (2 * self.n), bool(flip), tuple(shift), bool(second), edge, verts, fv,
                          (min(xs), min(ys), max(xs), max(ys)))

    def make_starters(self, t0: int, side: Optional[int] = None) -> list[Starter]:
        """One starter per admissible sub-edge length at the first corner of a side."""
        side = self.config.starter_side if side is None else side
        pt = self.protos[t0]
        cls = pt.lengths[side]
        direction = pt.dirs[side]
        corner = self.inflated[t0][(side + 1) % 3]
        out = []
        for k in range(1, self.lat.d + 1):
            if self.X[k - 1][cls - 1] > 0:
                end = add(corner, scaled(self.lat, k, direction))
                out.append(Starter(k, Edge(corner, end, k, direction)))
        return out

    def initial_state(self, t0: int, starter: Starter) -> SearchState:
        return SearchState(self, t0, starter)


def scaled(lat, k, direction):
    from .geometry import scaled_direction

    return scaled_direction(lat.n, k, direction, lat)


class OrientationStore:
    """Union-find over edge-orientation variables with parity and an undo trail.

    Variable 3*p + e is True when edge e of prototile p carries the arrow
    from canonical vertex e+1 to vertex e+2.
    """

    def __init__(self, nvars: int):
        self.parent = list(range(nvars))
        self.parity = [0] * nvars
        self.rank = [0] * nvars
        self.trail: list[tuple[int, int, int, bool]] = []

    def find(self, v: int) -> tuple[int, int]:
        par = 0
        parent = self.parent
        while parent[v] != v:
            par ^= self.parity[v]
            v = parent[v]
        return v, par

    def relate(self, a: int, b: int, same: bool, tag: int = -1) -> bool:
        ra, pa = self.find(a)
        rb, pb = self.find(b)
        want = 0 if same else 1
        if ra == rb:
            return (pa ^ pb) == want
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.parity[rb] = pa ^ pb ^ want
        bumped = self.rank[ra] == self.rank[rb]
        if bumped:
            self.rank[ra] += 1
        self.trail.append((tag, rb, ra, bumped))
        return True

    def mark(self) -> int:
        return len(self.trail)

    def rollback(self, mark: int) -> None:
        while len(self.trail) > mark:
            self._undo_one()

    def undo_tag(self, tag: int) -> None:
        while self.trail and self.trail[-1][0] == tag:
            self._undo_one()

    def _undo_one(self):
        _, child, root, bumped = self.trail.pop()
        self.parent[child] = child
        self.parity[child] = 0
        if bumped:
            self.rank[root] -= 1

    def classes(self) -> tuple[tuple[int, int], ...]:
        """(smallest variable in class, parity relative to it) for every variable."""
        found = [self.find(v) for v in range(len(self.parent))]
        rep = {}
        for v, (root, par) in enumerate(found):
            rep.setdefault(root, (v, par))
        return tuple((rep[root][0], par ^ rep[root][1]) for root, par in found)

    def state(self):
        return (tuple(self.parent), tuple(self.parity), tuple(self.rank), tuple(self.trail))

    @classmethod
    def from_state(cls, st) -> OrientationStore:
        obj = cls(len(st[0]))
        obj.parent, obj.parity, obj.rank, obj.trail = list(st[0]), list(st[1]), list(st[2]), list(st[3])
        return obj


@dataclass(frozen=True)
class Snapshot:
    """Self-contained, immutable copy of a search in progress."""

    t0: int
    starter: Starter
    tiles: tuple[PlacedTile, ...]
    open_edges: tuple[Edge, ...]
    closed_edges: tuple[ClosedEntry, ...]
    mult: tuple[int, ...]
    cursor: int
    orientation: tuple
    base_depth: int

    def digest(self) -> str:
        import hashlib

        return hashlib.sha256(repr(self).encode()).hexdigest()


class SearchState:
    """Mutable state of one search; owned by a single worker at a time."""

    def __init__(self, ctx: SearchContext, t0: int, starter: Starter, snapshot: Snapshot | None = None):
        self.ctx = ctx
        self.t0 = t0
        self.starter = starter
        self.inflated = ctx.inflated[t0]
        self._sides: dict[LatticePoint, frozenset] = {}
        if snapshot is None:
            self.patch: list[PlacedTile] = []
            self.open: list[Edge] = [starter.edge]
            self.closed: list[ClosedEntry] = []
            self.mult = list(ctx.column(t0))
            self.cursor = 0
            self.orient = OrientationStore(ctx.nvars)
            self.base_depth = 0
        else:
            self.patch = list(snapshot.tiles)
            self.open = list(snapshot.open_edges)
            self.closed = list(snapshot.closed_edges)
            self.mult = list(snapshot.mult)
            self.cursor = snapshot.cursor
            self.orient = OrientationStore.from_state(snapshot.orientation)
            self.base_depth = snapshot.base_depth
        self.remaining = sum(self.mult)
        self._rebuild_caches()

    @classmethod
    def from_snapshot(cls, ctx: SearchContext, snap: Snapshot) -> SearchState:
        return cls(ctx, snap.t0, snap.starter, snap)

    def _rebuild_caches(self):
        self.open_keys: dict = {}
        for e in self.open:
            self.open_keys[e.key()] = e
        self.vertex_count: dict[LatticePoint, int] = {}
        self.edge_count: dict = {}
        for t in self.patch:
            self._add_geometry(t)

    def _add_geometry(self, t: PlacedTile):
        v = t.vertices
        for p in v:
            self.vertex_count[p] = self.vertex_count.get(p, 0) + 1
        for i in range(3):
            k = _ekey(v[(i + 1) % 3], v[(i + 2) % 3])
            self.edge_count[k] = self.edge_count.get(k, 0) + 1

    def _remove_geometry(self, t: PlacedTile):
        v = t.vertices
        for p in v:
            c = self.vertex_count[p] - 1
            if c:
                self.vertex_count[p] = c
            else:
                del self.vertex_count[p]
        for i in range(3):
            k = _ekey(v[(i + 1) % 3], v[(i + 2) % 3])
            c = self.edge_count[k] - 1
            if c:
                self.edge_count[k] = c
            else:
                del self.edge_count[k]

    # --- geometry helpers ---

    def sides_of(self, p: LatticePoint) -> frozenset:
        hit = self._sides.get(p)
        if hit is None:
            lat = self.ctx.lat
            v = self.inflated
            hit = frozenset(j for j in range(3) if lat.orient(v[(j + 1) % 3], v[(j + 2) % 3], p) == 0)
            self._sides[p] = hit
        return hit

    def inside(self, p: LatticePoint) -> bool:
        lat = self.ctx.lat
        v = self.inflated
        return all(lat.orient(v[(j + 1) % 3], v[(j + 2) % 3], p) >= 0 for j in range(3))

    def on_boundary(self, a, b) -> bool:
        return bool(self.sides_of(a) & self.sides_of(b))

    # --- the three primitive operations ---

    def place(self, cursor: int) -> Optional[PlacedTile]:
        """Tile for (proto, flip, second) laid against the last open edge, or None."""
        if not self.open:
            return None
        proto, flip, second = cursor >> 2, (cursor >> 1) & 1, cursor & 1
        e_open = self.open[-1]
        pt = self.ctx.protos[proto]
        cands = pt.by_class.get(e_open.length)
        if not cands or second >= len(cands):
            return None
        e = cands[second]
        n = self.ctx.n
        if flip:
            rot = (e_open.direction - (n - pt.dirs[e])) % (2 * n)
            anchor = (e + 2) % 3
        else:
            rot = (e_open.direction - pt.dirs[e]) % (2 * n)
            anchor = (e + 1) % 3
        shift = sub(e_open.start, pt.verts[rot][flip][anchor])
        return self.ctx.tile_from_motion(proto, rot, flip, shift, second, e)

    def _tile_edges(self, t: PlacedTile):
        v = t.vertices
        return [(v[(i + 1) % 3], v[(i + 2) % 3]) for i in range(3)]

    def _constraints(self, t: PlacedTile, idx: int):
        """Orientation relations induced by edges of t coinciding with open edges."""
        out = []
        ctx = self.ctx
        for i, (a, b) in enumerate(self._tile_edges(t)):
            other = self.open_keys.get(_ekey(a, b))
            if other is None or other.owner < 0:
                continue
            owner = self.patch[other.owner] if other.owner < len(self.patch) else None
            if owner is None:
                raise SearchFault("open edge refers to a missing tile")
            ov = owner.vertices
            same = ov[(other.side + 1) % 3] == a
            out.append((ctx.edge_vars(t.proto, i), ctx.edge_vars(owner.proto, other.side), same))
        return out

    def compatible(self, t: PlacedTile) -> bool:
        """Disjoint interiors, containment, edge-to-edge and orientation consistency."""
        lat = self.ctx.lat
        e = t.edge
        verts = t.vertices
        apex = verts[e]
        if not self.inside(apex):
            return False
        e_open = self.open[-1]
        owner_idx = e_open.owner
        (ccw, fccw) = t.ccw()
        bx0, by0, bx1, by1 = t.bbox
        # interiors
        for j, other in enumerate(self.patch):
            if j == owner_idx:
                continue
            ox0, oy0, ox1, oy1 = other.bbox
            if ox0 >= bx1 - EPS or ox1 <= bx0 + EPS or oy0 >= by1 - EPS or oy1 <= by0 + EPS:
                continue
            if _overlap(lat, ccw, fccw, *other.ccw()):
                return False
        # a new vertex must not land inside an existing edge
        ax, ay = lat.embed(apex)
        if apex not in self.vertex_count:
            for (p, q) in self.edge_count:
                if _in_segment(lat, p, q, apex, ax, ay):
                    return False
        # existing vertices must not land inside the two new edges
        a = e_open.start
        b = e_open.end
        for p in (a, b):
            if _ekey(p, apex) in self.edge_count:
                continue
            px, py = lat.embed(p)
            for w in self.vertex_count:
                if w == p or w == apex:
                    continue
                wx, wy = lat.embed(w)
                if _in_segment_f(lat, p, apex, w, px, py, ax, ay, wx, wy):
                    return False
        if self.ctx.config.orientation:
            mark = self.orient.mark()
            ok = all(self.orient.relate(x, y, s) for x, y, s in self._constraints(t, len(self.patch)))
            self.orient.rollback(mark)
            if not ok:
                return False
        return True

    def step_forward(self, t: PlacedTile) -> None:
        idx = len(self.patch)
        if self.ctx.config.orientation:
            for x, y, s in self._constraints(t, idx):
                if not self.orient.relate(x, y, s, idx):
                    raise SearchFault("orientation contradiction on a compatible tile")
        e_open = self.open.pop()
        del self.open_keys[e_open.key()]
        self.closed.append(ClosedEntry(e_open, len(self.open), idx))
        edges = self._tile_edges(t)
        order = [(t.edge + s) % 3 for s in ((1, 2) if not t.flip else (2, 1))]
        n = self.ctx.n
        pt = self.ctx.protos[t.proto]
        for i in order:
            a, b = edges[i]
            key = _ekey(a, b)
            other = self.open_keys.get(key)
            if other is not None:
                pos = self.open.index(other)
                del self.open[pos]
                del self.open_keys[key]
                self.closed.append(ClosedEntry(other, pos, idx))
                continue
            k = pt.lengths[i]
            d = (pt.dirs[i] if not t.flip else -pt.dirs[i]) + t.rot
            if t.flip:
                edge = Edge(a, b, k, d % (2 * n), idx, i)
            else:
                edge = Edge(b, a, k, (d + n) % (2 * n), idx, i)
            if self.on_boundary(a, b):
                self.closed.append(ClosedEntry(edge, -1, idx))
            else:
                self.open.append(edge)
                self.open_keys[key] = edge
        self.patch.append(t)
        self._add_geometry(t)
        self.mult[t.proto] -= 1
        self.remaining -= 1

    def step_back(self) -> PlacedTile:
        """Exact inverse of the last step_forward; returns the removed tile."""
        t = self.patch.pop()
        idx = len(self.patch)
        while self.open and self.open[-1].owner == idx:
            e = self.open.pop()
            del self.open_keys[e.key()]
        reopen = []
        while self.closed and self.closed[-1].placer == idx:
            reopen.append(self.closed.pop())
        if not reopen:
            raise SearchFault("popped tile closed no edge")
        for entry in reopen:
            if entry.reopen_at >= 0:
                self.open.insert(entry.reopen_at, entry.edge)
                self.open_keys[entry.edge.key()] = entry.edge
        self._remove_geometry(t)
        self.mult[t.proto] += 1
        self.remaining += 1
        self.orient.undo_tag(idx)
        return t

    def frontier_ok(self) -> bool:
        """Every open edge must still be coverable by some remaining prototile."""
        avail = set()
        for p, m in enumerate(self.mult):
            if m:
                avail.update(self.ctx.protos[p].lengths)
        return all(e.length in avail for e in self.open)

    # --- serialization ---

    def snapshot(self, cursor: Optional[int] = None, base_depth: Optional[int] = None) -> Snapshot:
        return Snapshot(
            self.t0,
            self.starter,
            tuple(self.patch),
            tuple(self.open),
            tuple(self.closed),
            tuple(self.mult),
            self.cursor if cursor is None else cursor,
            self.orient.state(),
            len(self.patch) if base_depth is None else base_depth,
        )

    def serialize(self):
        return (self.t0, self.starter, tuple(self.patch), tuple(self.open), tuple(self.closed), tuple(self.mult),
                self.cursor, self.orient.state())

    def result(self) -> Result:
        if self.open:
            raise SearchFault("complete patch with open edges left")
        return Result(self.t0, self.starter.length, tuple(t.placement() for t in self.patch), self.orient.classes())


def _ekey(a, b):
    return (a, b) if a <= b else (b, a)


def _overlap(lat, va, fa, vb, fb) -> bool:
    """Separating-axis test for two ccw triangles; float filter, exact on ties."""
    for (v1, f1, v2, f2) in ((va, fa, vb, fb), (vb, fb, va, fa)):
        for i in range(3):
            p, q = v1[i], v1[(i + 1) % 3]
            (px, py), (qx, qy) = f1[i], f1[(i + 1) % 3]
            dx, dy = qx - px, qy - py
            separated = True
            for w, (wx, wy) in zip(v2, f2):
                c = dx * (wy - py) - dy * (wx - px)
                if c > EPS:
                    separated = False
                    break
                if c >= -EPS and lat.orient_exact(p, q, w) > 0:
                    separated = False
                    break
            if separated:
                return False
    return True


def _in_segment(lat, p, q, w, wx, wy) -> bool:
    px, py = lat.embed(p)
    qx, qy = lat.embed(q)
    return _in_segment_f(lat, p, q, w, px, py, qx, qy, wx, wy)


def _in_segment_f(lat, p, q, w, px, py, qx, qy, wx, wy) -> bool:
    """w strictly inside segment pq."""
    if wx < min(px, qx) - EPS or wx > max(px, qx) + EPS or wy < min(py, qy) - EPS or wy > max(py, qy) + EPS:
        return False
    c = (qx - px) * (wy - py) - (qy - py) * (wx - px)
    if c > EPS or c < -EPS:
        return False
    if w == p or w == q:
        return False
    if lat.orient_exact(p, q, w) != 0:
        return False
    return lat.dot_sign(sub(w, p), sub(q, p)) > 0 and lat.dot_sign(sub(w, q), sub(p, q)) > 0


class KillSwitch:
    """One-way signal; once triggered a search stops descending and spills branches."""

    def __init__(self):
        self._triggered = False

    @property
    def triggered(self) -> bool:
        return self._triggered

    def trigger(self) -> None:
        self._triggered = True

    def poll(self) -> None:
        """Hook for coordinators that decide to trigger from outside the search."""


@dataclass
class SolveReport:
    nodes: int = 0
    results: int = 0
    snapshots: int = 0
    truncated: bool = False


class _Stop(Exception):
    pass


def solve(
    state: SearchState,
    sink: Callable[[Result], None],
    kill: Optional[KillSwitch] = None,
    spill: Optional[Callable[[Snapshot], None]] = None,
    poll_every: int = 512,
    max_nodes: Optional[int] = None,
    max_results: Optional[int] = None,
) -> SolveReport:
    """Enumerate every completion of ``state`` below its base depth.

    Candidate order at each level is proto ascending, then flip, then second.
    With a triggered kill switch each compatible branch is snapshotted to
    ``spill`` instead of being explored.
    """
    cfg = state.ctx.config
    max_nodes = cfg.max_nodes if max_nodes is None else max_nodes
    max_results = cfg.max_results if max_results is None else max_results
    ncur = 4 * len(state.ctx.protos)
    base = state.base_depth
    cursor = state.cursor
    report = SolveReport()
    frontier = cfg.frontier_cut
    try:
        while True:
            descend = False
            if state.remaining == 0:
                sink(state.result())
                report.results += 1
                if max_results is not None and report.results >= max_results:
                    raise _Stop
            else:
                while cursor < ncur:
                    if state.mult[cursor >> 2]:
                        tile = state.place(cursor)
                        if tile is not None and state.compatible(tile):
                            state.step_forward(tile)
                            if frontier and not state.frontier_ok():
                                state.step_back()
                            elif kill is not None and kill.triggered:
                                spill(state.snapshot(cursor=0))
                                report.snapshots += 1
                                state.step_back()
                            else:
                                descend = True
                                break
                    cursor += 1
            if descend:
                cursor = 0
                report.nodes += 1
                if kill is not None and report.nodes % poll_every == 0:
                    kill.poll()
                if max_nodes is not None and report.nodes >= max_nodes:
                    raise _Stop
                continue
            if len(state.patch) <= base:
                state.cursor = ncur
                return report
            cursor = state.step_back().cursor + 1
    except _Stop:
        report.truncated = True
        state.cursor = cursor
        return report


def run_search(ctx: SearchContext, t0: int, starter: Starter, **kw) -> tuple[list[Result], SolveReport]:
    out: list[Result] = []
    rep = solve(ctx.initial_state(t0, starter), out.append, **kw)
    return out, rep


def sequential_campaign(ctx: SearchContext) -> dict[int, list[Result]]:
    """All results for every prototile, one search per starter, in order."""
    found: dict[int, list[Result]] = {}
    for t0 in range(len(ctx.protos)):
        found[t0] = []
        for st in ctx.make_starters(t0):
            res, _ = run_search(ctx, t0, st)
            found[t0].extend(res)
    return found
