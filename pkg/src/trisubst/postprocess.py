"""From raw search results to substitution rules and compatible families.

Edge orientations of the prototiles are encoded as an integer bitmask: bit
``3*p + e`` is set when edge ``e`` of prototile ``p`` points from canonical
vertex ``e+1`` to vertex ``e+2``.

Two kinds of relabeling turn valid rules into valid rules without changing
any patch geometry, and both are factored out:

* replacing every copy of an isosceles prototile by its mirror-image copy
  (the "toggle" of that prototile), and
* reversing every arrow on all edges of one length class.

Orientation classes are orbits of bitmasks under the group generated by
these operations; each class is represented by its smallest bitmask.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .cyclotomic import mat_mul, matrix_power
from .geometry import (
    RigidMotion,
    apply_motion,
    axis_reflection,
    interiors_overlap,
    lattice,
    point_in_closed_triangle,
    segment_relation,
)
from .search import OrientationStore, Placement, Result, SearchContext

Breakdown = tuple[tuple[int, int], ...]  # (length class, +1 along / -1 against the super-edge arrow)
BreakdownMap = tuple[tuple[int, Breakdown], ...]  # sorted (length class, breakdown)


class BreakdownError(RuntimeError):
    """Sub-edges along a side of the inflated prototile do not chain up."""


class VerificationError(AssertionError):
    def __init__(self, message: str, pair=None):
        super().__init__(message)
        self.pair = pair


# --- per-result geometry -------------------------------------------------


@dataclass(frozen=True)
class SideSegment:
    length: int
    var: int
    along: bool  # the tile edge's forward start is the end nearer the side's first corner


@dataclass(frozen=True)
class ResultInfo:
    """Orientation-independent facts about one result."""

    result: Result
    shared: tuple[tuple[int, int, bool], ...]  # (var, var, forward starts coincide)
    sides: tuple[tuple[SideSegment, ...], ...]
    key: tuple  # placements modulo isosceles toggles

    def consistent(self, mask: int) -> bool:
        for a, b, same in self.shared:
            if (((mask >> a) ^ (mask >> b)) & 1) == same:
                return False
        return True


def tile_vertices(ctx: SearchContext, pl: Placement) -> tuple:
    return ctx.tile_from_motion(pl.proto, pl.rot, pl.flip, pl.shift).vertices


def analyze_result(ctx: SearchContext, result: Result) -> ResultInfo:
    """Shared-edge relations and side decompositions, read from geometry alone."""
    edges: dict = defaultdict(list)
    for pl in result.tiles:
        v = tile_vertices(ctx, pl)
        for e in range(3):
            a, b = v[(e + 1) % 3], v[(e + 2) % 3]
            edges[frozenset((a, b))].append((3 * pl.proto + e, a, b))
    shared = []
    boundary = {}
    for k, lst in edges.items():
        if len(lst) == 2:
            (va, sa, _), (vb, sb, _) = lst
            shared.append((va, vb, sa == sb))
        elif len(lst) == 1:
            boundary[k] = lst[0]
        else:
            raise BreakdownError("an edge is shared by more than two tiles")
    corners = ctx.inflated[result.t0]
    by_end: dict = defaultdict(list)
    for var, a, b in boundary.values():
        by_end[a].append((var, a, b))
        by_end[b].append((var, a, b))
    lat = ctx.lat
    sides = []
    for j in range(3):
        start, stop = corners[(j + 1) % 3], corners[(j + 2) % 3]
        chain = []
        here = start
        used = set()
        while here != stop:
            step = None
            for var, a, b in by_end.get(here, ()):
                other = b if a == here else a
                if (var, a, b) in used or lat.orient_exact(start, stop, other) != 0:
                    continue
                step = (var, a, b, other)
                break
            if step is None:
                raise BreakdownError(f"side {j} of the inflated tile is not covered by tile edges")
            var, a, b, other = step
            used.add((var, a, b))
            p, e = divmod(var, 3)
            chain.append(SideSegment(ctx.protos[p].lengths[e], var, a == here))
            here = other
        sides.append(tuple(chain))
    return ResultInfo(result, tuple(shared), tuple(sides), toggle_key(ctx, result))


# --- isosceles toggles ---------------------------------------------------


def _reflections(ctx: SearchContext) -> dict[int, RigidMotion]:
    cached = getattr(ctx, "_reflections", None)
    if cached is not None:
        return cached
    out = {}
    for p, pt in enumerate(ctx.protos):
        g = axis_reflection(ctx.n, pt.triple)
        if g is not None:
            out[p] = g
    ctx._reflections = out
    return out


def _toggle(ctx: SearchContext, pl: Placement, refl: RigidMotion) -> Placement:
    g = RigidMotion(pl.rot, pl.flip, pl.shift).compose(ctx.n, refl)
    return Placement(pl.proto, g.rot, g.flip, g.shift)


def toggle_key(ctx: SearchContext, result: Result) -> tuple:
    refl = _reflections(ctx)
    protos = sorted(refl)
    best = None
    for r in range(len(protos) + 1):
        for subset in itertools.combinations(protos, r):
            tiles = tuple(sorted(_toggle(ctx, pl, refl[pl.proto]) if pl.proto in subset else pl for pl in result.tiles))
            if best is None or tiles < best:
                best = tiles
    return best


def canonicalize(ctx: SearchContext, result: Result) -> Result:
    """Representative of a result modulo mirroring all copies of an isosceles prototile.

    Orientation relations recorded by the search are carried along to the
    relabeled variables.
    """
    refl = _reflections(ctx)
    group = OrientationGroup(ctx)
    protos = sorted(refl)
    best = None
    for r in range(len(protos) + 1):
        for subset in itertools.combinations(protos, r):
            tiles = tuple(sorted(_toggle(ctx, pl, refl[pl.proto]) if pl.proto in subset else pl for pl in result.tiles))
            if best is None or tiles < best[0]:
                best = (tiles, subset)
    tiles, subset = best
    orientation = result.orientation
    if orientation and subset:
        orientation = group.toggle_relations(orientation, subset)
    return Result(result.t0, result.starter, tiles, orientation)


# --- the relabeling group ------------------------------------------------


class OrientationGroup:
    """Isosceles toggles and per-length-class arrow reversals acting on bitmasks."""

    def __init__(self, ctx: SearchContext):
        self.ctx = ctx
        self.nvars = ctx.nvars
        self.toggles: dict[int, tuple[tuple[int, bool], ...]] = {}
        for p, g in _reflections(ctx).items():
            v = ctx.protos[p].tri.vertices
            img = [apply_motion(ctx.n, g, x) for x in v]
            perm = [v.index(x) for x in img]
            emap = []
            for e in range(3):
                a, b = perm[(e + 1) % 3], perm[(e + 2) % 3]
                e2 = 3 - a - b
                emap.append((e2, a == (e2 + 1) % 3))
            self.toggles[p] = tuple(emap)
        classes = sorted({k for pt in ctx.protos for k in pt.lengths})
        self.classes = classes
        self.class_masks = {}
        for c in classes:
            m = 0
            for p, pt in enumerate(ctx.protos):
                for e, k in enumerate(pt.lengths):
                    if k == c:
                        m |= 1 << (3 * p + e)
            self.class_masks[c] = m
        self._canon: dict[int, int] = {}

    def toggle(self, mask: int, proto: int) -> int:
        out = mask
        for e, (e2, keep) in enumerate(self.toggles[proto]):
            bit = ((mask >> (3 * proto + e)) & 1) ^ (0 if keep else 1)
            out = (out & ~(1 << (3 * proto + e2))) | (bit << (3 * proto + e2))
        return out

    def toggle_relations(self, relations, subset) -> tuple:
        """Carry (representative, parity) relations through toggles of ``subset``."""
        # variable v of the old labeling becomes var_map[v] with a parity flip
        var_map = list(range(self.nvars))
        flip = [0] * self.nvars
        for p in subset:
            for e, (e2, keep) in enumerate(self.toggles[p]):
                var_map[3 * p + e] = 3 * p + e2
                flip[3 * p + e] = 0 if keep else 1
        store = OrientationStore(self.nvars)
        for v, (rep, par) in enumerate(relations):
            if rep != v:
                same = (par ^ flip[v] ^ flip[rep]) == 0
                store.relate(var_map[v], var_map[rep], same)
        return store.classes()

    def elements(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """All (toggled prototiles, reversed classes) pairs."""
        tog = sorted(self.toggles)
        out = []
        for r in range(len(tog) + 1):
            for s in itertools.combinations(tog, r):
                for q in range(len(self.classes) + 1):
                    for c in itertools.combinations(self.classes, q):
                        out.append((s, c))
        return out

    def act(self, mask: int, element) -> int:
        subset, classes = element
        for p in subset:
            mask = self.toggle(mask, p)
        for c in classes:
            mask ^= self.class_masks[c]
        return mask

    def orbit(self, mask: int) -> set[int]:
        seen = {mask}
        todo = [mask]
        while todo:
            m = todo.pop()
            nxt = [self.toggle(m, p) for p in self.toggles] + [m ^ cm for cm in self.class_masks.values()]
            for x in nxt:
                if x not in seen:
                    seen.add(x)
                    todo.append(x)
        return seen

    def canonical(self, mask: int) -> int:
        hit = self._canon.get(mask)
        if hit is None:
            orb = self.orbit(mask)
            hit = min(orb)
            for m in orb:
                self._canon[m] = hit
        return hit

    def representatives(self) -> list[int]:
        return sorted({self.canonical(m) for m in range(1 << self.nvars)})

    def stabilizer(self, mask: int):
        return [g for g in self.elements() if self.act(mask, g) == mask]


def reverse_classes(bmap: BreakdownMap, classes: Iterable[int]) -> BreakdownMap:
    """Breakdowns after reversing every arrow of the given length classes."""
    rev = set(classes)
    out = []
    for c, seq in bmap:
        if c in rev:
            seq = tuple((k, s if k in rev else -s) for k, s in reversed(seq))
        else:
            seq = tuple((k, -s if k in rev else s) for k, s in seq)
        out.append((c, seq))
    return tuple(out)


# --- breakdowns ----------------------------------------------------------


def side_breakdown(ctx: SearchContext, info: ResultInfo, side: int, mask: int) -> Breakdown:
    sup = (mask >> (3 * info.result.t0 + side)) & 1
    seq = []
    for seg in info.sides[side]:
        forward = bool((mask >> seg.var) & 1)
        along = forward == seg.along
        seq.append((seg.length, 1 if along == bool(sup) else -1))
    if not sup:
        seq.reverse()
    return tuple(seq)


def extract_breakdowns(ctx: SearchContext, result: Result | ResultInfo, mask: int) -> tuple[Breakdown, ...]:
    """Breakdown of each side of the inflated prototile under orientation ``mask``.

    Each breakdown is read from the origin of the super-edge arrow. The
    sub-edge length classes on a side of class c are checked against the
    length substitution matrix.
    """
    info = result if isinstance(result, ResultInfo) else analyze_result(ctx, result)
    out = []
    pt = ctx.protos[info.result.t0]
    for j in range(3):
        bd = side_breakdown(ctx, info, j, mask)
        counts = [0] * ctx.lat.d
        for k, _ in bd:
            counts[k - 1] += 1
        expect = [ctx.X[i][pt.lengths[j] - 1] for i in range(ctx.lat.d)]
        if counts != expect:
            raise BreakdownError(f"side {j}: sub-edge census {counts} differs from {expect}")
        out.append(bd)
    return tuple(out)


def local_breakdowns(ctx: SearchContext, info: ResultInfo, mask: int) -> Optional[BreakdownMap]:
    """Breakdown per length class of the result's own sides, or None if two equal sides disagree."""
    got: dict[int, Breakdown] = {}
    lengths = ctx.protos[info.result.t0].lengths
    for j in range(3):
        bd = side_breakdown(ctx, info, j, mask)
        c = lengths[j]
        if got.setdefault(c, bd) != bd:
            return None
    return tuple(sorted(got.items()))


# --- rules and families --------------------------------------------------


@dataclass(frozen=True)
class RuleSet:
    """One result per prototile under one total orientation, with uniform breakdowns."""

    orientation: int
    results: tuple[Result, ...]
    breakdowns: BreakdownMap

    def breakdown(self, cls: int) -> Breakdown:
        return dict(self.breakdowns)[cls]


@dataclass(frozen=True)
class Family:
    """Results that mix freely per tile: same orientation and same breakdown per class."""

    orientation: int
    breakdowns: BreakdownMap
    members: tuple[tuple[Result, ...], ...]  # per prototile, deduplicated modulo toggles

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(m) for m in self.members)

    def rule_sets(self) -> Iterator[RuleSet]:
        for combo in itertools.product(*self.members):
            yield RuleSet(self.orientation, combo, self.breakdowns)

    def representative(self) -> RuleSet:
        return RuleSet(self.orientation, tuple(m[0] for m in self.members), self.breakdowns)


@dataclass(frozen=True)
class ResultGroup:
    """Results for one prototile sharing orientation and breakdowns on that prototile's sides."""

    proto: int
    breakdowns: BreakdownMap
    members: tuple[Result, ...]
    partial: bool = False


@dataclass
class OrientationClass:
    orientation: int
    families: list[Family] = field(default_factory=list)
    groups: list[ResultGroup] = field(default_factory=list)
    arcs: dict[int, list[int]] = field(default_factory=dict)  # group index -> compatible group indices

    @property
    def complete(self) -> bool:
        return bool(self.families)


@dataclass
class Assembly:
    n: int
    prototiles: tuple
    classes: list[OrientationClass]

    @property
    def families(self) -> list[Family]:
        return [f for c in self.classes for f in c.families]

    def complete_classes(self) -> list[OrientationClass]:
        return [c for c in self.classes if c.complete]


def _agree(a: BreakdownMap, b: BreakdownMap) -> bool:
    da = dict(a)
    return all(da.get(c, seq) == seq for c, seq in b)


def _join(groups_by_proto: Sequence[Sequence[int]], groups: Sequence[ResultGroup]) -> list[tuple[int, ...]]:
    """Index tuples, one group per prototile, agreeing on all shared classes."""
    out = []

    def rec(i, chosen, merged):
        if i == len(groups_by_proto):
            out.append(tuple(chosen))
            return
        for gi in groups_by_proto[i]:
            g = groups[gi]
            if all(merged.get(c, seq) == seq for c, seq in g.breakdowns):
                nm = dict(merged)
                nm.update(g.breakdowns)
                chosen.append(gi)
                rec(i + 1, chosen, nm)
                chosen.pop()

    rec(0, [], {})
    return out


def analyze_all(ctx: SearchContext, found: dict[int, Sequence[Result]]) -> dict[int, list[ResultInfo]]:
    return {t0: [analyze_result(ctx, r) for r in rs] for t0, rs in found.items()}


def group_families(ctx: SearchContext, found: dict[int, Sequence[Result]],
                   infos: Optional[dict[int, list[ResultInfo]]] = None) -> Assembly:
    """Orientation classes, their random-compatible families and partial result groups."""
    infos = infos if infos is not None else analyze_all(ctx, found)
    group = OrientationGroup(ctx)
    nproto = len(ctx.protos)
    classes = []
    for mask in group.representatives():
        buckets: dict[tuple[int, BreakdownMap], dict] = {}
        for t0 in range(nproto):
            for info in infos.get(t0, ()):
                if not info.consistent(mask):
                    continue
                bmap = local_breakdowns(ctx, info, mask)
                if bmap is None:
                    continue
                members = buckets.setdefault((t0, bmap), {})
                prev = members.get(info.key)
                if prev is None or _tiles_key(info.result) < _tiles_key(prev):
                    members[info.key] = info.result
        if not buckets:
            continue
        groups = [ResultGroup(t0, bmap, tuple(sorted(m.values(), key=_tiles_key)))
                  for (t0, bmap), m in sorted(buckets.items())]
        by_proto = [[i for i, g in enumerate(groups) if g.proto == p] for p in range(nproto)]
        combos = _join(by_proto, groups) if all(by_proto) else []
        used = set()
        stab_classes = [c for s, c in group.stabilizer(mask) if c]
        families = []
        for combo in combos:
            merged: dict = {}
            for gi in combo:
                merged.update(groups[gi].breakdowns)
            bmap = tuple(sorted(merged.items()))
            # families related by a relabeling that fixes this orientation are the same family
            if any(reverse_classes(bmap, cs) < bmap for cs in stab_classes):
                used.update(combo)
                continue
            used.update(combo)
            families.append(Family(mask, bmap, tuple(groups[gi].members for gi in combo)))
        groups = [ResultGroup(g.proto, g.breakdowns, g.members, i not in used) for i, g in enumerate(groups)]
        arcs = {
            i: [j for j, h in enumerate(groups) if h.proto != g.proto and _agree(g.breakdowns, h.breakdowns)]
            for i, g in enumerate(groups)
        }
        classes.append(OrientationClass(mask, sorted(families, key=lambda f: f.breakdowns), groups, arcs))
    return Assembly(ctx.n, ctx.config.prototiles, classes)


def assemble_rules(ctx: SearchContext, found: dict[int, Sequence[Result]], limit: Optional[int] = None,
                   assembly: Optional[Assembly] = None) -> list[RuleSet]:
    """Every rule set (modulo relabeling), optionally capped at ``limit``."""
    if not all(found.get(t0) for t0 in range(len(ctx.protos))):
        return []
    assembly = assembly or group_families(ctx, found)
    out = []
    for fam in assembly.families:
        for rule in fam.rule_sets():
            out.append(rule)
            if limit is not None and len(out) >= limit:
                return out
    return out


def _tiles_key(r: Result):
    return r.tiles


# --- applying a rule -----------------------------------------------------


def substitute(ctx: SearchContext, rule: RuleSet, tiles: Iterable[Placement]) -> list[Placement]:
    """One inflation step: a tile g(P) becomes g'(t) for every tile t of the rule for P,
    where g' is g with its translation scaled by the inflation factor."""
    n = ctx.n
    lat = ctx.lat
    lam = ctx.config.lam
    out = []
    for pl in tiles:
        outer = RigidMotion(pl.rot, pl.flip, lat.scale(lam, pl.shift))
        for inner in rule.results[pl.proto].tiles:
            g = outer.compose(n, RigidMotion(inner.rot, inner.flip, inner.shift))
            out.append(Placement(inner.proto, g.rot, g.flip, g.shift))
    return out


@dataclass
class VerificationReport:
    level: int
    tiles: int
    census: tuple[int, ...]
    expected_census: tuple[int, ...]
    edge_to_edge: bool
    overlaps: bool
    orientation_ok: bool
    area_ok: bool
    offending: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return (self.edge_to_edge and not self.overlaps and self.orientation_ok and self.area_ok
                and self.census == self.expected_census)


def seed_prototile(ctx: SearchContext, proto: int) -> list[Placement]:
    return [Placement(proto, 0, False, ctx.lat.zero)]


def seed_star(ctx: SearchContext, proto: Optional[int] = None) -> list[Placement]:
    """2n copies of a narrow prototile around its narrow corner, alternately mirrored.

    Copy 2j covers the angular sector [2j, 2j+1) in units of pi/n and copy
    2j+1 is its mirror image across the shared ray.
    """
    n = ctx.n
    if proto is None:
        proto = next(p for p, pt in enumerate(ctx.protos) if 1 in pt.tri.angles)
    pt = ctx.protos[proto]
    if 1 not in pt.tri.angles:
        raise ValueError("the star seed needs a narrow prototile")
    corner = pt.tri.angles.index(1)
    d = pt.dirs[(corner + 2) % 3]  # direction from the narrow corner to the next vertex
    out = []
    for j in range(n):
        for flip in (False, True):
            rot = (2 * j + 2 + d if flip else 2 * j - d) % (2 * n)
            apex = pt.verts[rot][int(flip)][corner]
            out.append(Placement(proto, rot, flip, tuple(-c for c in apex)))
    return out


def check_patch(n: int, triangles: Sequence[tuple], arrows: Optional[Sequence[tuple]] = None):
    """Independent edge-to-edge and overlap checker.

    ``triangles`` are lattice vertex triples; ``arrows`` optionally gives,
    per triangle, the forward start point of each edge. Returns
    (edge_to_edge, overlaps, orientation_ok, offending pair or None).
    """
    lat = lattice(n)
    fl = [[lat.embed(v) for v in t] for t in triangles]
    boxes = [(min(p[0] for p in f), min(p[1] for p in f), max(p[0] for p in f), max(p[1] for p in f)) for f in fl]
    size = max((b[2] - b[0] for b in boxes), default=1.0) or 1.0
    grid: dict = defaultdict(list)
    for i, b in enumerate(boxes):
        for gx in range(math.floor(b[0] / size), math.floor(b[2] / size) + 1):
            for gy in range(math.floor(b[1] / size), math.floor(b[3] / size) + 1):
                grid[(gx, gy)].append(i)
    pairs = set()
    for cell in grid.values():
        for a, b in itertools.combinations(cell, 2):
            pairs.add((min(a, b), max(a, b)))
    e2e, overlaps, orient_ok, bad = True, False, True, None
    tol = 1e-9
    for i, j in sorted(pairs):
        bi, bj = boxes[i], boxes[j]
        if bi[0] > bj[2] + tol or bj[0] > bi[2] + tol or bi[1] > bj[3] + tol or bj[1] > bi[3] + tol:
            continue
        ti, tj = triangles[i], triangles[j]
        if interiors_overlap(n, ti, tj, exact=False):
            overlaps = True
            bad = bad or (i, j)
            continue
        fi, fj = fl[i], fl[j]
        for a in range(3):
            ea = (ti[(a + 1) % 3], ti[(a + 2) % 3])
            fa = (fi[(a + 1) % 3], fi[(a + 2) % 3])
            for b in range(3):
                eb = (tj[(b + 1) % 3], tj[(b + 2) % 3])
                if set(ea) == set(eb):
                    rel = "equal"
                elif _clearly_apart(fa, (fj[(b + 1) % 3], fj[(b + 2) % 3])):
                    continue
                else:
                    rel = segment_relation(n, ea, eb, exact=False)
                if rel not in ("equal", "disjoint", "shared_endpoint_only"):
                    e2e = False
                    bad = bad or (i, j)
                elif rel == "equal" and arrows is not None and arrows[i][a] != arrows[j][b]:
                    orient_ok = False
                    bad = bad or (i, j)
    return e2e, overlaps, orient_ok, bad


def _clearly_apart(fa, fb, tol=1e-7) -> bool:
    """Float test that two segments neither meet nor come close; False when unsure."""
    (ax, ay), (bx, by) = fa
    (cx, cy), (dx, dy) = fb
    if max(ax, bx) < min(cx, dx) - tol or max(cx, dx) < min(ax, bx) - tol:
        return True
    if max(ay, by) < min(cy, dy) - tol or max(cy, dy) < min(ay, by) - tol:
        return True
    o1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    o2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    if (o1 > tol and o2 > tol) or (o1 < -tol and o2 < -tol):
        return True
    o3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    o4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    return (o3 > tol and o4 > tol) or (o3 < -tol and o4 < -tol)


def _area2(n: int, tri) -> float:
    lat = lattice(n)
    (ax, ay), (bx, by), (cx, cy) = (lat.embed(v) for v in tri)
    return abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


def forward_starts(ctx: SearchContext, pl: Placement, mask: int) -> tuple:
    v = tile_vertices(ctx, pl)
    return tuple(v[(e + 1) % 3] if (mask >> (3 * pl.proto + e)) & 1 else v[(e + 2) % 3] for e in range(3))


def apply_and_verify(ctx: SearchContext, rule: RuleSet, seed: Sequence[Placement], k: int,
                     max_tiles: Optional[int] = None) -> tuple[list[Placement], VerificationReport]:
    """Apply the rule k times to ``seed`` and check the outcome independently."""
    if k < 0:
        raise ValueError("k must be non-negative")
    nproto = len(ctx.protos)
    seed_census = [0] * nproto
    for pl in seed:
        seed_census[pl.proto] += 1
    Mk = matrix_power(ctx.M, k)
    expected = tuple(sum(Mk[i][j] * seed_census[j] for j in range(nproto)) for i in range(nproto))
    if max_tiles is not None and sum(expected) > max_tiles:
        raise ValueError(f"level {k} needs {sum(expected)} tiles, more than the budget of {max_tiles}")
    patch = list(seed)
    for _ in range(k):
        patch = substitute(ctx, rule, patch)
    census = [0] * nproto
    for pl in patch:
        census[pl.proto] += 1
    tris = [tile_vertices(ctx, pl) for pl in patch]
    arrows = [forward_starts(ctx, pl, rule.orientation) for pl in patch]
    e2e, overlaps, orient_ok, bad = check_patch(ctx.n, tris, arrows)
    lam = float(ctx.config.lam)
    seed_area = sum(_area2(ctx.n, tile_vertices(ctx, pl)) for pl in seed)
    got_area = sum(_area2(ctx.n, t) for t in tris)
    area_ok = math.isclose(got_area, seed_area * lam ** (2 * k), rel_tol=1e-9)
    if area_ok and len(seed) == 1:
        region = list(tile_vertices(ctx, seed[0]))
        for _ in range(k):
            region = [ctx.lat.scale(ctx.config.lam, v) for v in region]
        area_ok = all(point_in_closed_triangle(ctx.n, v, region, exact=False) for v in {v for t in tris for v in t})
    report = VerificationReport(k, len(patch), tuple(census), expected, e2e, overlaps, orient_ok, area_ok,
                                None if bad is None else (patch[bad[0]], patch[bad[1]]))
    return patch, report


# --- observation about vertex polarity -----------------------------------


def vertex_polarity(ctx: SearchContext, mask: int) -> bool:
    """Whether edges meeting at an even multiple of pi/n point the same way relative to the
    vertex, and at an odd multiple opposite ways, on every prototile."""
    for p, pt in enumerate(ctx.protos):
        for i, k in enumerate(pt.tri.angles):
            incoming = bool((mask >> (3 * p + (i + 1) % 3)) & 1)  # edge i+1 ends at vertex i when forward
            outgoing = bool((mask >> (3 * p + (i + 2) % 3)) & 1)  # edge i+2 starts at vertex i when forward
            towards_a, towards_b = incoming, not outgoing
            if (towards_a == towards_b) != (k % 2 == 0):
                return False
    return True


def polarity_report(ctx: SearchContext, assembly: Assembly) -> dict[int, bool]:
    """Per complete orientation class: does some relabeling of it have the polarity property?"""
    group = OrientationGroup(ctx)
    return {c.orientation: any(vertex_polarity(ctx, m) for m in group.orbit(c.orientation))
            for c in assembly.complete_classes()}
