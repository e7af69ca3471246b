import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle_tilings import enumerate_dissections
from oracles import patch_defects
from trisubst.cyclotomic import InflationFactor
from trisubst.geometry import special_set
from trisubst.search import (
    KillSwitch,
    OrientationStore,
    SearchConfig,
    SearchContext,
    SearchState,
    run_search,
    sequential_campaign,
    solve,
)


def context(n=5, lam=(1, 1), **kw):
    return SearchContext(SearchConfig(n, tuple(special_set(n)), InflationFactor(n, lam), **kw))


def float_tiles(ctx, result):
    return [tuple(ctx.lat.embed(v) for v in ctx.tile_from_motion(*pl).vertices) for pl in result.tiles]


def geometric_key(ctx, result):
    def k(p):
        return (round(p[0], 6) + 0.0, round(p[1], 6) + 0.0)

    return frozenset(frozenset(k(p) for p in t) for t in float_tiles(ctx, result))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.booleans()), max_size=10))
def test_orientation_store_matches_brute_force(relations):
    store = OrientationStore(6)
    accepted = []
    for a, b, same in relations:
        before = store.state()
        ok = store.relate(a, b, same, tag=len(accepted))
        trial = accepted + [(a, b, same)]
        sat = any(all((x[i] == x[j]) == s for i, j, s in trial) for x in itertools.product((0, 1), repeat=6))
        assert ok == sat
        if ok:
            accepted.append((a, b, same))
        else:
            assert store.state() == before
    # parity classes agree with every accepted relation
    classes = store.classes()
    for a, b, same in accepted:
        assert classes[a][0] == classes[b][0]
        assert (classes[a][1] == classes[b][1]) == same
    while accepted:
        store.undo_tag(len(accepted) - 1)
        accepted.pop()
    assert store.classes() == tuple((v, 0) for v in range(6))


def test_step_forward_and_back_are_inverse():
    ctx = context(7, (1, 1, 0))
    rng = random.Random(3)
    for t0 in range(3):
        state = ctx.initial_state(t0, ctx.make_starters(t0)[0])
        history = []
        for _ in range(12):
            options = [c for c in range(12) if state.mult[c >> 2] and (t := state.place(c)) is not None
                       and state.compatible(t)]
            if not options:
                break
            history.append(state.snapshot())
            state.step_forward(state.place(rng.choice(options)))
        while history:
            state.step_back()
            assert state.snapshot() == history.pop()


def test_geometric_results_equal_independent_enumeration(five):
    ctx = context(orientation=False)
    found = sequential_campaign(ctx)
    tau2 = float(ctx.config.lam)
    for t0, triple in enumerate(ctx.config.prototiles):
        ours = {geometric_key(ctx, r) for r in found[t0]}
        theirs = enumerate_dissections(5, list(ctx.config.prototiles), tau2, triple, ctx.column(t0))
        assert ours == theirs
        assert len(ours) == {0: 16, 1: 84}[t0]
        # oriented search keeps a subset of the geometric dissections
        assert {geometric_key(ctx, r) for r in five.found[t0]} <= theirs


def _audit(ctx, found):
    for t0, results in found.items():
        region = tuple(ctx.lat.embed(v) for v in ctx.inflated[t0])
        assert results
        for r in results:
            assert r.census(len(ctx.protos)) == ctx.column(t0)
            assert patch_defects(float_tiles(ctx, r), region) == []


def _arrows_agree(ctx, result):
    """Every edge shared by two tiles gets the same arrow from both sides."""
    classes = result.orientation
    tiles = [ctx.tile_from_motion(*pl) for pl in result.tiles]
    seen = {}
    for t in tiles:
        for e in range(3):
            a, b = t.vertices[(e + 1) % 3], t.vertices[(e + 2) % 3]
            rep, par = classes[3 * t.proto + e]
            # arrow as (class, parity, start point of the forward direction)
            key = frozenset((a, b))
            if key in seen:
                rep2, par2, start2 = seen[key]
                if rep != rep2:
                    return False
                if (par != par2) != (start2 != a):
                    return False
            else:
                seen[key] = (rep, par, a)
    return True


def test_five_results_are_valid_patches(five):
    _audit(five.ctx, five.found)
    for results in five.found.values():
        assert all(_arrows_agree(five.ctx, r) for r in results)


def test_seven_results_are_valid_patches(seven):
    _audit(seven.ctx, seven.found)
    for results in seven.found.values():
        assert all(_arrows_agree(seven.ctx, r) for r in results)


def test_results_are_distinct_and_deterministic(five):
    again = sequential_campaign(five.ctx)
    assert again == five.found
    for results in five.found.values():
        assert len(set(r.tiles for r in results)) == len(results)


def test_frontier_cut_changes_nothing(five):
    assert sequential_campaign(context(frontier_cut=True)) == five.found


def test_other_starter_sides_find_the_same_patches(five):
    for side in (1, 2):
        ctx = context(starter_side=side)
        found = sequential_campaign(ctx)
        for t0 in found:
            assert {geometric_key(ctx, r) for r in found[t0]} == {geometric_key(five.ctx, r) for r in five.found[t0]}


def test_kill_switch_split_preserves_results(five):
    ctx = five.ctx
    for t0 in range(2):
        for starter in ctx.make_starters(t0):
            whole, _ = run_search(ctx, t0, starter)
            kill = KillSwitch()
            pending, out = [], []
            state = ctx.initial_state(t0, starter)
            # run a little, then split everything still open
            rep = solve(state, out.append, max_nodes=5)
            kill.trigger()
            rep = solve(state, out.append, kill=kill, spill=pending.append)
            assert not rep.truncated
            while pending:
                snap = pending.pop()
                solve(SearchState.from_snapshot(ctx, snap), out.append)
            assert sorted(r.tiles for r in out) == sorted(r.tiles for r in whole)


def test_limits_truncate():
    ctx = context()
    starter = ctx.make_starters(1)[0]
    out, rep = run_search(ctx, 1, starter, max_results=3)
    assert len(out) == 3 and rep.truncated
    out, rep = run_search(ctx, 1, starter, max_nodes=10)
    assert rep.truncated and rep.nodes == 10


def test_disabling_orientation_only_adds_results(five):
    loose = sequential_campaign(context(orientation=False))
    for t0 in five.found:
        assert {r.tiles for r in five.found[t0]} <= {r.tiles for r in loose[t0]}
        assert all(r.orientation == tuple((v, 0) for v in range(6)) for r in loose[t0])


def test_starters_follow_the_length_matrix():
    ctx = context(7, (1, 1, 0))
    for t0, pt in enumerate(ctx.protos):
        side_class = pt.lengths[0]
        lengths = [s.length for s in ctx.make_starters(t0)]
        assert lengths == [k for k in (1, 2, 3) if ctx.X[k - 1][side_class - 1] > 0]
