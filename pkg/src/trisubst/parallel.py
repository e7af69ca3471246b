"""Campaign runner: a LIFO pool of searches drained by one or more workers.

Every search is handed around as a :class:`Snapshot`. When the pool runs
low, running searches get their kill switch set, which makes them push their
untried branches back onto the pool instead of exploring them.
"""
from __future__ import annotations

import logging
import multiprocessing as mp
import traceback
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .search import (
    KillSwitch,
    Result,
    SearchConfig,
    SearchContext,
    SearchState,
    Snapshot,
    solve,
)

log = logging.getLogger(__name__)


class CampaignError(RuntimeError):
    """A worker failed; ``partial`` holds whatever was collected before."""

    def __init__(self, message: str, partial: "CampaignResult"):
        super().__init__(message)
        self.partial = partial


@dataclass
class CampaignResult:
    results: dict[int, list[Result]]
    per_starter: dict[tuple[int, int], int] = field(default_factory=dict)
    nodes: int = 0
    snapshots: int = 0
    truncated: bool = False
    partial: bool = False

    def all_results(self) -> list[Result]:
        return [r for t0 in sorted(self.results) for r in self.results[t0]]


def canonical_order(results):
    return sorted(results, key=lambda r: (r.t0, r.starter, r.tiles))


def seed_snapshots(ctx: SearchContext) -> list[Snapshot]:
    """One fresh search per (prototile, starter length), in prototile order."""
    out = []
    for t0 in range(len(ctx.protos)):
        for st in ctx.make_starters(t0):
            out.append(ctx.initial_state(t0, st).snapshot())
    return out


class _PoolSwitch(KillSwitch):
    """Triggers itself when the shared pool holds fewer than ``threshold`` searches."""

    def __init__(self, pending: list, threshold: int):
        super().__init__()
        self.pending = pending
        self.threshold = threshold

    def poll(self) -> None:
        if len(self.pending) < self.threshold:
            self.trigger()


class _SharedSwitch(KillSwitch):
    """Kill switch backed by a byte in shared memory, set by the coordinator."""

    def __init__(self, flag):
        super().__init__()
        self.flag = flag

    @property
    def triggered(self) -> bool:
        return bool(self.flag.value)

    def trigger(self) -> None:
        self.flag.value = 1


def _finish(ctx: SearchContext, found: list[Result], res: CampaignResult) -> CampaignResult:
    by_t0: dict[int, list[Result]] = {t0: [] for t0 in range(len(ctx.protos))}
    for r in canonical_order(found):
        by_t0[r.t0].append(r)
    res.results = by_t0
    res.per_starter = dict(sorted(Counter((r.t0, r.starter) for r in found).items()))
    return res


def run_campaign(
    config: SearchConfig | SearchContext,
    workers: int = 1,
    kill_threshold: Optional[int] = None,
    poll_every: int = 512,
    max_results: Optional[int] = None,
    max_nodes: Optional[int] = None,
) -> CampaignResult:
    """Run every search of a campaign; the result multiset does not depend on scheduling."""
    ctx = config if isinstance(config, SearchContext) else SearchContext(config)
    if workers < 1:
        raise ValueError("workers must be at least 1")
    threshold = workers if kill_threshold is None else kill_threshold
    max_results = ctx.config.max_results if max_results is None else max_results
    max_nodes = ctx.config.max_nodes if max_nodes is None else max_nodes
    if workers == 1:
        return _run_inline(ctx, threshold, poll_every, max_results, max_nodes)
    return _run_processes(ctx, workers, threshold, poll_every, max_results, max_nodes)


def _budget(limit, used):
    return None if limit is None else max(limit - used, 0)


def _run_inline(ctx, threshold, poll_every, max_results, max_nodes) -> CampaignResult:
    pending = seed_snapshots(ctx)
    pending.reverse()  # pop() then yields the first prototile first
    found: list[Result] = []
    res = CampaignResult({})
    while pending:
        snap = pending.pop()
        state = SearchState.from_snapshot(ctx, snap)
        switch = _PoolSwitch(pending, threshold)
        switch.poll()
        rep = solve(state, found.append, switch, pending.append, poll_every=poll_every,
                    max_nodes=_budget(max_nodes, res.nodes), max_results=_budget(max_results, len(found)))
        res.nodes += rep.nodes
        res.snapshots += rep.snapshots
        if rep.truncated or (max_results is not None and len(found) >= max_results and pending):
            res.truncated = True
            break
    return _finish(ctx, found, res)


def _worker(wid, config, flag, inbox, outbox, poll_every):
    ctx = SearchContext(config)
    switch = _SharedSwitch(flag)
    while True:
        job = inbox.get()
        if job is None:
            return
        snap, max_nodes, max_results = job
        try:
            state = SearchState.from_snapshot(ctx, snap)
            batch: list[Result] = []
            spilled: list[Snapshot] = []

            def spill(s):
                spilled.append(s)
                if len(spilled) >= 16:
                    outbox.put(("spill", wid, list(spilled)))
                    spilled.clear()

            def sink(r):
                batch.append(r)

            rep = solve(state, sink, switch, spill, poll_every=poll_every, max_nodes=max_nodes,
                        max_results=max_results)
            if spilled:
                outbox.put(("spill", wid, spilled))
            outbox.put(("done", wid, (batch, rep.nodes, rep.snapshots, rep.truncated)))
        except Exception:  # surfaced by the coordinator
            outbox.put(("error", wid, traceback.format_exc()))


def _run_processes(ctx, workers, threshold, poll_every, max_results, max_nodes) -> CampaignResult:
    mpctx = mp.get_context("fork")
    pending = seed_snapshots(ctx)
    pending.reverse()
    flags = [mpctx.RawValue("b", 0) for _ in range(workers)]
    inboxes = [mpctx.SimpleQueue() for _ in range(workers)]
    outbox = mpctx.Queue()
    procs = [mpctx.Process(target=_worker, args=(w, ctx.config, flags[w], inboxes[w], outbox, poll_every), daemon=True)
             for w in range(workers)]
    for p in procs:
        p.start()
    idle = list(range(workers - 1, -1, -1))
    active: set[int] = set()
    found: list[Result] = []
    res = CampaignResult({})
    error = None
    try:
        while pending or active:
            while idle and pending and not res.truncated:
                w = idle.pop()
                flags[w].value = 0
                inboxes[w].put((pending.pop(), _budget(max_nodes, res.nodes), _budget(max_results, len(found))))
                active.add(w)
            if len(pending) < threshold:
                for w in active:
                    flags[w].value = 1
            if not active:
                break
            kind, w, payload = outbox.get()
            if kind == "spill":
                pending.extend(payload)
                res.snapshots += len(payload)
            elif kind == "done":
                batch, nodes, _, truncated = payload
                found.extend(batch)
                res.nodes += nodes
                active.discard(w)
                idle.append(w)
                if truncated or (max_results is not None and len(found) >= max_results):
                    res.truncated = True
                    pending.clear()
                    for v in active:
                        flags[v].value = 1
            else:
                error = payload
                active.discard(w)
                res.partial = True
                break
    finally:
        for q in inboxes:
            q.put(None)
        for p in procs:
            p.join(timeout=5)
            if p.is_alive():
                p.terminate()
    if max_results is not None and len(found) > max_results:
        found = canonical_order(found)[:max_results]
    out = _finish(ctx, found, res)
    if error is not None:
        raise CampaignError(f"worker failed:\n{error}", out)
    return out
