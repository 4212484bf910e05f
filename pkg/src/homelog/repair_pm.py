"""Minimum-penalty repair of location traces against a transition model.

A trace is repaired with two primitive edits: removing an event (cost
``remove_base + remove_per_support * support_count``) and inserting a
zero-duration event (cost ``insert_cost``). Removals may leave same-location
neighbours, which are then fused at no cost.
"""

from __future__ import annotations

import heapq
import itertools
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

from .conformance import check_labels, components, diameter
from .model import (EditKind, EditOp, EventLog, HomelogError, LocationEvent,
                    Origin, RepairResult, TransitionModel, fuse_adjacent_edits)

__all__ = ["PenaltyConfig", "EditOp", "RepairResult", "InfeasibleRepairError",
           "repair", "brute_force_repair"]


class InfeasibleRepairError(HomelogError):
    """The trace cannot be turned into a walk of the model."""


@dataclass(frozen=True)
class PenaltyConfig:
    insert_cost: float = 1.0
    remove_base: float = 1.0
    remove_per_support: float = 0.1
    max_consecutive_insertions: Optional[int] = None  # None -> number of areas

    def __post_init__(self):
        for name in ("insert_cost", "remove_base", "remove_per_support"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.max_consecutive_insertions is not None and self.max_consecutive_insertions < 1:
            raise ValueError("max_consecutive_insertions must be positive")

    def insert_bound(self, model: TransitionModel) -> int:
        if self.max_consecutive_insertions is None:
            return max(len(model.areas), 1)
        return self.max_consecutive_insertions

    def penalty(self, inserts: int, removes: int, removed_support: int) -> float:
        # Totals are always evaluated from integer counts so that any two
        # search procedures reaching the same edit multiset agree bit-exactly.
        return (self.insert_cost * inserts + self.remove_base * removes
                + self.remove_per_support * removed_support)

    def remove_cost(self, support: int) -> float:
        return self.remove_base + self.remove_per_support * support


def _precheck(log: EventLog, model: TransitionModel, cfg: PenaltyConfig) -> int:
    log.check_order()
    check_labels(log, model)
    used = set(log.locations)
    for comp in components(model):
        if used <= comp:
            break
    else:
        raise InfeasibleRepairError(
            f"locations {sorted(used)} do not lie in one connected part of the model")
    bound = cfg.insert_bound(model)
    diam = diameter(model)
    if bound < diam:
        warnings.warn(f"max_consecutive_insertions={bound} is below the model diameter {diam}; "
                      "some connectors cannot be inserted", stacklevel=3)
    return bound


def build_result(log: EventLog, edits: Sequence[EditOp], cfg: PenaltyConfig,
                 inserts: int, removes: int, removed_support: int) -> RepairResult:
    """Apply insert/remove ``edits`` to ``log``, fuse, and package the result."""
    n = len(log)
    removed = {e.position for e in edits if e.kind is EditKind.REMOVE}
    ins_at: dict[int, list[str]] = {}
    for e in edits:
        if e.kind is EditKind.INSERT:
            ins_at.setdefault(e.position, []).append(e.location)

    kept_after = [None] * (n + 1)  # index of the first kept event at or after i
    for i in range(n - 1, -1, -1):
        kept_after[i] = i if i not in removed else kept_after[i + 1]

    events: list[LocationEvent] = []
    sources: list[int] = []
    for i in range(n + 1):
        for loc in ins_at.get(i, ()):
            nxt = kept_after[i]
            if nxt is not None:
                t = log.events[nxt].start
            else:
                t = events[-1].end
            events.append(LocationEvent(loc, t, t, 0))
            sources.append(i)
        if i < n and i not in removed:
            events.append(log.events[i])
            sources.append(i)

    fused, fuse_ops, sources = fuse_adjacent_edits(
        EventLog(tuple(events), Origin.REPAIRED), sources)
    all_edits = sorted(list(edits) + fuse_ops, key=lambda e: (e.position, _KIND_RANK[e.kind]))
    return RepairResult(fused, tuple(all_edits), cfg.penalty(inserts, removes, removed_support),
                        tuple(sources))


_KIND_RANK = {EditKind.INSERT: 0, EditKind.REMOVE: 1, EditKind.FUSE: 2}


class _Entry:
    """Heap entry ordered by (penalty, edit count, edit sequence, state)."""

    __slots__ = ("cost", "n_edits", "path", "state", "counts")

    def __init__(self, cost, n_edits, path, state, counts):
        self.cost = cost
        self.n_edits = n_edits
        self.path = path          # cons list: (edit key, EditOp, parent) or None
        self.state = state
        self.counts = counts      # (inserts, removes, removed_support)

    def __lt__(self, other):
        if self.cost != other.cost:
            return self.cost < other.cost
        if self.n_edits != other.n_edits:
            return self.n_edits < other.n_edits
        c = _compare_paths(self.path, other.path)
        if c:
            return c < 0
        return _state_key(self.state) < _state_key(other.state)


def _compare_paths(a, b) -> int:
    """Lexicographic comparison of two equally long edit sequences.

    Walks back to the shared prefix, then compares from the front.
    """
    pairs = []
    while a is not b:
        pairs.append((a[0], b[0]))
        a, b = a[2], b[2]
    for ka, kb in reversed(pairs):
        if ka != kb:
            return -1 if ka < kb else 1
    return 0


def _state_key(state):
    i, last, k = state
    return (-i, last or "", k)


def repair(log: EventLog, model: TransitionModel,
           cfg: Optional[PenaltyConfig] = None) -> RepairResult:
    """Cheapest set of removals and insertions that makes ``log`` a walk of ``model``.

    Uniform-cost search over states ``(next input index, last emitted area,
    inserts since the last kept event)``. Ties are broken by fewer edits and
    then by the lexicographically smallest edit sequence, so the output is
    deterministic.

    Inserted connectors always sit directly before the next kept event: an
    insertion may not be followed by a removal. This gives each corrected
    log a single edit sequence.
    """
    cfg = cfg or PenaltyConfig()
    if len(log) == 0:
        return RepairResult(log, (), 0.0, ())
    bound = _precheck(log, model, cfg)
    adj = model.adjacency()
    locs = log.locations
    supports = [e.support_count for e in log.events]
    n = len(locs)
    # A cheapest repair never repeats an area between two kept events (cutting
    # the cycle saves cost and edits), so once every simple connector fits the
    # insert counter collapses to a flag: 0 after a kept event, 1 after an insert.
    track = bound < len(model.areas) - 2

    start = _Entry(0.0, 0, None, (0, None, 0), (0, 0, 0))
    heap = [start]
    done = set()
    best: dict = {}  # state -> (cost, n_edits) of the cheapest entry pushed so far

    def push(entry):
        seen = best.get(entry.state)
        here = (entry.cost, entry.n_edits)
        if seen is not None and seen < here:
            return
        best[entry.state] = here
        heapq.heappush(heap, entry)

    goal = None
    while heap:
        cur = heapq.heappop(heap)
        state = cur.state
        if state in done:
            continue
        done.add(state)
        i, last, k = state
        if i == n:
            goal = cur
            break
        n_ins, n_rem, s_rem = cur.counts
        loc = locs[i]

        # keep event i
        if last is None or last == loc or loc in adj[last]:
            nxt = (i + 1, loc, 0)
            if nxt not in done:
                push(_Entry(cur.cost, cur.n_edits, cur.path, nxt, cur.counts))
        # remove event i, unless connectors were just inserted before it
        nxt = (i + 1, last, k)
        if k == 0 and nxt not in done:
            counts = (n_ins, n_rem + 1, s_rem + supports[i])
            op = EditOp(i, EditKind.REMOVE, loc, cfg.remove_cost(supports[i]))
            push(_Entry(cfg.penalty(*counts), cur.n_edits + 1,
                        ((i, "remove", loc), op, cur.path), nxt, counts))
        # insert a connector area before event i
        if last is not None and k < bound:
            counts = (n_ins + 1, n_rem, s_rem)
            cost = cfg.penalty(*counts)
            for area in adj[last]:
                nxt = (i, area, k + 1 if track else 1)
                if nxt in done:
                    continue
                op = EditOp(i, EditKind.INSERT, area, cfg.insert_cost)
                push(_Entry(cost, cur.n_edits + 1, ((i, "insert", area), op, cur.path),
                            nxt, counts))

    if goal is None:  # unreachable: removing all but one event is always valid
        raise InfeasibleRepairError("no valid completion found")
    edits = []
    node = goal.path
    while node is not None:
        edits.append(node[1])
        node = node[2]
    edits.reverse()
    return build_result(log, edits, cfg, *goal.counts)


def brute_force_repair(log: EventLog, model: TransitionModel,
                       cfg: Optional[PenaltyConfig] = None,
                       max_edits: int = 4) -> RepairResult:
    """Exhaustive reference for :func:`repair` on tiny instances.

    Enumerates every subset of removed events; for each gap between kept
    events it enumerates insertion strings in increasing length. Only edit
    sequences with at most ``max_edits`` inserts and removals are considered.
    Raises :class:`InfeasibleRepairError` if none is valid.
    """
    cfg = cfg or PenaltyConfig()
    if len(log) > 10 or len(model.areas) > 6 or max_edits > 6:
        raise ValueError("brute_force_repair is limited to 10 events, 6 areas, 6 edits")
    if len(log) == 0:
        return RepairResult(log, (), 0.0, ())
    log.check_order()
    check_labels(log, model)
    bound = cfg.insert_bound(model)
    areas = sorted(model.areas)
    locs = log.locations
    n = len(locs)
    max_gap = min(bound, max_edits)
    gap_cache: dict[tuple[str, str], Optional[tuple[str, ...]]] = {}

    def walk_ok(seq):
        return all(model.adjacent(a, b) for a, b in zip(seq, seq[1:]))

    def gap_fill(a, b):
        if (a, b) not in gap_cache:
            gap_cache[(a, b)] = None
            if a == b:
                gap_cache[(a, b)] = ()
            else:
                for length in range(max_gap + 1):
                    hit = next((mid for mid in itertools.product(areas, repeat=length)
                                if walk_ok((a, *mid, b))), None)
                    if hit is not None:
                        gap_cache[(a, b)] = hit
                        break
        return gap_cache[(a, b)]

    best = None
    for r in range(min(max_edits, n) + 1):
        for removed in itertools.combinations(range(n), r):
            kept = [i for i in range(n) if i not in removed]
            fills = []
            for a, b in zip(kept, kept[1:]):
                fill = gap_fill(locs[a], locs[b])
                if fill is None:
                    break
                fills.append((b, fill))
            else:
                n_ins = sum(len(f) for _, f in fills)
                if n_ins + r > max_edits:
                    continue
                support = sum(log.events[i].support_count for i in removed)
                cost = cfg.penalty(n_ins, r, support)
                edits = []
                for i in removed:
                    edits.append(EditOp(i, EditKind.REMOVE, locs[i],
                                        cfg.remove_cost(log.events[i].support_count)))
                for b, fill in fills:
                    # connectors sit right before the next kept event
                    edits += [EditOp(b, EditKind.INSERT, x, cfg.insert_cost) for x in fill]
                edits.sort(key=lambda e: (e.position, _KIND_RANK[e.kind]))
                key = (cost, len(edits), [e.key for e in edits])
                if best is None or key < best[0]:
                    best = (key, edits, (n_ins, r, support))
    if best is None:
        raise InfeasibleRepairError(f"no valid repair within {max_edits} edits")
    return build_result(log, best[1], cfg, *best[2])
