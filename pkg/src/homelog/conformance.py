"""Transition checks against the floor-plan graph."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .model import ConfigurationError, EventLog, HomelogError, TransitionModel


class DisconnectedModelError(HomelogError):
    """No path exists between two areas."""


@dataclass(frozen=True)
class TransitionReport:
    total_transitions: int
    invalid: tuple[tuple[int, str, str], ...]

    @property
    def invalid_rate(self) -> float:
        if self.total_transitions == 0:
            return 0.0
        return len(self.invalid) / self.total_transitions

    def summary(self) -> str:
        pct = 100.0 * self.invalid_rate
        return (f"{len(self.invalid)}/{self.total_transitions} transitions invalid "
                f"({pct:.2f}%)")


def check_labels(log: EventLog, model: TransitionModel) -> None:
    for e in log.events:
        if e.location not in model.areas:
            raise ConfigurationError(f"location {e.location!r} is not an area of the model")


def validate(log: EventLog, model: TransitionModel) -> TransitionReport:
    """Flag every consecutive pair whose areas are not joined by an edge."""
    check_labels(log, model)
    locs = log.locations
    invalid = tuple((i, a, b) for i, (a, b) in enumerate(zip(locs, locs[1:]))
                    if not model.adjacent(a, b))
    return TransitionReport(max(len(locs) - 1, 0), invalid)


def shortest_connector(model: TransitionModel, src: str, dst: str) -> list[str]:
    """Intermediate areas on a shortest path ``src -> dst``, endpoints excluded.

    Among equally short paths the lexicographically smallest label sequence
    wins. Returns ``[]`` when the areas are equal or adjacent.
    """
    for a in (src, dst):
        if a not in model.areas:
            raise ConfigurationError(f"location {a!r} is not an area of the model")
    if src == dst:
        return []
    adj = model.adjacency()
    # Distances to dst, then a greedy walk picking the smallest label that
    # stays on a shortest path; this yields the lexicographic minimum.
    dist = {dst: 0}
    queue = deque([dst])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    if src not in dist:
        raise DisconnectedModelError(f"no path from {src!r} to {dst!r}")
    path = []
    u = src
    while dist[u] > 1:
        u = min(v for v in adj[u] if dist.get(v) == dist[u] - 1)
        path.append(u)
    return path


def components(model: TransitionModel) -> list[set[str]]:
    adj = model.adjacency()
    seen: set[str] = set()
    out = []
    for a in sorted(model.areas):
        if a in seen:
            continue
        comp = {a}
        queue = deque([a])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in comp:
                    comp.add(v)
                    queue.append(v)
        seen |= comp
        out.append(comp)
    return out


def diameter(model: TransitionModel) -> int:
    """Longest shortest-path length (in edges) within any component."""
    adj = model.adjacency()
    best = 0
    for a in model.areas:
        dist = {a: 0}
        queue = deque([a])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        best = max(best, max(dist.values()))
    return best


def parse_model(text: str, source: str = "<model>") -> TransitionModel:
    """Parse ``AreaA -- AreaB`` lines; ``#`` starts a comment.

    A line holding a single label declares an isolated area.
    """
    pairs = []
    areas = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "--" in line:
            parts = [p.strip() for p in line.split("--")]
            if len(parts) != 2 or not all(parts) or any(len(p.split()) != 1 for p in parts):
                raise ConfigurationError(f"{source}:{lineno}: expected 'AreaA -- AreaB', got {raw!r}")
            if parts[0] == parts[1]:
                raise ConfigurationError(f"{source}:{lineno}: self-loop {parts[0]!r}")
            pairs.append((parts[0], parts[1]))
        elif len(line.split()) == 1:
            areas.add(line)
        else:
            raise ConfigurationError(f"{source}:{lineno}: expected 'AreaA -- AreaB', got {raw!r}")
    return TransitionModel.from_edges(pairs, areas)


def load_model(path: Union[str, Path]) -> TransitionModel:
    path = Path(path)
    return parse_model(path.read_text(), str(path))


def format_model(model: TransitionModel) -> str:
    lines = [f"{a} -- {b}" for a, b in model.sorted_edges()]
    connected = {a for e in model.edges for a in e}
    lines += sorted(model.areas - connected)
    return "\n".join(lines) + "\n"
