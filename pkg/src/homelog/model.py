"""Domain types shared by every stage of the pipeline.

All containers are frozen dataclasses; operations build new values instead of
mutating existing ones.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Iterable, Optional, Sequence


class HomelogError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(HomelogError):
    """A sensor, label or setting is unknown or inconsistent."""


class InvalidInputError(HomelogError):
    """Input data violates an ordering or consistency invariant."""


class SensorKind(str, Enum):
    PIR = "PIR"
    CONTACT = "contact"
    POWER = "power"
    GAS = "gas"

    @classmethod
    def parse(cls, text: str) -> "SensorKind":
        for kind in cls:
            if kind.value.lower() == text.strip().lower():
                return kind
        raise ValueError(f"unknown sensor kind {text!r}")


class Origin(str, Enum):
    ABSTRACTED = "abstracted"
    SIMULATED = "simulated"
    REPAIRED = "repaired"


def _truncate_seconds(ts: datetime, what: str) -> datetime:
    if ts.microsecond:
        warnings.warn(f"{what} {ts.isoformat()} has sub-second precision; truncated",
                      stacklevel=3)
        return ts.replace(microsecond=0)
    return ts


@dataclass(frozen=True, order=True)
class SensorReading:
    timestamp: datetime
    sensor_id: str
    value: int

    def __post_init__(self):
        if self.value not in (0, 1):
            raise InvalidInputError(f"sensor value must be 0 or 1, got {self.value!r}")
        object.__setattr__(self, "timestamp", _truncate_seconds(self.timestamp, "reading"))


@dataclass(frozen=True)
class SensorMeta:
    sensor_id: str
    kind: SensorKind
    location: str


@dataclass(frozen=True)
class SensorLog:
    readings: tuple[SensorReading, ...]
    meta: tuple[SensorMeta, ...] = ()

    def __post_init__(self):
        readings = tuple(self.readings)
        object.__setattr__(self, "readings", readings)
        object.__setattr__(self, "meta", tuple(self.meta))
        for a, b in zip(readings, readings[1:]):
            if (b.timestamp, b.sensor_id) < (a.timestamp, a.sensor_id):
                raise InvalidInputError(
                    f"readings not sorted at {b.timestamp} ({b.sensor_id})")
        seen = {}
        for m in self.meta:
            if m.sensor_id in seen and seen[m.sensor_id] != m:
                raise ConfigurationError(f"sensor {m.sensor_id!r} has conflicting metadata")
            seen[m.sensor_id] = m

    @classmethod
    def from_unsorted(cls, readings: Iterable[SensorReading],
                      meta: Iterable[SensorMeta] = ()) -> "SensorLog":
        return cls(tuple(sorted(readings, key=lambda r: (r.timestamp, r.sensor_id))),
                   tuple(meta))

    @property
    def span(self) -> Optional[tuple[datetime, datetime]]:
        if not self.readings:
            return None
        return self.readings[0].timestamp, self.readings[-1].timestamp

    def location_map(self) -> dict[str, str]:
        return {m.sensor_id: m.location for m in self.meta}

    def __len__(self):
        return len(self.readings)


@dataclass(frozen=True)
class LocationEvent:
    """Presence of the resident in one area over ``[start, end]``.

    ``support_count`` is the number of raw readings behind the event; it is 0
    for events inserted by a repair.
    """

    location: str
    start: datetime
    end: datetime
    support_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "start", _truncate_seconds(self.start, "event start"))
        object.__setattr__(self, "end", _truncate_seconds(self.end, "event end"))
        if self.end < self.start:
            raise InvalidInputError(
                f"{self.location} event ends ({self.end}) before it starts ({self.start})")
        if self.support_count < 0:
            raise InvalidInputError("support_count must be nonnegative")

    @property
    def duration(self) -> int:
        """Duration in whole seconds."""
        return int((self.end - self.start).total_seconds())


def default_support(duration_s: float) -> int:
    # Stand-in evidence weight when a log carries no reading counts.
    return max(1, round(duration_s / 60))


@dataclass(frozen=True)
class EventLog:
    events: tuple[LocationEvent, ...]
    origin: Origin = Origin.ABSTRACTED

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "origin", Origin(self.origin))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    @property
    def locations(self) -> list[str]:
        return [e.location for e in self.events]

    @property
    def span(self) -> Optional[tuple[datetime, datetime]]:
        if not self.events:
            return None
        return self.events[0].start, self.events[-1].end

    def check_order(self) -> None:
        """Raise :class:`InvalidInputError` if events are unsorted or overlap."""
        for i, (a, b) in enumerate(zip(self.events, self.events[1:])):
            if b.start < a.start:
                raise InvalidInputError(f"events not sorted by start at index {i + 1}")
            if a.end > b.start:
                raise InvalidInputError(
                    f"event {i} ({a.location}, ends {a.end}) overlaps event {i + 1} "
                    f"({b.location}, starts {b.start})")

    def check_invariants(self) -> None:
        self.check_order()
        for i, (a, b) in enumerate(zip(self.events, self.events[1:])):
            if a.location == b.location:
                raise InvalidInputError(f"events {i} and {i + 1} share location {a.location}")


@dataclass(frozen=True)
class TransitionModel:
    """Undirected floor-plan graph: areas plus the doorways between them."""

    areas: frozenset[str]
    edges: frozenset[frozenset[str]]

    def __post_init__(self):
        areas = frozenset(self.areas)
        edges = frozenset(frozenset(e) for e in self.edges)
        for e in edges:
            if len(e) != 2:
                raise ConfigurationError(f"self-loop or malformed edge {sorted(e)}")
            missing = e - areas
            if missing:
                raise ConfigurationError(f"edge endpoint(s) {sorted(missing)} not in areas")
        object.__setattr__(self, "areas", areas)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, pairs: Iterable[tuple[str, str]],
                   areas: Iterable[str] = ()) -> "TransitionModel":
        pairs = list(pairs)
        all_areas = set(areas)
        for a, b in pairs:
            all_areas.update((a, b))
        return cls(frozenset(all_areas), frozenset(frozenset(p) for p in pairs))

    def adjacent(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.edges

    def neighbors(self, area: str) -> list[str]:
        """Sorted neighbours of ``area``."""
        return sorted(next(iter(e - {area})) for e in self.edges if area in e)

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {a: [] for a in self.areas}
        for e in self.edges:
            a, b = sorted(e)
            adj[a].append(b)
            adj[b].append(a)
        return {a: sorted(n) for a, n in adj.items()}

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(tuple(sorted(e)) for e in self.edges)


class EditKind(str, Enum):
    INSERT = "insert"
    REMOVE = "remove"
    FUSE = "fuse"


@dataclass(frozen=True, order=True)
class EditOp:
    """One alteration of an event log.

    ``position`` indexes the log the edit was computed against. Inserts sit
    before the event at ``position`` (``len(log)`` for the tail). For fuses,
    ``position`` is the absorbed event and ``location`` the shared label.
    """

    position: int
    kind: EditKind
    location: str
    cost: float = 0.0
    absorbed: Optional[int] = field(default=None, compare=False)

    @property
    def key(self) -> tuple:
        return (self.position, self.kind.value, self.location)


@dataclass(frozen=True)
class RepairResult:
    corrected: EventLog
    edits: tuple[EditOp, ...] = ()
    total_penalty: float = 0.0
    # Per corrected event: index in the input log it came from (kept or fused
    # survivor) or, for inserted events, the insert position.
    sources: tuple[int, ...] = ()
    flags: tuple[tuple[int, str], ...] = ()

    @property
    def counts(self) -> dict[str, int]:
        out = {k.value: 0 for k in EditKind}
        for e in self.edits:
            out[e.kind.value] += 1
        return out


def fuse_adjacent_edits(log: EventLog,
                        sources: Optional[Sequence[int]] = None,
                        ) -> tuple[EventLog, list[EditOp], tuple[int, ...]]:
    """Fuse same-location runs and return ``(log, fuse_edits, sources)``.

    ``sources`` maps each input event to a position in some earlier log
    (identity by default); fuse edits are expressed in those positions.
    """
    log.check_order()
    if sources is None:
        sources = range(len(log))
    events: list[LocationEvent] = []
    out_sources: list[int] = []
    edits: list[EditOp] = []
    for ev, src in zip(log.events, sources):
        if events and events[-1].location == ev.location:
            head = events[-1]
            events[-1] = LocationEvent(head.location, head.start, ev.end,
                                       head.support_count + ev.support_count)
            edits.append(EditOp(src, EditKind.FUSE, ev.location, 0.0, absorbed=src))
        else:
            events.append(ev)
            out_sources.append(src)
    return EventLog(tuple(events), log.origin), edits, tuple(out_sources)


def fuse_adjacent(log: EventLog) -> EventLog:
    """Merge each maximal run of consecutive same-location events into one."""
    return fuse_adjacent_edits(log)[0]
