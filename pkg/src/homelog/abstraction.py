"""Sensor log -> location event log."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .model import (ConfigurationError, EventLog, LocationEvent, Origin,
                    SensorLog)


@dataclass(frozen=True)
class AbstractionConfig:
    mapping: Mapping[str, str] = field(default_factory=dict)
    close_open_tail: bool = True

    @classmethod
    def from_log(cls, log: SensorLog, close_open_tail: bool = True) -> "AbstractionConfig":
        return cls(log.location_map(), close_open_tail)


@dataclass
class AbstractionDiagnostics:
    zero_readings: int = 0
    one_readings: int = 0


def abstract(log: SensorLog, cfg: Optional[AbstractionConfig] = None,
             diagnostics: Optional[AbstractionDiagnostics] = None) -> EventLog:
    """Turn value-1 readings into location events.

    An event opens at the first reading in a location and closes at the first
    later reading from a different location. The last event closes at the
    log's final timestamp when ``cfg.close_open_tail`` is set, otherwise at its
    own last reading. Value-0 readings never open or close events.
    """
    if cfg is None:
        cfg = AbstractionConfig.from_log(log)
    mapping = cfg.mapping
    diag = diagnostics if diagnostics is not None else AbstractionDiagnostics()

    for r in log.readings:
        if r.sensor_id not in mapping:
            raise ConfigurationError(f"sensor {r.sensor_id!r} has no location mapping")

    events: list[LocationEvent] = []
    current = None
    start = last = None
    support = 0
    for r in log.readings:
        if r.value == 0:
            diag.zero_readings += 1
            continue
        diag.one_readings += 1
        loc = mapping[r.sensor_id]
        if loc == current:
            support += 1
            last = r.timestamp
            continue
        if current is not None:
            events.append(LocationEvent(current, start, r.timestamp, support))
        current, start, last, support = loc, r.timestamp, r.timestamp, 1

    if current is not None:
        end = log.span[1] if cfg.close_open_tail else last
        events.append(LocationEvent(current, start, end, support))
    return EventLog(tuple(events), Origin.ABSTRACTED)
