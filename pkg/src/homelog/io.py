"""CSV readers and writers for sensor logs, metadata, events and edits.

Every table has a required header row. Timestamps are naive local time in
``YYYY-MM-DD HH:MM:SS``.
"""

from __future__ import annotations

import csv
import io
from datetime import datetime
from pathlib import Path
from typing import Iterable, Union

from .model import (EditKind, EditOp, EventLog, HomelogError, LocationEvent,
                    Origin, SensorKind, SensorLog, SensorMeta, SensorReading,
                    default_support)

TIME_FORMAT = "%Y-%m-%d %H:%M:%S"

SENSOR_HEADER = ["timestamp", "sensor_id", "value"]
META_HEADER = ["sensor_id", "kind", "location"]
EVENT_HEADER = ["location", "start", "end", "support"]
EDIT_HEADER = ["kind", "position", "location", "cost"]

PathLike = Union[str, Path]


class ParseError(HomelogError):
    def __init__(self, source: str, line: int, column: int, message: str):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.source = source
        self.line = line
        self.column = column


def format_time(ts: datetime) -> str:
    return ts.strftime(TIME_FORMAT)


def _rows(text: str, header: list[str], source: str):
    reader = csv.reader(io.StringIO(text))
    first = next(reader, None)
    if first is None:
        raise ParseError(source, 1, 1, f"missing header {','.join(header)}")
    got = [h.strip() for h in first]
    if got != header:
        for col, (a, b) in enumerate(zip(got + [""] * len(header), header), 1):
            if a != b:
                raise ParseError(source, 1, col, f"expected header {','.join(header)}")
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        line = reader.line_num
        if len(row) != len(header):
            raise ParseError(source, line, min(len(row), len(header)) + 1,
                             f"expected {len(header)} fields, got {len(row)}")
        yield line, [c.strip() for c in row]


def _time(text: str, source: str, line: int, col: int) -> datetime:
    try:
        return datetime.strptime(text, TIME_FORMAT)
    except ValueError:
        raise ParseError(source, line, col,
                         f"bad timestamp {text!r}, expected YYYY-MM-DD HH:MM:SS") from None


def _int(text: str, source: str, line: int, col: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(source, line, col, f"expected an integer, got {text!r}") from None


def parse_sensor_csv(text: str, meta: Iterable[SensorMeta] = (),
                     source: str = "<sensors>") -> SensorLog:
    readings = []
    for line, (ts, sid, value) in _rows(text, SENSOR_HEADER, source):
        v = _int(value, source, line, 3)
        if v not in (0, 1):
            raise ParseError(source, line, 3, f"sensor value must be 0 or 1, got {v}")
        if not sid:
            raise ParseError(source, line, 2, "empty sensor_id")
        readings.append(SensorReading(_time(ts, source, line, 1), sid, v))
    return SensorLog.from_unsorted(readings, meta)


def parse_meta_csv(text: str, source: str = "<meta>") -> tuple[SensorMeta, ...]:
    out = []
    seen = set()
    for line, (sid, kind, loc) in _rows(text, META_HEADER, source):
        try:
            k = SensorKind.parse(kind)
        except ValueError as exc:
            raise ParseError(source, line, 2, str(exc)) from None
        if not loc or len(loc.split()) != 1:
            raise ParseError(source, line, 3, f"bad location label {loc!r}")
        if sid in seen:
            raise ParseError(source, line, 1, f"duplicate sensor_id {sid!r}")
        seen.add(sid)
        out.append(SensorMeta(sid, k, loc))
    return tuple(out)


def parse_event_csv(text: str, source: str = "<events>",
                    origin: Origin = Origin.ABSTRACTED) -> EventLog:
    events = []
    for line, (loc, start, end, support) in _rows(text, EVENT_HEADER, source):
        s = _time(start, source, line, 2)
        e = _time(end, source, line, 3)
        if e < s:
            raise ParseError(source, line, 3, "end precedes start")
        if support == "":
            sup = default_support((e - s).total_seconds())
        else:
            sup = _int(support, source, line, 4)
            if sup < 0:
                raise ParseError(source, line, 4, "support must be nonnegative")
        if events and s < events[-1].end:
            raise ParseError(source, line, 2, "event overlaps or precedes the previous one")
        events.append(LocationEvent(loc, s, e, sup))
    return EventLog(tuple(events), origin)


def parse_edits_csv(text: str, source: str = "<edits>") -> list[EditOp]:
    out = []
    for line, (kind, pos, loc, cost) in _rows(text, EDIT_HEADER, source):
        try:
            k = EditKind(kind)
        except ValueError:
            raise ParseError(source, line, 1, f"unknown edit kind {kind!r}") from None
        try:
            c = float(cost)
        except ValueError:
            raise ParseError(source, line, 4, f"bad cost {cost!r}") from None
        p = _int(pos, source, line, 2)
        out.append(EditOp(p, k, loc, c, p if k is EditKind.FUSE else None))
    return out


def _write(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def format_sensor_csv(log: SensorLog) -> str:
    return _write(SENSOR_HEADER, ([format_time(r.timestamp), r.sensor_id, r.value]
                                  for r in log.readings))


def format_meta_csv(meta: Iterable[SensorMeta]) -> str:
    return _write(META_HEADER, ([m.sensor_id, m.kind.value, m.location] for m in meta))


def format_event_csv(log: EventLog) -> str:
    return _write(EVENT_HEADER, ([e.location, format_time(e.start), format_time(e.end),
                                  e.support_count] for e in log.events))


def format_edits_csv(edits: Iterable[EditOp]) -> str:
    return _write(EDIT_HEADER, ([e.kind.value, e.position, e.location, repr(float(e.cost))]
                                for e in edits))


def read_sensor_log(path: PathLike, meta_path: PathLike) -> SensorLog:
    meta = read_meta(meta_path)
    return parse_sensor_csv(Path(path).read_text(), meta, str(path))


def read_meta(path: PathLike) -> tuple[SensorMeta, ...]:
    return parse_meta_csv(Path(path).read_text(), str(path))


def read_events(path: PathLike) -> EventLog:
    return parse_event_csv(Path(path).read_text(), str(path))


def write_text(path: PathLike, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
