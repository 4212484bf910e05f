"""Correction tables: per-location counts and per-day change metrics."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from typing import Optional

from .model import EditKind, EventLog, HomelogError, RepairResult

DAY = 86400


class IntegrityError(HomelogError):
    """A repair result does not belong to the given input log."""


def pct(part: float, whole: float) -> float:
    return 100.0 * part / whole if whole else 0.0


def duration_pct(seconds: float, base_seconds: float = DAY) -> float:
    """Changed time as a percentage of elapsed wall-clock time."""
    return pct(seconds, base_seconds)


@dataclass(frozen=True)
class LocationRow:
    location: str
    before: int
    after: int
    corrections: int

    @property
    def pct(self) -> float:
        # after-correction count is the denominator
        return pct(self.corrections, self.after)


@dataclass(frozen=True)
class DayRow:
    day: date
    changes: int
    changed_seconds: int

    @property
    def duration_pct(self) -> float:
        return duration_pct(self.changed_seconds)


@dataclass(frozen=True)
class ChangeReport:
    rows: tuple[LocationRow, ...]
    days: tuple[DayRow, ...]
    horizon_seconds: int
    # Externally supplied tables may count an altered record under several
    # locations, so their total is not the column sum.
    total_corrections: Optional[int] = None

    @property
    def totals(self) -> LocationRow:
        corr = (sum(r.corrections for r in self.rows) if self.total_corrections is None
                else self.total_corrections)
        return LocationRow("Total", sum(r.before for r in self.rows),
                           sum(r.after for r in self.rows), corr)

    @property
    def total_changes(self) -> int:
        return sum(d.changes for d in self.days)

    @property
    def total_changed_seconds(self) -> int:
        return sum(d.changed_seconds for d in self.days)

    @property
    def daily_avg_changes(self) -> float:
        return self.total_changes / len(self.days) if self.days else 0.0

    @property
    def daily_max_changes(self) -> int:
        return max((d.changes for d in self.days), default=0)

    @property
    def daily_avg_seconds(self) -> float:
        return self.total_changed_seconds / len(self.days) if self.days else 0.0

    @property
    def daily_max_seconds(self) -> int:
        return max((d.changed_seconds for d in self.days), default=0)

    @property
    def total_changes_pct(self) -> float:
        return pct(self.total_changes, self.totals.after)

    @property
    def total_duration_pct(self) -> float:
        return duration_pct(self.total_changed_seconds, self.horizon_seconds)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["location", "before", "after", "corrections", "pct"])
        for r in (*self.rows, self.totals):
            w.writerow([r.location, r.before, r.after, r.corrections, f"{r.pct:.3f}"])
        return buf.getvalue()

    def days_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["day", "changes", "changed_seconds", "pct"])
        for d in self.days:
            w.writerow([d.day.isoformat(), d.changes, d.changed_seconds, f"{d.duration_pct:.3f}"])
        return buf.getvalue()

    def to_text(self) -> str:
        rows = [(r.location, str(r.before), str(r.after), f"{r.corrections} ({r.pct:.3f}%)")
                for r in (*self.rows, self.totals)]
        head = ("Location", "Before", "After", "Corrections (%)")
        widths = [max(len(x) for x in col) for col in zip(head, *rows)]

        def line(cells):
            return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

        out = [line(head), line(["-" * w for w in widths])]
        out += [line(r) for r in rows[:-1]]
        out += [line(["-" * w for w in widths]), line(rows[-1]), ""]
        out.append("Changes    daily avg %.2f  daily max %d  total %d (%.2f%%)" % (
            self.daily_avg_changes, self.daily_max_changes, self.total_changes,
            self.total_changes_pct))
        out.append("Duration   daily avg %s (%.3f%%)  daily max %s (%.3f%%)  total %s (%.3f%%)" % (
            hms(self.daily_avg_seconds), duration_pct(round(self.daily_avg_seconds)),
            hms(self.daily_max_seconds), duration_pct(self.daily_max_seconds),
            hms(self.total_changed_seconds), self.total_duration_pct))
        out.append("")
        out.append("Percentages of counts use the after-correction count; duration "
                   "percentages use elapsed time (86400 s per day, log span for the total).")
        return "\n".join(out) + "\n"


def hms(seconds: float) -> str:
    s = int(round(seconds))
    h, rem = divmod(s, 3600)
    m, s = divmod(rem, 60)
    return f"{h:02d}:{m:02d}:{s:02d}"


def _midnight(d: date) -> datetime:
    return datetime.combine(d, time())


def _label_segments(log: EventLog):
    return [(e.start, e.end, e.location) for e in log.events if e.end > e.start]


def changed_intervals(before: EventLog, after: EventLog) -> list[tuple[datetime, datetime]]:
    """Maximal intervals where the location label differs between the logs."""
    cuts = set()
    for log in (before, after):
        for e in log.events:
            cuts.add(e.start)
            cuts.add(e.end)
    cuts = sorted(cuts)

    def labeller(log):
        segs = _label_segments(log)
        k = 0

        def at(t0, t1):
            nonlocal k
            while k < len(segs) and segs[k][1] <= t0:
                k += 1
            if k < len(segs) and segs[k][0] <= t0 and t1 <= segs[k][1]:
                return segs[k][2]
            return None
        return at

    lb, la = labeller(before), labeller(after)
    out = []
    for t0, t1 in zip(cuts, cuts[1:]):
        if lb(t0, t1) != la(t0, t1):
            if out and out[-1][1] == t0:
                out[-1] = (out[-1][0], t1)
            else:
                out.append((t0, t1))
    return out


def change_report(before: EventLog, result: RepairResult) -> ChangeReport:
    """Per-location correction counts and per-day change volume.

    Every insert, remove and fuse counts once at its location. Daily change
    counts bucket edits by the start of the input event they point at; the
    changed duration of a day is the time, within that day, whose location
    label differs between the input and corrected logs.
    """
    n = len(before)
    for e in result.edits:
        limit = n if e.kind is EditKind.INSERT else n - 1
        if not 0 <= e.position <= limit:
            raise IntegrityError(f"edit {e.kind.value}@{e.position} outside log of {n} events")

    b = Counter(before.locations)
    a = Counter(result.corrected.locations)
    c = Counter(e.location for e in result.edits)
    locs = sorted(set(b) | set(a) | set(c))
    rows = tuple(LocationRow(loc, b[loc], a[loc], c[loc]) for loc in locs)

    span = before.span or result.corrected.span
    if span is None:
        return ChangeReport(rows, (), 0)
    first_day, last_day = span[0].date(), span[1].date()
    n_days = (last_day - first_day).days + 1
    day_list = [first_day + timedelta(days=k) for k in range(n_days)]
    counts = Counter()
    for e in result.edits:
        if n == 0:
            continue
        t = before.events[e.position].start if e.position < n else before.events[-1].end
        counts[t.date()] += 1
    seconds = Counter()
    for t0, t1 in changed_intervals(before, result.corrected):
        while t0 < t1:
            boundary = min(t1, _midnight(t0.date() + timedelta(days=1)))
            seconds[t0.date()] += int((boundary - t0).total_seconds())
            t0 = boundary
    day_list = sorted(set(day_list) | set(counts) | set(seconds))
    days = tuple(DayRow(d, counts[d], seconds[d]) for d in day_list)
    horizon = int((span[1] - span[0]).total_seconds())
    return ChangeReport(rows, days, horizon)


def report_from_columns(columns: list[tuple[str, int, int, int]],
                        horizon_seconds: Optional[int] = None,
                        total_corrections: Optional[int] = None) -> ChangeReport:
    """Build a report directly from ``(location, before, after, corrections)`` rows.

    ``total_corrections`` overrides the column sum for tables whose total
    counts distinct altered records.
    """
    rows = tuple(LocationRow(*c) for c in columns)
    return ChangeReport(rows, (), horizon_seconds or 0, total_corrections)
