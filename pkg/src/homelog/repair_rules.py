"""Duration rules: derive thresholds, flag outliers, resolve them.

Thresholds are whole seconds. ``mean2std`` sets only an upper bound at
``floor(mean + 2 * population std)``; ``pct2.5`` sets the 2.5th and 97.5th
nearest-rank percentiles as lower and upper bounds.
"""

from __future__ import annotations

import math
import re
import sys
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .conformance import shortest_connector
from .model import (ConfigurationError, EditKind, EditOp, EventLog,
                    LocationEvent, Origin, RepairResult, TransitionModel,
                    fuse_adjacent_edits)
from .repair_pm import PenaltyConfig, repair


class RuleMethod(str, Enum):
    MEAN_PLUS_2STD = "mean2std"
    TWO_SIDED_2_5PCT = "pct2.5"
    MANUAL = "manual"


@dataclass(frozen=True)
class DurationRule:
    location: str
    min_duration: Optional[int] = None
    max_duration: Optional[int] = None
    method: RuleMethod = RuleMethod.MANUAL

    def __post_init__(self):
        object.__setattr__(self, "method", RuleMethod(self.method))
        if (self.min_duration is not None and self.max_duration is not None
                and self.min_duration > self.max_duration):
            raise ConfigurationError(f"rule for {self.location}: min exceeds max")
        if self.method is RuleMethod.MEAN_PLUS_2STD and self.min_duration is not None:
            raise ConfigurationError(f"rule for {self.location}: mean2std sets no minimum")

    def violation(self, duration: int) -> Optional[str]:
        if self.min_duration is not None and duration < self.min_duration:
            return "min"
        if self.max_duration is not None and duration > self.max_duration:
            return "max"
        return None


class Action(str, Enum):
    DROP = "drop"
    RELABEL_TO_CONNECTOR = "relabel"
    FLAG_ONLY = "flag"


@dataclass(frozen=True)
class ResolutionPolicy:
    action: Action = Action.DROP
    interactive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "action", Action(self.action))


def mean_plus_2std(durations: Sequence[int]) -> int:
    """``floor(mean + 2 * pstdev)`` computed exactly on integer seconds."""
    n = len(durations)
    s = sum(durations)
    q = sum(d * d for d in durations)
    # mean + 2*sigma = (s + sqrt(4*(n*q - s^2))) / n, and
    # floor((s + y) / n) == (s + floor(y)) // n for integer s and n > 0.
    return (s + math.isqrt(4 * (n * q - s * s))) // n


def nearest_rank(sorted_values: Sequence[int], per_mille: int) -> int:
    """Nearest-rank percentile; ``per_mille`` is the percentile times ten."""
    n = len(sorted_values)
    rank = max(1, -(-per_mille * n // 1000))
    return sorted_values[rank - 1]


def derive_rules(log: EventLog, methods: Mapping[str, Union[RuleMethod, str]]) -> list[DurationRule]:
    """Data-driven thresholds, one rule per location in ``methods``."""
    by_loc: dict[str, list[int]] = {}
    for e in log.events:
        by_loc.setdefault(e.location, []).append(e.duration)
    rules = []
    for loc in sorted(methods):
        method = RuleMethod(methods[loc])
        durs = sorted(by_loc.get(loc, []))
        if not durs:
            warnings.warn(f"no {loc} events in log; rule skipped", stacklevel=2)
            continue
        if method is RuleMethod.MEAN_PLUS_2STD:
            if len(durs) < 2:
                warnings.warn(f"{loc}: mean2std needs at least 2 events; rule skipped",
                              stacklevel=2)
                continue
            rules.append(DurationRule(loc, None, mean_plus_2std(durs), method))
        elif method is RuleMethod.TWO_SIDED_2_5PCT:
            rules.append(DurationRule(loc, nearest_rank(durs, 25), nearest_rank(durs, 975),
                                      method))
        else:
            raise ConfigurationError(f"{loc}: manual rules cannot be derived from data")
    return rules


def flag(log: EventLog, rules: Iterable[DurationRule]) -> list[tuple[int, str]]:
    """``(index, "min" | "max")`` for every event outside its location's range."""
    table = {r.location: r for r in rules}
    out = []
    for i, e in enumerate(log.events):
        rule = table.get(e.location)
        if rule is None:
            continue
        hit = rule.violation(e.duration)
        if hit:
            out.append((i, hit))
    return out


def _confirm_tty(log: EventLog, index: int, bound: str) -> bool:
    e = log.events[index]
    answer = input(f"[{index}] {e.location} {e.start} -> {e.end} "
                   f"({e.duration} s, violates {bound}) - apply? [y/N] ")
    return answer.strip().lower() in ("y", "yes")


def resolve(log: EventLog, flags: Sequence[tuple[int, str]], policy: ResolutionPolicy,
            model: Optional[TransitionModel] = None,
            cfg: Optional[PenaltyConfig] = None,
            confirm: Optional[Callable[[EventLog, int, str], bool]] = None) -> RepairResult:
    """Apply ``policy`` to flagged events.

    ``drop`` removes them and fuses the neighbours that become adjacent.
    ``relabel`` also drops, except where the two surviving neighbours would
    then form an invalid transition; there the flagged event is replaced by
    zero-duration events along the shortest connector. ``flag`` changes
    nothing. Edit costs use ``cfg`` (defaults when omitted).

    ``confirm(log, index, bound)`` vetoes individual flags; interactive
    policies prompt on the terminal when no callable is given.
    """
    cfg = cfg or PenaltyConfig()
    flags = list(flags)
    for i, _ in flags:
        if not 0 <= i < len(log):
            raise IndexError(f"flag index {i} outside log of {len(log)} events")
    action = policy.action
    if action is Action.RELABEL_TO_CONNECTOR and model is None:
        raise ConfigurationError("relabel policy needs a transition model")

    if policy.interactive and confirm is None and action is not Action.FLAG_ONLY:
        if sys.stdin is not None and sys.stdin.isatty():
            confirm = _confirm_tty
        else:
            warnings.warn("interactive resolution without a terminal; flagging only",
                          stacklevel=2)
            action = Action.FLAG_ONLY
    if confirm is not None and action is not Action.FLAG_ONLY:
        flags = [(i, b) for i, b in flags if confirm(log, i, b)]

    if action is Action.FLAG_ONLY or not flags:
        return RepairResult(log, (), 0.0, tuple(range(len(log))), tuple(flags))

    flagged = {i for i, _ in flags}
    events: list[LocationEvent] = []
    sources: list[int] = []
    edits: list[EditOp] = []
    n_ins = n_rem = s_rem = 0
    for i, e in enumerate(log.events):
        if i not in flagged:
            events.append(e)
            sources.append(i)
            continue
        edits.append(EditOp(i, EditKind.REMOVE, e.location, cfg.remove_cost(e.support_count)))
        n_rem += 1
        s_rem += e.support_count
        if action is Action.RELABEL_TO_CONNECTOR and events:
            prev = events[-1].location
            nxt = next((log.events[j].location for j in range(i + 1, len(log))
                        if j not in flagged), None)
            if nxt is not None and prev != nxt and not model.adjacent(prev, nxt):
                for loc in shortest_connector(model, prev, nxt):
                    events.append(LocationEvent(loc, e.start, e.start, 0))
                    sources.append(i)
                    edits.append(EditOp(i, EditKind.INSERT, loc, cfg.insert_cost))
                    n_ins += 1

    fused, fuse_ops, sources = fuse_adjacent_edits(
        EventLog(tuple(events), Origin.REPAIRED), sources)
    all_edits = tuple(sorted(edits + fuse_ops,
                             key=lambda op: (op.position, _RANK[op.kind])))
    return RepairResult(fused, all_edits, cfg.penalty(n_ins, n_rem, s_rem), sources,
                        tuple(flags))


def confirm_by_support(max_support: int) -> Callable[[EventLog, int, str], bool]:
    """Accept a flag only if the event rests on at most ``max_support`` readings."""
    def confirm(log: EventLog, index: int, bound: str) -> bool:
        return log.events[index].support_count <= max_support
    return confirm


_RANK = {EditKind.REMOVE: 0, EditKind.INSERT: 1, EditKind.FUSE: 2}


def _remap(stage: RepairResult, prior: RepairResult, n_before: int) -> RepairResult:
    """Express ``stage`` edits (against ``prior.corrected``) in original positions."""
    def pos(p):
        return prior.sources[p] if p < len(prior.sources) else n_before

    edits = tuple(EditOp(pos(e.position), e.kind, e.location, e.cost,
                         None if e.absorbed is None else pos(e.absorbed))
                  for e in stage.edits)
    return RepairResult(stage.corrected, edits, stage.total_penalty,
                        tuple(pos(p) for p in stage.sources), stage.flags)


def hybrid(log: EventLog, rules: Sequence[DurationRule], policy: ResolutionPolicy,
           model: TransitionModel, cfg: Optional[PenaltyConfig] = None,
           order: Sequence[str] = ("rules", "pm"),
           confirm: Optional[Callable[[EventLog, int, str], bool]] = None) -> RepairResult:
    """Run the rule stage and the minimum-penalty stage in ``order``.

    Edits of both stages are concatenated, each expressed as positions in
    the input log.
    """
    cfg = cfg or PenaltyConfig()
    if sorted(order) != ["pm", "rules"]:
        raise ValueError("order must be a permutation of ('rules', 'pm')")
    current = RepairResult(log, (), 0.0, tuple(range(len(log))))
    edits: list[EditOp] = []
    penalty = 0.0
    all_flags: tuple = ()
    for stage in order:
        src = current.corrected
        if stage == "rules":
            flags = flag(src, rules)
            out = resolve(src, flags, policy, model, cfg, confirm)
        else:
            out = repair(src, model, cfg)
        out = _remap(out, current, len(log))
        if stage == "rules":
            all_flags = tuple((current.sources[i], b) for i, b in out.flags)
        edits += out.edits
        penalty += out.total_penalty
        current = out
    return RepairResult(current.corrected, tuple(edits), penalty, current.sources, all_flags)


# -- rules file -------------------------------------------------------------

_LINE = re.compile(r"^(\S+)\s+min=(\S+)\s+max=(\S+)\s+method=(\S+)$")


def format_hms(seconds: Optional[int]) -> str:
    if seconds is None:
        return "-"
    h, rem = divmod(int(seconds), 3600)
    m, s = divmod(rem, 60)
    return f"{h:02d}:{m:02d}:{s:02d}"


def parse_hms(text: str) -> Optional[int]:
    if text == "-":
        return None
    parts = text.split(":")
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        raise ValueError(f"bad duration {text!r}, expected HH:MM:SS")
    h, m, s = map(int, parts)
    if m >= 60 or s >= 60:
        raise ValueError(f"bad duration {text!r}")
    return h * 3600 + m * 60 + s


def format_rules(rules: Iterable[DurationRule]) -> str:
    return "".join(f"{r.location} min={format_hms(r.min_duration)} "
                   f"max={format_hms(r.max_duration)} method={r.method.value}\n"
                   for r in rules)


def parse_rules(text: str, source: str = "<rules>") -> list[DurationRule]:
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ConfigurationError(f"{source}:{lineno}: cannot parse rule {raw!r}")
        loc, lo, hi, method = m.groups()
        try:
            rules.append(DurationRule(loc, parse_hms(lo), parse_hms(hi), RuleMethod(method)))
        except (ValueError, ConfigurationError) as exc:
            raise ConfigurationError(f"{source}:{lineno}: {exc}") from None
    return rules


def load_rules(path: Union[str, Path]) -> list[DurationRule]:
    path = Path(path)
    return parse_rules(path.read_text(), str(path))
