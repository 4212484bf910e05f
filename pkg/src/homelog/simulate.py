"""Synthetic ground truth, error injection and scoring against the truth.

Every function takes an explicit seed and builds its own
``numpy.random.Generator``; nothing touches global random state.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Mapping, Optional

import numpy as np

from .conformance import components, validate
from .model import (ConfigurationError, EventLog, LocationEvent, Origin,
                    SensorKind, SensorLog, SensorMeta, SensorReading,
                    TransitionModel)

DEFAULT_START = datetime(2020, 1, 1, 0, 0, 0)


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    horizon: int = 86400                     # seconds
    pir_period: int = 30                     # seconds between repeat firings
    dwell_median: Mapping[str, float] = field(default_factory=dict)
    dwell_sigma: Mapping[str, float] = field(default_factory=dict)
    default_median: float = 300.0
    default_sigma: float = 1.0
    sensors_per_area: int = 1
    start: datetime = DEFAULT_START

    def __post_init__(self):
        if self.pir_period <= 0:
            raise ConfigurationError("pir_period must be positive")
        if self.horizon <= 0:
            raise ConfigurationError("horizon must be positive")
        if self.default_median <= 0 or any(v <= 0 for v in self.dwell_median.values()):
            raise ConfigurationError("dwell medians must be positive")

    def median(self, area: str) -> float:
        return self.dwell_median.get(area, self.default_median)

    def sigma(self, area: str) -> float:
        return self.dwell_sigma.get(area, self.default_sigma)


@dataclass(frozen=True)
class ErrorSpec:
    p_miss: float = 0.05
    p_noise: float = 0.05
    jitter: int = 5

    def __post_init__(self):
        for name in ("p_miss", "p_noise"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1]")
        if self.jitter < 0:
            raise ConfigurationError("jitter must be nonnegative")


def make_meta(model: TransitionModel, sensors_per_area: int = 1) -> tuple[SensorMeta, ...]:
    meta = []
    for area in sorted(model.areas):
        for j in range(sensors_per_area):
            suffix = "" if sensors_per_area == 1 else str(j + 1)
            meta.append(SensorMeta(f"{area}_PIR{suffix}", SensorKind.PIR, area))
    return tuple(meta)


def simulate_trajectory(model: TransitionModel, cfg: SimConfig) -> tuple[EventLog, SensorLog]:
    """Random walk over the model with log-normal dwell times.

    Returns the ground-truth events and a clean sensor log holding one
    reading at each entry plus a repeat every ``pir_period`` seconds while
    the resident stays. Times are whole seconds.
    """
    if not model.areas:
        raise ConfigurationError("model has no areas")
    if len(components(model)) != 1:
        raise ConfigurationError("simulation needs a connected model")
    rng = np.random.default_rng(cfg.seed)
    adj = model.adjacency()
    areas = sorted(model.areas)
    meta = make_meta(model, cfg.sensors_per_area)
    by_area: dict[str, list[str]] = {}
    for m in meta:
        by_area.setdefault(m.location, []).append(m.sensor_id)

    area = areas[rng.integers(len(areas))]
    t = 0
    truth: list[LocationEvent] = []
    readings: list[SensorReading] = []
    while t < cfg.horizon:
        dwell = rng.lognormal(np.log(cfg.median(area)), cfg.sigma(area))
        dwell = max(1, int(round(dwell)))
        end = min(t + dwell, cfg.horizon)
        for rt in range(t, end, cfg.pir_period):
            sensors = by_area[area]
            sid = sensors[rng.integers(len(sensors))] if len(sensors) > 1 else sensors[0]
            readings.append(SensorReading(cfg.start + timedelta(seconds=rt), sid, 1))
        truth.append(LocationEvent(area, cfg.start + timedelta(seconds=t),
                                   cfg.start + timedelta(seconds=end), len(range(t, end, cfg.pir_period))))
        t = end
        if not adj[area]:
            break
        area = adj[area][rng.integers(len(adj[area]))]
    if truth and truth[-1].end < cfg.start + timedelta(seconds=cfg.horizon):
        last = truth[-1]
        truth[-1] = LocationEvent(last.location, last.start,
                                  cfg.start + timedelta(seconds=cfg.horizon), last.support_count)
    return (EventLog(tuple(truth), Origin.SIMULATED),
            SensorLog.from_unsorted(readings, meta))


def inject(log: SensorLog, spec: ErrorSpec, seed: int,
           model: Optional[TransitionModel] = None) -> SensorLog:
    """Corrupt a sensor log with missed readings, overlap noise and timing jitter.

    Each reading is dropped with probability ``p_miss``. Independently, with
    probability ``p_noise`` a reading from a sensor in an adjacent area is
    added at the same timestamp (needs ``model``). Surviving timestamps then
    move by a uniform integer offset in ``[-jitter, jitter]`` seconds.
    """
    rng = np.random.default_rng(seed)
    loc = log.location_map()
    by_area: dict[str, list[str]] = {}
    for m in log.meta:
        by_area.setdefault(m.location, []).append(m.sensor_id)
    for ids in by_area.values():
        ids.sort()
    adj = model.adjacency() if model is not None else {}
    if spec.p_noise > 0 and model is None:
        raise ConfigurationError("overlap noise needs the transition model")

    n = len(log.readings)
    drop = rng.random(n) < spec.p_miss
    noise = rng.random(n) < spec.p_noise
    out: list[SensorReading] = []
    for r, dropped, noisy in zip(log.readings, drop, noise):
        if not dropped:
            out.append(r)
        if noisy:
            area = loc.get(r.sensor_id)
            candidates = [s for nb in adj.get(area, ()) for s in by_area.get(nb, ())]
            if candidates:
                sid = candidates[rng.integers(len(candidates))]
                out.append(SensorReading(r.timestamp, sid, 1))
    if spec.jitter:
        shifts = rng.integers(-spec.jitter, spec.jitter + 1, size=len(out))
        out = [SensorReading(r.timestamp + timedelta(seconds=int(s)), r.sensor_id, r.value)
               for r, s in zip(out, shifts)]
    return SensorLog.from_unsorted(out, log.meta)


# -- evaluation ---------------------------------------------------------------

def _matches(a: LocationEvent, b: LocationEvent) -> bool:
    if a.location != b.location:
        return False
    lo = max(a.start, b.start)
    hi = min(a.end, b.end)
    if hi < lo:
        return False
    overlap = (hi - lo).total_seconds()
    return overlap >= 0.5 * min(a.duration, b.duration)


def greedy_matching(corrected: EventLog, truth: EventLog) -> list[tuple[int, int]]:
    """One-to-one matches; each corrected event (in time order) takes the
    earliest still-free truth event it matches."""
    pairs = []
    used = set()
    j0 = 0
    tevents = truth.events
    for i, c in enumerate(corrected.events):
        while j0 < len(tevents) and tevents[j0].end < c.start:
            j0 += 1
        j = j0
        while j < len(tevents) and tevents[j].start <= c.end:
            if j not in used and _matches(c, tevents[j]):
                used.add(j)
                pairs.append((i, j))
                break
            j += 1
    return pairs


@dataclass(frozen=True)
class QualityMetrics:
    invalid_rate: Optional[float]
    matched: int
    n_corrected: int
    n_truth: int
    per_location: dict = field(default_factory=dict)

    @property
    def precision(self) -> float:
        return self.matched / self.n_corrected if self.n_corrected else 1.0

    @property
    def recall(self) -> float:
        return self.matched / self.n_truth if self.n_truth else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def as_dict(self) -> dict:
        return {"invalid_rate": self.invalid_rate, "matched": self.matched,
                "n_corrected": self.n_corrected, "n_truth": self.n_truth,
                "precision": self.precision, "recall": self.recall, "f1": self.f1}


def evaluate(corrected: EventLog, truth: EventLog,
             model: Optional[TransitionModel] = None) -> QualityMetrics:
    """Event-level agreement with the ground truth.

    A corrected event matches a truth event of the same location when they
    overlap by at least half the shorter one's duration. Per-location counts
    are true positives, false positives and false negatives.
    """
    pairs = greedy_matching(corrected, truth)
    tp = Counter(corrected.events[i].location for i, _ in pairs)
    pred = Counter(corrected.locations)
    real = Counter(truth.locations)
    per_loc = {loc: {"tp": tp[loc], "fp": pred[loc] - tp[loc], "fn": real[loc] - tp[loc]}
               for loc in sorted(set(pred) | set(real))}
    rate = validate(corrected, model).invalid_rate if model is not None else None
    return QualityMetrics(rate, len(pairs), len(corrected), len(truth), per_loc)
