"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line that the terminal summary prints at
the end of the run.
"""

import contextlib
import io
import math
import random
import statistics
import time
import warnings
from datetime import timedelta
from pathlib import Path

import numpy as np
import pytest

from homelog import (ErrorSpec, EventLog, PenaltyConfig, SimConfig, abstract,
                     brute_force_repair, derive_rules, load_model, repair,
                     simulate_trajectory, validate)
from homelog.cli import main
from homelog.metrics_report import ChangeReport, DayRow, duration_pct, report_from_columns
from homelog.pipeline import run as pipeline_run

from conftest import ACCEPTANCE, ev, random_instance

ROOT = Path(__file__).parent.parent
DATA = Path(__file__).parent / "data"
HOUSE = load_model(ROOT / "data" / "house.model")

# seven-day synthetic household used by criteria 2, 6 and 8
DWELL = {"Corridor": 15, "WC": 120, "Bathroom": 300, "Bedroom": 1800,
         "LivingRoom": 900, "Kitchen": 600, "Entrance": 60}
ERRORS = ErrorSpec(p_miss=0.05, p_noise=0.05, jitter=5)


def week(seed):
    return SimConfig(seed=seed, horizon=7 * 86400, pir_period=30, dwell_median=DWELL,
                     default_sigma=0.8)


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def hybrid_runs():
    """Seeds 0..99 through simulate -> inject -> abstract -> hybrid repair."""
    runs = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for seed in range(100):
            runs.append(pipeline_run(HOUSE, week(seed), ERRORS, "hybrid", confirm_max_support=1))
    return runs


def test_1_repair_matches_exhaustive_oracle():
    # instances whose optimum needs more than five edits lie outside the
    # oracle's bound and are replaced by fresh draws
    rng = random.Random(20240601)
    mismatches = skipped = checked = 0
    t_repair = 0.0
    t0 = time.perf_counter()
    while checked < 200:
        log, model = random_instance(rng, rng.randint(4, 8), rng.randint(4, 5), rng.choice([0.3, 0.45]))
        cfg = PenaltyConfig(rng.choice([0.5, 1.0, 1.5]), rng.choice([0.5, 1.0]),
                            rng.choice([0.0, 0.1, 0.25]))
        t1 = time.perf_counter()
        got = repair(log, model, cfg)
        t_repair += time.perf_counter() - t1
        if got.counts["insert"] + got.counts["remove"] > 5:
            skipped += 1
            continue
        best = brute_force_repair(log, model, cfg, max_edits=5)
        checked += 1
        if best.total_penalty != got.total_penalty or best.edits != got.edits:
            mismatches += 1
    t_total = time.perf_counter() - t0
    record(1, mismatches == 0 and t_total < 10,
           f"{checked} instances ({skipped} over the edit bound redrawn), {mismatches} mismatches, "
           f"repair {t_repair:.2f} s, with oracle {t_total:.2f} s")


def test_2_corrected_logs_are_always_valid(hybrid_runs):
    bad = 0
    for out in hybrid_runs[:50]:
        bad += validate(out.result.corrected, HOUSE).invalid_rate != 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for seed in range(50, 100):
            out = pipeline_run(HOUSE, week(seed), ERRORS, "pm")
            bad += validate(out.result.corrected, HOUSE).invalid_rate != 0
    record(2, bad == 0, f"{100 - bad}/100 runs valid (50 hybrid, 50 pm)")


REFERENCE_ROWS = [("Bathroom", 1655, 1653, 10, "0.605"), ("Bedroom", 1436, 1369, 86, "6.282"),
          ("Corridor", 2371, 2375, 133, "5.600"), ("Entrance", 242, 233, 17, "7.296"),
          ("Kitchen", 3279, 3179, 158, "4.970"), ("LivingRoom", 2795, 2842, 92, "3.237"),
          ("WC", 716, 716, 4, "0.559")]


def test_3_correction_percentages():
    rep = report_from_columns([r[:4] for r in REFERENCE_ROWS], total_corrections=398)
    got = {r.location: f"{r.pct:.3f}" for r in rep.rows}
    got["Total"] = f"{rep.totals.pct:.3f}"
    want = {r[0]: r[4] for r in REFERENCE_ROWS}
    want["Total"] = "3.218"
    hits = sum(got[k] == want[k] for k in want)
    record(3, hits == 8, f"{hits}/8 rows match to 3 decimals (Total {got['Total']}%)")


def test_4_changed_duration_percentages():
    day_avg = f"{duration_pct(138):.3f}"
    day_max = f"{duration_pct(1655):.3f}"
    # 146 elapsed days carry 20141 s of changes; the total is relative to that span
    days = tuple(DayRow(None, 0, s) for s in [1655] + [113] * 144 + [20141 - 1655 - 113 * 144])
    total = f"{ChangeReport((), days, 146 * 86400).total_duration_pct:.3f}"
    ok = (day_avg, day_max, total) == ("0.160", "1.916", "0.160")
    record(4, ok, f"138 s -> {day_avg}%, 1655 s -> {day_max}%, 20141 s -> {total}%")


def test_5_threshold_oracles():
    rng = np.random.default_rng(5)
    misses = 0
    for k in range(50):
        durs = [int(x) for x in rng.lognormal(5, 1.2, size=int(rng.integers(2, 300)))]
        t, events = 0, []
        for d in durs:
            events += [ev("X", t, t + d), ev("Y", t + d, t + d + 1)]
            t += d + 1
        log = EventLog(tuple(events))
        (m2s,) = derive_rules(log, {"X": "mean2std"})
        (pct,) = derive_rules(log, {"X": "pct2.5"})
        # straight-line reference: float statistics, then whole seconds
        ref_max = math.floor(statistics.fmean(durs) + 2 * statistics.pstdev(durs))
        s = sorted(durs)
        ref_lo = s[math.ceil(0.025 * len(s)) - 1]
        ref_hi = s[math.ceil(0.975 * len(s)) - 1]
        misses += abs(m2s.max_duration - ref_max) > 1
        misses += (pct.min_duration, pct.max_duration) != (ref_lo, ref_hi)
    record(5, misses == 0, f"50 samples, {misses} disagreements")


def test_6_hybrid_efficacy(hybrid_runs):
    rate = sum(o.metrics.invalid_rate < o.raw_metrics.invalid_rate for o in hybrid_runs)
    f1 = sum(o.metrics.f1 >= o.raw_metrics.f1 for o in hybrid_runs)
    gain = np.mean([o.metrics.f1 - o.raw_metrics.f1 for o in hybrid_runs])
    record(6, rate >= 95 and f1 >= 90,
           f"invalid rate reduced on {rate}/100, F1 not lower on {f1}/100 (mean F1 gain {gain:+.4f})")


def _cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main([str(a) for a in argv])
    return code, buf.getvalue()


def _snapshot(path: Path):
    if path.is_dir():
        return {p.name: p.read_bytes() for p in sorted(path.iterdir())}
    return path.read_bytes()


def test_7_cli_determinism(tmp_path):
    flat = DATA / "flat.model"

    def commands(d):
        return [
            (["simulate", flat, "-o", d / "sim", "--seed", 8, "--horizon", 86400], d / "sim"),
            (["inject", d / "sim" / "sensors.csv", d / "sim" / "meta.csv", flat, "--seed", 2,
              "-o", d / "noisy.csv"], d / "noisy.csv"),
            (["abstract", d / "noisy.csv", d / "sim" / "meta.csv", "-o", d / "events.csv"],
             d / "events.csv"),
            (["validate", d / "events.csv", flat], None),
            (["derive-rules", d / "events.csv", "-o", d / "rules.txt"], d / "rules.txt"),
            (["repair", d / "events.csv", flat, "-o", d / "pm", "--mode", "pm"], d / "pm"),
            (["repair", d / "events.csv", flat, "-o", d / "rules", "--mode", "rules"], d / "rules"),
            (["repair", d / "events.csv", flat, "-o", d / "hybrid", "--mode", "hybrid"], d / "hybrid"),
            (["evaluate", d / "hybrid" / "corrected.csv", d / "sim" / "truth.csv", "--model", flat,
              "-o", d / "metrics.json"], d / "metrics.json"),
            (["run", flat, "-o", d / "run", "--seed", 8, "--horizon", 86400], d / "run"),
        ]

    results = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        outs = []
        for argv, path in commands(d):
            code, stdout = _cli(argv)
            stdout = stdout.replace(str(d), "<dir>")
            outs.append((argv[0], code, stdout, _snapshot(path) if path else None))
        results.append(outs)
    differ = [a[0] for a, b in zip(*results) if a != b]
    failed = [a[0] for a in results[0] if a[1] not in (0, 1)]
    record(7, not differ and not failed,
           f"{len(results[0])} commands rerun, {len(differ)} differ, {len(failed)} errored")


def test_8_abstraction_round_trip():
    good = 0
    worst = 0
    for seed in range(20):
        truth, clean = simulate_trajectory(HOUSE, week(seed))
        events = abstract(clean)
        if events.locations != truth.locations:
            continue
        gap = max(max(abs((a.start - b.start).total_seconds()), abs((a.end - b.end).total_seconds()))
                  for a, b in zip(events, truth))
        worst = max(worst, gap)
        good += gap <= 30
    record(8, good == 20, f"{good}/20 seeds exact in order, worst boundary offset {worst:.0f} s "
                          "(pir_period 30 s)")
