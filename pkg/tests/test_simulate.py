from collections import Counter
from datetime import timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homelog import (ConfigurationError, ErrorSpec, EventLog, SensorLog,
                     SensorReading, SimConfig, TransitionModel, abstract,
                     evaluate, inject, simulate_trajectory, validate)
from homelog.simulate import _matches, greedy_matching, make_meta

from conftest import T0, at, ev


def small_sim(seed, **kw):
    kw.setdefault("horizon", 6 * 3600)
    kw.setdefault("default_median", 240)
    return SimConfig(seed=seed, **kw)


def test_same_seed_same_output(house):
    a = simulate_trajectory(house, small_sim(7))
    b = simulate_trajectory(house, small_sim(7))
    assert a == b
    assert simulate_trajectory(house, small_sim(8)) != a


def test_does_not_touch_global_random_state(house):
    np.random.seed(1)
    before = np.random.random()
    np.random.seed(1)
    simulate_trajectory(house, small_sim(3))
    inject(simulate_trajectory(house, small_sim(3))[1], ErrorSpec(), 4, house)
    assert np.random.random() == before


@pytest.mark.parametrize("seed", range(20))
def test_truth_is_a_walk_and_round_trips(house, seed):
    truth, clean = simulate_trajectory(house, small_sim(seed))
    truth.check_invariants()
    assert validate(truth, house).invalid_rate == 0
    assert truth.span == (T0.replace(day=1, hour=0), T0.replace(day=1, hour=6))
    events = abstract(clean)
    assert events.locations == truth.locations
    period = timedelta(seconds=30)
    for got, want in zip(events, truth):
        assert abs(got.start - want.start) <= period
        assert abs(got.end - want.end) <= period


def test_clean_log_fires_on_entry_and_every_period(corridor_model):
    truth, clean = simulate_trajectory(corridor_model, small_sim(2, pir_period=45))
    where = clean.location_map()
    for e in truth:
        times = [r.timestamp for r in clean.readings
                 if e.start <= r.timestamp < e.end and where[r.sensor_id] == e.location]
        assert times[0] == e.start
        assert all((b - a).total_seconds() == 45 for a, b in zip(times, times[1:]))
        assert len(times) == e.support_count


def test_per_area_medians_shape_dwell(house):
    cfg = small_sim(0, horizon=30 * 86400, dwell_median={"Bedroom": 3600, "Corridor": 10},
                    dwell_sigma={"Bedroom": 0.3, "Corridor": 0.3})
    truth, _ = simulate_trajectory(house, cfg)
    med = {loc: np.median([e.duration for e in truth if e.location == loc])
           for loc in ("Bedroom", "Corridor")}
    assert 3000 < med["Bedroom"] < 4300
    assert 7 < med["Corridor"] < 14


def test_config_errors():
    with pytest.raises(ConfigurationError):
        SimConfig(pir_period=0)
    with pytest.raises(ConfigurationError):
        SimConfig(dwell_median={"A": 0})
    with pytest.raises(ConfigurationError):
        ErrorSpec(p_miss=1.5)
    with pytest.raises(ConfigurationError):
        ErrorSpec(jitter=-1)
    with pytest.raises(ConfigurationError):
        simulate_trajectory(TransitionModel.from_edges([]), SimConfig())
    two_parts = TransitionModel.from_edges([("A", "B"), ("C", "D")])
    with pytest.raises(ConfigurationError):
        simulate_trajectory(two_parts, SimConfig())


# -- inject -------------------------------------------------------------------

@pytest.fixture
def clean(house):
    return simulate_trajectory(house, small_sim(11, horizon=86400))[1]


def test_inject_identity(clean, house):
    assert inject(clean, ErrorSpec(0, 0, 0), seed=5, model=house) == clean


def test_inject_drop_everything(clean, house):
    assert len(inject(clean, ErrorSpec(1.0, 0, 0), seed=5, model=house)) == 0


def test_inject_noise_count_is_binomial(house):
    meta = make_meta(house)
    readings = [SensorReading(at(3 * k), "Bedroom_PIR", 1) for k in range(10000)]
    log = SensorLog(tuple(readings), meta)
    out = inject(log, ErrorSpec(0, 0.1, 0), seed=2024, model=house)
    extra = len(out) - len(log)
    assert 910 <= extra <= 1090
    # every spurious reading comes from an adjacent area at a true timestamp
    assert {r.sensor_id for r in out.readings} == {"Bedroom_PIR", "Corridor_PIR"}


def test_inject_noise_needs_model(clean):
    with pytest.raises(ConfigurationError):
        inject(clean, ErrorSpec(0, 0.1, 0), seed=1)


def test_inject_deterministic(clean, house):
    spec = ErrorSpec(0.1, 0.1, 5)
    assert inject(clean, spec, 9, house) == inject(clean, spec, 9, house)
    assert inject(clean, spec, 9, house) != inject(clean, spec, 10, house)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(0, 1), st.integers(0, 30))
def test_jitter_and_drops_preserve_sensor_multiset(seed, p_miss, jitter):
    house = TransitionModel.from_edges([("A", "B"), ("B", "C")])
    clean = simulate_trajectory(house, small_sim(4, horizon=3600))[1]
    out = inject(clean, ErrorSpec(p_miss, 0, jitter), seed)
    got = Counter(r.sensor_id for r in out.readings)
    have = Counter(r.sensor_id for r in clean.readings)
    assert not got - have
    if p_miss == 0:
        assert got == have
    stamps = [r.timestamp for r in out.readings]
    assert stamps == sorted(stamps)


# -- evaluate -----------------------------------------------------------------

def test_evaluate_perfect(house):
    truth, _ = simulate_trajectory(house, small_sim(1))
    q = evaluate(truth, truth, house)
    assert (q.precision, q.recall, q.f1, q.invalid_rate) == (1.0, 1.0, 1.0, 0.0)
    assert all(c["fp"] == c["fn"] == 0 for c in q.per_location.values())


def test_evaluate_one_spurious_event():
    truth = EventLog((ev("A", 0, 100), ev("B", 100, 200), ev("C", 200, 300)))
    extra = EventLog((ev("A", 0, 100), ev("B", 100, 200), ev("D", 200, 200), ev("C", 200, 300)))
    q = evaluate(extra, truth)
    assert q.precision == pytest.approx(3 / 4) and q.recall == 1.0
    assert q.per_location["D"] == {"tp": 0, "fp": 1, "fn": 0}
    assert q.invalid_rate is None


def test_overlap_rule():
    a = ev("A", 0, 100)
    assert _matches(a, ev("A", 50, 150))
    assert not _matches(a, ev("A", 51, 151))
    assert not _matches(a, ev("B", 0, 100))
    assert _matches(a, ev("A", 100, 100))          # zero-length event touching the edge
    assert not _matches(a, ev("A", 101, 101))


def optimal_matches(corrected, truth):
    """Maximum bipartite matching by augmenting paths."""
    owner = {}

    def augment(i, seen):
        for j, t in enumerate(truth.events):
            if j in seen or not _matches(corrected.events[i], t):
                continue
            seen.add(j)
            if j not in owner or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    return sum(augment(i, set()) for i in range(len(corrected)))


def f1(m, n_pred, n_true):
    return 2 * m / (n_pred + n_true) if n_pred + n_true else 1.0


@st.composite
def perturbed_pair(draw):
    labels = "ABC"
    n = draw(st.integers(1, 10))
    t, truth = 0, []
    for _ in range(n):
        d = draw(st.integers(0, 200))
        loc = draw(st.sampled_from([x for x in labels if not truth or x != truth[-1].location]))
        truth.append(ev(loc, t, t + d))
        t += d
    pred = []
    t = 0
    for _ in range(draw(st.integers(1, 10))):
        d = draw(st.integers(0, 200))
        loc = draw(st.sampled_from(labels))
        pred.append(ev(loc, t, t + d))
        t += d + draw(st.integers(0, 20))
    return EventLog(tuple(pred)), EventLog(tuple(truth))


@settings(max_examples=300, deadline=None)
@given(perturbed_pair())
def test_greedy_close_to_optimal(pair):
    pred, truth = pair
    greedy = len(greedy_matching(pred, truth))
    best = optimal_matches(pred, truth)
    assert greedy <= best
    assert f1(best, len(pred), len(truth)) - f1(greedy, len(pred), len(truth)) <= 0.05 + 1e-12
