import itertools
from datetime import datetime, timedelta

import pytest

from homelog import EventLog, LocationEvent, TransitionModel

T0 = datetime(2020, 1, 8, 12, 0, 0)


def at(seconds):
    return T0 + timedelta(seconds=seconds)


def ev(loc, start, end, support=1):
    return LocationEvent(loc, at(start), at(end), support)


def trace(*items, step=60):
    """Back-to-back events; items are labels or (label, support) pairs."""
    events = []
    for k, item in enumerate(items):
        loc, sup = (item, 1) if isinstance(item, str) else item
        events.append(ev(loc, k * step, (k + 1) * step, sup))
    return EventLog(tuple(events))


def random_instance(rng, n_events, n_areas, p_edge=0.5):
    labels = "ABCDEF"[:n_areas]
    while True:
        pairs = [p for p in itertools.combinations(labels, 2) if rng.random() < p_edge]
        model = TransitionModel.from_edges(pairs, labels)
        if len(_reach(model, labels[0])) == n_areas:
            break
    seq = [rng.choice(labels)]
    while len(seq) < n_events:
        x = rng.choice(labels)
        if x != seq[-1]:
            seq.append(x)
    log = trace(*[(x, rng.randint(0, 6)) for x in seq])
    return log, model


def _reach(model, a):
    adj, seen, todo = model.adjacency(), {a}, [a]
    while todo:
        for v in adj[todo.pop()]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return seen


@pytest.fixture
def corridor_model():
    return TransitionModel.from_edges([("Bedroom", "Corridor"), ("Corridor", "Bathroom")])


@pytest.fixture
def house():
    return TransitionModel.from_edges([
        ("Bedroom", "Corridor"), ("Bathroom", "Corridor"), ("WC", "Corridor"),
        ("LivingRoom", "Corridor"), ("Entrance", "Corridor"), ("Entrance", "LivingRoom"),
        ("Kitchen", "LivingRoom"),
    ])


# -- acceptance summary ---------------------------------------------------------

ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
