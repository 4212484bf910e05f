"""
From sensor readings to location events
=======================================

A simulated day in a seven-area flat: the clean sensor log, a corrupted
copy with missed and overlapping readings, and how many transitions in
each abstracted log are impossible on the floor plan.
"""

from collections import Counter
from pathlib import Path

from homelog import (ErrorSpec, SimConfig, abstract, inject, load_model,
                     simulate_trajectory, validate)

ROOT = Path(__file__).resolve().parent.parent
model = load_model(ROOT / "data" / "house.model")
print("areas:", ", ".join(model.areas))

# %%
# One day of movement. Each visit leaves one reading on entry and one every
# 30 s while the resident stays.
sim = SimConfig(seed=1, horizon=86400, pir_period=30,
                dwell_median={"Corridor": 15, "WC": 120, "Bedroom": 1800, "LivingRoom": 900,
                              "Kitchen": 600, "Bathroom": 300, "Entrance": 60},
                default_sigma=0.8)
truth, clean = simulate_trajectory(model, sim)
print(f"{len(truth)} visits, {len(clean)} readings")
for r in clean.readings[:5]:
    print("  ", r.timestamp, r.sensor_id, r.value)

# %%
# The clean log abstracts back to the same visits.
events = abstract(clean)
print("same visits:", events.locations == truth.locations)
print("clean log:", validate(events, model).summary())

# %%
# Drop 5% of readings, echo 5% into a neighbouring area, jitter by up to 5 s.
noisy = inject(clean, ErrorSpec(p_miss=0.05, p_noise=0.05, jitter=5), seed=2, model=model)
events = abstract(noisy)
report = validate(events, model)
print(f"noisy log: {len(events)} events (truth {len(truth)})")
print("noisy log:", report.summary())

# %%
# Which impossible moves show up most often.
pairs = Counter(f"{a} -> {b}" for _, a, b in report.invalid)
for pair, n in pairs.most_common(5):
    print(f"  {n:4d}  {pair}")
