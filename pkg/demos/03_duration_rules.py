"""
Duration thresholds per area
============================

Short-stay areas get an upper bound at mean + 2 population standard
deviations. Long-stay areas get both tails cut at the 2.5th and 97.5th
nearest-rank percentiles. The table uses the rules-file format.
"""

from pathlib import Path

import numpy as np

from homelog import (ErrorSpec, SimConfig, abstract, derive_rules, flag, inject,
                     load_model, simulate_trajectory)
from homelog.repair_rules import format_hms, format_rules

ROOT = Path(__file__).resolve().parent.parent
model = load_model(ROOT / "data" / "house.model")
sim = SimConfig(seed=3, horizon=28 * 86400,
                dwell_median={"Corridor": 15, "WC": 120, "Bedroom": 1800, "LivingRoom": 900,
                              "Kitchen": 600, "Bathroom": 300, "Entrance": 60},
                default_sigma=0.8)
truth, clean = simulate_trajectory(model, sim)
events = abstract(inject(clean, ErrorSpec(), seed=4, model=model))

methods = {"Bathroom": "mean2std", "Corridor": "mean2std", "WC": "mean2std",
           "Bedroom": "pct2.5", "Entrance": "pct2.5", "Kitchen": "pct2.5", "LivingRoom": "pct2.5"}
rules = derive_rules(events, methods)

# %%
print(f"{'Location':12s} {'Min':>9s} {'Max':>9s}  Rule")
for r in rules:
    print(f"{r.location:12s} {format_hms(r.min_duration):>9s} {format_hms(r.max_duration):>9s}  "
          f"{r.method.value}")

# %%
# The same rules as a file the CLI can read back.
print(format_rules(rules))

# %%
# How many events each rule flags, and on which side.
flags = flag(events, rules)
for r in rules:
    hits = [b for i, b in flags if events[i].location == r.location]
    durs = np.array([e.duration for e in events if e.location == r.location])
    print(f"{r.location:12s} {len(durs):5d} events  median {np.median(durs):7.0f} s  "
          f"flagged min {hits.count('min'):3d}  max {hits.count('max'):3d}")
