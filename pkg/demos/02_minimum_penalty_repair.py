"""
Minimum-penalty repair
======================

Removing an event costs ``remove_base + remove_per_support * support``;
inserting a zero-duration connector costs ``insert_cost``. Events that rest
on many readings are expensive to remove, so the search prefers to bridge
around them.
"""

from datetime import datetime, timedelta

from homelog import (EventLog, LocationEvent, PenaltyConfig, TransitionModel,
                     brute_force_repair, repair)

T0 = datetime(2020, 1, 8, 8, 0, 0)


def trace(*items):
    return EventLog(tuple(LocationEvent(loc, T0 + timedelta(minutes=k), T0 + timedelta(minutes=k + 1), s)
                          for k, (loc, s) in enumerate(items)))


def show(result):
    print("   corrected:", " -> ".join(result.corrected.locations))
    for e in result.edits:
        print(f"   {e.kind.value:6s} at {e.position}: {e.location} (cost {e.cost:g})")
    print("   penalty", result.total_penalty)


# %%
# A missed corridor reading: Bedroom straight to Bathroom.
flat = TransitionModel.from_edges([("Bedroom", "Corridor"), ("Corridor", "Bathroom")])
show(repair(trace(("Bedroom", 10), ("Bathroom", 5)), flat))

# %%
# A one-reading blip in B between two long stays in A. A and B only meet
# through C.
acb = TransitionModel.from_edges([("A", "C"), ("C", "B")])
log = trace(("A", 5), ("B", 1), ("A", 5))
print("cheap removal:")
show(repair(log, acb, PenaltyConfig(1.0, 1.0, 0.1)))

# %%
# Make support expensive and the blip is kept, bridged twice through C.
print("expensive removal:")
show(repair(log, acb, PenaltyConfig(1.0, 1.0, 2.0)))

# %%
# The exhaustive oracle agrees on both.
for beta in (0.1, 2.0):
    cfg = PenaltyConfig(1.0, 1.0, beta)
    print(f"beta={beta}: search {repair(log, acb, cfg).total_penalty}, "
          f"exhaustive {brute_force_repair(log, acb, cfg).total_penalty}")
