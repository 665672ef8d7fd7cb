"""Keep the informational view in step with what the shop floor reports.

Physical events arrive keyed by the tag on the part; informational updates
arrive keyed by holon id.  After each event the two views of the holon are
compared attribute by attribute; divergences are reconciled per policy.

Run:  python demos/03_sync_replay.py
"""

from datetime import datetime, timedelta, timezone

from holonic import (
    InformationalPart, Model, PhysicalEvent, PhysicalPartRef, ReconciliationPolicy,
    detect_divergence, reconcile, replay,
)
from holonic.generators import random_event_log, random_model
from holonic.sync import format_event

t0 = datetime(2024, 3, 1, 8, 0, tzinfo=timezone.utc)

# %% One holon, one reading that is 5 cm off
m = Model()
m.new_elementary_holon("H1", InformationalPart("I1", "bar"), PhysicalPartRef("P1", "SN-001"),
                       {"space": {"x": (2.0, "m")}}, t0)
replay(m, [PhysicalEvent(t0 + timedelta(minutes=1), "SN-001", {"space": {"x": (2.05, "m")}})],
       ReconciliationPolicy.MANUAL)
for tol in (0.01, 0.1):
    r = detect_divergence(m, "H1", {"x": tol})
    print(f"tolerance {tol}: {r.summary()}")

res = reconcile(m, "H1", detect_divergence(m, "H1", {"x": 0.01}), "PhysicalWins")
print(f"PhysicalWins -> {res.status}, new state {res.state_id}: x = {m.latest_state('H1').space['x']}")
print("after reconciliation:", detect_divergence(m, "H1", {"x": 0.01}).verdict.value)

# %% A longer random log with injected discrepancies
model = random_model(7, max_holons=10)
log = random_event_log(7, model, n_events=25, discrepancy_rate=0.4)
print("\nfirst events of a generated log:")
for e in log[:3]:
    print(" ", format_event(e))
summary = replay(model, log, ReconciliationPolicy.PHYSICAL_WINS)
print(summary)
for hid in sorted(summary.observed):
    print(f"  {hid}: {detect_divergence(model, hid).verdict.value}")
