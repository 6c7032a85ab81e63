"""How outage tickets are ranked before any travel cost enters the picture.

Safety tickets (fire, police, downed-wire) carry tiered million-scale
weights so that even the weakest safety tier outranks the largest
customer outage. Everything else is weighted by affected customers.
Run: python3 demos/01_priority_weights.py
"""
from datetime import datetime, timezone

from stormcrew import Category, GeoPoint, OutageTicket, PriorityConfig, weigh_all

NOW = datetime(2024, 3, 23, 12, 0, tzinfo=timezone.utc)


def make(tid, category, customers):
    return OutageTicket(
        id=tid,
        awc="DEMO",
        location=GeoPoint(43.2, -72.4),
        category=category,
        customers=customers,
        created_at=NOW,
    )


tickets = [
    make("feeder-big", Category.CRITICAL, 4800),
    make("side-street", Category.SINGLE, 12),
    make("wire-down", Category.FPS3, 1),
    make("station-fire", Category.FPS1, 1),
    make("transformer", Category.SINGLE, 350),
]

cfg = PriorityConfig()
print(f"dominance floor: big_m * gamma_fps3 = {cfg.big_m * cfg.gamma_fps3:,.0f} "
      f"(largest feeder allowed: {cfg.q_max:,.0f} customers)\n")

print(f"{'ticket':<14} {'category':<10} {'customers':>9} {'weight':>12}")
for wo in sorted(weigh_all(tickets, cfg), key=lambda w: -w.weight):
    t = wo.ticket
    print(f"{t.id:<14} {t.category.value:<10} {t.customers:>9} {wo.weight:>12,.0f}")

print("\nA one-customer downed wire outweighs a 4,800-customer feeder;")
print("within safety work the tier ordering decides; within feeder work")
print("customer count decides. Travel cost only breaks ties inside a tier")
print("because it is orders of magnitude smaller than any weight gap.")
