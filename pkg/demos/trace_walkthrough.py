"""Replay a hand-written trace and watch the clouds form.

Two hubs share a leaf.  Deleting the hubs creates two primary clouds;
deleting the shared leaf, which sat in both clouds, links them through a
secondary cloud of bridge nodes; deleting a bridge replaces it.

    python3 demos/trace_walkthrough.py
"""

from __future__ import annotations

import random

from xheal import HealedGraph, Xheal, parse_trace
from xheal.adversary import Insert
from xheal import metrics

edges = [(0, i) for i in range(2, 7)] + [(1, i) for i in range(7, 12)] + [(0, 12), (1, 12)]
g = HealedGraph.from_edges(13, edges)
healer = Xheal(g, kappa=4, rng=random.Random(2))

TRACE = """\
# hubs first, then the leaf they share
D 0
D 1
D 12
I 13 2,7
"""


def show_clouds():
    for cid, cloud in sorted(healer.registry.clouds.items(), key=lambda kv: str(kv[0])):
        bridges = ", ".join(f"{p}->{b}" for p, b in sorted(cloud.bridges.items(), key=lambda kv: str(kv[0])))
        print(f"    {cid}: members={sorted(cloud.members)} leader={cloud.leader}"
              + (f" bridges[{bridges}]" if bridges else ""))


for event in parse_trace(TRACE, initial_nodes=range(13)):
    if isinstance(event, Insert):
        report = healer.on_insert(event.id, event.neighbors)
    else:
        report = healer.on_delete(event.id)
    print(f"{event}: case {report.case}, +{report.edges_added}/-{report.edges_removed} edges, "
          f"{report.rounds} rounds, {report.messages} messages")
    show_clouds()

# delete one bridge of the secondary cloud: it is replaced by a free node
secondary = next(c for c in healer.registry.clouds.values() if not c.is_primary)
bridge = sorted(secondary.bridges.values())[0]
report = healer.on_delete(bridge)
print(f"D {bridge} (a bridge): case {report.case}")
show_clouds()

healer.check_invariants()
verdicts = metrics.theorem1_check(g, g.shadow, healer.kappa)
for name, verdict in verdicts.items():
    print(f"{name:>10}: {verdict.status}")
