"""A churn experiment end to end: run, read the metrics, compare against budgets.

An adversary inserts and deletes nodes at random on a 64-node random regular
graph.  After each deletion the healer repairs the network; the harness
records graph metrics every 50 events and the per-repair costs.

    python3 demos/churn_costs.py [out.csv]
"""

from __future__ import annotations

import math
import sys

from xheal import RunConfig, emit, run
from xheal.metrics import CSV_COLUMNS

cfg = RunConfig(seed=7, kappa=8, n0=64, steps=500, metrics_every=50)
result = run(cfg)
print(f"exit code {result.exit_code}, {result.steps_run} events, {result.ledger.deletions} deletions")

# metrics rows: t, n, m, connected, ..., stretch_max, ..., rounds_cum, messages_cum, A_p
header = ["t", "n", "m", "connected", "lambda2", "stretch_max", "deg_ratio_max"]
print(" ".join(f"{h:>13}" for h in header))
idx = [CSV_COLUMNS.index(h) for h in header]
for row in result.csv_rows:
    print(" ".join(f"{row[i][:13]:>13}" for i in idx))

checks = result.cost_checks
n_max = result.max_alive
print()
print(f"largest repair: {checks['max_rounds']} rounds "
      f"(per-repair bound ceil(log2 n) + 3 = {math.ceil(math.log2(n_max)) + 3} at n = {n_max})")
print(f"messages: {checks['total_messages']} of budget {checks['message_budget']:.0f} "
      f"({checks['total_messages'] / checks['message_budget']:.1%})")
print(f"cloud combines: {checks['combines']} "
      f"({checks['combines_amortized']} preceded by >= N/2 cheap repairs)")

if len(sys.argv) > 1:
    emit(result, csv_path=sys.argv[1])
    print(f"wrote {sys.argv[1]}")
