"""
Comparing the three router planners
===================================

On the packaged scenario the sensing robot moves away over three steps. The
communication-only baseline chases the best relay spot, the single-stage
planner weighs this step's motion cost, and the multi-stage planner looks at
the whole horizon.
"""

import tempfile
from pathlib import Path

from jcmp import compare, default_scenario, persist_run, read_runs

s = default_scenario()
c = compare(s)
for kind, rep in c.reports.items():
    path = " -> ".join(f"({x:.0f},{y:.0f})" for x, y in (d.router_pos for d in rep.steps))
    print(f"{kind:8s} motion {rep.motion_J:8.2f} J  comm {rep.comm_J:8.2f} J  "
          f"total {rep.total_J:8.2f} J  saving {100 * rep.savings_vs_baseline:5.2f}%")
    print(f"         {path}")

# each run can be appended to a JSON-lines log keyed by the scenario digest
with tempfile.TemporaryDirectory() as tmp:
    log = Path(tmp) / "runs.jsonl"
    for rep in c.reports.values():
        persist_run(rep, log)
    for rec in read_runs(log):
        print(rec["scenario_hash"][:12], rec["planner"], round(rec["total_J"], 3))
