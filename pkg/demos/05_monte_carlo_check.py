"""
Checking planned PERs by simulation
===================================

The planners size transmit power from the averaged PER. Sampling the fading
at each planned mean SNR shows whether the budgets actually hold.
"""

from jcmp import default_scenario, monte_carlo_validate, run

s = default_scenario()
rep = run(s, "multi")
rec = monte_carlo_validate(s, rep, n_samples=200_000, seed=42)
for c in rec.links:
    flag = "FLAG" if c.flagged else "ok"
    print(f"step {c.step} {c.link}: budget {c.budget:.5f}  planned {c.planned_per:.5f}  "
          f"sampled {c.empirical_per:.5f} +/- {c.std_err:.5f}  {flag}")
print("any flagged:", rec.any_flagged)
