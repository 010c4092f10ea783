"""
Direct link versus a decode-and-forward relay
=============================================

A single 108 m hop cannot meet a 1% PER within 4 W on the default channel.
Placing a relay halfway splits the PER budget between two short hops and
makes the transfer feasible.
"""

import math

from jcmp import ChannelParams, InfeasibleError, default_mode_table, min_link_energy, relay_allocation

ch = ChannelParams()
modes = default_mode_table()
D = 1e9          # bits per step
p_max = 4.0
d = math.dist((0, 0), (100, 40))

try:
    min_link_energy(d, 0.01, D, ch, modes, p_max)
except InfeasibleError as exc:
    print("direct:", exc)

# relay at the midpoint
sr, rb = relay_allocation(d / 2, d / 2, 0.01, D, ch, modes, p_max)
for name, link in (("sensing->router", sr), ("router->base", rb)):
    print(f"{name:16s} mode {modes[link.mode_index].label:9s} {link.tx_power:6.3f} W  "
          f"PER budget {link.per_budget:.6f}  {link.energy:7.2f} J")
print(f"end-to-end PER {1 - (1 - sr.per_budget) * (1 - rb.per_budget):.6f}")

# moving the relay off-centre shifts budget and power towards the longer hop
for frac in (0.3, 0.4, 0.5, 0.6, 0.7):
    sr, rb = relay_allocation(frac * d, (1 - frac) * d, 0.01, D, ch, modes, p_max)
    print(f"relay at {frac:.1f} of the way: {sr.energy + rb.energy:8.2f} J  "
          f"(eps_sr {sr.per_budget:.4f}, eps_rb {rb.per_budget:.4f})")
