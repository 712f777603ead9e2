"""Memory time of the 4D toric code under the two local automata.

Below the crossing the larger lattice lives longer. The sweep is short, so
expect visible noise.

Run: python demos/memory_time.py   (about a minute)
"""

import numpy as np

from homcodes.sim import run_4d_memory

for rule, ps in (("toom", [0.009, 0.011, 0.013]), ("dklp", [0.005, 0.006, 0.007])):
    print(rule)
    for p in ps:
        means = [run_4d_memory(L, rule, p, 256, seed=7, max_cycles=5000, words=1).mean for L in (3, 4)]
        marker = "L=4 lives longer" if means[1] > means[0] else ""
        print(f"  p={p:.3f}  mean T  L=3 {means[0]:8.1f}  L=4 {means[1]:8.1f}  {marker}")
