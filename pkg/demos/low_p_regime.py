"""Where the low-p formula comes from, on the smallest {5,4} code.

Every weight-w Z error is decoded and the failures counted. With distance 3
the weight-2 count is exactly N_d * C(3, 2); the formula keeps only that term.
A short Monte Carlo run is shown for scale.

Run: python demos/low_p_regime.py
"""

import itertools

import numpy as np

from homcodes import coxeter
from homcodes.analytic import low_p_failure_approx
from homcodes.css import from_complex
from homcodes.decode import MatchingDecoder
from homcodes.distance import count_min_weight_logicals
from homcodes.sim import run_2d_perfect

code = from_complex(coxeter.surface_from_relators(5, 4, coxeter.TABLE_RELATORS[(5, 4, 30)]), 1)
d, N = count_min_weight_logicals(code, "Z")
dec = MatchingDecoder(code, "Z")

counts = []
for w in range(1, 5):
    combos = np.array(list(itertools.combinations(range(code.n), w)))
    e = np.zeros((len(combos), code.n), dtype=np.uint8)
    np.put_along_axis(e, combos, 1, axis=1)
    fail = code.is_logical_failure(e ^ dec.decode_batch(code.syndrome(e, "Z")), "Z")
    counts.append(int(fail.sum()))
    print(f"weight {w}: {counts[-1]:6d} of {len(combos):6d} errors fail")
print(f"d={d} N_d={N}: the formula predicts {N * 3} weight-2 failures")

for p in (1e-3, 3e-3, 1e-2):
    exact = sum(a * p**w * (1 - p) ** (code.n - w) for w, a in enumerate(counts, 1))
    mc = run_2d_perfect(code, p, 1_000_000, seed=1, sides="Z", chunk=20_000)
    print(f"p={p:g}: formula {low_p_failure_approx(N, d, p):.2e}  weights<=4 {exact:.2e}  MC {mc.p_bar:.2e}")
