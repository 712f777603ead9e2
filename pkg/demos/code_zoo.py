"""Build a handful of hyperbolic surface codes and set them beside toric codes.

Run: python demos/code_zoo.py
"""

from homcodes import complexes as cx
from homcodes import coxeter
from homcodes.css import from_complex
from homcodes.distance import count_min_weight_logicals

print(f"{'code':>14} {'n':>5} {'k':>4} {'d_Z':>4} {'d_X':>4} {'k d^2/n':>8}")

for L in (4, 6, 8):
    code = from_complex(cx.toric_2d(L), 1)
    print(f"{'toric ' + str(L):>14} {code.n:5d} {code.k:4d} {L:4d} {L:4d} {code.k * L * L / code.n:8.2f}")

for key in [(5, 4, 30), (5, 4, 160), (5, 4, 360), (5, 5, 40), (5, 5, 80), (7, 7, 28)]:
    r, s, _ = key
    code = from_complex(coxeter.surface_from_relators(r, s, coxeter.TABLE_RELATORS[key]), 1)
    (dz, nz), (dx, nx) = count_min_weight_logicals(code, "Z"), count_min_weight_logicals(code, "X")
    d = min(dz, dx)
    print(f"{'{%d,%d}' % (r, s):>14} {code.n:5d} {code.k:4d} {dz:4d} {dx:4d} {code.k * d * d / code.n:8.2f}"
          f"   N_Z={nz} N_X={nx}")

# the hyperbolic codes trade a slower growth of distance for a constant rate;
# at these sizes they already beat the toric code on k d^2 / n
