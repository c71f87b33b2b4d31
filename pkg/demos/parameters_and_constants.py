"""
Parameters, constants and fixed points
======================================

Pair the parameters a and b, rebuild the derived constants, and check the
fixed points of every catalog entry.
"""

import math

from basins import catalog
from basins.report import verify_report

# b is the first negative zero of g'' where g(z) = 1/(1 + a cos sqrt z)
a = catalog.solve_a(-1.0)
print("a for b=-1:", a)
print("b for a=0.16763487:", catalog.solve_b(0.16763487))

# the normalising constants of the first example
ex1 = catalog.build_entry("ex1", b=-1.0)
p = ex1.params
print("g(b)     =", p.g_at_b, " closed form:", 1 / (1 + p.a * math.cosh(1.0)))
print("1/g'(b)  =", p.inv_gprime_b)
print("critical values d+, d- =", p.d_plus, p.d_minus)

# f(0) = 0, f'(0) = 1 and f''(0) = 0, so 0 is parabolic with two petals
j = ex1.f.jet(0.0, 3)
print("jet at 0:", j.d0, j.d1, j.d2)

# the superattracting variant places a critical fixed point at 1 + pi^2
ex2 = catalog.build_entry("ex2-super", b=-1.0)
print("beta =", ex2.constants["beta"])

for eid in catalog.ENTRY_IDS:
    entry = catalog.build_entry(eid)
    for rec in entry.fixed_points:
        print(f"{eid:10s} {rec.location:.9f}  lambda={rec.multiplier:.3g}  {rec.cls.name.lower()}")

# printed values are compared with recomputed ones in the verify report
print(verify_report("ex1", {"b": -1.0}, 2000))
