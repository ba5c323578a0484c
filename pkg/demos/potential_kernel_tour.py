"""Tour of the potential kernel: exact values, the asymptote, envelopes.

Run:  python3 demos/potential_kernel_tour.py
"""

import math

from condwalk import (
    KAPPA,
    default_table,
    potential,
    potential_oracle,
    potential_radius,
)

table = default_table()
print(f"table covers |p| <= {table.exact_radius} with exact values")
print(f"kappa = {KAPPA:.16f}  (the constant in a ~ (2/pi) ln|p| + kappa)")
print()

print("small values (exact rational construction, rounded once):")
for p in [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 0)]:
    print(f"  a{p!r:>8} = {potential(p, table):.15f}")
print()

print("the neighbor value 1 and the diagonal 4/pi are exact:")
print(f"  a(1,0) - 1      = {potential((1, 0), table) - 1.0:.1e}")
print(f"  a(1,1) - 4/pi   = {potential((1, 1), table) - 4 / math.pi:.1e}")
print()

print("approach to the radial asymptote (2/pi) ln r + kappa:")
for r in (2, 8, 32, 128, 512):
    exact = potential((r, 0), table)
    asym = potential_radius(r)
    print(f"  r = {r:>4}:  a(r,0) = {exact:.10f}   asymptote = {asym:.10f}"
          f"   diff = {exact - asym:+.2e}")
print(f"crossover error at the table edge: {table.crossover_error:.2e}")
print(f"global envelope pads: +{table.excess_over_asymptote:.6f} / "
      f"-{table.deficit_under_asymptote:.6f}")
print()

print("independent quadrature oracle (Fourier integral), spot checks:")
for p in [(1, 0), (3, 4), (12, 5), (20, 20)]:
    t = potential(p, table)
    o = potential_oracle(p)
    print(f"  a{p!r:>9}: table {t:.12f}  oracle {o:.12f}  diff {t - o:+.1e}")
