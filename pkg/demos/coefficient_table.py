"""Compute the expansion coefficients for a smooth bump and sanity-check them.

Builds the full table up to order 3 for the canonical C^inf bump
rho(x) = exp(1 - 1/(1 - x^2)) on (-1, 1), prints the two coefficient
families, and compares the leading entries against their closed forms.
"""

import math

from heattrace.coefficients import closed_form_b0_b1, compute_table
from heattrace.potentials import bump, integrate_power

p = bump()
print("potential: bump(center=0, halfwidth=1, amplitude=1)")
print("  int rho   =", integrate_power(p, 1).value)
print("  int rho^2 =", integrate_power(p, 2).value)
print()

table = compute_table(p, max_order=3, threads=4)
print(f"table computed: max_order={table.max_order}, converged={table.converged}")
print()

print("resolvent-side coefficients b_m  (trace ~ sum_m b_m / k^(m+2)):")
for row in table.bm:
    print(f"  b_{row['m']} = {row['value']: .12e}")
print()

print("heat-trace coefficients a_n  (trace ~ sum_n a_n t^(n/2) / sqrt(t)):")
for row in table.an:
    print(f"  a_{row['n']} = {row['value']: .12e}")
print()

# the two leading b's have one-line closed forms; everything downstream of the
# table must reproduce them
b0_ref, b1_ref = closed_form_b0_b1(p)
b0, b1 = table.bm_value(0), table.bm_value(1)
print("closed-form check:")
print(f"  b_0 vs -(1/4pi) int rho   : {b0: .12e} vs {b0_ref: .12e} "
      f"(rel dev {abs(b0 - b0_ref) / abs(b0_ref):.1e})")
print(f"  b_1 vs (sqrt2/64) int rho^2: {b1: .12e} vs {b1_ref: .12e} "
      f"(rel dev {abs(b1 - b1_ref) / abs(b1_ref):.1e})")
print()

# Watson's lemma bookkeeping ties the two families together exactly
print("a_n * Gamma(n/2 + 1) - b_n (must vanish to machine precision):")
for n in range(table.max_order + 1):
    an = table.an_value(n)
    bn = table.bm_value(n)
    print(f"  n={n}: {an * math.gamma(n / 2 + 1) - bn: .2e}")
