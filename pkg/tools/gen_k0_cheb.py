"""Regenerate the Chebyshev table used by heattrace.specfun.bessel_k0 for x > 2.

Fits g(w) = K0(x) e^x sqrt(x) with w = 2/x on (0, 1], as a Chebyshev series in
s = 2w - 1, from 50-digit mpmath reference values at Chebyshev-Gauss nodes.
Run:  python3 tools/gen_k0_cheb.py   and paste the printed table into specfun.py.
"""
import mpmath

mpmath.mp.dps = 50
N = 48          # fit nodes
KEEP = 30       # retained coefficients


def g(s):
    w = (s + 1) / 2
    if w == 0:
        return mpmath.sqrt(mpmath.pi / 2)      # x -> inf limit
    x = 2 / w
    return mpmath.besselk(0, x) * mpmath.exp(x) * mpmath.sqrt(x)


nodes = [mpmath.cos(mpmath.pi * (j + mpmath.mpf(1) / 2) / N) for j in range(N)]
vals = [g(s) for s in nodes]

coeffs = []
for k in range(KEEP):
    c = 2 * mpmath.fsum(v * mpmath.cos(k * mpmath.acos(s))
                        for v, s in zip(vals, nodes)) / N
    coeffs.append(c if k else c / 2)

# residual scan
worst = mpmath.mpf(0)
for j in range(497):
    s = -1 + mpmath.mpf(2) * (j + 1) / 498
    approx = mpmath.fsum(c * mpmath.cos(k * mpmath.acos(s))
                         for k, c in enumerate(coeffs))
    worst = max(worst, abs(approx / g(s) - 1))

print(f"# max relative residual on (2, inf): {mpmath.nstr(worst, 3)}")
print("_K0_CHEB = (")
for c in coeffs:
    print(f"    {mpmath.nstr(c, 20)},")
print(")")
