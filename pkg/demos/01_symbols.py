"""
Radial multipliers and their limits
===================================

Every energy in the package is a Fourier multiplier.  This script tabulates
the multipliers, watches the rate symbol approach the limit symbol as s
grows, and checks the explicit bounds on ``m``.
"""
import numpy as np

from fracrate import symbols as sym

xi = np.array([0.1, 0.5, 1.0, 2.0, 5.0, 20.0])

# normalisation constant: C(N, s) / (1 - s) tends to 4 / omega_N
for N in (1, 2, 3):
    w = sym.unit_ball_volume(N)
    ratios = [sym.frac_constant(N, s) / (1 - s) / (4 / w) for s in (0.9, 0.99, 0.999)]
    print(f"N={N}  C/(1-s) / (4/omega_N):", np.round(ratios, 6))

# rate symbol at s close to 1 against the limit symbol
lim = sym.limit_symbol(1, xi)
print("\nlimit symbol, N=1:", np.round(lim, 6))
for s in (0.9, 0.99, 0.999):
    print(f"s={s:<6} max |rate - limit| = {np.max(np.abs(sym.rate_symbol(1, s, xi) - lim)):.3e}")

# the limit symbol obeys an exact scaling law
w = sym.unit_ball_volume(1)
print("\nscaling law residual:",
      np.max(np.abs(lim - xi ** 2 * (sym.limit_symbol(1, 1.0) + w * np.log(xi)))))

# explicit bounds on m; the literal |xi|^4 lower bound breaks for large xi
rep = sym.check_m_bounds(1, [0.5, 2, 5, 10, 50, 100])
for r in rep["rows"]:
    print(f"xi={r['xi']:>6}  {r['inequality']:<16} {'ok' if r['pass'] else 'VIOLATED'}")

# a full table, ready for CSV export
tab = sym.build_table(2, 0.9, xi)
for row in tab.rows()[:3]:
    print(["%.5g" % v for v in row])
