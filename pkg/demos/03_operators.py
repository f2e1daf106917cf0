"""
The limit operator, spectrally and in real space
================================================

Apply the limit operator through its symbol, evaluate the singular
integral form at a few points, and check the first variation of the
limit energy.
"""
import warnings

import numpy as np

from fracrate.fields import GridSpec, default_grid, gaussian, sample, smooth_bump
from fracrate.operators import (
    apply_L_realspace, apply_spectral, first_variation_check, limit_operator, point_values, rate_operator,
)

prof = gaussian(1.0)
grid = GridSpec(1, 160.0, 4096)
Lu = apply_spectral(limit_operator(), sample(prof, grid))

xs = np.array([0.0, 0.5, -1.3, 2.0, 3.7])
real = apply_L_realspace(prof, xs)
spec = point_values(Lu, xs)
for x, a, b in zip(xs, real, spec):
    print(f"x={x:5}: real-space {a:+.8f}  spectral {b:+.8f}  rel {abs(a - b) / abs(b):.1e}")

# far from a compact bump only the outer integral contributes, and it is positive
print("\nL(bump)(3.5) =", apply_L_realspace(smooth_bump(1.0), 3.5))

# first variation: central difference of the energy vs <Op u, phi>
g = default_grid(1)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    phi = sample(smooth_bump(0.5), g)
u = sample(prof, g)
for op in (rate_operator(0.9), limit_operator()):
    r = first_variation_check(op, u, phi)
    print(f"{r['operator']:<24} dq={r['difference_quotient']:+.12f} pair={r['pairing']:+.12f} gap={r['relative_gap']:.1e}")
