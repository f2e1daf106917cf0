"""
Which functions have finite limit energy?
=========================================

Functions with Fourier decay (1 + |xi|^2)^(-beta/2) belong to the domain of
the limit functional exactly when beta > (N + 2) / 2.
"""
from fracrate.energies import domain_membership, log_weighted_partial

for beta in (1.4, 1.5, 1.6, 3.0, 10.0):
    v = domain_membership(beta, 1)
    print(f"beta={beta:<5} member={v.is_member!s:<5} integral={v.log_weighted_integral:.6g}")

# at the threshold the partial integrals grow like log(R)^2
for R in (1e2, 1e4, 1e6, 1e8):
    print(f"R={R:.0e}  partial integral {log_weighted_partial(1.5, 1, R):.4f}")
