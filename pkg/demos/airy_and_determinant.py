"""
The Airy building blocks
========================

The homogeneous Orr-Sommerfeld solutions near the walls are Airy functions of a
rotated, stretched variable.  This script evaluates Ai, its rotated
antiderivative A0 and the decay ratio eta, and then the determinant that keeps
the two-wall problem solvable.
"""
import numpy as np

from couette_lab import airy_kernel as ak
from couette_lab import homogeneous_airy as ha

# Ai at a few complex points, with the branch that produced each value
for z in (0.0, 2 + 1j, -5 - 0.5j, 12 * np.exp(0.3j)):
    v = ak.ai_complex(z)
    print(f"Ai({z:.3g}) = {v.ai:.10g}   [{v.method}]")

# A0(0) is exactly 1/3
print("A0(0) =", ak.a0(0.0).a0)

# the sup of Re A0'/A0 on the closed lower half-plane
res = ak.a_of_delta(0.0)
print(f"a(0) = {res.value:.6f}, attained near z = {res.argmax:.4f}")

# eta decays like exp(-0.47 x) along the real direction
z = -2.0 - 1.0j
for x in (1.0, 5.0, 20.0):
    e = ak.eta(z, x).eta
    print(f"|eta({z}, {x:>4})| = {abs(e):.3e}   bound e^(-0.47 x) = {np.exp(-ak.A_SIGMA * x):.3e}")

# the determinant claim at a handful of spectral parameters
print("\nnu      k     lambda   |det| / (k |B1 B2|)   claim constant", f"{ha.CLAIM_CONSTANT:.3g}")
for lam in (-1.0, -0.4, 0.0, 0.9, 2.0):
    r = ha.determinant_point(1e-3, 0.5, lam, 0.0)
    print(f"{r.nu:<7g} {r.k:<5g} {r.lam:>6.2f}   {r.claim_ratio:>12.4f}")
