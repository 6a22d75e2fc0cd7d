"""
Resolvent constants and one linear evolution
============================================

First the empirical constants of the four resolvent inequalities over a lambda
grid, then a single clamped linear evolution with its space-time ledger.
"""
import numpy as np

from couette_lab import linearized_evolution as le
from couette_lab import os_resolvent as osr
from couette_lab import spectral_core as sc

nu, k = 1e-3, 0.5
ops = sc.build_chebyshev(129)
ens = osr.forcing_ensemble(ops, nu, k)
lams = osr.lambda_grid(nu, k)[::2]
rep = osr.scan_lambda(nu, k, 0.0, lams, ens, ops)
print(f"{len(lams)} lambdas x {len(ens)} forcings at nu={nu}, k={k}")
for name, c in rep.constants.items():
    lam, fid = rep.argmax[name]
    print(f"  {name:<16} C = {c:6.3f}   worst at lambda = {lam:+.3f} ({fid})")

# a shear layer released at y = 0.2
ops = sc.build_chebyshev(257)
cfg = le.EvolutionConfig(nu, k, le.initial_family(ops, "shear", center=0.2))
traj, led = le.evolve(cfg)
print(f"\nband: {le.classify(k, nu).kind}, lambda_nu = {cfg.lambda_nu:.4f}, {cfg.steps} steps")
print(f"energy identity residual {led.energy_residual:.1e}, wall slopes {led.slope_error:.1e}")
for i in range(0, len(traj.t), len(traj.t) // 5):
    print(f"  t = {traj.t[i]:7.1f}   ||omega|| = {led.omega_l2[i]:.4e}   ||u|| = {led.u_l2[i]:.4e}")

rep = le.verify_band_estimate(cfg, run=(traj, led))
print(f"space-time left side / right side = {rep.ratio:.3f}")
print("E_k =", f"{le.e_k(led, nu, k):.4f}")
