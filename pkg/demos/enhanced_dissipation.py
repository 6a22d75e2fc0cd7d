"""
Enhanced dissipation
====================

Unforced decay rates of single x-modes compared with the shear-enhanced rate
(nu k^2)^(1/3).  The fitted ratio epsilon_eff should stay of order one while
nu changes by a decade, and at k = 1 the rate should scale like nu^(1/3).
"""
from couette_lab import linearized_evolution as le

recs = le.dissipation_sweep(nus=(1e-2, 3e-3, 1e-3), ks=(0.5, 1.0), n=129)
print(f"{'nu':>8} {'k':>5} {'band':>13} {'rate':>10} {'lambda_nu':>10} {'eps_eff':>8}")
for r in recs:
    flag = "  (poor fit)" if r["flagged"] else ""
    print(f"{r['nu']:>8g} {r['k']:>5g} {r['band']:>13} {r['rate']:>10.4g} {r['lambda_nu']:>10.4g} {r['epsilon_eff']:>8.3f}{flag}")

print(f"\nlog-log slope of rate vs nu at k = 1: {le.rate_slope(recs, 1.0):.3f} (heat decay would give 1)")
