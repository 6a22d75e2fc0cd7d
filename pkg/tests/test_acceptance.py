"""Acceptance suite: every criterion at its stated tolerance.

Each test records its outcome through the `criterion` fixture; the terminal
summary prints one PASS/FAIL line per criterion.  A criterion whose literal
statement is unattainable keeps that part as a strict xfail and prints FAIL.
"""
import time
import warnings

import numpy as np
import pytest
from scipy import special

from couette_lab import airy_kernel as ak
from couette_lab import homogeneous_airy as ha
from couette_lab import linearized_evolution as le
from couette_lab import nonlinear_threshold as nt
from couette_lab import os_resolvent as osr
from couette_lab import spectral_core as sc


# ---------------------------------------------------------------- 1


def test_airy_constants(criterion):
    t0 = time.perf_counter()
    a = ak.a_of_delta(0.0).value
    a0 = ak.a0(0.0).a0
    oracle = ak.a0_quadrature_oracle(0.0)
    ai0 = ak.airy_ai(0.0)[0]
    series = 3 ** (-2 / 3) / special.gamma(2 / 3)
    dt = time.perf_counter() - t0
    ok = abs(a - ak.A_ZERO_REFERENCE) <= 5e-4 and abs(a0 - 1 / 3) <= 1e-9 and abs(a0 - oracle) <= 1e-9 and abs(ai0 - series) <= 1e-10 and dt < 10
    criterion(1, "constants", ok, f"a(0)={a:.6f} A0(0)-1/3={abs(a0 - 1 / 3):.1e} Ai(0) err={abs(ai0 - series):.1e} {dt:.1f}s")
    assert ok


# ---------------------------------------------------------------- 2


@pytest.mark.slow
def test_determinant_claim_full_grid(criterion):
    t0 = time.perf_counter()
    recs = [ha.determinant_point(*p) for p in ha.determinant_grid()]
    dt = time.perf_counter() - t0
    claim = sum(r.claim_ratio < ha.CLAIM_CONSTANT for r in recs)
    d1 = sum(r.d1_ratio < ha.D1_CONSTANT for r in recs)
    ok = claim == 0 and d1 == 0 and dt < 300
    criterion(2, "grid", ok, f"{len(recs)} points, claim violations {claim}, |D1| violations {d1}, "
              f"min ratio {min(r.claim_ratio for r in recs) / ha.CLAIM_CONSTANT:.3g}x, {dt:.0f}s")
    assert ok


# ---------------------------------------------------------------- 3


def test_homogeneous_cross_validation(criterion):
    rng = np.random.default_rng(2024)
    worst, bc = 0.0, 0.0
    cache = {}
    for _ in range(50):
        nu = float(rng.choice([1e-2, 1e-3]))
        k = float(10 ** rng.uniform(np.log10(10 * nu * 1.01), np.log10(0.95)))
        lam = float(rng.uniform(-3, 3))
        eps = float(rng.choice([0.0, 1e-3]))
        pair = ha.build_homogeneous_pair(ha.build_bundle(nu, k, lam, eps, with_eta=False))
        ops = cache.setdefault(pair.n, sc.build_chebyshev(pair.n))
        (w1, _), (w2, _) = osr.homogeneous_spectral(ops, nu, k, lam, eps)
        worst = max(worst, ops.l2(pair.w1 - w1) / ops.l2(w1), ops.l2(pair.w2 - w2) / ops.l2(w2))
        bc = max(bc, abs((ops.d1 @ pair.phi1)[0] - 1))
    ok = worst < 1e-5 and bc < 1e-6
    criterion(3, "triples", ok, f"50 triples, max rel L2 {worst:.2e}, |phi1'(1) - 1| {bc:.1e}")
    assert ok


# ---------------------------------------------------------------- 4

ENVELOPE_KS = lambda nu: (round(1.01 * 10 * nu, 12), 0.5, 0.9)  # noqa: E731


def _envelopes(n, nus=(1e-2, 1e-3, 1e-4)):
    ops = sc.build_chebyshev(n)
    out = {}
    for nu in nus:
        for k in ENVELOPE_KS(nu):
            ens = osr.forcing_ensemble(ops, nu, k)
            rep = osr.scan_lambda(nu, k, 0.0, osr.lambda_grid(nu, k), ens, ops)
            assert not rep.failures.any()
            out[(nu, k)] = rep.constants
    return out


@pytest.mark.slow
def test_resolvent_envelopes(criterion):
    t0 = time.perf_counter()
    coarse, fine = _envelopes(257), _envelopes(513)
    dt = time.perf_counter() - t0
    names = list(osr.INEQUALITIES)
    finite = all(np.isfinite(c[m]) and c[m] > 0 for c in fine.values() for m in names)
    refine = max(abs(fine[p][m] / coarse[p][m] - 1) for p in fine for m in names)
    per_nu = {m: [max(fine[(nu, k)][m] for k in ENVELOPE_KS(nu)) for nu in (1e-2, 1e-3, 1e-4)] for m in names}
    growth = max(max(v[i + 1] / max(v[: i + 1]) for i in range(2)) for v in per_nu.values())
    ok = finite and refine < 0.1 and growth <= 1.1 and dt < 900
    env = ", ".join(f"{m} {max(v):.3g}" for m, v in per_nu.items())
    criterion(4, "envelopes", ok, f"{env}; refinement change {refine:.1e}; max growth as nu decreases {growth:.3f}; {dt:.0f}s")
    assert ok


# ---------------------------------------------------------------- 5


@pytest.fixture(scope="module")
def ops257():
    return sc.build_chebyshev(257)


@pytest.mark.xfail(strict=True, reason="the left side contains sup_t ||omega||^2 >= ||omega_in||^2 plus positive terms")
def test_low_band_unit_coefficient_literal(ops257, criterion):
    worst = 0.0
    for k in (0.0, 0.01, 0.05, 0.09):
        for fam in ("sine", "shear", "wall"):
            rep = le.verify_band_estimate(le.EvolutionConfig(1e-2, k, le.initial_family(ops257, fam, j=2)), band="low")
            worst = max(worst, rep.unit_literal)
    criterion(5, "unit-coefficient literal", worst <= 1 + 1e-3, f"max left side / ||omega_in||^2 = {worst:.4f}")
    assert worst <= 1 + 1e-3


def test_low_band_energy_identity_and_sine(ops257, criterion):
    res, sine, energy = 0.0, 0.0, 0.0
    for k in (0.0, 0.01, 0.05, 0.09):
        for fam in ("sine", "shear", "wall"):
            cfg = le.EvolutionConfig(1e-2, k, le.initial_family(ops257, fam, j=2))
            run = le.evolve(cfg)
            led = run[1]
            res, sine = max(res, led.energy_residual), max(sine, led.sine_ratio)
            energy = max(energy, le.verify_band_estimate(cfg, band="low", run=run).unit_energy)
    ok = res < 1e-8 and sine <= 1.0
    criterion(5, "energy identity and sine inequality", ok,
              f"energy residual {res:.1e}, sine ratio {sine:.3f}, attainable energy form {energy:.3f}")
    assert ok


# ---------------------------------------------------------------- 6


@pytest.mark.slow
def test_enhanced_dissipation_scaling(criterion):
    t0 = time.perf_counter()
    recs = le.dissipation_sweep((1e-2, 3e-3, 1e-3), (0.1, 0.5, 1.0, 2.0), n=257)
    slope = le.rate_slope(recs, 1.0)
    dt = time.perf_counter() - t0
    eps = min(r["epsilon_eff"] for r in recs)
    ok = eps > 0 and abs(slope - 1 / 3) <= 0.08 and dt < 600
    criterion(6, "sweep", ok, f"{len(recs)} fits, min epsilon_eff {eps:.3g}, k=1 slope {slope:.3f}, {dt:.0f}s")
    assert ok


# ---------------------------------------------------------------- 7


def test_homogeneous_split_identities(ops257, criterion):
    rng = np.random.default_rng(7)
    gap, ratio = 0.0, 0.0
    y = ops257.nodes
    for _ in range(20):
        nu = float(10 ** rng.uniform(-4, -2))
        k = float(10 ** rng.uniform(np.log10(10 * nu), 0.3)) * rng.choice([-1, 1])
        c, w = rng.uniform(-0.8, 0.8), rng.uniform(0.1, 0.4)
        raw = np.exp(-(((y - c) / w) ** 2)) * (1 + 0.5j * np.sin(3 * y))
        w0 = le.project_compatible(ops257, k, raw)
        nw = ops257.l2(w0)
        lam = (nu * k * k) ** (1 / 3)
        t = np.linspace(0, 10 / lam, 201)
        n1 = np.sqrt(np.abs(le.omega_h1(w0, y, nu, k, t)) ** 2 @ ops257.quad_weights)
        gap = max(gap, float(np.max(np.abs(n1 - np.exp(-lam * t) * nw)) / nw))
        ratio = max(ratio, le.u1_time_integral(ops257, w0, nu, k) / (2 * np.pi / abs(k) * nw**2))
    ok = gap <= 1e-12 and ratio <= 1.0
    criterion(7, "split", ok, f"20 cases, norm identity gap {gap:.1e}, max int ||u_H1||^2 / (2 pi/|k| ||omega_in||^2) {ratio:.3f}")
    assert ok


# ---------------------------------------------------------------- 8

STABILITY_ENVELOPE = 1.0


@pytest.mark.slow
def test_nonlinear_stability_property(criterion):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        base = nt.threshold_scan((1e-2, 3e-3), (0.5,), 0.5, nx=256, ny=65, Lx=8 * np.pi)
        wide = nt.threshold_scan((1e-2, 3e-3), (0.5,), 0.5, nx=512, ny=65, Lx=16 * np.pi)
    dt = time.perf_counter() - t0
    stable = all(r.verdict == "stable" for r in base + wide)
    env = max(r.l1_over_sqrt_nu for r in base)
    same = all(a.verdict == b.verdict for a, b in zip(base, wide))
    drift = max(abs(b.l1_over_sqrt_nu / a.l1_over_sqrt_nu - 1) for a, b in zip(base, wide))
    ok = stable and env <= STABILITY_ENVELOPE and same and dt < 3600
    vals = ", ".join(f"nu={r.nu:g}: {r.l1_over_sqrt_nu:.3f}" for r in base)
    criterion(8, "scan", ok, f"verdicts {[r.verdict for r in base]}, L1/nu^(1/2) {vals} (envelope {STABILITY_ENVELOPE}), "
              f"Lx doubled: verdicts unchanged {same}, aggregate change {drift:.1e}, {dt:.0f}s")
    assert ok


# ---------------------------------------------------------------- 9


@pytest.fixture(scope="module")
def kernel_reports():
    return {r.region: r for r in nt.check_kernel_inequalities()}


@pytest.mark.xfail(strict=True, reason="|k+l| reaches 20 nu on the smallest region, so |k+l|^(2/3) <= nu^(2/3) fails by 20^(2/3)")
def test_region_kernels_as_printed(kernel_reports, criterion):
    bad = {k: r.violations for k, r in kernel_reports.items() if r.violations}
    criterion(9, "kernels as printed", not bad, f"violations {bad or 0}, max ratio I11 {kernel_reports['I11'].max_ratio:.3f}")
    assert not bad


def test_region_kernels_other_regions_and_corrected(kernel_reports):
    assert all(r.violations == 0 for k, r in kernel_reports.items() if k != "I11")
    assert all(r.corrected_violations == 0 for r in kernel_reports.values())


@pytest.mark.slow
def test_assembled_bound_dominates_simulation(criterion):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        run = nt.run_case(1e-2, 0.5 * 1e-2**0.5)
    meas = nt.measured_flux_norms(run.trajectory)
    ks, E = run.ledger.full_profile()
    rep = nt.bilinear_region_check(ks, E, 1e-2, meas["f1_weighted"])
    ok = bool(rep.dominates and rep.within)
    criterion(9, "assembled bound", ok, f"measured {meas['f1_weighted']:.3g} <= bound {rep.total:.3g}; total / reference {rep.ratio:.3f}")
    assert ok


# ---------------------------------------------------------------- 10


def test_small_inequality_suite(criterion):
    t0 = time.perf_counter()
    ops = sc.build_chebyshev(65)
    y = ops.nodes
    wirt = abs(sc.wirtinger_check(ops, np.sin(np.pi * (y + 1) / 2)) - (2 / np.pi) ** 2)
    rng = np.random.default_rng(10)
    ell, interp = 0.0, 0.0
    for _ in range(100):
        k = float(rng.uniform(0, 5))
        c = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        c /= 1 + np.arange(12)
        psi = (1 - y**2) ** 2 * np.polynomial.chebyshev.chebval(y, c)
        w = ops.d2 @ psi - k * k * psi
        ell = max(ell, sc.elliptic_identity_defect(ops, w, k))
        interp = max(interp, sc.interpolation_ratio(ops, psi, k))
    sinh = 0.0
    for k in np.linspace(1e-3, 0.999, 60):  # the lemma is used for 10 nu <= |k| < 1
        b = osr.sinh_cosh_bounds(k)
        sinh = max(sinh, b["sinh_linf"], b["k_cosh_l2"])
    dt = time.perf_counter() - t0
    ok = wirt <= 1e-8 and ell <= 1e-9 and interp <= 1.0 and sinh <= 1.0 + 1e-12 and dt < 30
    criterion(10, "oracles", ok, f"Wirtinger gap {wirt:.1e}, elliptic identity {ell:.1e}, interpolation max ratio {interp:.3f} "
              f"(clamped states), sinh/cosh max {sinh:.3f}, {dt:.1f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="with psi(+-1) = 0 only, boundary-layer states push the ratio towards 2")
def test_interpolation_dirichlet_literal():
    ops = sc.build_chebyshev(257)
    y = ops.nodes
    d = 0.02
    psi = (1 - y**2) * np.exp(-(1 - y) / d)
    assert sc.interpolation_ratio(ops, psi, 0.0) <= 1.0


def test_interpolation_dirichlet_constant_two():
    ops = sc.build_chebyshev(257)
    y = ops.nodes
    rng = np.random.default_rng(11)
    for d in (0.5, 0.1, 0.02):
        for _ in range(10):
            c = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            psi = (1 - y**2) * (np.exp(-(1 - y) / d) + np.polynomial.chebyshev.chebval(y, c))
            assert sc.interpolation_ratio(ops, psi, float(rng.uniform(0, 3))) <= 2.0
