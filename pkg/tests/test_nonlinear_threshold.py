import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from couette_lab import linearized_evolution as le
from couette_lab import nonlinear_threshold as nt
from couette_lab import spectral_core as sc

NX, NY, LX = 64, 65, 8 * np.pi


def single_mode(j, k, amp, nu=1e-2):
    ops = sc.build_chebyshev(NY)
    y = ops.nodes
    psi = (1 - y**2) ** 2 * (1 + 3 * np.exp(-(1 - y) / 0.15))
    half = np.zeros((nt.kcut(NX) + 1, NY), dtype=complex)
    half[j] = ops.d2 @ psi - k * k * psi
    return nt.seeded_state(nu, amp, NX, NY, LX, half)


@pytest.fixture(scope="module")
def small_run():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return nt.run_case(1e-2, 1e-2**0.5, nx=NX, ny=NY)


def test_zero_state_is_fixed_point():
    s = nt.zero_state(1e-2, NX, NY)
    for _ in range(3):
        s = nt.step_nonlinear(s, 0.1)
    assert np.all(s.omega_hat == 0)
    tr = nt.integrate(nt.zero_state(1e-2, NX, NY), 0.1, 1.0)
    led = nt.accumulate_Ek(tr)
    assert np.all(led.profile == 0) and led.l1 == 0 and led.linf == 0


def test_reality_restored_exactly():
    half = np.random.default_rng(1).standard_normal((nt.kcut(NX) + 1, NY)) * (1 + 1j)
    full = nt.from_half(half, NX)
    assert nt.reality_defect(full) == 0
    assert np.all(full[0].imag == 0)


def test_reality_and_clamping_along_run(small_run):
    tr = small_run.trajectory
    assert tr.reality_error == 0
    assert tr.bc_error < 1e-9


def test_linear_consistency_small_amplitude():
    nu, j = 1e-2, 4
    k = 2 * np.pi / LX * j
    s0 = single_mode(j, k, 1e-8, nu)
    lam = le.lambda_nu(nu, 1.0)
    dt, T = 0.02 / lam, 1 / le.lambda_nu(nu, k)
    tr = nt.integrate(s0, dt, T)
    ltr, _ = le.evolve(le.EvolutionConfig(nu, k, s0.omega_hat[j], dt=dt, T=T, project=False, enforce_contract=False))
    ops = sc.build_chebyshev(NY)
    err = ops.l2(tr.final.omega_hat[j] - ltr.omega[-1]) / ops.l2(ltr.omega[-1])
    assert err < 1e-4


def test_energy_budget_per_step(small_run):
    tr = small_run.trajectory
    assert tr.budget_defect.size > 0
    assert np.max(tr.budget_defect) < 1e-6


def test_divergence_form_on_resolved_state():
    # polynomial profiles of low degree: every product is resolved on the padded grid
    ops = sc.build_chebyshev(NY)
    y = ops.nodes
    half = np.zeros((nt.kcut(NX) + 1, NY), dtype=complex)
    for j, c in ((1, 1.0), (3, 0.4j)):
        k = 2 * np.pi / LX * j
        psi = (1 - y**2) ** 2 * (1 + y + 0.5 * y**3)
        half[j] = c * (ops.d2 @ psi - k * k * psi)
    s = nt.FlowState(nt.from_half(half, NX), 1e-2, LX)
    assert nt.divergence_defect(s) < 1e-10


def test_cfl_violation_raised():
    s = single_mode(4, 1.0, 50.0)
    with pytest.raises(nt.CFLViolation):
        nt.step_nonlinear(s, 5.0)


def test_seed_normalization_and_grid_check():
    s = nt.seeded_state(1e-2, 0.37, NX, NY, LX)
    assert abs(nt.h2_norm(s) - 0.37) < 1e-12
    with pytest.raises(ValueError):
        nt.seed_profile(NX, NY, LX, modes=(0.3,))


def test_ek_matches_linear_ledger_per_mode():
    nu, j = 1e-2, 4
    k = 2 * np.pi / LX * j
    s0 = single_mode(j, k, 1e-6, nu)
    lam = le.lambda_nu(nu, 1.0)
    dt, T = 0.02 / lam, 10 / lam
    led = nt.accumulate_Ek(nt.integrate(s0, dt, T))
    _, lled = le.evolve(le.EvolutionConfig(nu, k, s0.omega_hat[j], dt=dt, T=T, project=False, enforce_contract=False))
    lin = LX * le.e_k(lled, nu, k)
    assert abs(led.profile[j] / lin - 1) < 1e-3


def test_band_switch_records_both_formulas(small_run):
    led = small_run.ledger
    assert 1.0 in led.boundary
    assert set(led.boundary[1.0]) == {"intermediate", "high"}
    assert led.bands[3] == "intermediate" and led.bands[4] == "high"
    assert led.l1 >= 0 and np.all(np.diff(led.running_l1) >= -1e-15)


def test_running_aggregate_ends_at_l1(small_run):
    led = small_run.ledger
    assert abs(led.running_l1[-1] - led.l1) < 1e-12 * led.l1


def test_low_band_warning():
    with pytest.warns(UserWarning, match="low band"):
        nt.run_case(1e-2, 0.0, nx=NX, ny=NY, T=0.5)


def test_zero_amplitude_is_stable():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = nt.run_case(1e-2, 0.0, nx=NX, ny=NY, T=1.0)
    assert r.verdict == "stable"


def test_budget_exhaustion_is_inconclusive():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = nt.run_case(1e-2, 0.1, nx=NX, ny=NY, budget=0.0)
    assert r.verdict == "inconclusive"


def test_verdict_stable_small_data(small_run):
    assert small_run.verdict == "stable"
    assert small_run.energy_ratio < 1
    assert small_run.peak_aggregate < nt.ESCAPE_FACTOR * small_run.initial_aggregate


def test_verdict_monotone_in_amplitude():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = [nt.run_case(1e-2, a, nx=NX, ny=NY).verdict for a in (0.01, 0.1, 1.0)]
    ranks = [0 if x == "stable" else 1 for x in v]
    assert ranks == sorted(ranks)


def test_threshold_estimate_logic():
    def rec(nu, g, v):
        return nt.ThresholdScanRecord(nu, g, 1.0, 0.0, v, 0, 0, 0, 0, 0, 0, NX, NY, LX, 0.1)

    recs = [rec(1e-2, 0.5, "stable"), rec(3e-3, 0.5, "stable"), rec(1e-2, 0.3, "escaped"), rec(3e-3, 0.3, "stable"), rec(1e-2, 0.7, "stable"), rec(3e-3, 0.7, "stable")]
    assert nt.threshold_estimate(recs) == 0.5
    assert nt.threshold_estimate([rec(1e-2, 0.5, "escaped")]) is None


def test_threshold_scan_records():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        recs = nt.threshold_scan([1e-2], [0.5, 1.0], 0.5, nx=NX, ny=NY)
    assert [r.gamma for r in recs] == [0.5, 1.0]
    assert all(r.verdict == "stable" for r in recs)
    assert abs(recs[0].h2_initial - 0.5 * 1e-2**0.5) < 1e-12


# ---------------------------------------------------------------- bilinear bound


def test_region_check_zero_profile():
    ks = np.linspace(-3, 3, 25)
    rep = nt.bilinear_region_check(ks, np.zeros_like(ks), 1e-2)
    assert rep.total == 0 and all(v == 0 for v in rep.contributions.values())


def test_region_check_low_and_high_indicator():
    ks = 0.25 * np.arange(-12, 13)
    E = np.zeros_like(ks)
    E[12] = 1.0  # k = 0 (low)
    E[20] = 1.0  # k = 2 (high)
    rep = nt.bilinear_region_check(ks, E, 1e-2)
    live = {r for r, v in rep.contributions.items() if v > 0}
    # self-interaction of k = 0 has |k+l| = 0, so I11 carries no weight here
    assert live == {"I13", "I31", "I33"}
    # the cross terms reduce to the single-term kernels of Cases I and III
    nu = 1e-2
    w = 0.25**2 / (2 * np.pi)
    assert abs(rep.contributions["I31"] - w * nt.region_kernel(2.0, 0.0, nu)) < 1e-15
    assert abs(rep.contributions["I13"] - w * nu**-0.5) < 1e-12


@pytest.mark.parametrize("ineq", [i for i in nt.KERNEL_INEQUALITIES if i.region != "I11"], ids=lambda i: i.region)
def test_kernel_inequalities_hold(ineq):
    rep = {r.region: r for r in nt.check_kernel_inequalities(m=4000)}[ineq.region]
    assert rep.violations == 0


@pytest.mark.xfail(strict=True, reason="|k+l| reaches 20 nu on I11, so |k+l|^(2/3) <= nu^(2/3) fails; it holds with 20^(2/3)")
def test_kernel_inequality_i11_literal():
    rep = {r.region: r for r in nt.check_kernel_inequalities(m=4000)}["I11"]
    assert rep.violations == 0


def test_kernel_inequalities_corrected_constants():
    reps = nt.check_kernel_inequalities(m=4000)
    assert all(r.corrected_violations == 0 for r in reps)
    assert abs({r.region: r for r in reps}["I11"].max_ratio - 20 ** (2 / 3)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), lognu=st.floats(-4, -2))
def test_assembled_bound_within_region_constant(seed, lognu):
    nu = 10**lognu
    ks = 0.05 * np.arange(-60, 61)
    E = np.random.default_rng(seed).exponential(size=ks.size)
    rep = nt.bilinear_region_check(ks, E, nu)
    assert rep.within


def test_simulation_flux_below_assembled_bound(small_run):
    tr, led = small_run.trajectory, small_run.ledger
    meas = nt.measured_flux_norms(tr)
    ks, E = led.full_profile()
    rep = nt.bilinear_region_check(ks, E, tr.nu, meas["f1_weighted"])
    assert rep.dominates and rep.measured > 0
    assert meas["f2"] <= nt.f2_bound(led)


def test_hardy_step_unit_constant(small_run):
    r = nt.hardy_ratio(small_run.trajectory)
    assert 0 < r <= 1.0
