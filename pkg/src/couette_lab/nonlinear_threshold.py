"""
Desk-scale nonlinear perturbation solver around Couette flow,

    d_t omega + y d_x omega - nu Lap omega + u . grad omega = 0,
    omega = Lap psi,  u = (d_y psi, -d_x psi),  psi = d_y psi = 0 at y = +-1,

Fourier in x on a periodic box of length Lx (a stand-in for the real line),
Chebyshev collocation in y.  Each x-mode carries the linear part with the same
Crank-Nicolson / influence-matrix step as the per-mode linear solver; the
transport term is written in divergence form d_x f1 + d_y f2 with f1 = u1 omega,
f2 = u2 omega and advanced with Adams-Bashforth 2.  Products are dealiased
with the 2/3 rule in x and on a 1.5x Chebyshev grid in y.

Fourier coefficients use the x-mean convention, omega(x, y) = sum_j c_j(y)
e^{i k_j x}.  Band-weighted functionals are reported on the discretized
real-line transform omega^(k_j) = Lx c_j, so L1_k aggregates are
Delta k sum_j E_j = 2 pi sum_j E(c_j) and do not depend on the box length for
a fixed periodic field.

The second half of the module assembles the nine-region bilinear bound on
the transport forcing and checks the scalar kernel inequalities behind it.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg

from . import linearized_evolution as le
from . import spectral_core as sc

DEFAULT_NX = 256
DEFAULT_NY = 65
DEFAULT_LX = 8 * np.pi
ESCAPE_FACTOR = 20.0
MONOTONE_TAIL = 0.25
CFL_LIMIT = 0.5
STARTUP = 2  # backward-Euler half-step pairs, as in the linear solver
SEED_MODES = (0.5, 1.5)


class CFLViolation(ArithmeticError):
    pass


class NonFiniteState(ArithmeticError):
    def __init__(self, msg, last_good):
        super().__init__(msg)
        self.last_good = last_good


# ---------------------------------------------------------------- grids and state


def wavenumbers(nx: int, Lx: float) -> np.ndarray:
    return 2 * np.pi / Lx * np.fft.fftfreq(nx, 1.0 / nx)


def kcut(nx: int) -> int:
    """Largest retained |j| under the 2/3 rule."""
    return nx // 3


@dataclass
class FlowState:
    omega_hat: np.ndarray  # (nx, ny), numpy FFT order in the first axis
    nu: float
    Lx: float
    t: float = 0.0
    nl_prev: np.ndarray | None = field(default=None, repr=False)  # transport term of the previous step
    step_count: int = 0

    @property
    def nx(self) -> int:
        return self.omega_hat.shape[0]

    @property
    def ny(self) -> int:
        return self.omega_hat.shape[1]

    @property
    def dk(self) -> float:
        return 2 * np.pi / self.Lx

    def half(self) -> np.ndarray:
        """Retained modes j = 0..kcut."""
        return self.omega_hat[: kcut(self.nx) + 1]


def from_half(half: np.ndarray, nx: int) -> np.ndarray:
    """Full FFT-ordered array with omega(-k) = conj omega(k) imposed exactly."""
    m = half.shape[0]
    full = np.zeros((nx,) + half.shape[1:], dtype=complex)
    full[:m] = half
    full[0] = half[0].real
    full[nx - m + 1 :] = np.conj(half[1:][::-1])
    return full


def reality_defect(omega_hat: np.ndarray) -> float:
    nx = omega_hat.shape[0]
    j = np.arange(nx)
    return float(np.max(np.abs(omega_hat[(-j) % nx] - np.conj(omega_hat))))


def zero_state(nu: float, nx: int = DEFAULT_NX, ny: int = DEFAULT_NY, Lx: float = DEFAULT_LX) -> FlowState:
    return FlowState(np.zeros((nx, ny), dtype=complex), nu, Lx)


# ---------------------------------------------------------------- per-mode linear operators


@dataclass(frozen=True)
class _ModeSystem:
    ks: np.ndarray  # (K,) nonnegative retained wavenumbers
    M: np.ndarray  # (K, n, n) clamped solve of (I + dt/2 L) w = b
    A: np.ndarray  # (K, n, n) full Crank-Nicolson propagator M (I - dt/2 L)
    P: np.ndarray  # (K, n, n) Dirichlet streamfunction map


@lru_cache(maxsize=8)
def _mode_system(nx: int, ny: int, Lx: float, nu: float, dt: float) -> _ModeSystem:
    ops = sc.build_chebyshev(ny)
    ks = 2 * np.pi / Lx * np.arange(kcut(nx) + 1)
    eye = np.eye(ny)
    Z = eye.copy()
    Z[0, 0] = Z[-1, -1] = 0  # wall rows carry no equation
    S = ops.d1[[0, -1]]
    Ms, As, Ps = [], [], []
    for k in ks:
        lu, rhs, om_b, _, infl, _ = le._cn_system(ny, float(nu), float(k), float(dt))
        P = sc.poisson_streamfunction(ops, eye, k).T
        wp = linalg.lu_solve(lu, Z.astype(complex))
        coef = np.linalg.solve(infl, -S @ (P @ wp))
        M = wp + om_b.T @ coef
        Ms.append(M)
        As.append(M @ rhs)
        Ps.append(P)
    return _ModeSystem(ks, np.array(Ms), np.array(As), np.array(Ps))


def _apply(mats: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.matmul(mats, v[..., None])[..., 0]


def streamfunction(state: FlowState) -> np.ndarray:
    """psi on the retained modes j = 0..kcut."""
    ops = sc.build_chebyshev(state.ny)
    ks = 2 * np.pi / state.Lx * np.arange(kcut(state.nx) + 1)
    return np.array([sc.poisson_streamfunction(ops, w, k) for w, k in zip(state.half(), ks)])


def velocity(state: FlowState, psi: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    ops = sc.build_chebyshev(state.ny)
    ks = 2 * np.pi / state.Lx * np.arange(kcut(state.nx) + 1)
    psi = streamfunction(state) if psi is None else psi
    return psi @ ops.d1.T, -1j * ks[:, None] * psi


# ---------------------------------------------------------------- dealiased products


@dataclass
class NonlinearFlux:
    f1_hat: np.ndarray  # u1 omega, full FFT order
    f2_hat: np.ndarray  # u2 omega
    cfl_rate: float  # max over the padded grid of |u1| k_max + |u2| / local dy


def _padded_ny(ny: int) -> int:
    return int(math.ceil(1.5 * (ny - 1))) + 1


@lru_cache(maxsize=8)
def _local_spacing(m: int) -> np.ndarray:
    y = sc.build_chebyshev(m).nodes
    d = np.abs(np.diff(y))
    return np.minimum(np.r_[d, d[-1]], np.r_[d[0], d])


def _to_physical(half: np.ndarray, nx: int, m: int) -> np.ndarray:
    pad = np.zeros((nx // 2 + 1, m), dtype=complex)
    pad[: half.shape[0]] = sc.resample(half, m)
    return np.fft.irfft(pad, n=nx, axis=0) * nx


def _to_modes(phys: np.ndarray, keep: int, ny: int) -> np.ndarray:
    c = np.fft.rfft(phys, axis=0)[:keep] / phys.shape[0]
    return sc.resample(c, ny)


def dealiased_products(state: FlowState, a_half: list[np.ndarray], pairs) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Products of retained-mode fields, dealiased in x (2/3) and y (1.5x grid)."""
    nx, ny = state.nx, state.ny
    m = _padded_ny(ny)
    phys = [_to_physical(a, nx, m) for a in a_half]
    keep = kcut(nx) + 1
    return [_to_modes(phys[i] * phys[j], keep, ny) for i, j in pairs], phys


def flux(state: FlowState, psi: np.ndarray | None = None) -> NonlinearFlux:
    u1, u2 = velocity(state, psi)
    w = state.half()
    (f1, f2), phys = dealiased_products(state, [u1, u2, w], [(0, 2), (1, 2)])
    kmax = 2 * np.pi / state.Lx * kcut(state.nx)
    rate = float(np.max(np.abs(phys[0])) * kmax + np.max(np.abs(phys[1]) / _local_spacing(phys[1].shape[1])))
    return NonlinearFlux(from_half(f1, state.nx), from_half(f2, state.nx), rate)


def transport_term(state: FlowState, fl: NonlinearFlux) -> np.ndarray:
    """-(i k f1 + d_y f2) on the retained modes."""
    ops = sc.build_chebyshev(state.ny)
    keep = kcut(state.nx) + 1
    ks = 2 * np.pi / state.Lx * np.arange(keep)
    return -(1j * ks[:, None] * fl.f1_hat[:keep] + fl.f2_hat[:keep] @ ops.d1.T)


def divergence_defect(state: FlowState) -> float:
    """max | (d_x f1 + d_y f2) - (u . grad omega) | relative to the transport size."""
    ops = sc.build_chebyshev(state.ny)
    keep = kcut(state.nx) + 1
    ks = 2 * np.pi / state.Lx * np.arange(keep)
    u1, u2 = velocity(state)
    w = state.half()
    fl = flux(state)
    div = -transport_term(state, fl)
    (a, b), _ = dealiased_products(state, [u1, u2, 1j * ks[:, None] * w, w @ ops.d1.T], [(0, 2), (1, 3)])
    adv = a + b
    scale = max(float(np.max(np.abs(adv))), 1e-300)
    return float(np.max(np.abs(div - adv)) / scale)


# ---------------------------------------------------------------- time stepping


def step_nonlinear(state: FlowState, dt: float, cfl_limit: float = CFL_LIMIT, _flux: NonlinearFlux | None = None) -> FlowState:
    """One semi-implicit step: Crank-Nicolson linear part, Adams-Bashforth 2 transport.

    The first STARTUP steps replace Crank-Nicolson by two backward-Euler half
    steps (same matrices) with the transport frozen at the old level.
    """
    sysm = _mode_system(state.nx, state.ny, float(state.Lx), float(state.nu), float(dt))
    fl = flux(state) if _flux is None else _flux
    if fl.cfl_rate * dt > cfl_limit:
        raise CFLViolation(f"advective CFL {fl.cfl_rate * dt:.3g} exceeds {cfl_limit}")
    N = transport_term(state, fl)
    w = state.half()
    if state.step_count < STARTUP or state.nl_prev is None:
        wh = _apply(sysm.M, w + 0.5 * dt * N)
        new = _apply(sysm.M, wh + 0.5 * dt * N)
    else:
        new = _apply(sysm.A, w) + dt * _apply(sysm.M, 1.5 * N - 0.5 * state.nl_prev)
    if not np.all(np.isfinite(new)):
        raise NonFiniteState(f"non-finite vorticity at t = {state.t + dt:.4g}", state)
    return FlowState(from_half(new, state.nx), state.nu, state.Lx, state.t + dt, N, state.step_count + 1)


# ---------------------------------------------------------------- norms and seed


def _mode_weights(K: int) -> np.ndarray:
    """Multiplicity of each retained nonnegative mode in the full sum."""
    c = np.full(K, 2.0)
    c[0] = 1.0
    return c


def h2_norm(state: FlowState) -> float:
    """x-mean H2 norm of the velocity: sum over |alpha| <= 2 of ||d^alpha u||^2, per unit box length."""
    ops = sc.build_chebyshev(state.ny)
    ks = 2 * np.pi / state.Lx * np.arange(kcut(state.nx) + 1)
    total = 0.0
    for u in velocity(state):
        du, ddu = u @ ops.d1.T, u @ ops.d2.T
        a, b, c = (np.abs(x) ** 2 @ ops.quad_weights for x in (u, du, ddu))
        k2 = ks**2
        per = a + (k2 * a + b) + (k2**2 * a + k2 * b + c)
        total += float(_mode_weights(len(ks)) @ per)
    return math.sqrt(max(total, 0.0))


def seed_profile(nx: int = DEFAULT_NX, ny: int = DEFAULT_NY, Lx: float = DEFAULT_LX, modes=SEED_MODES, width: float = 0.15) -> np.ndarray:
    """Retained-mode vorticity of two x-modes over a clamped boundary-layer profile (unnormalized)."""
    ops = sc.build_chebyshev(ny)
    y = ops.nodes
    psi = (1 - y**2) ** 2 * (1 + 3 * np.exp(-(1 - y) / width))
    half = np.zeros((kcut(nx) + 1, ny), dtype=complex)
    for i, k in enumerate(modes):
        j = k * Lx / (2 * np.pi)
        if abs(j - round(j)) > 1e-9 or not 0 < round(j) <= kcut(nx):
            raise ValueError(f"seed wavenumber {k} is not a retained mode of the box")
        amp = 1.0 if i == 0 else 0.5j
        half[int(round(j))] = amp * (ops.d2 @ psi - k * k * psi)
    return half


def seeded_state(nu: float, amplitude: float, nx=DEFAULT_NX, ny=DEFAULT_NY, Lx=DEFAULT_LX, profile=None) -> FlowState:
    """Seed scaled so that the x-mean H2 norm of u equals amplitude."""
    half = seed_profile(nx, ny, Lx) if profile is None else np.asarray(profile, dtype=complex)
    st = FlowState(from_half(half, nx), nu, Lx)
    h = h2_norm(st)
    scale = amplitude / h if h > 0 else 0.0
    return FlowState(st.omega_hat * scale, nu, Lx)


# ---------------------------------------------------------------- trajectories


@dataclass
class NonlinearTrajectory:
    nu: float
    Lx: float
    nx: int
    ny: int
    dt: float
    t: np.ndarray
    ks: np.ndarray  # retained nonnegative wavenumbers
    omega_sq: np.ndarray  # (S, K) ||omega_k||^2
    wall: np.ndarray  # ||(1-|y|)^(1/2) omega_k||
    u_sq: np.ndarray  # ||u_k||^2 = ||u1||^2 + ||u2||^2
    u_inf: np.ndarray  # max_y |u_k|
    f1_sq: np.ndarray
    f2_sq: np.ndarray
    hardy_sup: np.ndarray  # max_y |u2_k| / (1 - |y|)^(1/2)
    du2_sq: np.ndarray  # ||d_y u2_k||^2
    energy: np.ndarray  # (1/2) x-mean ||u||^2
    enstrophy: np.ndarray  # x-mean ||omega||^2
    lift: np.ndarray  # x-mean Re int u1 conj u2
    budget_defect: np.ndarray = field(default_factory=lambda: np.zeros(0))
    transport_work: np.ndarray = field(default_factory=lambda: np.zeros(0))  # relative work of the discrete transport term
    max_cfl: float = 0.0
    bc_error: float = 0.0
    reality_error: float = 0.0
    completed: bool = True
    reason: str = ""
    final: FlowState | None = field(default=None, repr=False)


def _mode_norms(state, psi, fl, fine):
    ops = sc.build_chebyshev(state.ny)
    w = ops.quad_weights
    ks = 2 * np.pi / state.Lx * np.arange(kcut(state.nx) + 1)
    om = state.half()
    u1, u2 = velocity(state, psi)
    keep = len(ks)
    omf = sc.resample(om, fine.n)
    u1f, u2f = sc.resample(u1, fine.n), sc.resample(u2, fine.n)
    wf = fine.quad_weights
    omega_sq = np.abs(omf) ** 2 @ wf
    u_sq = np.abs(u1f) ** 2 @ wf + np.abs(u2f) ** 2 @ wf
    lift = np.real((u1f * np.conj(u2f)) @ wf)
    wall = sc.weighted_l2(ops, om, sc.WeightProfile("one_minus_abs_y_sqrt"), 1.0)
    u_inf = np.sqrt(np.max(np.abs(u1) ** 2 + np.abs(u2) ** 2, axis=-1))
    y = ops.nodes[1:-1]
    hardy = np.max(np.abs(u2[:, 1:-1]) / np.sqrt(1 - np.abs(y)), axis=-1)
    du2_sq = np.abs(u2 @ ops.d1.T) ** 2 @ w
    f1_sq = np.abs(fl.f1_hat[:keep]) ** 2 @ w
    f2_sq = np.abs(fl.f2_hat[:keep]) ** 2 @ w
    return omega_sq, wall, u_sq, u_inf, f1_sq, f2_sq, hardy, du2_sq, lift


def integrate(state: FlowState, dt: float, T: float, budget: float | None = None, cfl_limit: float = CFL_LIMIT) -> NonlinearTrajectory:
    """Run from state to time T, recording the per-mode norms needed for E_k."""
    steps = int(round(T / dt))
    fine = sc.build_chebyshev(2 * state.ny)
    ops = sc.build_chebyshev(state.ny)
    cw = _mode_weights(kcut(state.nx) + 1)
    start = time.perf_counter()
    rec = []
    energies, diss, lift_mid, work = [], [], [], []
    t = [state.t]
    completed, reason, max_cfl = True, "", 0.0
    bc, real_err = 0.0, 0.0
    sysm_ks = 2 * np.pi / state.Lx * np.arange(kcut(state.nx) + 1)
    psi = streamfunction(state)
    fl = flux(state, psi)
    rec.append(_mode_norms(state, psi, fl, fine))
    for _ in range(steps):
        if budget is not None and time.perf_counter() - start > budget:
            completed, reason = False, "runtime budget exhausted"
            break
        max_cfl = max(max_cfl, fl.cfl_rate * dt)
        try:
            new = step_nonlinear(state, dt, cfl_limit, _flux=fl)
        except (CFLViolation, NonFiniteState) as exc:
            completed, reason = False, f"{type(exc).__name__}: {exc}"
            break
        psi_new = streamfunction(new)
        fl_new = flux(new, psi_new)
        # midpoint quantities for the energy budget, integrated exactly on 2n nodes
        pm = 0.5 * (psi + psi_new)
        u1m = sc.resample(pm @ ops.d1.T, fine.n)
        u2m = sc.resample(-1j * sysm_ks[:, None] * pm, fine.n)
        wm = sc.resample(0.5 * (state.half() + new.half()), fine.n)
        diss.append(new.nu * float(cw @ (np.abs(wm) ** 2 @ fine.quad_weights)))
        lift_mid.append(float(cw @ np.real((u1m * np.conj(u2m)) @ fine.quad_weights)))
        nab = new.nl_prev if state.step_count < STARTUP or state.nl_prev is None else 1.5 * new.nl_prev - 0.5 * state.nl_prev
        work.append(float(cw @ np.real((sc.resample(nab, fine.n) * np.conj(-sc.resample(pm, fine.n))) @ fine.quad_weights)))
        bc = max(bc, float(np.max(np.abs(le.wall_slopes(ops, psi_new)))), float(np.max(np.abs(psi_new[:, [0, -1]]))))
        real_err = max(real_err, reality_defect(new.omega_hat))
        state, psi, fl = new, psi_new, fl_new
        rec.append(_mode_norms(state, psi, fl, fine))
        t.append(state.t)
    cols = [np.array(c) for c in zip(*rec)]
    omega_sq, wall, u_sq, u_inf, f1_sq, f2_sq, hardy, du2_sq, lift = cols
    energy = 0.5 * u_sq @ cw
    tr = NonlinearTrajectory(
        state.nu, state.Lx, state.nx, state.ny, dt, np.array(t), sysm_ks,
        omega_sq, wall, u_sq, u_inf, f1_sq, f2_sq, hardy, du2_sq,
        energy, omega_sq @ cw, lift @ cw,
        max_cfl=max_cfl, bc_error=bc, reality_error=real_err,
        completed=completed, reason=reason, final=state,
    )
    if len(diss):
        lhs = np.diff(energy) / dt
        rhs = -np.array(diss) - np.array(lift_mid)
        scale = np.maximum.reduce([np.abs(lhs), np.array(diss), np.abs(lift_mid)])
        scale = np.where(scale > 0, scale, 1.0)
        live = np.arange(len(lhs)) >= STARTUP
        tr.budget_defect = (np.abs(lhs - rhs) / scale)[live]
        tr.transport_work = (np.abs(work) / scale)[live]
    return tr


# ---------------------------------------------------------------- the E_k functional


@dataclass
class ModeNorms:
    """The subset of the linear space-time ledger that E_k reads."""

    sup_omega_l2: float
    sup_wall_omega_l2: float
    sup_u_linf: float
    int_omega_l2sq: float
    int_u_l2sq: float


def band_of(k: float, nu: float) -> str:
    k = abs(k)
    if k < 10 * nu:
        return "low"
    return "intermediate" if k < 1 else "high"


def _e_formula(n: ModeNorms, nu: float, k: float, band: str) -> float:
    k = abs(k)
    w_inf, w_l2 = n.sup_omega_l2, math.sqrt(n.int_omega_l2sq)
    u_inf, u_l2 = n.sup_u_linf, math.sqrt(n.int_u_l2sq)
    if band == "low":
        return w_inf + nu**0.5 * w_l2 + u_inf + nu**0.5 * u_l2
    if band == "intermediate":
        return n.sup_wall_omega_l2 + (nu / k) ** 0.25 * w_inf + (nu * k) ** 0.25 * w_l2 + u_inf + k**0.5 * u_l2
    return n.sup_wall_omega_l2 + nu**0.25 * k**0.5 * w_l2 + k**0.5 * u_inf + k * u_l2


@dataclass
class EkLedger:
    nu: float
    Lx: float
    ks: np.ndarray  # nonnegative retained wavenumbers
    bands: list
    norms: list  # ModeNorms on the real-line transform scale
    profile: np.ndarray  # E_k on ks
    l1: float  # Delta k sum over all k (both signs)
    linf: float
    boundary: dict  # |k| = 10 nu or 1: both adjacent band formulas
    running_l1: np.ndarray  # L1_k aggregate of E over [0, t]

    def full_profile(self) -> tuple[np.ndarray, np.ndarray]:
        """E on the symmetric grid -K..K."""
        return np.r_[-self.ks[:0:-1], self.ks], np.r_[self.profile[:0:-1], self.profile]


def _cumtrapz(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t)[:, None], axis=0)
    return out


def accumulate_Ek(tr: NonlinearTrajectory) -> EkLedger:
    """Band-weighted E_k on the retained grid plus its L1_k and Linf_k aggregates."""
    nu, Lx = tr.nu, tr.Lx
    dk = 2 * np.pi / Lx
    s = Lx  # transform scale: omega^(k_j) = Lx c_j
    sup_w = s * np.sqrt(np.maximum.accumulate(tr.omega_sq, axis=0))
    sup_wall = s * np.maximum.accumulate(tr.wall, axis=0)
    sup_u = s * np.maximum.accumulate(tr.u_inf, axis=0)
    int_w = s**2 * _cumtrapz(tr.omega_sq, tr.t)
    int_u = s**2 * _cumtrapz(tr.u_sq, tr.t)
    bands = [band_of(k, nu) for k in tr.ks]
    cw = _mode_weights(len(tr.ks))
    running = np.zeros(len(tr.t))
    for i in range(len(tr.t)):
        e = [
            _e_formula(ModeNorms(sup_w[i, j], sup_wall[i, j], sup_u[i, j], int_w[i, j], int_u[i, j]), nu, k, b)
            for j, (k, b) in enumerate(zip(tr.ks, bands))
        ]
        running[i] = dk * float(cw @ np.array(e))
    norms = [ModeNorms(*(float(a[-1, j]) for a in (sup_w, sup_wall, sup_u, int_w, int_u))) for j in range(len(tr.ks))]
    profile = np.array([_e_formula(n, nu, k, b) for n, k, b in zip(norms, tr.ks, bands)], dtype=float)
    boundary = {}
    for j, k in enumerate(tr.ks):
        for edge, pair in ((10 * nu, ("low", "intermediate")), (1.0, ("intermediate", "high"))):
            if k > 0 and abs(k - edge) <= 1e-12 * max(1.0, edge):
                boundary[float(k)] = {b: float(_e_formula(norms[j], nu, k, b)) for b in pair}
    return EkLedger(nu, Lx, tr.ks, bands, norms, profile, float(dk * cw @ profile),
                    float(profile.max()) if len(profile) else 0.0, boundary, running)


# ---------------------------------------------------------------- threshold scan


@dataclass
class ThresholdScanRecord:
    nu: float
    gamma: float
    c_amp: float
    h2_initial: float
    verdict: str  # "stable", "escaped" or "inconclusive"
    peak_aggregate: float
    initial_aggregate: float
    l1_over_sqrt_nu: float
    energy_ratio: float  # final / initial u-energy
    runtime: float
    steps: int
    nx: int
    ny: int
    Lx: float
    dt: float
    reason: str = ""
    warnings: list = field(default_factory=list)
    trajectory: NonlinearTrajectory | None = field(default=None, repr=False)
    ledger: EkLedger | None = field(default=None, repr=False)


def horizon(nu: float) -> float:
    return 10.0 / le.lambda_nu(nu, 1.0)


def verdict_of(tr: NonlinearTrajectory, led: EkLedger, amplitude: float) -> tuple[str, str]:
    """Heuristic stopping rule; stability is the only direction the theory covers."""
    if amplitude == 0:
        return "stable", "zero data"
    if not tr.completed:
        if tr.reason.startswith("runtime"):
            return "inconclusive", tr.reason
        return "escaped", tr.reason
    a0 = led.running_l1[0]
    if np.any(led.running_l1 > ESCAPE_FACTOR * a0):
        return "escaped", f"E aggregate exceeded {ESCAPE_FACTOR:g}x its initial value"
    sup_w = np.sqrt(np.max(tr.omega_sq, axis=1))
    tail = sup_w[int((1 - MONOTONE_TAIL) * (len(sup_w) - 1)) :]
    if len(tail) > 2 and np.all(np.diff(tail) > 0):
        return "escaped", "sup_k ||omega_k|| grew monotonically over the last quarter"
    if not tr.energy[-1] < tr.energy[0]:
        return "escaped", "energy did not decay"
    return "stable", ""


def run_case(nu: float, amplitude: float, nx=DEFAULT_NX, ny=DEFAULT_NY, Lx=DEFAULT_LX, T=None, dt=None, profile=None, budget=None) -> ThresholdScanRecord:
    """One nonlinear run with the seed scaled to the given x-mean H2 amplitude."""
    notes = []
    if 2 * np.pi / Lx > 10 * nu:
        msg = f"Delta k = {2 * np.pi / Lx:.3g} > 10 nu = {10 * nu:.3g}: the low band holds only k = 0"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    T = horizon(nu) if T is None else T
    st = seeded_state(nu, amplitude, nx, ny, Lx, profile)
    if dt is None:
        # the linear default, shortened so the explicit transport starts at half the CFL limit
        rate = flux(st).cfl_rate
        dt = 0.02 / le.lambda_nu(nu, 1.0)
        if rate * dt > 0.5 * CFL_LIMIT:
            dt = T / math.ceil(T * rate / (0.5 * CFL_LIMIT))
    h2 = h2_norm(st)
    start = time.perf_counter()
    tr = integrate(st, dt, T, budget)
    led = accumulate_Ek(tr)
    verdict, reason = verdict_of(tr, led, amplitude)
    e0 = tr.energy[0]
    return ThresholdScanRecord(
        nu=nu, gamma=float("nan"), c_amp=float("nan"), h2_initial=h2, verdict=verdict,
        peak_aggregate=float(np.max(led.running_l1)), initial_aggregate=float(led.running_l1[0]),
        l1_over_sqrt_nu=led.l1 / math.sqrt(nu), energy_ratio=float(tr.energy[-1] / e0) if e0 > 0 else 0.0,
        runtime=time.perf_counter() - start, steps=len(tr.t) - 1, nx=nx, ny=ny, Lx=Lx, dt=dt,
        reason=reason, warnings=notes, trajectory=tr, ledger=led,
    )


def threshold_scan(nu_list, gamma_grid, c_amp: float, seed_profile=None, nx=DEFAULT_NX, ny=DEFAULT_NY, Lx=DEFAULT_LX, budget=None, keep_trajectories=False) -> list[ThresholdScanRecord]:
    """Runs with ||u_in||_{H2} = c_amp nu^gamma for every (nu, gamma)."""
    out = []
    for nu in nu_list:
        for g in gamma_grid:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                r = run_case(nu, c_amp * nu**g, nx, ny, Lx, profile=seed_profile, budget=budget)
            r.gamma, r.c_amp = float(g), float(c_amp)
            if not keep_trajectories:
                r.trajectory = None
            out.append(r)
    return out


def threshold_estimate(records: list[ThresholdScanRecord]) -> float | None:
    """Smallest gamma on the grid such that it and every larger gamma are stable for all nu."""
    gammas = sorted({r.gamma for r in records})
    ok = {g: all(r.verdict == "stable" for r in records if r.gamma == g) for g in gammas}
    best = None
    for g in reversed(gammas):
        if not ok[g]:
            break
        best = g
    return best


def crossover_amplitude(nu: float, lo: float, hi: float, iters: int = 6, **kw) -> dict:
    """Bisection in amplitude between a stable lo and a non-stable hi (geometric midpoints)."""
    v_lo = run_case(nu, lo, **kw).verdict
    v_hi = run_case(nu, hi, **kw).verdict
    history = [(lo, v_lo), (hi, v_hi)]
    if v_lo != "stable" or v_hi == "stable":
        return {"crossover": None, "history": history}
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        v = run_case(nu, mid, **kw).verdict
        history.append((mid, v))
        if v == "stable":
            lo = mid
        else:
            hi = mid
    return {"crossover": math.sqrt(lo * hi), "history": history}


# ---------------------------------------------------------------- nine-region bilinear bound

REGIONS = tuple(f"I{i}{j}" for j in (1, 2, 3) for i in (1, 2, 3))  # I{i}{j}: l in I_i, k in I_j


def region_index(x: np.ndarray, nu: float) -> np.ndarray:
    """1 for |x| <= 10 nu, 2 for 10 nu < |x| <= 1, 3 beyond."""
    a = np.abs(x)
    return np.where(a <= 10 * nu, 1, np.where(a <= 1, 2, 3))


def region_kernel(l: np.ndarray, k: np.ndarray, nu: float) -> np.ndarray:
    """Per-region bound K(l, k) for min{nu^(-1/6)|k+l|^(2/3), nu^(-1/2)} ||u1_l omega_k|| / (E_l E_k).

    Each branch is the weight replacement times the ingredient product used in
    the case analysis (Cases I and II weight nu^(-1/6)|k+l|^(2/3), Case III
    nu^(-1/4)|k+l|^(1/2)).
    """
    l, k = np.broadcast_arrays(np.asarray(l, float), np.asarray(k, float))
    al, ak, s = np.abs(l), np.abs(k), np.abs(k + l)
    il, ik = region_index(l, nu), region_index(k, nu)
    out = np.zeros(l.shape)
    w23 = nu ** (-1 / 6) * s ** (2 / 3)
    with np.errstate(divide="ignore", invalid="ignore"):
        cases = {
            (1, 1): w23 * nu**-0.5,
            (2, 1): w23 * nu ** (-1 / 8) * al ** (-3 / 8),
            (3, 1): w23 * nu ** (-1 / 8) * al ** (-3 / 4),
            (1, 2): w23 * nu**-0.25 * ak**-0.25,
            (2, 2): nu ** (-5 / 12) * ak ** (5 / 12) + nu ** (-23 / 48) * al ** (23 / 48),
            # geometric mean (1/3, 2/3) of the two ingredient pairs gives |k|^(1/12)
            (3, 2): nu ** (-5 / 12) * ak ** (5 / 12) + nu**-0.5 * ak ** (1 / 12) * al**0.0,
            (1, 3): nu**-0.5 * s**0.5 * ak**-0.5,
            (2, 3): nu**-0.5 * s**0.5 * ak**-0.5,
            (3, 3): nu**-0.5 * s**0.5 * (al * ak) ** -0.5,
        }
    for (i, j), v in cases.items():
        m = (il == i) & (ik == j)
        out[m] = v[m]
    return out


def region_constant(nu: float) -> float:
    """sup of nu^(1/2) K over all regions, from the scalar kernel inequalities."""
    return max(20 ** (2 / 3) * nu**0.5, 2 * nu ** (5 / 24), 2 * nu ** (1 / 12), 2.0, math.sqrt(2))


@dataclass
class RegionReport:
    nu: float
    total: float
    shares: dict  # region -> fraction of the total
    contributions: dict  # region -> absolute contribution
    reference: float  # nu^(-1/2) ||E||_{L1}^2 / (2 pi)
    ratio: float  # total / reference
    c_check: float
    within: bool
    measured: float | None = None
    dominates: bool | None = None


def bilinear_region_check(ks: np.ndarray, E: np.ndarray, nu: float, measured: float | None = None) -> RegionReport:
    """Assemble (1/2pi) sum_{i,j} iint_{I_ij} K E_l E_k dl dk on a uniform k-grid.

    The 1/(2 pi) is the convolution normalization of the real-line transform,
    (u1 omega)^(k) = (1/2pi) int u1^(l) omega^(k - l) dl.
    """
    ks, E = np.asarray(ks, float), np.asarray(E, float)
    if np.any(E < 0):
        raise ValueError("E profile must be nonnegative")
    dk = float(ks[1] - ks[0]) if len(ks) > 1 else 1.0
    L, K = np.meshgrid(ks, ks, indexing="ij")
    kern = region_kernel(L, K, nu)
    prod = np.outer(E, E)
    integrand = np.where(prod > 0, kern * prod, 0.0) * dk * dk / (2 * np.pi)
    il, ik = region_index(L, nu), region_index(K, nu)
    contrib = {f"I{i}{j}": float(integrand[(il == i) & (ik == j)].sum()) for j in (1, 2, 3) for i in (1, 2, 3)}
    total = float(sum(contrib.values()))
    l1 = dk * float(E.sum())
    ref = nu**-0.5 * l1**2 / (2 * np.pi)
    ratio = total / ref if ref > 0 else 0.0
    c = region_constant(nu)
    rep = RegionReport(nu, total, {r: (v / total if total > 0 else 0.0) for r, v in contrib.items()}, contrib, ref, ratio, c, ratio <= c * (1 + 1e-12))
    if measured is not None:
        rep.measured = float(measured)
        rep.dominates = bool(measured <= total)
    return rep


def measured_flux_norms(tr: NonlinearTrajectory) -> dict:
    """||min{nu^(-1/6)|k|^(2/3), nu^(-1/2)} f1||_{L1_k L2_t L2_y} and ||f2||_{L1_k L2 L2} from a run."""
    nu, Lx = tr.nu, tr.Lx
    dk = 2 * np.pi / Lx
    cw = _mode_weights(len(tr.ks))
    w = np.minimum(nu ** (-1 / 6) * tr.ks ** (2 / 3), nu**-0.5)
    f1 = Lx * np.sqrt(np.trapezoid(tr.f1_sq, tr.t, axis=0))
    f2 = Lx * np.sqrt(np.trapezoid(tr.f2_sq, tr.t, axis=0))
    return {"f1_weighted": float(dk * cw @ (w * f1)), "f2": float(dk * cw @ f2)}


def hardy_ratio(tr: NonlinearTrajectory) -> float:
    """max_k ||u2_k / (1-|y|)^(1/2)||_{L2_t Linf_y} / ||d_y u2_k||_{L2 L2} (unit constant)."""
    num = np.sqrt(np.trapezoid(tr.hardy_sup**2, tr.t, axis=0))
    den = np.sqrt(np.trapezoid(tr.du2_sq, tr.t, axis=0))
    m = den > 1e-300
    return float(np.max(num[m] / den[m])) if np.any(m) else 0.0


def f2_bound(led: EkLedger) -> float:
    """Hardy chain: ||f2||_{L1 L2 L2} <= max(1, 10 nu^(1/2)) ||E||_{L1}^2 / (2 pi)."""
    return max(1.0, 10 * led.nu**0.5) * led.l1**2 / (2 * np.pi)


# ---------------------------------------------------------------- scalar kernel inequalities


@dataclass(frozen=True)
class KernelInequality:
    region: str
    statement: str
    constant: float  # as printed (1 for "<=", the chain's constant for "<~")
    literal: bool  # True when printed with "<=" rather than "<~"


def _kernel_lhs_rhs(region: str, l, k, nu):
    al, ak, s = np.abs(l), np.abs(k), np.abs(k + l)
    if region == "I11":
        return s ** (2 / 3), nu ** (2 / 3) * np.ones_like(s)
    if region == "I21":
        return s ** (2 / 3) / al ** (3 / 8), np.ones_like(s)
    if region == "I31":
        return s ** (2 / 3) / al ** (3 / 4), np.ones_like(s)
    if region == "I12":
        return s ** (2 / 3) / ak**0.25, np.ones_like(s)
    if region == "I22":
        a = np.maximum(nu ** (-5 / 12) * ak ** (5 / 12), nu ** (-23 / 48) * al ** (23 / 48))
        return a, nu**-0.5 * np.ones_like(s)
    if region == "I32":
        return nu ** (-5 / 12) * ak ** (5 / 12) + nu**-0.5 * ak ** (1 / 12), 2 * nu**-0.5 * np.ones_like(s)
    if region in ("I13", "I23"):
        return s**0.5 / ak**0.5, np.ones_like(s)
    if region == "I33":
        return s, al * ak
    raise KeyError(region)


KERNEL_INEQUALITIES = (
    KernelInequality("I11", "|k+l|^(2/3) <= nu^(2/3)", 1.0, True),
    KernelInequality("I21", "|k+l|^(2/3) / |l|^(3/8) <~ 1", 2.0, False),
    KernelInequality("I31", "|k+l|^(2/3) / |l|^(3/4) <~ 1", 2.0, False),
    KernelInequality("I12", "|k+l|^(2/3) / |k|^(1/4) <~ 1", 2.0, False),
    KernelInequality("I22", "nu^(-5/12)|k|^(5/12), nu^(-23/48)|l|^(23/48) <= nu^(-1/2)", 1.0, True),
    KernelInequality("I32", "nu^(-5/12)|k|^(5/12) + nu^(-1/2)|k|^(1/12) <~ nu^(-1/2)", 1.0, False),
    KernelInequality("I13", "|k+l|^(1/2) |k|^(-1/2) <= 2", 2.0, True),
    KernelInequality("I23", "|k+l|^(1/2) |k|^(-1/2) <= 2", 2.0, True),
    KernelInequality("I33", "|k+l| <~ |l||k|", 2.0, False),
)

# I11 holds only with (20)^(2/3): |k+l| reaches 20 nu there
CORRECTED_CONSTANTS = {"I11": 20 ** (2 / 3)}


def sample_region(region: str, nu: float, m: int, rng: np.random.Generator, kmax: float = 1e3) -> tuple[np.ndarray, np.ndarray]:
    """m points (l, k) in I_{i,j}: the four corners first, then log-uniform |x| with random signs."""
    edges = {1: (0.0, 10 * nu), 2: (np.nextafter(10 * nu, np.inf), 1.0), 3: (np.nextafter(1.0, np.inf), kmax)}
    lower = {1: 1e-6 * nu, 2: 10 * nu, 3: 1.0}

    def draw(i):
        a, b = lower[i], edges[i][1]
        x = np.exp(rng.uniform(np.log(a), np.log(b), m)) * rng.choice([-1.0, 1.0], m)
        return np.clip(np.abs(x), *edges[i]) * np.sign(x)

    i, j = int(region[1]), int(region[2])
    l, k = draw(i), draw(j)
    for c, (a, b) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        l[c], k[c] = edges[i][a], edges[j][b]
    return l, k


@dataclass
class KernelSampleReport:
    region: str
    statement: str
    samples: int
    violations: int  # against the constant as printed
    max_ratio: float  # max lhs / rhs
    constant: float
    corrected_violations: int


def check_kernel_inequalities(nus=(1e-2, 3e-3, 1e-3, 1e-4), m: int = 20000, seed: int = 0) -> list[KernelSampleReport]:
    rng = np.random.default_rng(seed)
    out = []
    for ineq in KERNEL_INEQUALITIES:
        worst, viol, cviol, n = 0.0, 0, 0, 0
        for nu in nus:
            l, k = sample_region(ineq.region, nu, m, rng)
            lhs, rhs = _kernel_lhs_rhs(ineq.region, l, k, nu)
            r = lhs / rhs
            worst = max(worst, float(np.max(r)))
            viol += int(np.sum(r > ineq.constant * (1 + 1e-12)))
            cviol += int(np.sum(r > CORRECTED_CONSTANTS.get(ineq.region, ineq.constant) * (1 + 1e-12)))
            n += m
        out.append(KernelSampleReport(ineq.region, ineq.statement, n, viol, worst, ineq.constant, cviol))
    return out
