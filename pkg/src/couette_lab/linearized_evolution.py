"""
Per-mode linearized vorticity evolution around Couette flow,

    d_t omega - nu (d^2 - k^2) omega + i k y omega = -i k f1 - d_y f2,
    omega = (d^2 - k^2) psi,  psi(+-1) = psi'(+-1) = 0,

stepped with Crank-Nicolson on the whole linear operator after a Rannacher
start (the first steps are split into backward-Euler half steps, which share
the Crank-Nicolson matrix and damp the stiff wall modes that Crank-Nicolson
alone would carry along with amplification close to -1).  The vorticity has no
boundary condition of its own; the two clamped slopes are enforced through an
influence matrix built from the responses to unit wall vorticity.

Initial vorticity is made compatible with the clamped streamfunction by
removing a combination of e^{+ky}, e^{-ky} (1, y when k = 0), which is the
same as projecting onto the orthogonal complement of those two functions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import linalg

from . import os_resolvent as osr
from . import spectral_core as sc

Sampler = Callable[[float], np.ndarray]

SINE_CONSTANT = 3 / np.pi**3  # |int psi' conj psi| <= (3/pi^3) ||psi''||^2
WIRTINGER = 4 / np.pi**2
LOW_ALT_FACTOR = np.pi**3 / 3  # the sharp low-band edge pi^3 nu / 3, about 10 nu


@dataclass(frozen=True)
class FrequencyBand:
    kind: str  # "low", "intermediate" or "high"
    thresholds: tuple
    low_alt: float


def classify(k: float, nu: float) -> FrequencyBand:
    """Low for |k| < 10 nu, intermediate for 10 nu <= |k| < 1, high otherwise."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    return FrequencyBand(osr.frequency_band(k, nu), (10 * nu, 1.0), LOW_ALT_FACTOR * nu)


def lambda_nu(nu: float, k: float) -> float:
    return max(nu, (nu * k * k) ** (1 / 3))


def compatibility_basis(ops: sc.SpectralOperatorSet, k: float) -> np.ndarray:
    y = ops.nodes
    if k == 0:
        return np.array([np.ones_like(y), y])
    return np.array([np.exp(k * y), np.exp(-k * y)])


def wall_slopes(ops: sc.SpectralOperatorSet, psi: np.ndarray) -> np.ndarray:
    """(psi'(1), psi'(-1)), batched over leading axes."""
    d = np.asarray(psi) @ ops.d1.T
    return np.stack([d[..., 0], d[..., -1]], axis=-1)


def project_compatible(ops: sc.SpectralOperatorSet, k: float, omega: np.ndarray) -> np.ndarray:
    """omega minus the span{e^{+-ky}} part that makes the Dirichlet streamfunction slopes nonzero."""
    basis = compatibility_basis(ops, k)
    s_basis = wall_slopes(ops, sc.poisson_streamfunction(ops, basis.astype(complex), k))
    s = wall_slopes(ops, sc.poisson_streamfunction(ops, np.asarray(omega, dtype=complex), k))
    coef = np.linalg.solve(s_basis.T, s)
    return omega - coef @ basis


@dataclass
class EvolutionConfig:
    nu: float
    k: float
    omega_in: np.ndarray
    dt: float | None = None
    T: float | None = None
    f1: Sampler | None = None
    f2: Sampler | None = None
    source: Sampler | None = None  # extra right-hand side g(t) on the grid
    slopes: Callable[[float], np.ndarray] | None = None  # prescribed (psi'(1), psi'(-1)); None means clamped
    project: bool = True
    enforce_contract: bool = True
    startup: int = 2  # steps taken as two backward-Euler half steps each

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        lam = lambda_nu(self.nu, self.k)
        self.omega_in = np.asarray(self.omega_in, dtype=complex)
        if self.dt is None:
            self.dt = 0.02 / lam
        if self.T is None:
            self.T = 10.0 / lam
        if self.enforce_contract:
            if self.dt > 0.05 / lam * (1 + 1e-12):
                raise ValueError(f"dt = {self.dt:.3g} exceeds 0.05 / lambda_nu = {0.05 / lam:.3g}")
            if self.T < 8.0 / lam * (1 - 1e-12):
                raise ValueError(f"T = {self.T:.3g} is shorter than 8 / lambda_nu = {8 / lam:.3g}")
        if not (self.dt > 0 and self.T > 0):
            raise ValueError("dt and T must be positive")

    @property
    def n(self) -> int:
        return self.omega_in.shape[-1]

    @property
    def lambda_nu(self) -> float:
        return lambda_nu(self.nu, self.k)

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass
class Trajectory:
    t: np.ndarray
    omega: np.ndarray  # (steps + 1, n)
    psi: np.ndarray
    g: np.ndarray  # right-hand side samples, same shape
    omega_in: np.ndarray  # after projection
    removed: float  # L2 norm taken out by the projection


@dataclass
class SpaceTimeLedger:
    sup_omega_l2: float
    sup_wall_omega_l2: float  # (1 - |y|)^(1/2) weighted
    sup_u_linf: float
    sup_u_l2: float
    int_omega_l2sq: float
    int_u_l2sq: float
    int_rho_omega_l2sq: float  # rho_k^(1/2) weighted, nan when k = 0
    int_f1_l2sq: float
    int_f2_l2sq: float
    u_l2: np.ndarray = field(repr=False)
    omega_l2: np.ndarray = field(repr=False)
    energy_residual: float = 0.0  # max relative per-step defect of the u-energy identity
    slope_error: float = 0.0
    sine_ratio: float = 0.0  # max |int psi' conj psi| / ((3/pi^3) ||psi''||^2)
    wirtinger_ratio: float = 0.0  # max ||F1||^2 / ((4/pi^2) ||F1'||^2), F1 = d_t psi + i k y psi
    max_energy_increase: float = 0.0  # max over steps of (||u_{n+1}||^2 - ||u_n||^2) / ||u_n||^2


@lru_cache(maxsize=64)
def _cn_system(n: int, nu: float, k: float, dt: float):
    ops = sc.build_chebyshev(n)
    op = -nu * (ops.d2 - k * k * np.eye(n)) + 1j * k * np.diag(ops.nodes)
    lhs = np.eye(n) + 0.5 * dt * op
    rhs = np.eye(n) - 0.5 * dt * op
    lhs[0], lhs[-1] = 0, 0
    lhs[0, 0] = lhs[-1, -1] = 1
    lu = linalg.lu_factor(lhs)
    e = np.zeros((n, 2), dtype=complex)
    e[0, 0] = e[-1, 1] = 1
    om_b = linalg.lu_solve(lu, e).T  # unit wall vorticity at y = 1 and y = -1
    ps_b = sc.poisson_streamfunction(ops, om_b, k)
    infl = wall_slopes(ops, ps_b).T  # infl[:, j] = slopes of response j
    return lu, rhs, om_b, ps_b, infl, op


def _rhs(cfg: EvolutionConfig, ops, t: float) -> np.ndarray:
    g = np.zeros(ops.n, dtype=complex)
    if cfg.f1 is not None:
        g += -1j * cfg.k * np.asarray(cfg.f1(t))
    if cfg.f2 is not None:
        g += -(ops.d1 @ np.asarray(cfg.f2(t)))
    if cfg.source is not None:
        g += np.asarray(cfg.source(t))
    return g


def _sample(f: Sampler | None, t: np.ndarray, n: int) -> np.ndarray:
    if f is None:
        return np.zeros((len(t), n), dtype=complex)
    return np.array([np.asarray(f(s), dtype=complex) for s in t])


def _trapz(v: np.ndarray, t: np.ndarray) -> float:
    return float(np.trapezoid(v, t))


def evolve(cfg: EvolutionConfig) -> tuple[Trajectory, SpaceTimeLedger]:
    ops = sc.build_chebyshev(cfg.n)
    nu, k, dt = cfg.nu, cfg.k, float(cfg.dt)
    lu, rhs_mat, om_b, ps_b, infl, _ = _cn_system(cfg.n, float(nu), float(k), dt)
    w0 = cfg.omega_in
    if cfg.project and cfg.slopes is None:
        w0 = project_compatible(ops, k, w0)
    removed = ops.l2(cfg.omega_in - w0)
    steps = cfg.steps
    t = dt * np.arange(steps + 1)
    om = np.zeros((steps + 1, cfg.n), dtype=complex)
    ps = np.zeros_like(om)
    g = np.array([_rhs(cfg, ops, s) for s in t])
    om[0] = w0
    ps[0] = sc.poisson_streamfunction(ops, w0, k)

    def solve(b, s):
        b[0] = b[-1] = 0
        wp = linalg.lu_solve(lu, b)
        pp = sc.poisson_streamfunction(ops, wp, k)
        target = np.zeros(2) if cfg.slopes is None else np.asarray(cfg.slopes(s))
        coef = np.linalg.solve(infl, target - wall_slopes(ops, pp))
        return wp + coef @ om_b, pp + coef @ ps_b

    for j in range(steps):
        if j < cfg.startup:
            # (I + dt/2 L) w_{m+1/2} = w_m + dt/2 g, twice
            half = t[j] + 0.5 * dt
            wh, _ = solve(om[j] + 0.5 * dt * _rhs(cfg, ops, half), half)
            om[j + 1], ps[j + 1] = solve(wh + 0.5 * dt * g[j + 1], t[j + 1])
        else:
            om[j + 1], ps[j + 1] = solve(rhs_mat @ om[j] + 0.5 * dt * (g[j] + g[j + 1]), t[j + 1])
    traj = Trajectory(t, om, ps, g, w0, removed)
    return traj, _ledger(cfg, ops, traj)


def _u_norms(ops, psi, k):
    dpsi = psi @ ops.d1.T
    w = ops.quad_weights
    l2sq = np.abs(dpsi) ** 2 @ w + k * k * (np.abs(psi) ** 2 @ w)
    linf = np.sqrt(np.max(np.abs(dpsi) ** 2 + k * k * np.abs(psi) ** 2, axis=-1))
    return l2sq, linf, dpsi


def _ledger(cfg, ops, tr: Trajectory) -> SpaceTimeLedger:
    k, nu, dt = cfg.k, cfg.nu, float(cfg.dt)
    w = ops.quad_weights
    t, om, ps = tr.t, tr.omega, tr.psi
    om_sq = np.abs(om) ** 2 @ w
    u_sq, u_inf, dpsi = _u_norms(ops, ps, k)
    wall = sc.weighted_l2(ops, om, sc.WeightProfile("one_minus_abs_y_sqrt"), 1.0)
    if k != 0:
        delta = min(1.0, osr.critical_width(nu, k))
        rho_sq = sc.weighted_l2(ops, om, sc.WeightProfile("rho_k", delta), 0.5) ** 2
        int_rho = _trapz(rho_sq, t)
    else:
        int_rho = float("nan")
    f1 = _sample(cfg.f1, t, cfg.n)
    f2 = _sample(cfg.f2, t, cfg.n)

    # discrete u-energy identity at the midpoints; products of degree-(n-1)
    # polynomials are integrated exactly on 2n nodes, so the defect measures the
    # collocation error only
    fine = sc.build_chebyshev(2 * cfg.n)
    wf = fine.quad_weights
    omf, psf, gf = (sc.resample(a, fine.n) for a in (om, ps, tr.g))
    uf = np.abs(psf @ fine.d1.T) ** 2 @ wf + k * k * (np.abs(psf) ** 2 @ wf)
    wm = 0.5 * (omf[1:] + omf[:-1])
    pm_f = 0.5 * (psf[1:] + psf[:-1])
    gm = 0.5 * (gf[1:] + gf[:-1])
    dpm = pm_f @ fine.d1.T
    lhs = (uf[1:] - uf[:-1]) / dt
    diss = -2 * nu * (np.abs(wm) ** 2 @ wf)
    adv = -2 * np.real(1j * k * ((dpm * np.conj(pm_f)) @ wf))
    force = 2 * np.real((gm * np.conj(-pm_f)) @ wf)
    pm = 0.5 * (ps[1:] + ps[:-1])
    scale = np.maximum.reduce([np.abs(lhs), np.abs(diss), np.abs(adv), np.abs(force)])
    scale = np.where(scale > 0, scale, 1.0)
    clamped = cfg.slopes is None
    # the backward-Euler start satisfies a different (more dissipative) identity
    # and steps where ||u||^2 has decayed to the roundoff floor carry no information
    live = np.arange(len(lhs)) >= cfg.startup
    live &= np.minimum(uf[1:], uf[:-1]) >= 1e-12 * np.max(uf) if len(uf) else live
    defect = (np.abs(lhs - diss - adv - force) / scale)[live]
    en_res = float(np.max(defect)) if clamped and defect.size else 0.0
    slope = float(np.max(np.abs(wall_slopes(ops, ps[1:])))) if clamped and len(lhs) else 0.0

    # sine-basis and Wirtinger checks on the sampled states
    d2psi = ps @ ops.d2.T
    num = np.abs((dpsi * np.conj(ps)) @ w)
    den = SINE_CONSTANT * (np.abs(d2psi) ** 2 @ w)
    mask = den > 1e-300
    sine = float(np.max(num[mask] / den[mask])) if np.any(mask) else 0.0
    F1 = (ps[1:] - ps[:-1]) / dt + 1j * k * ops.nodes * pm
    dF1 = F1 @ ops.d1.T
    a, b = np.abs(F1) ** 2 @ w, WIRTINGER * (np.abs(dF1) ** 2 @ w)
    mask = b > 1e-300
    wirt = float(np.max(a[mask] / b[mask])) if np.any(mask) else 0.0
    grow = np.diff(u_sq) / np.where(u_sq[:-1] > 0, u_sq[:-1], 1.0)

    return SpaceTimeLedger(
        sup_omega_l2=float(np.sqrt(np.max(om_sq))),
        sup_wall_omega_l2=float(np.max(wall)),
        sup_u_linf=float(np.max(u_inf)),
        sup_u_l2=float(np.sqrt(np.max(u_sq))),
        int_omega_l2sq=_trapz(om_sq, t),
        int_u_l2sq=_trapz(u_sq, t),
        int_rho_omega_l2sq=int_rho,
        int_f1_l2sq=_trapz(np.abs(f1) ** 2 @ w, t),
        int_f2_l2sq=_trapz(np.abs(f2) ** 2 @ w, t),
        u_l2=np.sqrt(u_sq),
        omega_l2=np.sqrt(om_sq),
        energy_residual=en_res,
        slope_error=slope,
        sine_ratio=sine,
        wirtinger_ratio=wirt,
        max_energy_increase=float(np.max(grow)) if len(grow) else 0.0,
    )


# ---------------------------------------------------------------- initial data and forcing


def initial_family(ops: sc.SpectralOperatorSet, kind: str, j: int = 1, center: float = 0.0, width: float = 0.2) -> np.ndarray:
    """Sine modes, tanh shear layers and wall-localized bumps."""
    y = ops.nodes
    if kind == "sine":
        return sc.sine_mode(j, y).astype(complex)
    if kind == "shear":
        return (1 / np.cosh((y - center) / width) ** 2).astype(complex)
    if kind == "wall":
        return np.exp(-((1 - y) / width) ** 2) + 0.5 * np.exp(-((1 + y) / width) ** 2) + 0j
    raise ValueError(f"unknown initial family {kind!r}")


def forcing_pair(ops: sc.SpectralOperatorSet, nu: float, k: float, kind: str) -> tuple[Sampler | None, Sampler | None]:
    """Separable forcings profile(y) * e^{-lambda_nu t} cos t built from the resolvent ensemble."""
    if kind == "none":
        return None, None
    lam = lambda_nu(nu, k)
    ens = {f.forcing_id: f.F for f in osr.forcing_ensemble(ops, nu, k if k else 10 * nu, split=False)}
    env = lambda t: np.exp(-lam * t) * np.cos(t)  # noqa: E731
    if kind == "f1":
        prof = ens["bump0"]
        return (lambda t: env(t) * prof), None
    if kind == "f2":
        prof = ens["sine1"]
        return None, (lambda t: env(t) * prof)
    if kind == "both":
        p1, p2 = ens["rand0"], ens["bump+0.7"]
        return (lambda t: env(t) * p1), (lambda t: env(t) * p2)
    raise ValueError(f"unknown forcing kind {kind!r}")


# ---------------------------------------------------------------- band estimates


@dataclass
class BandReport:
    band: str
    lhs: float
    rhs: float
    ratio: float
    terms: dict
    rhs_terms: dict
    unit_literal: float | None = None  # low band, unforced: full left side / ||omega_in||^2
    unit_energy: float | None = None  # low band, unforced: (||u||^2_LinfL2 + nu ||omega||^2_L2L2) / ||omega_in||^2


def verify_band_estimate(cfg: EvolutionConfig, band: str | None = None, run=None) -> BandReport:
    """Left side of the band's space-time inequality over the right side with unit constants."""
    nu, k = cfg.nu, abs(cfg.k)
    band = band or classify(k, nu).kind
    traj, led = run or evolve(cfg)
    ops = sc.build_chebyshev(cfg.n)
    w_in = ops.l2(traj.omega_in) ** 2
    dw_in = ops.l2(ops.d1 @ traj.omega_in) ** 2
    F1, F2 = led.int_f1_l2sq, led.int_f2_l2sq
    if band == "low":
        terms = {
            "omega_LinfL2": led.sup_omega_l2**2,
            "u_L2L2": nu * led.int_u_l2sq,
            "u_LinfLinf": led.sup_u_linf**2,
            "omega_L2L2": nu * led.int_omega_l2sq,
        }
        rhs = {"f1": nu ** (-1 / 3) * k ** (4 / 3) * F1, "f2": F2 / nu, "omega_in": w_in}
    elif band == "intermediate":
        terms = {
            "wall_omega_LinfL2": led.sup_wall_omega_l2**2,
            "omega_LinfL2": nu**0.5 * k**-0.5 * led.sup_omega_l2**2,
            "u_LinfLinf": led.sup_u_linf**2,
            "u_L2L2": k * led.int_u_l2sq,
            "omega_L2L2": (nu * k) ** 0.5 * led.int_omega_l2sq,
        }
        rhs = {
            "omega_in": w_in,
            "domega_in": nu ** (2 / 3) * k ** (-2 / 3) * dw_in,
            "f1": nu ** (-1 / 3) * k ** (4 / 3) * F1,
            "f2": F2 / nu,
        }
    elif band == "high":
        terms = {
            "wall_omega_LinfL2": led.sup_wall_omega_l2**2,
            "omega_L2L2": (nu * k * k) ** 0.5 * led.int_omega_l2sq,
            "u_L2L2": k * k * led.int_u_l2sq,
            "u_LinfLinf": k * led.sup_u_linf**2,
        }
        rhs = {
            "f1": min(nu ** (-1 / 3) * k ** (4 / 3), 1 / nu) * F1,
            "f2": F2 / nu,
            "omega_in": w_in,
            "domega_in": dw_in / k**2,
        }
    else:
        raise ValueError(f"unknown band {band!r}")
    lhs, r = sum(terms.values()), sum(rhs.values())
    rep = BandReport(band, float(lhs), float(r), float(lhs / r) if r > 0 else float("nan"), terms, rhs)
    if band == "low" and F1 == 0 and F2 == 0 and w_in > 0:
        rep.unit_literal = float(lhs / w_in)
        rep.unit_energy = float((led.sup_u_l2**2 + nu * led.int_omega_l2sq) / w_in)
    return rep


def e_k(ledger: SpaceTimeLedger, nu: float, k: float) -> float:
    """The band-weighted space-time functional (unsquared norms)."""
    k = abs(k)
    band = osr.frequency_band(k, nu)
    w_inf, w_l2 = ledger.sup_omega_l2, np.sqrt(ledger.int_omega_l2sq)
    u_inf, u_l2 = ledger.sup_u_linf, np.sqrt(ledger.int_u_l2sq)
    wall = ledger.sup_wall_omega_l2
    if band == "low":
        return float(w_inf + nu**0.5 * w_l2 + u_inf + nu**0.5 * u_l2)
    if band == "intermediate":
        return float(wall + (nu / k) ** 0.25 * w_inf + (nu * k) ** 0.25 * w_l2 + u_inf + k**0.5 * u_l2)
    return float(wall + nu**0.25 * k**0.5 * w_l2 + k**0.5 * u_inf + k * u_l2)


# ---------------------------------------------------------------- decay rates


@dataclass
class DecayFit:
    rate: float
    lambda_nu: float
    epsilon_eff: float
    r2: float
    window: tuple
    flagged: bool


def _loglinear(t, v):
    A = np.vstack([np.ones_like(t), t]).T
    y = np.log(v)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ coef
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1 - np.sum((y - fit) ** 2) / ss if ss > 0 else 1.0
    return -coef[1], r2


def fit_decay(cfg: EvolutionConfig, run=None) -> DecayFit:
    """Exponential rate of ||u(t)|| on [2/lambda_nu, T]; the window start moves to 4/lambda_nu once
    if the log-linear fit has R^2 < 0.98."""
    if cfg.f1 is not None or cfg.f2 is not None or cfg.source is not None:
        raise ValueError("decay fits need an unforced configuration")
    lam = cfg.lambda_nu
    traj, led = run or evolve(cfg)
    t, u = traj.t, led.u_l2
    r2, rate, window = 0.0, 0.0, (0.0, 0.0)
    for start in (2.0 / lam, 4.0 / lam):
        sel = (t >= start) & (u > 1e-290)
        if sel.sum() < 3:
            continue
        rate, r2 = _loglinear(t[sel], u[sel])
        window = (float(start), float(t[sel][-1]))
        if r2 >= 0.98:
            break
    flagged = r2 < 0.98
    return DecayFit(float(rate), lam, float(rate / lam), float(r2), window, flagged)


def dissipation_sweep(nus=(1e-2, 3e-3, 1e-3), ks=(0.1, 0.5, 1.0, 2.0), n=129, family="shear") -> list[dict]:
    """Fitted decay rates over (nu, k) with |k| >= 10 nu."""
    out = []
    ops = sc.build_chebyshev(n)
    w_in = initial_family(ops, family, center=0.2)
    for nu in nus:
        for k in ks:
            if abs(k) < 10 * nu:
                continue
            fit = fit_decay(EvolutionConfig(nu, k, w_in))
            out.append({"nu": nu, "k": k, "band": classify(k, nu).kind, "rate": fit.rate, "lambda_nu": fit.lambda_nu,
                        "epsilon_eff": fit.epsilon_eff, "r2": fit.r2, "flagged": fit.flagged})
    return out


def rate_slope(records: list[dict], k: float = 1.0) -> float:
    """Log-log slope of the fitted rate against nu at fixed k."""
    sel = [r for r in records if r["k"] == k]
    x = np.log([r["nu"] for r in sel])
    y = np.log([r["rate"] for r in sel])
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------- homogeneous split


@dataclass
class SplitReport:
    norm_gap: float  # max_t | ||omega1(t)|| - e^{-(nu k^2)^(1/3) t} ||omega_in|| | / ||omega_in||
    u1_integral: float  # int_0^T ||u1||^2 dt plus the analytic tail bound
    u1_bound: float  # 2 pi / |k| ||omega_in||^2
    remainder_gap: float  # relative difference of omega_H - omega1 and the separately evolved remainder
    prop_lhs: float
    prop_rhs: float
    prop_ratio: float
    removed: float


def omega_h1(omega_in: np.ndarray, y: np.ndarray, nu: float, k: float, t: np.ndarray) -> np.ndarray:
    """e^{-(nu k^2)^(1/3) t} e^{-i t k y} omega_in, one row per time."""
    t = np.atleast_1d(t)[:, None]
    return np.exp(-((nu * k * k) ** (1 / 3)) * t) * np.exp(-1j * t * k * y[None, :]) * omega_in[None, :]


def u1_time_integral(ops: sc.SpectralOperatorSet, omega_in, nu, k, T=None, samples=None) -> float:
    """int_0^infinity ||u1(t)||^2 dt: trapezoid to T plus the bound
    ||u||^2 <= ||omega||^2 / (pi^2/4 + k^2) on the tail."""
    lam = (nu * k * k) ** (1 / 3)
    T = T or 8.0 / lam
    m = samples or int(max(2000, 40 * abs(k) * T))
    t = np.linspace(0, T, m)
    w = omega_h1(omega_in, ops.nodes, nu, k, t)
    usq = _u_norms(ops, sc.poisson_streamfunction(ops, w, k), k)[0]
    tail = ops.l2(omega_in) ** 2 * np.exp(-2 * lam * T) / (2 * lam) / (np.pi**2 / 4 + k * k)
    return float(np.trapezoid(usq, t) + tail)


def split_homogeneous(cfg: EvolutionConfig) -> SplitReport:
    nu, k = cfg.nu, cfg.k
    ops = sc.build_chebyshev(cfg.n)
    w0 = project_compatible(ops, k, cfg.omega_in)
    removed = ops.l2(cfg.omega_in - w0)
    nw = ops.l2(w0)
    if not nw > 1e-14:
        raise ValueError("initial vorticity vanishes after projection")
    lam = (nu * k * k) ** (1 / 3)
    base = EvolutionConfig(nu, k, w0, cfg.dt, cfg.T, project=False, enforce_contract=cfg.enforce_contract)
    traj, led = evolve(base)
    t = traj.t
    w1 = omega_h1(w0, ops.nodes, nu, k, t)
    n1 = np.sqrt(np.abs(w1) ** 2 @ ops.quad_weights)
    gap = float(np.max(np.abs(n1 - np.exp(-lam * t) * nw)) / nw)

    # the remainder omega_H - omega1 solves a forced problem with slopes -psi1'(+-1)
    def src(s):
        v = omega_h1(w0, ops.nodes, nu, k, np.array([s]))[0]
        return -(nu * k * k - lam) * v + nu * (ops.d2 @ v)

    def slopes(s):
        v = omega_h1(w0, ops.nodes, nu, k, np.array([s]))[0]
        return -wall_slopes(ops, sc.poisson_streamfunction(ops, v, k))

    rem_cfg = EvolutionConfig(nu, k, np.zeros(cfg.n, dtype=complex), cfg.dt, cfg.T, source=src, slopes=slopes,
                              project=False, enforce_contract=cfg.enforce_contract)
    rem, _ = evolve(rem_cfg)
    diff = traj.omega - w1
    rgap = float(np.max(np.sqrt(np.abs(diff - rem.omega) ** 2 @ ops.quad_weights)) / nw)

    ka = abs(k)
    lhs = (
        nu ** (1 / 3) * ka ** (2 / 3) * led.int_rho_omega_l2sq
        + ka * led.int_u_l2sq
        + (nu * ka) ** 0.5 * led.int_omega_l2sq
        + (nu / ka) ** 0.5 * led.sup_omega_l2**2
    )
    rhs = nw**2 + nu ** (2 / 3) * ka ** (-2 / 3) * ops.l2(ops.d1 @ w0) ** 2
    return SplitReport(
        norm_gap=gap,
        u1_integral=u1_time_integral(ops, w0, nu, k),
        u1_bound=2 * np.pi / ka * nw**2,
        remainder_gap=rgap,
        prop_lhs=float(lhs),
        prop_rhs=float(rhs),
        prop_ratio=float(lhs / rhs),
        removed=float(removed),
    )
