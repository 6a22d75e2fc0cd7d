"""
Orr-Sommerfeld resolvent solves around Couette flow.

Navier-slip problem (second order in the vorticity w):

    -nu (w'' - k^2 w) + i k (y - lam) w - eps nu^(1/3) |k|^(2/3) w = F,   w(+-1) = 0,

and the non-slip problem for the streamfunction phi, w = (d^2 - k^2) phi,
with phi(+-1) = phi'(+-1) = 0.  The non-slip problem is discretized as a
coupled (w, phi) collocation system: the w-equation and the Poisson relation
at interior nodes plus four clamped boundary rows.  This keeps the matrix at
second-order conditioning instead of the n^8 growth of a collocated D4.

The decomposition w = w_Na + c1 w1 + c2 w2 uses the Navier-slip solution and
the two homogeneous clamped solutions.  Integrating w_Na against the
harmonic functions sinh k(1 +- y) / sinh 2k gives

    c1 = -phi_Na'(1)  = -int sinh k(1 + y) / sinh 2k  w_Na dy,
    c2 = -phi_Na'(-1) =  int sinh k(1 - y) / sinh 2k  w_Na dy.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from . import spectral_core as sc

BANDS = ("low", "intermediate", "high")
COND_WARN = 1e12


def frequency_band(k: float, nu: float) -> str:
    """low: |k| < 10 nu, intermediate: 10 nu <= |k| < 1, high: |k| >= 1."""
    ak = abs(k)
    if ak < 10.0 * nu:
        return "low"
    if ak < 1.0:
        return "intermediate"
    return "high"


def critical_width(nu: float, k: float) -> float:
    """delta = nu^(1/3) |k|^(-1/3), capped at 1."""
    return min(1.0, nu ** (1 / 3) * abs(k) ** (-1 / 3))


# ---------------------------------------------------------------- case types


@dataclass(frozen=True)
class L2Force:
    F: np.ndarray

    def values(self, ops: sc.SpectralOperatorSet, k: float) -> np.ndarray:
        return np.asarray(self.F, dtype=complex)


@dataclass(frozen=True)
class SplitForce:
    """F = -i k f1 - d f2 / dy."""

    f1: np.ndarray
    f2: np.ndarray

    def values(self, ops: sc.SpectralOperatorSet, k: float) -> np.ndarray:
        return -1j * k * np.asarray(self.f1, dtype=complex) - ops.d1 @ np.asarray(self.f2, dtype=complex)


@dataclass(frozen=True)
class ResolventCase:
    nu: float
    k: float
    lam: float
    forcing: L2Force | SplitForce
    eps: float = 0.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if np.iscomplexobj(self.k) or np.iscomplexobj(self.lam):
            raise TypeError("k and lambda must be real")

    @property
    def n(self) -> int:
        f = self.forcing
        return len(f.F) if isinstance(f, L2Force) else len(f.f1)

    @property
    def band(self) -> str:
        return frequency_band(self.k, self.nu)

    @property
    def delta(self) -> float:
        return critical_width(self.nu, self.k)


NORM_KEYS = ("u_l2", "w_l1", "w_l2", "wprime_l2", "ylam_w_l2", "rho_half_w_l2", "rho_mquarter_w_l2")


@dataclass
class ResolventSolution:
    w: np.ndarray
    phi: np.ndarray
    u: tuple[np.ndarray, np.ndarray]
    norms: dict
    residual: float
    boundary_error: float
    bc: str
    forcing_l2: float = 0.0
    forcing_hm1: float = 0.0


@dataclass
class DecompositionBundle:
    w_na: np.ndarray
    c1: complex
    c2: complex
    w1: np.ndarray
    w2: np.ndarray
    reconstructed: np.ndarray
    direct: np.ndarray | None = None
    mismatch: float = 0.0
    flagged: bool = False


class CrossValidationError(RuntimeError):
    def __init__(self, msg, bundle: DecompositionBundle):
        super().__init__(msg)
        self.bundle = bundle


# ---------------------------------------------------------------- discretization


def _shift(nu: float, k: float, eps: float) -> float:
    return eps * nu ** (1 / 3) * abs(k) ** (2 / 3)


def os_operator(ops: sc.SpectralOperatorSet, nu: float, k: float, lam: float, eps: float = 0.0) -> np.ndarray:
    """Dense second-order operator w -> -nu (w'' - k^2 w) + i k (y - lam) w - eps nu^(1/3)|k|^(2/3) w."""
    n = ops.n
    a = -nu * ops.d2 + (nu * k * k - _shift(nu, k, eps)) * np.eye(n)
    return a + np.diag(1j * k * (ops.nodes - lam))


def _rcond(lu_piv, anorm: float) -> float:
    lu, piv = lu_piv
    rc, info = lapack.zgecon(lu, anorm, norm="1")
    return float(rc)


@lru_cache(maxsize=16)
def _slip_factor(n: int, nu: float, k: float, lam: float, eps: float):
    ops = sc.build_chebyshev(n)
    a = os_operator(ops, nu, k, lam, eps)
    a[0, :] = 0.0
    a[-1, :] = 0.0
    a[0, 0] = a[-1, -1] = 1.0
    r = 1.0 / np.abs(a).max(axis=1)
    a = r[:, None] * a
    f = linalg.lu_factor(a, check_finite=False)
    return f, _rcond(f, float(np.abs(a).sum(axis=0).max())), r


@lru_cache(maxsize=16)
def _noslip_factor(n: int, nu: float, k: float, lam: float, eps: float):
    """Coupled system for x = [w, phi]; returns the LU, a condition estimate and the row scaling."""
    ops = sc.build_chebyshev(n)
    I = np.eye(n)
    A = np.zeros((2 * n, 2 * n), dtype=complex)
    inner = slice(1, n - 1)
    m = n - 2
    A[:m, :n] = os_operator(ops, nu, k, lam, eps)[inner]
    A[m : 2 * m, :n] = -I[inner]
    A[m : 2 * m, n:] = (ops.d2 - k * k * I)[inner]
    # phi(1), phi(-1), phi'(1), phi'(-1)
    A[2 * m, n] = 1.0
    A[2 * m + 1, 2 * n - 1] = 1.0
    A[2 * m + 2, n:] = ops.d1[0]
    A[2 * m + 3, n:] = ops.d1[-1]
    # row equilibration: the Poisson rows carry O(n^4) entries, the w rows O(nu n^4)
    r = 1.0 / np.abs(A).max(axis=1)
    A = r[:, None] * A
    f = linalg.lu_factor(A, check_finite=False)
    return f, _rcond(f, float(np.abs(A).sum(axis=0).max())), r


def _check_cond(rc: float, what: str):
    if rc == 0.0 or 1.0 / rc > COND_WARN:
        warnings.warn(f"{what}: condition estimate {1.0 / max(rc, 1e-300):.2e} exceeds {COND_WARN:.0e}; raise n", RuntimeWarning)


def slip_solve_many(ops, nu, k, lam, eps, F: np.ndarray) -> np.ndarray:
    """Navier-slip w for a stack of forcings F[b, :]."""
    F = np.atleast_2d(np.asarray(F, dtype=complex))
    f, rc, r = _slip_factor(ops.n, float(nu), float(k), float(lam), float(eps))
    _check_cond(rc, "Navier-slip system")
    rhs = F.T.copy()
    rhs[0] = rhs[-1] = 0.0
    return linalg.lu_solve(f, r[:, None] * rhs, check_finite=False).T


def noslip_solve_many(ops, nu, k, lam, eps, F: np.ndarray, bc_values=(0.0, 0.0, 0.0, 0.0)):
    """Clamped (w, phi) for a stack of forcings; bc_values = (phi(1), phi(-1), phi'(1), phi'(-1))."""
    F = np.atleast_2d(np.asarray(F, dtype=complex))
    n = ops.n
    m = n - 2
    f, rc, r = _noslip_factor(n, float(nu), float(k), float(lam), float(eps))
    _check_cond(rc, "non-slip system")
    rhs = np.zeros((2 * n, F.shape[0]), dtype=complex)
    rhs[:m] = F[:, 1:-1].T
    rhs[2 * m : 2 * m + 4] = np.asarray(bc_values, dtype=complex)[:, None]
    x = linalg.lu_solve(f, r[:, None] * rhs, check_finite=False).T
    return x[:, :n], x[:, n:]


def homogeneous_spectral(ops, nu, k, lam, eps=0.0):
    """Spectral solves of the homogeneous clamped problems: (w1, phi1), (w2, phi2).

    phi1'(1) = 1, phi1'(-1) = 0 and phi2'(-1) = 1, phi2'(1) = 0, phi_i(+-1) = 0.
    """
    z = np.zeros((1, ops.n))
    w1, p1 = noslip_solve_many(ops, nu, k, lam, eps, z, (0, 0, 1, 0))
    w2, p2 = noslip_solve_many(ops, nu, k, lam, eps, z, (0, 0, 0, 1))
    return (w1[0], p1[0]), (w2[0], p2[0])


# ---------------------------------------------------------------- norms


def norm_record(ops, w, phi, k, lam, delta) -> dict:
    """Norm record for one or a stack of solutions (leading batch axis allowed)."""
    w = np.asarray(w)
    phi = np.asarray(phi)
    dphi = phi @ ops.d1.T
    dw = w @ ops.d1.T
    wt = ops.quad_weights

    def l2(f):
        return np.sqrt(np.abs(f) ** 2 @ wt)

    rho = sc.WeightProfile("rho_k", delta)
    rec = {
        "u_l2": np.sqrt(l2(dphi) ** 2 + k * k * l2(phi) ** 2),
        "w_l1": sc.l1_norm(ops, w),
        "w_l2": l2(w),
        "wprime_l2": l2(dw),
        "ylam_w_l2": l2((ops.nodes - lam) * w),
        "rho_half_w_l2": sc.weighted_l2(ops, w, rho, 0.5),
        "rho_mquarter_w_l2": sc.weighted_l2(ops, w, rho, -0.25),
    }
    return {key: (float(v) if np.ndim(v) == 0 else np.asarray(v, dtype=float)) for key, v in rec.items()}


def hm1_many(ops, F) -> np.ndarray:
    F = np.atleast_2d(F)
    g = sc.dirichlet_solve(ops, -F, 1.0)
    return np.sqrt(np.maximum(np.real(np.sum(F * np.conj(g) * ops.quad_weights, axis=-1)), 0.0))


def _residual(ops, nu, k, lam, eps, w, F) -> float:
    a = os_operator(ops, nu, k, lam, eps)
    r = (a @ w - F)[1:-1]
    scale = max(np.max(np.abs(F)), np.max(np.abs(nu * (ops.d2 @ w))), np.max(np.abs(k * (ops.nodes - lam) * w)), 1e-300)
    return float(np.max(np.abs(r)) / scale)


# ---------------------------------------------------------------- public solves


def _ops_for(case: ResolventCase, ops):
    ops = ops or sc.build_chebyshev(case.n)
    if ops.n != case.n:
        raise ValueError("forcing is not sampled on this grid")
    return ops


def solve_navier_slip(case: ResolventCase, ops: sc.SpectralOperatorSet | None = None) -> ResolventSolution:
    ops = _ops_for(case, ops)
    F = case.forcing.values(ops, case.k)
    w = slip_solve_many(ops, case.nu, case.k, case.lam, case.eps, F)[0]
    phi = sc.poisson_streamfunction(ops, w, case.k)
    u = sc.velocity_from_stream(ops, phi, case.k)
    return ResolventSolution(
        w=w,
        phi=phi,
        u=u,
        norms=norm_record(ops, w, phi, case.k, case.lam, case.delta),
        residual=_residual(ops, case.nu, case.k, case.lam, case.eps, w, F),
        boundary_error=float(max(abs(w[0]), abs(w[-1]))),
        bc="navier_slip",
        forcing_l2=ops.l2(F),
        forcing_hm1=sc.h_minus1_norm(ops, F),
    )


def solve_nonslip_direct(case: ResolventCase, ops: sc.SpectralOperatorSet | None = None) -> ResolventSolution:
    ops = _ops_for(case, ops)
    F = case.forcing.values(ops, case.k)
    w, phi = noslip_solve_many(ops, case.nu, case.k, case.lam, case.eps, F)
    w, phi = w[0], phi[0]
    dphi = ops.d1 @ phi
    return ResolventSolution(
        w=w,
        phi=phi,
        u=(dphi, -1j * case.k * phi),
        norms=norm_record(ops, w, phi, case.k, case.lam, case.delta),
        residual=_residual(ops, case.nu, case.k, case.lam, case.eps, w, F),
        boundary_error=float(max(abs(phi[0]), abs(phi[-1]), abs(dphi[0]), abs(dphi[-1]))),
        bc="non_slip",
        forcing_l2=ops.l2(F),
        forcing_hm1=sc.h_minus1_norm(ops, F),
    )


def harmonic_weights(ops, k):
    """sinh k(1 + y) / sinh 2k and sinh k(1 - y) / sinh 2k (k -> 0 limits (1 +- y)/2)."""
    y = ops.nodes
    if abs(k) < 1e-12:
        return (1 + y) / 2, (1 - y) / 2
    s = np.sinh(2 * k)
    return np.sinh(k * (1 + y)) / s, np.sinh(k * (1 - y)) / s


def c_coefficients(ops, k, w_na) -> tuple[np.ndarray, np.ndarray]:
    g1, g2 = harmonic_weights(ops, k)
    w_na = np.atleast_2d(w_na)
    return -(w_na @ (ops.quad_weights * g1)), w_na @ (ops.quad_weights * g2)


def decompose_nonslip(
    case: ResolventCase,
    ops: sc.SpectralOperatorSet | None = None,
    source: str = "spectral",
    tol: float = 1e-6,
) -> DecompositionBundle:
    """w = w_Na + c1 w1 + c2 w2, cross-checked against the direct clamped solve."""
    ops = _ops_for(case, ops)
    F = case.forcing.values(ops, case.k)
    w_na = slip_solve_many(ops, case.nu, case.k, case.lam, case.eps, F)[0]
    c1, c2 = (complex(c[0]) for c in c_coefficients(ops, case.k, w_na))
    if source == "spectral":
        (w1, _), (w2, _) = homogeneous_spectral(ops, case.nu, case.k, case.lam, case.eps)
    elif source == "airy":
        from .homogeneous_airy import build_bundle, build_homogeneous_pair

        pair = build_homogeneous_pair(build_bundle(case.nu, case.k, case.lam, case.eps), ops)
        w1, w2 = pair.w1, pair.w2
    else:
        raise ValueError(f"unknown homogeneous source {source!r}")
    rec = w_na + c1 * w1 + c2 * w2
    direct, _ = noslip_solve_many(ops, case.nu, case.k, case.lam, case.eps, F)
    direct = direct[0]
    scale = ops.l2(direct)
    mismatch = ops.l2(rec - direct) / scale if scale > 0 else ops.l2(rec - direct)
    bundle = DecompositionBundle(
        w_na=w_na,
        c1=c1,
        c2=c2,
        w1=w1,
        w2=w2,
        reconstructed=rec,
        direct=direct,
        mismatch=float(mismatch),
        flagged=case.band != "intermediate",
    )
    if mismatch > tol:
        raise CrossValidationError(f"decomposition differs from the direct solve by {mismatch:.2e}", bundle)
    return bundle


# ---------------------------------------------------------------- forcing ensembles


@dataclass(frozen=True)
class Forcing:
    forcing_id: str
    F: np.ndarray
    kind: str = "l2"  # "l2" or "split"


def forcing_ensemble(ops, nu, k, seed: int = 0, n_random: int = 8, split: bool = True) -> list[Forcing]:
    """8 deterministic smooth fields, n_random seeded trigonometric polynomials and
    (optionally) four derivative-type forcings F = -i k f1 - f2' for the H^-1 scans."""
    y = ops.nodes
    dlt = critical_width(nu, k)
    wb = max(dlt, 0.05)
    det = {
        "sine1": np.sin(np.pi * (y + 1) / 2),
        "sine6": np.sin(3 * np.pi * (y + 1)),
        "const": np.ones_like(y),
        "bump0": np.exp(-((y / wb) ** 2)),
        "bump+0.7": np.exp(-(((y - 0.7) / wb) ** 2)),
        "bump-0.7": np.exp(-(((y + 0.7) / wb) ** 2)),
        "wall+": np.exp(-(1 - y) / dlt),
        "wall-": np.exp(-(1 + y) / dlt),
    }
    out = [Forcing(key, v.astype(complex)) for key, v in det.items()]
    rng = np.random.default_rng(seed)
    for r in range(n_random):
        m = np.arange(0, 9)
        amp = (rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size)) / (1.0 + m)
        ph = rng.uniform(0, 2 * np.pi, m.size)
        out.append(Forcing(f"rand{r}", (amp[None, :] * np.cos(np.pi * m[None, :] * y[:, None] / 2 + ph)).sum(axis=1)))
    if split:
        bump = np.exp(-((y / dlt) ** 2))
        osc = np.sin(np.pi * y / dlt) * np.exp(-((y / 0.5) ** 2))
        for name, f1, f2 in (
            ("dbump", 0 * y, bump),
            ("dosc", 0 * y, osc),
            ("kbump", bump, 0 * y),
            ("dwall", 0 * y, np.exp(-(1 - y) / dlt)),
        ):
            out.append(Forcing(name, SplitForce(f1, f2).values(ops, k), "split"))
    return out


# ---------------------------------------------------------------- lambda scans

# left-hand sides as (norm key, exponent of nu, exponent of |k|)
INEQUALITIES = {
    "slip_l2": ("navier_slip", "l2", (("u_l2", 1 / 6, 5 / 6), ("w_l1", 1 / 6, 5 / 6), ("wprime_l2", 2 / 3, 1 / 3), ("w_l2", 1 / 3, 2 / 3), ("ylam_w_l2", 0.0, 1.0))),
    "slip_hminus1": ("navier_slip", "hm1", (("u_l2", 1 / 2, 1 / 2), ("wprime_l2", 1.0, 0.0), ("w_l2", 2 / 3, 1 / 3))),
    "noslip_l2": ("non_slip", "l2", (("rho_half_w_l2", 1 / 3, 2 / 3), ("u_l2", 1 / 6, 5 / 6), ("w_l2", 5 / 12, 7 / 12))),
    "noslip_hminus1": ("non_slip", "hm1", (("rho_half_w_l2", 2 / 3, 1 / 3), ("u_l2", 1 / 2, 1 / 2), ("w_l2", 3 / 4, 1 / 4))),
}


def lambda_grid(nu: float, k: float, lo: float = -3.0, hi: float = 3.0, refine: int = 4) -> np.ndarray:
    """Uniform grid with spacing delta/2 plus refinement by `refine` near lam = +-1."""
    dlt = critical_width(nu, k)
    h = dlt / 2
    base = np.arange(lo, hi + 0.5 * h, h)
    extra = [np.arange(c - dlt, c + dlt, h / refine) for c in (-1.0, 1.0)]
    return np.unique(np.round(np.concatenate([base] + extra), 12))


@dataclass
class ConstantReport:
    nu: float
    k: float
    eps: float
    n: int
    lambdas: np.ndarray
    constants: dict  # inequality -> worst total constant
    term_constants: dict  # inequality -> {term: worst constant}
    argmax: dict  # inequality -> (lambda, forcing_id)
    failures: np.ndarray  # bool mask over lambdas
    rows: list = field(default_factory=list, repr=False)


def _scan_point(ops, nu, k, eps, lam, ens: Sequence[Forcing]):
    F = np.array([f.F for f in ens])
    kinds = np.array([f.kind for f in ens])
    dlt = critical_width(nu, k)
    fl2 = np.sqrt(np.abs(F) ** 2 @ ops.quad_weights)
    fhm1 = hm1_many(ops, F)
    w = slip_solve_many(ops, nu, k, lam, eps, F)
    phi = sc.dirichlet_solve(ops, w, k * k)
    sols = {"navier_slip": norm_record(ops, w, phi, k, lam, dlt)}
    w2, phi2 = noslip_solve_many(ops, nu, k, lam, eps, F)
    sols["non_slip"] = norm_record(ops, w2, phi2, k, lam, dlt)
    ak = abs(k)
    ratios = {}
    for name, (bc, denom, terms) in INEQUALITIES.items():
        d = fl2 if denom == "l2" else fhm1
        use = np.ones(len(ens), bool) if denom == "hm1" else kinds == "l2"
        per = {t: np.where(use, nu**a * ak**b * sols[bc][t] / d, np.nan) for t, a, b in terms}
        ratios[name] = (sum(per.values()), per)
    return sols, ratios, fl2, fhm1


def scan_lambda(
    nu: float,
    k: float,
    eps: float,
    lambdas: Iterable[float],
    ensemble: Sequence[Forcing],
    ops: sc.SpectralOperatorSet,
    keep_rows: bool = False,
) -> ConstantReport:
    """Worst-case constants over lambda and the forcing ensemble for each inequality.

    L2-normalized inequalities use the smooth members; H^-1-normalized ones use all.
    """
    lambdas = np.asarray(list(lambdas), dtype=float)
    consts = {name: 0.0 for name in INEQUALITIES}
    terms = {name: {t: 0.0 for t, _, _ in spec[2]} for name, spec in INEQUALITIES.items()}
    arg = {name: None for name in INEQUALITIES}
    fail = np.zeros(lambdas.size, bool)
    rows = []
    for i, lam in enumerate(lambdas):
        try:
            sols, ratios, fl2, fhm1 = _scan_point(ops, nu, k, eps, lam, ensemble)
        except (linalg.LinAlgError, ValueError):
            fail[i] = True
            continue
        for name, (tot, per) in ratios.items():
            j = int(np.nanargmax(tot))
            if tot[j] > consts[name]:
                consts[name] = float(tot[j])
                arg[name] = (float(lam), ensemble[j].forcing_id)
            for t, v in per.items():
                terms[name][t] = max(terms[name][t], float(np.nanmax(v)))
        if keep_rows:
            for j, f in enumerate(ensemble):
                for bc, rec in sols.items():
                    row = {"nu": nu, "k": k, "lambda": float(lam), "bc": bc, "forcing_id": f.forcing_id}
                    row.update({key: float(rec[key][j]) for key in NORM_KEYS})
                    row["F_l2"] = float(fl2[j])
                    row["F_hm1"] = float(fhm1[j])
                    for name, (tot, _) in ratios.items():
                        if INEQUALITIES[name][0] == bc:
                            row[f"ratio_{name}"] = float(tot[j])
                    rows.append(row)
    return ConstantReport(nu, k, eps, ops.n, lambdas, consts, terms, arg, fail, rows)


# ---------------------------------------------------------------- weak resolvent pairing


def cutoff_chi(y: np.ndarray, lam: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """chi and chi' for the cut-off: 1/(y - lam) outside (lam - delta, lam + delta),
    the odd cubic 2 s / delta^2 - s^3 / delta^4 (s = y - lam) inside."""
    s = np.asarray(y, dtype=float) - lam
    inside = np.abs(s) < delta
    with np.errstate(divide="ignore"):
        chi = np.where(inside, 2 * s / delta**2 - s**3 / delta**4, 1.0 / s)
        dchi = np.where(inside, 2 / delta**2 - 3 * s**2 / delta**4, -1.0 / s**2)
    return chi, dchi


def _composite_rule(cuts: Sequence[float], panels: int = 12, order: int = 24):
    x, w = np.polynomial.legendre.leggauss(order)
    ys, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        e = np.linspace(a, b, panels + 1)
        h = np.diff(e)
        ys.append((e[:-1, None] + h[:, None] * (x[None, :] + 1) / 2).ravel())
        ws.append((h[:, None] * w[None, :] / 2).ravel())
    return np.concatenate(ys), np.concatenate(ws)


@dataclass
class PairingReport:
    pairing: float
    bound: float
    ratio: float
    terms: dict
    interval_empty: bool


def verify_weak_resolvent(case: ResolventCase, f: np.ndarray, j: int, ops: sc.SpectralOperatorSet | None = None) -> PairingReport:
    """|<w, f>| against |k|^-1 ||F||_{H^-1} (delta^-3/2 ||f||_{L^inf(E)} + |f(j)| (|j - lam| + delta)^-3/4 delta^-3/4
    + ||f chi||_{H1} + delta^-1 ||f chi||_{L2}), w the Navier-slip solution; the constant is the reported ratio."""
    if j not in (1, -1):
        raise ValueError("j must be +1 or -1")
    ops = _ops_for(case, ops)
    f = np.asarray(f, dtype=complex)
    fb = f[-1] if j == 1 else f[0]  # value at -j (nodes run from +1 to -1)
    if abs(fb) > 1e-10:
        raise ValueError("test function must vanish at -j")
    sol = solve_navier_slip(case, ops)
    pairing = abs(ops.inner(sol.w, f))
    lam, dlt = case.lam, case.delta
    lo, hi = max(-1.0, lam - dlt), min(1.0, lam + dlt)
    empty = not lo < hi
    cuts = sorted({-1.0, 1.0, *(c for c in (lam - dlt, lam + dlt) if -1 < c < 1)})
    yq, wq = _composite_rule(cuts)
    M = ops.interp_matrix(yq)
    fq = M @ f
    dfq = M @ (ops.d1 @ f)
    chi, dchi = cutoff_chi(yq, lam, dlt)
    g = fq * chi
    dg = dfq * chi + fq * dchi
    g_l2 = np.sqrt(wq @ np.abs(g) ** 2)
    g_h1 = np.sqrt(wq @ (np.abs(g) ** 2 + np.abs(dg) ** 2))
    linf_e = 0.0 if empty else float(np.max(np.abs(fq[(yq > lo) & (yq < hi)]), initial=0.0))
    fj = abs(f[0] if j == 1 else f[-1])
    terms = {
        "linf_E": dlt ** -1.5 * linf_e,
        "endpoint": fj * (abs(j - lam) + dlt) ** -0.75 * dlt ** -0.75,
        "fchi_h1": float(g_h1),
        "fchi_l2": float(g_l2) / dlt,
    }
    bound = sol.forcing_hm1 / abs(case.k) * sum(terms.values())
    return PairingReport(float(pairing), float(bound), float(pairing / bound) if bound > 0 else 0.0, terms, empty)


# ---------------------------------------------------------------- elementary bounds


def sinh_cosh_bounds(k: float, m: int = 2001) -> dict:
    """||sinh k(1+y)/sinh 2k||_{L^inf}, ||cosh k(1+y)/sinh 2k||_{L2} and |k| times the latter."""
    ops = sc.build_chebyshev(129)
    y = ops.nodes
    s = np.sinh(2 * k)
    sh = np.sinh(k * (1 + y)) / s
    ch = np.cosh(k * (1 + y)) / s
    return {
        "sinh_linf": float(np.max(np.abs(sh))),
        "cosh_l2": ops.l2(ch),
        "k_cosh_l2": abs(k) * ops.l2(ch),
    }
