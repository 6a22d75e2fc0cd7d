"""
Airy-based homogeneous solutions of the clamped Orr-Sommerfeld problem.

With L = (k/nu)^(1/3), z(y) = L(y - lam - i k nu) + i eps and z0 = z(-1) = L d + i eps,

    W1(y) = Ai(e^{i pi/6} z(y)),    W2(y) = Ai(e^{5 i pi/6} z(y)) = conj(W1 at (-y, -lam)),

so W2 is generated from the same kernel with zt0 = L d~ + i eps.  Everything is
carried in scaled form, W1 / A0(z0) and W2 / conj(A0(zt0)), because |A0| spans
hundreds of orders of magnitude across the parameter range.  The ratio
det / (B1 B2) and the coefficient combinations are invariant under this
scaling.

Two independent routes reach the determinant: Clenshaw-Curtis quadrature of
e^{+-ky} W_i, and the eta-form A1 ~ A11 + A12, B1 ~ B11 + B12 built from
A0 ray profiles.  They agree when det / (B1 B2) = -D1 / D2.

Only k > 0 is computed; k < 0 is the complex conjugate problem.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import airy_kernel as ak
from . import os_resolvent as osr
from . import spectral_core as sc

CLAIM_CONSTANT = 0.002 * np.exp(-4.0)  # |det| >= CLAIM_CONSTANT |k| |B1 B2|
D1_CONSTANT = 0.02  # |D1| >= D1_CONSTANT k
DET_UNDERFLOW = 1e-280


class DeterminantUnderflowError(ArithmeticError):
    pass


class BoundaryConditionError(RuntimeError):
    pass


@dataclass
class AiryCoefficientBundle:
    nu: float
    k: float
    lam: float
    eps: float
    L: float
    d: complex
    d_tilde: complex
    log_a0_d: complex  # log A0(L d + i eps)
    log_a0_dt: complex  # log A0(L d~ + i eps)
    A1: complex  # scaled: A1 / A0(Ld + i eps), A2 / conj A0(L d~ + i eps), ...
    A2: complex
    B1: complex
    B2: complex
    C11: complex  # scaled so that w1 = C11 W1_hat + C12 W2_hat
    C12: complex
    C21: complex
    C22: complex
    det: complex  # A1 A2 - B1 B2 in the scaled variables
    eta_form: dict = field(default_factory=dict)
    quad_nodes: int = 0
    flagged: bool = False

    @property
    def a0_d(self) -> complex:
        return complex(np.exp(self.log_a0_d))

    @property
    def a0_dt(self) -> complex:
        return complex(np.exp(self.log_a0_dt))

    @property
    def claim_ratio(self) -> float:
        """|det| / (|k| |B1 B2|); the claim asserts >= 0.002 e^-4."""
        return float(abs(self.det) / (abs(self.k) * abs(self.B1 * self.B2)))

    @property
    def claim_margin(self) -> float:
        return self.claim_ratio / CLAIM_CONSTANT


def _z0(nu, k, lam, eps):
    L = (k / nu) ** (1 / 3)
    d = complex(-1.0 - lam, -k * nu)
    dt = complex(-1.0 + lam, -k * nu)
    return L, d, dt, L * d + 1j * eps, L * dt + 1j * eps


def w_hat(z0: complex, log_a0: complex, L: float, y: np.ndarray) -> np.ndarray:
    """Ai(e^{i pi/6}(z0 + L(1 + y))) / A0(z0)."""
    t = ak.ROT * (z0 + L * (1.0 + np.asarray(y, dtype=float)))
    return np.exp(ak.log_airy_ai(t) - log_a0)


def scaled_w(bundle: AiryCoefficientBundle, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(W1 / A0(Ld + i eps), W2 / conj A0(L d~ + i eps)) at points y."""
    L, _, _, z0, zt0 = _z0(bundle.nu, bundle.k, bundle.lam, bundle.eps)
    y = np.asarray(y, dtype=float)
    w1 = w_hat(z0, bundle.log_a0_d, L, y)
    w2 = np.conj(w_hat(zt0, bundle.log_a0_dt, L, -y))
    return w1, w2


def _eta_terms(prof: ak.RayProfile, k: float, L: float) -> dict:
    e2 = np.exp(prof.log_a0_at(2 * L) - prof.log_a0)
    ekk = np.exp(2 * k)
    return {
        "A_1": 1.0 - ekk * e2,
        "A_2": (k / L) * prof.exp_moment(k / L, 2 * L),
        "B_1": ekk - e2,
        "B_2": -(k * ekk / L) * prof.exp_moment(-k / L, 2 * L),
        "eta_2L": e2,
    }


def eta_form(nu: float, k: float, lam: float, eps: float = 0.0, profiles=None) -> dict:
    """D1 = (B11+B12)(B21+B22) - (A11+A12)(A21+A22) and D2 = (B11+B12)(B21+B22)
    from eta(z0, t) = A0(z0 + t) / A0(z0) and its exponential moments."""
    L, _, _, z0, zt0 = _z0(nu, k, lam, eps)
    p1, p2 = profiles or (ak.ray_profile(z0, (2 * L,)), ak.ray_profile(zt0, (2 * L,)))
    t1 = _eta_terms(p1, k, L)
    t2 = {key: np.conj(v) for key, v in _eta_terms(p2, k, L).items()}
    A1s, A2s = t1["A_1"] + t1["A_2"], t2["A_1"] + t2["A_2"]
    B1s, B2s = t1["B_1"] + t1["B_2"], t2["B_1"] + t2["B_2"]
    D2 = B1s * B2s
    D1 = D2 - A1s * A2s
    parts = {
        "I": t1["B_1"] * t2["B_1"] - t1["A_1"] * t2["A_1"],
        "II": t1["B_1"] * t2["B_2"] + t2["B_1"] * t1["B_2"] - t1["A_1"] * t2["A_2"] - t2["A_1"] * t1["A_2"],
        "III": t1["B_2"] * t2["B_2"] - t1["A_2"] * t2["A_2"],
    }
    return {
        "D1": complex(D1),
        "D2": complex(D2),
        "parts": {key: complex(v) for key, v in parts.items()},
        "eta1_2L": complex(t1["eta_2L"]),
        "eta2_2L": complex(t2["eta_2L"]),
        "d1_ratio": float(abs(D1) / k),
    }


def quadrature_nodes(L: float) -> int:
    return int(min(2049, max(257, int(np.ceil(32 * L)))))


def build_bundle(nu: float, k: float, lam: float, eps: float = 0.0, with_eta: bool = True) -> AiryCoefficientBundle:
    if not nu > 0:
        raise ValueError("nu must be positive")
    if not k > 0:
        raise ValueError("only k > 0 is computed; k < 0 is the conjugate problem")
    L, d, dt, z0, zt0 = _z0(nu, k, lam, eps)
    p1 = ak.ray_profile(z0, (2 * L,))
    p2 = ak.ray_profile(zt0, (2 * L,))
    la1, la2 = p1.log_a0, p2.log_a0
    n = quadrature_nodes(L)
    q = sc.build_chebyshev(n)
    y = q.nodes
    W1 = w_hat(z0, la1, L, y)
    W2 = np.conj(w_hat(zt0, la2, L, -y))
    wq = q.quad_weights
    ep, em = np.exp(k * y), np.exp(-k * y)
    A1 = complex(wq @ (ep * W1))
    A2 = complex(wq @ (em * W2))
    B1 = complex(wq @ (em * W1))
    B2 = complex(wq @ (ep * W2))
    det = A1 * A2 - B1 * B2
    if not abs(det) > DET_UNDERFLOW:
        raise DeterminantUnderflowError(f"|det| = {abs(det):.3e} at nu={nu}, k={k}, lam={lam}")
    ek, emk = np.exp(k), np.exp(-k)
    bundle = AiryCoefficientBundle(
        nu=nu,
        k=k,
        lam=lam,
        eps=eps,
        L=L,
        d=d,
        d_tilde=dt,
        log_a0_d=la1,
        log_a0_dt=la2,
        A1=A1,
        A2=A2,
        B1=B1,
        B2=B2,
        C11=(A2 * ek - B2 * emk) / det,
        C12=(A1 * emk - B1 * ek) / det,
        C21=(B2 * ek - A2 * emk) / det,
        C22=(B1 * emk - A1 * ek) / det,
        det=det,
        quad_nodes=n,
        flagged=osr.frequency_band(k, nu) != "intermediate",
    )
    if with_eta:
        bundle.eta_form = eta_form(nu, k, lam, eps, (p1, p2))
    return bundle


# ---------------------------------------------------------------- homogeneous pair

PAIR_NORMS = ("l1", "l2", "linf", "rho_half_l2", "rho_mquarter_l2")


@dataclass
class HomogeneousPair:
    w1: np.ndarray
    w2: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    norms1: dict
    norms2: dict
    bc_error: float
    residual: float
    n: int


def _pair_norms(ops, w, delta) -> dict:
    rho = sc.WeightProfile("rho_k", delta)
    return {
        "l1": sc.l1_norm(ops, w),
        "l2": ops.l2(w),
        "linf": float(np.max(np.abs(w))),
        "rho_half_l2": sc.weighted_l2(ops, w, rho, 0.5),
        "rho_mquarter_l2": sc.weighted_l2(ops, w, rho, -0.25),
    }


def _assemble(bundle, ops):
    W1, W2 = scaled_w(bundle, ops.nodes)
    w1 = bundle.C11 * W1 + bundle.C12 * W2
    w2 = bundle.C21 * W1 + bundle.C22 * W2
    k = bundle.k
    p1 = sc.poisson_streamfunction(ops, w1, k)
    p2 = sc.poisson_streamfunction(ops, w2, k)
    d1, d2 = ops.d1 @ p1, ops.d1 @ p2
    err = max(abs(d1[0] - 1), abs(d1[-1]), abs(d2[-1] - 1), abs(d2[0]))
    return w1, w2, p1, p2, float(err)


def build_homogeneous_pair(bundle: AiryCoefficientBundle, ops: sc.SpectralOperatorSet | None = None, tol: float = 1e-6) -> HomogeneousPair:
    """w1 = C11 W1 + C12 W2, w2 = C21 W1 + C22 W2 on the grid; phi_i by the Dirichlet solve.

    If phi1'(1) = 1, phi1'(-1) = 0 (and the mirror conditions for phi2) miss by
    more than tol, the grid is doubled once before giving up.
    """
    ops = ops or sc.build_chebyshev(max(257, quadrature_nodes(bundle.L)))
    w1, w2, p1, p2, err = _assemble(bundle, ops)
    if err > tol:
        ops = sc.build_chebyshev(2 * ops.n - 1)
        w1, w2, p1, p2, err = _assemble(bundle, ops)
        if err > tol:
            raise BoundaryConditionError(f"boundary slopes miss by {err:.2e} at n={ops.n}")
    a = osr.os_operator(ops, bundle.nu, bundle.k, bundle.lam, bundle.eps)
    res = 0.0
    for w in (w1, w2):
        r = (a @ w)[1:-1]
        scale = max(np.max(np.abs(bundle.nu * (ops.d2 @ w))), np.max(np.abs(bundle.k * (ops.nodes - bundle.lam) * w)))
        res = max(res, float(np.max(np.abs(r)) / scale))
    delta = osr.critical_width(bundle.nu, bundle.k)
    return HomogeneousPair(w1, w2, p1, p2, _pair_norms(ops, w1, delta), _pair_norms(ops, w2, delta), err, res, ops.n)


# ---------------------------------------------------------------- lemma checks


def verify_w_norm_lemmas(pair: HomogeneousPair, bundle: AiryCoefficientBundle) -> dict:
    """Ratios of each w-, W- and C-level quantity to its stated scaling (the empirical constants)."""
    nu, k, lam, L = bundle.nu, bundle.k, bundle.lam, bundle.L
    n1, n2 = pair.norms1, pair.norms2
    s1 = 1 + abs(1 - lam) ** 0.5
    s2 = 1 + abs(1 + lam) ** 0.5
    ops = sc.build_chebyshev(pair.n)
    W1, W2 = scaled_w(bundle, ops.nodes)
    delta = osr.critical_width(nu, k)
    rho = sc.WeightProfile("rho_k", delta)
    out = {
        "w_l1_sum": n1["l1"] + n2["l1"],
        "w1_linf": n1["linf"] / (nu**-0.5 * k**0.5 * s1),
        "w2_linf": n2["linf"] / (nu**-0.5 * k**0.5 * s2),
        "w1_l2": n1["l2"] / (nu**-0.25 * k**0.25 * s1**0.5),
        "w2_l2": n2["l2"] / (nu**-0.25 * k**0.25 * s2**0.5),
        "rho_half_sum": (n1["rho_half_l2"] + n2["rho_half_l2"]) / L**0.5,
        "w1_rho_mquarter": n1["rho_mquarter_l2"] / (nu ** (-7 / 24) * k ** (7 / 24) * s1**0.75),
        "w2_rho_mquarter": n2["rho_mquarter_l2"] / (nu ** (-7 / 24) * k ** (7 / 24) * s2**0.75),
        # W-level, with W_i already divided by |A0|
        "W1_linf": L * np.max(np.abs(W1)) / (L * (1 + abs(L * (1 + lam)) ** 0.5)),
        "W2_linf": L * np.max(np.abs(W2)) / (L * (1 + abs(L * (1 - lam)) ** 0.5)),
        "W_l1_sum": L * (sc.l1_norm(ops, W1) + sc.l1_norm(ops, W2)),
        "W_rho_half_sum": L * (sc.weighted_l2(ops, W1, rho, 0.5) + sc.weighted_l2(ops, W2, rho, 0.5)) / L**0.5,
        # C-level: |C_ij| |A0| / L
        "C_max": max(abs(bundle.C11), abs(bundle.C12), abs(bundle.C21), abs(bundle.C22)) / L,
        # B lower bounds |B_i| >= c L^-1 |A0|
        "B1_lower": L * abs(bundle.B1),
        "B2_lower": L * abs(bundle.B2),
        # |det| >= c |k| L^-2 |A0(Ld)| |A0(Ld~)|
        "det_lower": abs(bundle.det) * L**2 / k,
    }
    return {key: float(v) for key, v in out.items()}


@dataclass
class CLemmaReport:
    nu: float
    k: float
    l2_constant: float
    hm1_constant: float
    by_case: dict  # {"far": {...}, "near": {...}} worst ratios for |lam - 1| >= 3 and < 3
    far_proof_ratio: float  # |c1| |lam - 1| / (nu^-1/6 k^-5/6 ||F||) over |lam - 1| >= 3
    rows: list = field(default_factory=list, repr=False)


def verify_c_lemmas(nu, k, lambdas, ensemble, ops: sc.SpectralOperatorSet) -> CLemmaReport:
    """Weighted bounds on c1, c2 for L2 and H^-1 forcing, split by the proof's two cases."""
    F = np.array([f.F for f in ensemble])
    smooth = np.array([f.kind == "l2" for f in ensemble])
    fl2 = np.sqrt(np.abs(F) ** 2 @ ops.quad_weights)
    fhm1 = osr.hm1_many(ops, F)
    worst = {"far": {"l2": 0.0, "hm1": 0.0}, "near": {"l2": 0.0, "hm1": 0.0}}
    far_proof = 0.0
    rows = []
    for lam in np.asarray(lambdas, dtype=float):
        w_na = osr.slip_solve_many(ops, nu, k, lam, 0.0, F)
        c1, c2 = osr.c_coefficients(ops, k, w_na)
        a1, a2 = np.abs(c1), np.abs(c2)
        r_l2 = ((1 + abs(lam - 1)) * a1 + (1 + abs(lam + 1)) * a2) / (nu ** (-1 / 6) * k ** (-5 / 6) * fl2)
        r_hm1 = ((1 + abs(lam - 1)) ** 0.75 * a1 + (1 + abs(lam + 1)) ** 0.75 * a2) / (nu**-0.5 * k**-0.5 * fhm1)
        case = "far" if abs(lam - 1) >= 3 else "near"
        worst[case]["l2"] = max(worst[case]["l2"], float(np.max(r_l2[smooth])))
        worst[case]["hm1"] = max(worst[case]["hm1"], float(np.max(r_hm1)))
        if case == "far":
            pr = a1 * abs(lam - 1) / (nu ** (-1 / 6) * k ** (-5 / 6) * fl2)
            far_proof = max(far_proof, float(np.max(pr[smooth])))
        for j, f in enumerate(ensemble):
            rows.append({"lambda": float(lam), "forcing_id": f.forcing_id, "c1": float(a1[j]), "c2": float(a2[j]),
                         "ratio_l2": float(r_l2[j]) if smooth[j] else float("nan"), "ratio_hm1": float(r_hm1[j])})
    return CLemmaReport(
        nu,
        k,
        max(worst["far"]["l2"], worst["near"]["l2"]),
        max(worst["far"]["hm1"], worst["near"]["hm1"]),
        worst,
        far_proof,
        rows,
    )


# ---------------------------------------------------------------- determinant grid


def determinant_grid(nus=(1e-2, 1e-3, 1e-4), ks=(None, 0.05, 0.1, 0.5, 0.9), lambdas=None, epss=(0.0, 1e-3)):
    """(nu, k, lam, eps) tuples of the verification grid; None in ks stands for k = 10 nu.
    Wavenumbers below 10 nu are dropped and duplicates removed."""
    if lambdas is None:
        lambdas = np.round(np.arange(-3.0, 3.0 + 1e-9, 0.05), 10)
    pts = []
    for nu in nus:
        kk = sorted({round(10 * nu if k is None else k, 12) for k in ks if (10 * nu if k is None else k) >= 10 * nu - 1e-15})
        for k in kk:
            for lam in lambdas:
                for eps in epss:
                    pts.append((nu, k, float(lam), eps))
    return pts


@dataclass
class DeterminantRecord:
    nu: float
    k: float
    lam: float
    eps: float
    claim_ratio: float
    d1_ratio: float
    route_gap: float  # |det/(B1B2) + D1/D2| / |det/(B1B2)|
    det_lower: float
    b_lower: float


def determinant_point(nu, k, lam, eps) -> DeterminantRecord:
    b = build_bundle(nu, k, lam, eps)
    q = b.det / (b.B1 * b.B2)
    e = b.eta_form
    gap = abs(q + e["D1"] / e["D2"]) / abs(q)
    return DeterminantRecord(
        nu, k, lam, eps, b.claim_ratio, e["d1_ratio"], float(gap), abs(b.det) * b.L**2 / k, min(abs(b.B1), abs(b.B2)) * b.L
    )


def w_norm_envelope(nu, k, lambdas, n=257, eps=0.0) -> dict:
    """Worst ratio over lambdas for each quantity of verify_w_norm_lemmas
    (minimum for the lower bounds, maximum otherwise)."""
    ops = sc.build_chebyshev(n)
    env: dict = {}
    for lam in lambdas:
        b = build_bundle(nu, k, float(lam), eps, with_eta=False)
        for key, v in verify_w_norm_lemmas(build_homogeneous_pair(b, ops), b).items():
            pick = min if key.endswith("lower") else max
            env[key] = pick(env.get(key, v), v)
    return env


def symmetry_gap(nu, k, lam, eps=0.0, ops=None) -> float:
    """Largest relative difference between the norm records of w1 at lam and w2 at -lam.

    conj(phi1(-y; -lam)) solves the clamped problem at lam with slopes (0, -1),
    so w2(y; lam) = -conj(w1(-y; -lam)) and all norms with even weights exchange.
    """
    ops = ops or sc.build_chebyshev(257)
    a = build_homogeneous_pair(build_bundle(nu, k, lam, eps, with_eta=False), ops)
    b = build_homogeneous_pair(build_bundle(nu, k, -lam, eps, with_eta=False), ops)
    gaps = [abs(a.norms1[key] - b.norms2[key]) / abs(a.norms1[key]) for key in PAIR_NORMS]
    gaps += [abs(a.norms2[key] - b.norms1[key]) / abs(a.norms2[key]) for key in PAIR_NORMS]
    return float(max(gaps))
