"""
Chebyshev collocation on the channel cross-section y in [-1, 1].

Differentiation and Clenshaw-Curtis quadrature matrices, the Dirichlet
elliptic solve (d^2/dy^2 - k^2) psi = omega, velocity recovery, the norm
bundle used by the resolvent and evolution code, and the sine basis
phi_j(y) = sin(pi j (y + 1) / 2) used by the low-frequency energy argument.

Grid functions are plain complex numpy vectors sampled at the nodes of a
SpectralOperatorSet (nodes run from +1 down to -1).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft, linalg, special

MIN_NODES = 8


@dataclass(frozen=True, eq=False)
class SpectralOperatorSet:
    """Immutable Chebyshev-Gauss-Lobatto discretization of [-1, 1].

    Attributes
    ----------
    n : int
        Number of collocation nodes.
    nodes : ndarray
        cos(pi j / (n - 1)), strictly decreasing from 1 to -1.
    d1, d2, d4 : ndarray
        Dense differentiation matrices of order 1, 2 and 4.
    quad_weights : ndarray
        Clenshaw-Curtis weights, exact for polynomials of degree <= n - 1.
    """

    n: int
    nodes: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d4: np.ndarray
    quad_weights: np.ndarray

    def integrate(self, f: np.ndarray) -> complex:
        return self.quad_weights @ f

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """L2 pairing <f, g> = int f conj(g) dy."""
        return self.quad_weights @ (f * np.conj(g))

    def l2(self, f: np.ndarray) -> float:
        return float(np.sqrt(max(self.quad_weights @ np.abs(f) ** 2, 0.0)))

    def interp_matrix(self, x: np.ndarray) -> np.ndarray:
        """Barycentric interpolation matrix from the nodes to points x."""
        return _interp_matrix(self.nodes, np.asarray(x, dtype=float))

    def interpolate(self, f: np.ndarray, x: np.ndarray) -> np.ndarray:
        return self.interp_matrix(x) @ f


def _fix_diagonal(d: np.ndarray) -> np.ndarray:
    # negative-sum trick: rows of a differentiation matrix annihilate constants
    d = d.copy()
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


def clenshaw_curtis_weights(n: int) -> np.ndarray:
    """Clenshaw-Curtis weights on the n Chebyshev-Lobatto points."""
    N = n - 1
    theta = np.pi * np.arange(n) / N
    w = np.zeros(n)
    v = np.ones(N - 1)
    interior = slice(1, N)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N**2 - 1)
        for j in range(1, N // 2):
            v -= 2.0 * np.cos(2 * j * theta[interior]) / (4 * j * j - 1)
        v -= np.cos(N * theta[interior]) / (N**2 - 1)
    else:
        w[0] = w[N] = 1.0 / N**2
        for j in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * j * theta[interior]) / (4 * j * j - 1)
    w[interior] = 2.0 * v / N
    return w


@lru_cache(maxsize=32)
def build_chebyshev(n: int) -> SpectralOperatorSet:
    """Build the operator set on n Chebyshev-Gauss-Lobatto nodes (n >= 8)."""
    n = int(n)
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes for fourth-order boundary rows, got {n}")
    N = n - 1
    j = np.arange(n)
    x = np.cos(np.pi * j / N)
    x[0], x[-1] = 1.0, -1.0
    if n % 2 == 1:
        x[N // 2] = 0.0
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** j
    dx = x[:, None] - x[None, :]
    d1 = np.outer(c, 1.0 / c) / (dx + np.eye(n))
    d1 = _fix_diagonal(d1)
    d2 = _fix_diagonal(d1 @ d1)
    d4 = _fix_diagonal(d2 @ d2)
    for m in (x, d1, d2, d4):
        m.setflags(write=False)
    w = clenshaw_curtis_weights(n)
    w.setflags(write=False)
    return SpectralOperatorSet(n=n, nodes=x, d1=d1, d2=d2, d4=d4, quad_weights=w)


def _bary_weights(n: int) -> np.ndarray:
    w = (-1.0) ** np.arange(n)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _interp_matrix(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = nodes.size
    bw = _bary_weights(n)
    diff = x[:, None] - nodes[None, :]
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = bw[None, :] / diff
        m = t / t.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    m[rows] = exact[rows].astype(float)
    return m


def cheb_coefficients(f: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of the interpolant through Lobatto samples."""
    n = f.shape[-1]
    c = fft.dct(f, type=1, axis=-1) / (n - 1)
    c[..., 0] *= 0.5
    c[..., -1] *= 0.5
    return c


def cheb_values(c: np.ndarray) -> np.ndarray:
    """Inverse of cheb_coefficients."""
    n = c.shape[-1]
    c = np.array(c, dtype=np.result_type(c, float))
    c[..., 1:-1] *= 0.5
    return fft.dct(c, type=1, axis=-1)


def resample(f: np.ndarray, m: int) -> np.ndarray:
    """Re-sample a Lobatto grid function on m nodes (pad or truncate spectrally)."""
    c = cheb_coefficients(f)
    n = f.shape[-1]
    out = np.zeros(f.shape[:-1] + (m,), dtype=c.dtype)
    keep = min(n, m)
    out[..., :keep] = c[..., :keep]
    return cheb_values(out)


# ---------------------------------------------------------------- elliptic solves


@lru_cache(maxsize=256)
def _dirichlet_lu(n: int, k2: float, shift: float):
    ops = build_chebyshev(n)
    a = ops.d2[1:-1, 1:-1] - k2 * np.eye(n - 2) + shift * np.eye(n - 2)
    return linalg.lu_factor(a)


def dirichlet_solve(ops: SpectralOperatorSet, rhs: np.ndarray, k2: float, shift: float = 0.0) -> np.ndarray:
    """Solve (d^2 - k2 + shift) g = rhs with g(+-1) = 0."""
    lu = _dirichlet_lu(ops.n, float(k2), float(shift))
    out = np.zeros(rhs.shape, dtype=np.result_type(rhs, float))
    b = rhs[..., 1:-1]
    if b.ndim == 1:
        out[1:-1] = linalg.lu_solve(lu, b)
    else:
        out[..., 1:-1] = linalg.lu_solve(lu, b.reshape(-1, b.shape[-1]).T).T.reshape(b.shape)
    return out


def poisson_streamfunction(ops: SpectralOperatorSet, omega: np.ndarray, k: float) -> np.ndarray:
    """psi with (d^2 - k^2) psi = omega and psi(+-1) = 0."""
    omega = np.asarray(omega)
    if omega.shape[-1] != ops.n:
        raise ValueError("omega is not sampled on this grid")
    if np.iscomplexobj(k):
        raise TypeError("wavenumber must be real")
    return dirichlet_solve(ops, omega, float(k) ** 2)


def velocity_from_stream(ops: SpectralOperatorSet, psi: np.ndarray, k: float) -> tuple[np.ndarray, np.ndarray]:
    """(u1, u2) = (d psi/dy, -i k psi)."""
    return ops.d1 @ psi, -1j * k * psi


# ---------------------------------------------------------------- norms and weights


@dataclass(frozen=True)
class WeightProfile:
    """Either the rho_k ramp (delta required) or (1 - |y|)^(1/2)."""

    kind: str
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in ("rho_k", "one_minus_abs_y_sqrt"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "rho_k" and not (self.delta and 0.0 < self.delta <= 1.0):
            raise ValueError("rho_k needs 0 < delta <= 1")

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.kind == "rho_k":
            return np.minimum(1.0, (1.0 - np.abs(y)) / self.delta)
        return np.sqrt(np.clip(1.0 - np.abs(y), 0.0, None))


def rho_k(nu: float, k: float) -> WeightProfile:
    """rho_k with delta = nu^(1/3) |k|^(-1/3), capped at 1."""
    return WeightProfile("rho_k", min(1.0, nu ** (1 / 3) * abs(k) ** (-1 / 3)))


@lru_cache(maxsize=64)
def _gauss_jacobi(m: int, alpha: float):
    return special.roots_jacobi(m, alpha, 0.0)


@lru_cache(maxsize=256)
def _weighted_rule(n: int, kind: str, delta: float | None, power: float):
    """(M, w) with ||weight^power f||^2 = w @ |M f|^2 for f sampled on n nodes."""
    ops = build_chebyshev(n)
    m = max(n, 64)
    a = 2.0 * power
    pts, wts = [], []
    if kind == "rho_k":
        xj, wj = _gauss_jacobi(m, a)  # weight (1 - x)^a on [-1, 1]
        # right ramp: y = 1 - delta (1 - x)/2, (1 - y)/delta = (1 - x)/2
        yr = 1.0 - delta * (1.0 - xj) / 2.0
        scale = (delta / 2.0) * 2.0 ** (-a)
        pts += [yr, -yr]
        wts += [scale * wj, scale * wj]
        if delta < 1.0:
            xg, wg = special.roots_legendre(m)
            h = 1.0 - delta
            pts.append(h * xg)
            wts.append(h * wg)
    else:
        # (1 - |y|)^a on each half
        xj, wj = _gauss_jacobi(m, a / 2.0)
        y = 0.5 * (1.0 + xj)  # on [0, 1], 1 - y = (1 - xj)/2
        scale = 0.5 * 2.0 ** (-a / 2.0)
        pts += [y, -y]
        wts += [scale * wj, scale * wj]
    y = np.concatenate(pts)
    return ops.interp_matrix(y), np.concatenate(wts)


def weighted_l2(ops: SpectralOperatorSet, f: np.ndarray, weight: WeightProfile, power: float = 1.0):
    """|| weight^power f ||_{L2} by composite Gauss quadrature split at the weight's corners.

    On the rho_k ramps the factor ((1 -|y|)/delta)^(2 power) is absorbed into a
    Gauss-Jacobi rule, so negative powers (integrable wall singularities) are exact
    for polynomial f.  f may carry leading batch axes.
    """
    M, w = _weighted_rule(ops.n, weight.kind, weight.delta, float(power))
    f = np.asarray(f)
    out = np.sqrt(np.abs(f @ M.T) ** 2 @ w)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NormBundle:
    l1: float
    l2: float
    linf: float
    h1_seminorm: float
    h_minus1: float


def l1_norm(ops: SpectralOperatorSet, f: np.ndarray) -> float:
    """L1 norm; |f| is integrated on a 4x finer Lobatto grid to tame zero crossings."""
    m = 4 * (ops.n - 1) + 1
    fine = build_chebyshev(m)
    out = np.abs(resample(np.asarray(f), m)) @ fine.quad_weights
    return float(out) if np.ndim(out) == 0 else out


def h_minus1_norm(ops: SpectralOperatorSet, f: np.ndarray) -> float:
    """Dual norm of H^1_0 with the full H^1 norm: solve -g'' + g = f, g(+-1)=0."""
    g = dirichlet_solve(ops, -np.asarray(f), 1.0)
    return float(np.sqrt(max(np.real(ops.inner(f, g)), 0.0)))


def norm_bundle(ops: SpectralOperatorSet, f: np.ndarray, weight: WeightProfile | None = None) -> NormBundle:
    f = np.asarray(f)
    if f.shape[-1] != ops.n:
        raise ValueError("grid function length does not match the operator set")
    if weight is not None:
        f = weight(ops.nodes) * f
    return NormBundle(
        l1=l1_norm(ops, f),
        l2=ops.l2(f),
        linf=float(np.max(np.abs(f))),
        h1_seminorm=ops.l2(ops.d1 @ f),
        h_minus1=h_minus1_norm(ops, f),
    )


# ---------------------------------------------------------------- sine basis


def sine_mode(j: int, y: np.ndarray) -> np.ndarray:
    return np.sin(np.pi * j * (np.asarray(y) + 1.0) / 2.0)


def sine_expand(ops: SpectralOperatorSet, f: np.ndarray, jmax: int) -> np.ndarray:
    """Coefficients a_j = <phi_j, f>, j = 1..jmax (the phi_j are L2-normalized)."""
    if jmax > ops.n // 2:
        raise ValueError("jmax must not exceed n/2")
    m = max(ops.n, 4 * jmax + 33)
    fine = build_chebyshev(m)
    ff = resample(np.asarray(f), m)
    j = np.arange(1, jmax + 1)
    basis = sine_mode(j[:, None], fine.nodes[None, :])
    return basis @ (fine.quad_weights * ff)


def sine_synthesize(coeffs: np.ndarray, y: np.ndarray) -> np.ndarray:
    j = np.arange(1, len(coeffs) + 1)
    return coeffs @ sine_mode(j[:, None], np.asarray(y)[None, :])


def wirtinger_check(ops: SpectralOperatorSet, f: np.ndarray, tol: float = 1e-10) -> float:
    """Rayleigh ratio ||f||^2 / ||f'||^2 for f vanishing at +-1."""
    f = np.asarray(f)
    if abs(f[0]) > tol or abs(f[-1]) > tol:
        raise ValueError("Wirtinger check needs f(+-1) = 0")
    return ops.l2(f) ** 2 / ops.l2(ops.d1 @ f) ** 2


def elliptic_identity_defect(ops: SpectralOperatorSet, w: np.ndarray, k: float) -> float:
    """Relative gap in ||psi''||^2 + 2k^2||psi'||^2 + k^4||psi||^2 = ||w||^2 for the Dirichlet
    streamfunction of w, with products integrated exactly on 2n nodes."""
    psi = poisson_streamfunction(ops, w, k)
    fine = build_chebyshev(2 * ops.n)
    p = resample(psi, fine.n)
    # the collocated psi satisfies psi'' - k^2 psi = w only at interior nodes, so use its own w
    d1, d2 = fine.d1 @ p, fine.d2 @ p
    lhs = fine.l2(d2) ** 2 + 2 * k**2 * fine.l2(d1) ** 2 + k**4 * fine.l2(p) ** 2
    rhs = fine.l2(d2 - k**2 * p) ** 2
    return abs(lhs - rhs) / rhs


def interpolation_ratio(ops: SpectralOperatorSet, psi: np.ndarray, k: float, m: int = 4096) -> float:
    """||psi'||_inf^2 / (||psi'|| ||(d^2 - k^2) psi||); the unit-constant bound asks for <= 1."""
    d1 = ops.d1 @ psi
    w = ops.d2 @ psi - k**2 * psi
    x = np.cos(np.pi * np.arange(m) / (m - 1))
    sup = np.max(np.abs(ops.interpolate(d1, x)))
    return sup**2 / (ops.l2(d1) * ops.l2(w))
