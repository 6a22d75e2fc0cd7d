"""
Complex Airy machinery.

    Ai(z)          classical Airy function, Ai'' = z Ai
    A0(z)          int_{e^{i pi/6} z}^{infinity} Ai(t) dt
                   = e^{i pi/6} int_0^inf Ai(e^{i pi/6}(z + s)) ds
    A0'(z)         -e^{i pi/6} Ai(e^{i pi/6} z)
    eta(z, x)      A0(z + x) / A0(z)
    a(delta)       sup { Re A0'/A0 (z) : Im z <= delta }

Ai is evaluated in exponentially scaled form eAi(z) = Ai(z) exp(zeta),
zeta = (2/3) z^{3/2} on the principal branch, so that the large arguments met
in the resolvent problem (|z| up to a few hundred) never overflow. Four
evaluation branches are used:

    series      Maclaurin series, |z| <= 3, and 3 < |z| < 9 with pi/2 < |arg z| < 5 pi/6
    laplace     Laplace integral by generalized Gauss-Laguerre, 3 < |z| < 9, |arg z| <= pi/2
    asymptotic  Poincare expansion, |z| >= 9, |arg z| <= 2 pi/3
    connection  Ai(z) = -w Ai(w z) - w^2 Ai(w^2 z) near the negative axis

A0 is computed by Gauss-Legendre panels along the horizontal ray z + s,
s >= 0, in log scale, truncated when the integrand has decayed by e^-42
relative to its peak, plus the leading asymptotic tail Ai(w)/sqrt(w).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, pi, sqrt

import mpmath
import numpy as np
from scipy import optimize, special

AI0 = 3.0 ** (-2.0 / 3.0) / gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / gamma(1.0 / 3.0)
OMEGA = np.exp(2j * pi / 3)
ROT = np.exp(1j * pi / 6)
GUARD = 1.0e4

R_SERIES = 3.0
R_ASYMPTOTIC = 9.0
N_LAGUERRE = 60
N_ASYMPTOTIC = 40

A_SIGMA = 0.47
A_ZERO_REFERENCE = -0.4843


class AiryOverflowError(OverflowError):
    pass


class AiryConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class AiryValue:
    z: complex
    ai: complex
    method: str


@dataclass(frozen=True)
class A0Value:
    z: complex
    a0: complex
    a0_prime: complex


@dataclass(frozen=True)
class EtaValue:
    z: complex
    x: float
    eta: complex
    eta_log_integral: complex | None = None


# ---------------------------------------------------------------- Ai branches


def _zeta(z):
    return (2.0 / 3.0) * z * np.sqrt(z)


def _series(z):
    z = np.asarray(z, dtype=complex)
    z3 = z**3
    f = np.ones_like(z)
    g = z.copy()
    tf = np.ones_like(z)
    tg = z.copy()
    for k in range(1, 200):
        tf = tf * z3 / ((3 * k - 1) * (3 * k))
        tg = tg * z3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        if np.all(np.abs(tf) + np.abs(tg) <= 1e-17 * (np.abs(f) + np.abs(g))):
            break
    return AI0 * f + AIP0 * g


def _series_prime(z):
    z = np.asarray(z, dtype=complex)
    z3 = z**3
    d = z**2 / 6.0  # z^{3k-1} / prod (3j-1)(3j), k = 1
    e = np.ones_like(z)  # z^{3k} / prod (3j)(3j+1), k = 0
    fp = 3.0 * d
    gp = e.copy()
    for k in range(1, 200):
        e = e * z3 / ((3 * k) * (3 * k + 1))
        d = d * z3 / ((3 * k + 2) * (3 * k + 3))
        tf = 3.0 * (k + 1) * d
        tg = (3 * k + 1) * e
        fp += tf
        gp += tg
        if np.all(np.abs(tf) + np.abs(tg) <= 1e-17 * (np.abs(fp) + np.abs(gp))):
            break
    return AI0 * fp + AIP0 * gp


@lru_cache(maxsize=1)
def _laguerre_rule():
    x, w = special.roots_genlaguerre(N_LAGUERRE, -1.0 / 6.0)
    return x, w


_LAPLACE_PREF = 1.0 / (sqrt(pi) * 48.0 ** (1.0 / 6.0) * gamma(5.0 / 6.0))


def _laplace_scaled(z):
    # Ai(z) e^zeta = zeta^{-1/6} / (sqrt(pi) 48^{1/6} Gamma(5/6)) int_0^inf e^-t t^{-1/6} (2 + t/zeta)^{-1/6} dt
    x, w = _laguerre_rule()
    zeta = _zeta(z)
    s = ((2.0 + x[None, :] / zeta[:, None]) ** (-1.0 / 6.0)) @ w
    return _LAPLACE_PREF * zeta ** (-1.0 / 6.0) * s


@lru_cache(maxsize=1)
def _asymptotic_coefficients():
    u = np.ones(N_ASYMPTOTIC + 1)
    for k in range(1, N_ASYMPTOTIC + 1):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    return u


def _asymptotic_scaled(z):
    u = _asymptotic_coefficients()
    zeta = _zeta(z)
    inv = -1.0 / zeta
    term = np.ones_like(z)
    total = np.ones_like(z)
    prev = np.abs(term)
    done = np.zeros(z.shape, dtype=bool)
    for k in range(1, N_ASYMPTOTIC + 1):
        term = u[k] * inv**k
        mag = np.abs(term)
        # stop each entry at its smallest term (optimal truncation) or when negligible
        active = (~done) & (mag < prev)
        total = np.where(active, total + term, total)
        done |= (~active) | (mag < 1e-17)
        prev = np.where(active, mag, prev)
        if np.all(done):
            break
    return total / (2.0 * sqrt(pi) * z**0.25)


def _direct_scaled(z):
    # laplace below R_ASYMPTOTIC, asymptotic above; caller guarantees the sector
    out = np.empty(z.shape, dtype=complex)
    r = np.abs(z)
    big = r >= R_ASYMPTOTIC
    if np.any(big):
        out[big] = _asymptotic_scaled(z[big])
    if np.any(~big):
        out[~big] = _laplace_scaled(z[~big])
    return out


def _connection_scaled(z):
    zeta = _zeta(z)
    z1 = OMEGA * z
    z2 = np.conj(OMEGA) * z
    e1 = _direct_scaled(z1) * np.exp(zeta - _zeta(z1))
    e2 = _direct_scaled(z2) * np.exp(zeta - _zeta(z2))
    return -OMEGA * e1 - np.conj(OMEGA) * e2


def _branch_codes(z):
    r = np.abs(z)
    th = np.abs(np.angle(z))
    code = np.full(z.shape, 1, dtype=np.int8)  # 0 series, 1 laplace, 2 asymptotic, 3 connection
    small = r <= R_SERIES
    mid = (~small) & (r < R_ASYMPTOTIC)
    big = r >= R_ASYMPTOTIC
    code[small] = 0
    code[mid & (th > pi / 2) & (th < 5 * pi / 6)] = 0
    code[mid & (th >= 5 * pi / 6)] = 3
    code[big] = 2
    code[big & (th > 2 * pi / 3)] = 3
    return code


METHODS = ("series", "laplace", "asymptotic", "connection")


def airy_ai_scaled(z) -> np.ndarray:
    """Ai(z) exp((2/3) z^{3/2}), principal branch, vectorized."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z) > GUARD) or not np.all(np.isfinite(z)):
        raise AiryOverflowError(f"argument outside |z| <= {GUARD:g}")
    code = _branch_codes(z)
    out = np.empty(z.shape, dtype=complex)
    m = code == 0
    if np.any(m):
        out[m] = _series(z[m]) * np.exp(_zeta(z[m]))
    m = code == 1
    if np.any(m):
        out[m] = _laplace_scaled(z[m])
    m = code == 2
    if np.any(m):
        out[m] = _asymptotic_scaled(z[m])
    m = code == 3
    if np.any(m):
        out[m] = _connection_scaled(z[m])
    return out


def log_airy_ai(z) -> np.ndarray:
    """Complex logarithm of Ai(z) (any branch of the imaginary part)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    with np.errstate(divide="ignore"):
        return np.log(airy_ai_scaled(z)) - _zeta(z)


def airy_ai(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return airy_ai_scaled(z) * np.exp(-_zeta(z))


def ai_complex(z: complex) -> AiryValue:
    zz = np.array([complex(z)])
    code = int(_branch_codes(zz)[0]) if abs(z) <= GUARD else 2
    return AiryValue(complex(z), complex(airy_ai(zz)[0]), METHODS[code])


def ai_prime_series(z) -> np.ndarray:
    """Ai'(z) from the Maclaurin series (intended for |z| <= 3)."""
    return _series_prime(np.atleast_1d(np.asarray(z, dtype=complex)))


# ---------------------------------------------------------------- oracles (mpmath)


def ai_quadrature_oracle(z: complex, dps: int | None = None) -> AiryValue:
    """Ai(z) = (1/2 pi i) int_C exp(t^3/3 - z t) dt, C from inf e^{-i pi/3} to inf e^{i pi/3},

    integrated by tanh-sinh quadrature in extended precision along two rays
    leaving the saddle sqrt(z).
    """
    z = complex(z)
    if dps is None:
        dps = 30 + int((4.0 / 3.0) * abs(z) ** 1.5 / np.log(10.0))
    with mpmath.workdps(dps):
        zz = mpmath.mpc(z)
        p = mpmath.sqrt(zz)
        up = mpmath.exp(1j * mpmath.pi / 3)
        dn = mpmath.exp(-1j * mpmath.pi / 3)

        def f(r):
            return mpmath.exp((p + r * up) ** 3 / 3 - zz * (p + r * up)) * up - mpmath.exp(
                (p + r * dn) ** 3 / 3 - zz * (p + r * dn)
            ) * dn

        val = mpmath.quad(f, [0, 0.5, 1, 2, 3, 4, 6, 8, mpmath.inf]) / (2j * mpmath.pi)
        return AiryValue(z, complex(val), "quadrature_oracle")


def ai_reference(z: complex) -> complex:
    """Independent extended-precision Ai from mpmath's own evaluator."""
    with mpmath.workdps(40):
        return complex(mpmath.airyai(mpmath.mpc(complex(z))))


def a0_reference(z: complex, dps: int | None = None) -> complex:
    """A0(z) = 1/3 - int_0^{e^{i pi/6} z} Ai, via mpmath's closed-form antiderivative.

    The subtraction cancels about Re zeta / ln 10 digits, so the working
    precision grows with the decay of A0.
    """
    if dps is None:
        dps = 40 + int(max(0.0, float(np.real(_zeta(np.array([ROT * complex(z)])))[0])) / np.log(10.0))
    with mpmath.workdps(dps):
        w = mpmath.exp(1j * mpmath.pi / 6) * mpmath.mpc(complex(z))
        return complex(mpmath.mpf(1) / 3 - mpmath.airyai(w, derivative=-1))


def a0_quadrature_oracle(z: complex, dps: int = 30) -> complex:
    """A0(z) by rotating the contour onto the ray e^{i pi/6}(z + s), s >= 0."""
    with mpmath.workdps(dps):
        rot = mpmath.exp(1j * mpmath.pi / 6)
        zz = mpmath.mpc(complex(z))
        val = mpmath.quad(lambda s: mpmath.airyai(rot * (zz + s)), [0, 1, 4, 16, mpmath.inf])
        return complex(rot * val)


# ---------------------------------------------------------------- A0 along a ray

_GL_ORDER = 20
_PANEL_SCALE = 2.0
_DECAY_NATS = 42.0


@lru_cache(maxsize=4)
def _gauss_legendre(m: int):
    x, w = special.roots_legendre(m)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass
class RayProfile:
    """A0 along z + s: panel breaks s_p, log A0(z + s_p), and the integrand at panel nodes."""

    z: complex
    breaks: np.ndarray
    log_a0_breaks: np.ndarray
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    log_g: np.ndarray = field(repr=False)  # log of g(s) = -A0'(z + s) = e^{i pi/6} Ai(e^{i pi/6}(z + s))
    tail_ratio: float = 0.0

    @property
    def log_a0(self) -> complex:
        return complex(self.log_a0_breaks[0])

    def log_a0_at(self, s: float) -> complex:
        i = int(np.argmin(np.abs(self.breaks - s)))
        if abs(self.breaks[i] - s) > 1e-12 * max(1.0, abs(s)):
            raise KeyError(f"s={s} is not a panel break")
        return complex(self.log_a0_breaks[i])

    def exp_moment(self, a: float, upto: float) -> complex:
        """int_0^upto e^{a t} A0(z + t) dt / A0(z); upto must be a panel break."""
        p_end = int(np.argmin(np.abs(self.breaks - upto)))
        total = 0.0 + 0.0j
        ref = self.log_a0
        for p in range(p_end):
            s0, s1 = self.breaks[p], self.breaks[p + 1]
            h = s1 - s0
            # int e^{at} dt over the panel, relative to e^{a s0}
            box = h if a == 0 else np.expm1(a * h) / a
            a0_end = np.exp(self.log_a0_breaks[p + 1] - ref)
            s = self.nodes[p]
            kern = (s - s0) if a == 0 else np.expm1(a * (s - s0)) / a
            g = np.exp(self.log_g[p] - ref)
            total += np.exp(a * s0) * (a0_end * box + self.weights[p] @ (g * kern))
        return complex(total)


def _panel_breaks(z: complex, forced: tuple[float, ...]) -> np.ndarray:
    breaks = [0.0]
    s = 0.0
    w0 = ROT * z
    fmax = max(forced) if forced else 0.0
    # |A0(z + s_f)| ~ exp(-min_{s >= s_f} Re zeta): stop once the integrand has
    # fallen _DECAY_NATS below that level for the furthest forced point
    low = float(np.real(_zeta(np.array([ROT * (z + fmax)])))[0])
    if fmax == 0.0:
        low = min(low, float(np.real(_zeta(np.array([w0])))[0]))
    while True:
        h = min(_PANEL_SCALE / (1.0 + sqrt(abs(z + s))), 2.0)
        s += h
        breaks.append(s)
        rz = float(np.real(_zeta(np.array([ROT * (z + s)])))[0])
        if s >= fmax:
            low = min(low, rz)
        if s > fmax and rz - low > _DECAY_NATS:
            break
        if s > 1e4:
            raise AiryConvergenceError("A0 ray quadrature did not decay")
    br = np.array(sorted(set(breaks) | set(float(f) for f in forced)))
    # drop slivers created by forced breaks
    keep = np.concatenate([[True], np.diff(br) > 1e-9])
    forced_mask = np.isin(br, np.array(forced, dtype=float)) if forced else np.zeros(br.size, bool)
    return br[keep | forced_mask]


def ray_profile(z: complex, forced: tuple[float, ...] = ()) -> RayProfile:
    z = complex(z)
    if abs(z) > GUARD:
        raise AiryOverflowError(f"argument outside |z| <= {GUARD:g}")
    br = _panel_breaks(z, tuple(forced))
    xg, wg = _gauss_legendre(_GL_ORDER)
    h = np.diff(br)
    nodes = br[:-1, None] + h[:, None] * xg[None, :]
    weights = h[:, None] * wg[None, :]
    w = ROT * (z + nodes.ravel())
    log_g = (np.log(ROT) + log_airy_ai(w)).reshape(nodes.shape)
    # panel sums in log scale with per-panel reference
    ref = np.max(np.real(log_g), axis=1)
    J = np.sum(weights * np.exp(log_g - ref[:, None]), axis=1)
    s_end = br[-1]
    w_end = ROT * (z + s_end)
    tail = np.exp(log_airy_ai(np.array([w_end]))[0]) / np.sqrt(w_end)  # int_{w_end}^inf Ai ~ Ai(w)/sqrt(w)
    P = len(h)
    logs = np.empty(P + 1, dtype=complex)
    # reverse accumulation: A0(z + s_p) = sum_{q >= p} e^{ref_q} J_q + tail
    log_tail = np.log(tail) if tail != 0 else -np.inf
    acc_log = log_tail
    logs[P] = log_tail
    for p in range(P - 1, -1, -1):
        base = ref[p]
        acc = J[p] + (np.exp(acc_log - base) if np.isfinite(np.real(acc_log)) else 0.0)
        acc_log = base + np.log(acc)
        logs[p] = acc_log
    tail_ratio = float(abs(np.exp(log_tail - logs[0]))) if np.isfinite(np.real(log_tail)) else 0.0
    if tail_ratio > 1e-13:
        raise AiryConvergenceError(f"A0 tail estimate {tail_ratio:.2e} did not drop below 1e-13")
    return RayProfile(z=z, breaks=br, log_a0_breaks=logs, nodes=nodes, weights=weights, log_g=log_g, tail_ratio=tail_ratio)


def log_a0(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.array([ray_profile(zz).log_a0 for zz in z.ravel()]).reshape(z.shape)


def a0(z: complex) -> A0Value:
    la = log_a0(z)[0]
    return A0Value(complex(z), complex(np.exp(la)), complex(-ROT * airy_ai(ROT * complex(z))[0]))


def log_derivative_a0(z) -> np.ndarray:
    """A0'(z) / A0(z), vectorized."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    la = log_a0(z)
    if np.any(np.real(la) < np.log(1e-300)):
        raise ZeroDivisionError("|A0(z)| below 1e-300")
    return -ROT * np.exp(log_airy_ai(ROT * z) - la)


def eta(z: complex, x: float, both: bool = False) -> EtaValue:
    """eta(z, x) = A0(z + x) / A0(z); optionally also exp(int_0^x A0'/A0(z + t) dt)."""
    x = float(x)
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return EtaValue(complex(z), 0.0, 1.0 + 0.0j, 1.0 + 0.0j if both else None)
    prof = ray_profile(z, (x,))
    val = np.exp(prof.log_a0_at(x) - prof.log_a0)
    alt = None
    if both:
        m = max(8, int(np.ceil(x * (1.0 + sqrt(abs(z) + x)))))
        xg, wg = _gauss_legendre(_GL_ORDER)
        edges = np.linspace(0.0, x, m + 1)
        t = (edges[:-1, None] + np.diff(edges)[:, None] * xg[None, :]).ravel()
        wt = (np.diff(edges)[:, None] * wg[None, :]).ravel()
        alt = complex(np.exp(wt @ log_derivative_a0(complex(z) + t)))
    return EtaValue(complex(z), x, complex(val), alt)


# ---------------------------------------------------------------- a(delta)


@dataclass(frozen=True)
class SupResult:
    delta: float
    value: float
    argmax: complex
    converged: bool
    starts: int
    grid_check: float | None = None


def _re_logder_line(x: np.ndarray, delta: float) -> np.ndarray:
    return np.real(log_derivative_a0(np.asarray(x, dtype=float) + 1j * delta))


def a_of_delta(delta: float, starts: int = 5, grid_check: bool = False) -> SupResult:
    """sup Re(A0'/A0) over Im z <= delta, searched on the line Im z = delta.

    The restriction to the boundary line is a maximum-principle heuristic
    (Re of an analytic function); grid_check=True compares with a 2-D grid
    over -3 <= Im z <= delta.
    """
    if not 0.0 <= delta <= 0.2:
        raise ValueError("delta must lie in [0, 0.2]")
    xs = np.arange(-20.0, 20.0001, 0.25)
    vals = _re_logder_line(xs, delta)
    interior = np.where((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:]))[0] + 1
    # local maxima first, then the best remaining samples as extra starts
    rest = [i for i in np.argsort(vals[1:-1])[::-1] + 1 if i not in set(interior)]
    order = np.array(list(interior[np.argsort(vals[interior])[::-1]]) + rest)[:starts]
    best_x, best_v, ok = None, -np.inf, True
    for i in order:
        res = optimize.minimize_scalar(
            lambda t: -float(_re_logder_line(np.array([t]), delta)[0]),
            bracket=(xs[i] - 0.25, xs[i], xs[i] + 0.25) if i in set(interior) else (xs[i], xs[i] + 0.25),
            method="golden",
            options={"xtol": 1e-10},
        )
        ok &= bool(res.success)
        if -res.fun > best_v:
            best_v, best_x = -res.fun, res.x
    gc = None
    if grid_check:
        X, Y = np.meshgrid(np.linspace(-15, 15, 121), np.linspace(-3.0, delta, 25))
        gc = float(np.max(np.real(log_derivative_a0(X + 1j * Y))))
    return SupResult(float(delta), float(best_v), complex(best_x, delta), ok, int(order.size), gc)


# ---------------------------------------------------------------- lemma checks


def logder_margins(z: np.ndarray) -> dict:
    """Ratios for |A0'/A0| <= 1 + |z|^{1/2} and Re A0'/A0 <= -c (1 + |z|^{1/2})."""
    z = np.asarray(z, dtype=complex)
    ld = log_derivative_a0(z)
    scale = 1.0 + np.sqrt(np.abs(z))
    return {
        "max_abs_ratio": float(np.max(np.abs(ld) / scale)),
        "measured_c": float(np.min(-np.real(ld) / scale)),
    }


def a0_zero_margin(z: np.ndarray) -> dict:
    """Smallest |A0| on a sample, raw and relative to the decay factor exp(-(2/3)(e^{i pi/6} z)^{3/2})."""
    z = np.asarray(z, dtype=complex).ravel()
    la = log_a0(z)
    scaled = np.real(la) + np.real(_zeta(ROT * z))
    i = int(np.argmin(scaled))
    return {
        "min_abs": float(np.exp(np.min(np.real(la)))),
        "min_scaled": float(np.exp(scaled[i])),
        "argmin_scaled": complex(z[i]),
    }
