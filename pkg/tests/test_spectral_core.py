import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from couette_lab import spectral_core as sc


@pytest.fixture(scope="module")
def ops32():
    return sc.build_chebyshev(32)


@pytest.fixture(scope="module")
def ops65():
    return sc.build_chebyshev(65)


def test_endpoints_exact():
    ops = sc.build_chebyshev(8)
    assert ops.nodes[0] == 1.0 and ops.nodes[-1] == -1.0
    assert np.all(np.diff(ops.nodes) < 0)


def test_rejects_small_n():
    with pytest.raises(ValueError):
        sc.build_chebyshev(7)


def test_quadrature_y_squared(ops32):
    assert abs(ops32.integrate(ops32.nodes**2) - 2 / 3) < 1e-12


def test_d1_cubic(ops32):
    y = ops32.nodes
    assert np.max(np.abs(ops32.d1 @ y**3 - 3 * y**2)) < 1e-10


@pytest.mark.parametrize("n", [8, 33, 129, 257])
def test_d1_kills_constants(n):
    ops = sc.build_chebyshev(n)
    assert np.max(np.abs(ops.d1 @ np.ones(n))) < 1e-12 * n


@settings(max_examples=40, deadline=None)
@given(n=st.integers(8, 80), seed=st.integers(0, 10_000))
def test_quadrature_exact_on_polynomials(n, seed):
    rng = np.random.default_rng(seed)
    ops = sc.build_chebyshev(n)
    deg = n - 1
    c = rng.standard_normal(deg + 1)
    p = np.polynomial.Polynomial(c)
    exact = p.integ()(1.0) - p.integ()(-1.0)
    vals = p(ops.nodes)
    fine = np.linspace(-1, 1, 2001)
    assert abs(ops.integrate(vals) - exact) < 1e-12 * max(np.max(np.abs(p(fine))), 1.0) * 10


def test_poisson_zero(ops32):
    assert np.all(sc.poisson_streamfunction(ops32, np.zeros(32), 1.0) == 0)


def test_poisson_manufactured(ops32):
    y = ops32.nodes
    psi = (1 - y**2) ** 2
    # (d^2 - 1)(1 - y^2)^2 = 12 y^2 - 4 - (1 - y^2)^2
    omega = 12 * y**2 - 4 - psi
    assert np.max(np.abs(sc.poisson_streamfunction(ops32, omega, 1.0) - psi)) < 1e-9


def test_poisson_sine_k0(ops32):
    y = ops32.nodes
    s = np.sin(np.pi * (y + 1) / 2)
    omega = -((np.pi / 2) ** 2) * s
    assert np.max(np.abs(sc.poisson_streamfunction(ops32, omega, 0.0) - s)) < 1e-9


@pytest.mark.parametrize("n", [32, 65, 129])
@pytest.mark.parametrize("k", [0.0, 0.3, 2.0, 8.0])
def test_poisson_self_consistent(n, k):
    ops = sc.build_chebyshev(n)
    rng = np.random.default_rng(n)
    y = ops.nodes
    omega = np.exp(-((y - 0.3) ** 2) * 4) * (1 + 1j * rng.standard_normal()) + np.cos(3 * y)
    psi = sc.poisson_streamfunction(ops, omega, k)
    res = (ops.d2 @ psi - k**2 * psi - omega)[1:-1]
    assert np.max(np.abs(res)) < 1e-9 * np.max(np.abs(omega))
    assert psi[0] == 0 and psi[-1] == 0


def test_velocity_from_stream(ops32):
    y = ops32.nodes
    psi = (1 - y**2) ** 2
    u1, u2 = sc.velocity_from_stream(ops32, psi, 0.0)
    assert np.all(u2 == 0)
    u1, u2 = sc.velocity_from_stream(ops32, psi, 1.0)
    assert np.max(np.abs(u1 + 4 * y * (1 - y**2))) < 1e-10
    u1, u2 = sc.velocity_from_stream(ops32, np.zeros(32), 1.0)
    assert np.all(u1 == 0) and np.all(u2 == 0)


def test_norm_bundle_trivial(ops32):
    nb = sc.norm_bundle(ops32, np.zeros(32))
    assert nb.l1 == nb.l2 == nb.linf == nb.h1_seminorm == nb.h_minus1 == 0
    nb = sc.norm_bundle(ops32, np.ones(32))
    assert abs(nb.l1 - 2) < 1e-12 and abs(nb.l2 - np.sqrt(2)) < 1e-12 and nb.linf == 1


def test_h_minus1_dual_norm_sine(ops65):
    # brute-force dual norm over the sine basis: for f = phi_1, the sup of
    # |<f, g>| / ||g||_{H1} over span{phi_j} is attained at g = phi_1.
    y = ops65.nodes
    f = np.sin(np.pi * (y + 1) / 2)
    j = np.arange(1, 31)
    G = np.sin(np.pi * j[:, None] * (y[None, :] + 1) / 2)
    # Gram matrix of the H1 inner product is diagonal: 1 + (pi j / 2)^2
    b = G @ (ops65.quad_weights * f)
    brute = np.sqrt(np.sum(b**2 / (1 + (np.pi * j / 2) ** 2)))
    assert abs(sc.norm_bundle(ops65, f).h_minus1 - brute) < 1e-6
    assert abs(brute - 1 / np.sqrt(1 + np.pi**2 / 4)) < 1e-10


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_h_minus1_duality(seed):
    ops = sc.build_chebyshev(49)
    rng = np.random.default_rng(seed)
    y = ops.nodes
    F = sum(rng.standard_normal(2) @ [1, 1j] * np.cos(m * y + rng.uniform(0, 6)) for m in range(6))
    phi = (1 - y**2) * sum(rng.standard_normal(2) @ [1, 1j] * y**m for m in range(5))
    lhs = abs(ops.inner(F, phi))
    rhs = sc.h_minus1_norm(ops, F) * np.sqrt(ops.l2(ops.d1 @ phi) ** 2 + ops.l2(phi) ** 2)
    assert lhs <= rhs * (1 + 1e-10)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_derivative_forcing_h_minus1(seed):
    ops = sc.build_chebyshev(49)
    rng = np.random.default_rng(seed)
    y = ops.nodes
    f2 = sum(rng.standard_normal(2) @ [1, 1j] * np.sin(m * y + rng.uniform(0, 6)) for m in range(6))
    assert sc.h_minus1_norm(ops, ops.d1 @ f2) <= ops.l2(f2) * (1 + 1e-10)


def test_sine_expand_orthogonality(ops65):
    y = ops65.nodes
    a = sc.sine_expand(ops65, sc.sine_mode(1, y), 20)
    assert abs(a[0] - 1) < 1e-10 and np.max(np.abs(a[1:])) < 1e-10
    a = sc.sine_expand(ops65, sc.sine_mode(2, y) + 0.5 * sc.sine_mode(5, y), 20)
    expect = np.zeros(20)
    expect[1], expect[4] = 1.0, 0.5
    assert np.max(np.abs(a - expect)) < 1e-10


def test_sine_expand_parabola():
    ops = sc.build_chebyshev(129)
    a = sc.sine_expand(ops, 1 - ops.nodes**2, 64)
    # analytic: <1 - y^2, phi_j> = 16 (1 - (-1)^j) / (pi j)^3
    j = np.arange(1, 65)
    assert np.max(np.abs(a - 16 * (1 - (-1.0) ** j) / (np.pi * j) ** 3)) < 1e-12
    fine = sc.build_chebyshev(513)
    err = fine.l2(sc.sine_synthesize(a, fine.nodes) - (1 - fine.nodes**2))
    # Parseval: the truncation error is exactly the l2 norm of the analytic tail
    jt = np.arange(65, 200001)
    tail = np.sqrt(np.sum((16 * (1 - (-1.0) ** jt) / (np.pi * jt) ** 3) ** 2))
    assert abs(err - tail) < 1e-3 * tail
    assert err < 1e-5


def test_wirtinger(ops65):
    y = ops65.nodes
    assert abs(sc.wirtinger_check(ops65, sc.sine_mode(1, y)) - (2 / np.pi) ** 2) < 1e-8
    assert abs(sc.wirtinger_check(ops65, sc.sine_mode(2, y)) - (1 / np.pi) ** 2) < 1e-8
    assert sc.wirtinger_check(ops65, 1 - y**2) < (2 / np.pi) ** 2
    with pytest.raises(ValueError):
        sc.wirtinger_check(ops65, np.ones(65))


def test_wirtinger_argmax_on_basis(ops65):
    y = ops65.nodes
    ratios = [sc.wirtinger_check(ops65, sc.sine_mode(j, y)) for j in range(1, 12)]
    assert int(np.argmax(ratios)) == 0


def test_weighted_l2_against_dense_quadrature():
    ops = sc.build_chebyshev(65)
    y = ops.nodes
    f = np.cos(2 * y) + 1j * y**3
    w = sc.WeightProfile("rho_k", 0.1)
    ref_x = np.linspace(-1, 1, 400001)
    fx = np.cos(2 * ref_x) + 1j * ref_x**3
    ref = np.sqrt(np.trapezoid(np.abs(w(ref_x) * fx) ** 2, ref_x))
    assert abs(sc.weighted_l2(ops, f, w, 1.0) - ref) < 1e-8
    ref_half = np.sqrt(np.trapezoid(w(ref_x) * np.abs(fx) ** 2, ref_x))
    assert abs(sc.weighted_l2(ops, f, w, 0.5) - ref_half) < 1e-8
    # singular weight rho^(-1/2): compare with exact integral of a polynomial
    g = np.ones(65)
    # int rho^(-1/2) = 2 (1 - delta) + 2 * int_0^delta (s/delta)^(-1/2) ds = 2 - 2 delta + 4 delta
    assert abs(sc.weighted_l2(ops, g, w, -0.25) ** 2 - (2 + 2 * 0.1)) < 1e-12
    s = sc.WeightProfile("one_minus_abs_y_sqrt")
    ref_s = np.sqrt(np.trapezoid(s(ref_x) ** 2 * np.abs(fx) ** 2, ref_x))
    assert abs(sc.weighted_l2(ops, f, s, 1.0) - ref_s) < 1e-8


def test_resample_roundtrip():
    ops = sc.build_chebyshev(33)
    f = np.exp(ops.nodes) * (1 + 0.5j)
    up = sc.resample(f, 97)
    assert np.max(np.abs(up - np.exp(sc.build_chebyshev(97).nodes) * (1 + 0.5j))) < 1e-13
    assert np.max(np.abs(sc.resample(up, 33) - f)) < 1e-13
