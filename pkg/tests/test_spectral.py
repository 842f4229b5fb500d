import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from jumpspde.spectral import (
    ModelSpec,
    NemytskiiFn,
    SpectralBasis,
    apply_A,
    burgers_b2,
    dual_norm,
    h2ii_residual,
    h_norm,
    nemytskii_apply,
    project_sigma,
    skew_pairing,
    v_norm,
)

PI = math.pi


def unit(N, k):
    e = np.zeros(N)
    e[k - 1] = 1.0
    return e


def dense_field(a, x):
    k = np.arange(1, len(a) + 1)
    return math.sqrt(2) * np.sin(PI * np.outer(x, k)) @ a


def dense_burgers(a, n_points=100_001):
    """-1/2 int u^2 e_k' by composite Simpson on a fine grid."""
    from scipy.integrate import simpson
    x = np.linspace(0, 1, n_points)
    u2 = dense_field(a, x) ** 2
    return np.array([-0.5 * simpson(u2 * math.sqrt(2) * k * PI * np.cos(k * PI * x), x=x)
                     for k in range(1, len(a) + 1)])


def test_eigenvalues():
    b = SpectralBasis(4)
    assert np.allclose(b.eigenvalues, PI**2 * np.arange(1, 5) ** 2)
    assert np.all(np.diff(b.eigenvalues) > 0)
    assert SpectralBasis(4, 0.5).eigenvalues[1] == pytest.approx(2 * PI)
    with pytest.raises(ValueError):
        SpectralBasis(0)
    with pytest.raises(ValueError):
        SpectralBasis(4, 1.5)


@pytest.mark.parametrize("N", [1, 7, 64])
def test_orthonormal_on_grid(N):
    b = SpectralBasis(N)
    E = b.basis_on_grid()
    assert np.abs(E @ E.T / (b.grid_size + 1) - np.eye(N)).max() <= 1e-12


def test_transforms_match_matrix_form():
    b = SpectralBasis(12)
    a = np.random.default_rng(0).standard_normal(12)
    E = b.basis_on_grid()
    assert np.allclose(b.synthesize(a), a @ E, atol=1e-13)
    g = np.random.default_rng(1).standard_normal(b.grid_size)
    assert np.allclose(b.analyze(g), E @ g / (b.grid_size + 1), atol=1e-13)


def test_norms_and_A():
    N = 6
    e1 = unit(N, 1)
    b = SpectralBasis(N)
    assert h_norm(e1) == 1.0
    assert v_norm(e1, b) == pytest.approx(PI)
    assert np.allclose(apply_A(e1, b), PI**2 * e1)
    half = SpectralBasis(N, 0.5)
    assert np.allclose(apply_A(unit(N, 2), half), 2 * PI * unit(N, 2))


@settings(max_examples=50)
@given(arrays(np.float64, 16, elements=st.floats(-10, 10)))
def test_coercivity_identity(a):
    b = SpectralBasis(16)
    lhs = 2 * np.dot(apply_A(a, b), a)
    rhs = 2 * v_norm(a, b) ** 2
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


def test_burgers_on_e1():
    b = SpectralBasis(8)
    d = burgers_b2(unit(8, 1), b)
    expected = np.zeros(8)
    expected[1] = PI / math.sqrt(2)
    assert np.allclose(d, expected, atol=1e-13)
    assert d[1] == pytest.approx(2.2214415, abs=1e-7)
    assert np.all(burgers_b2(np.zeros(8), b) == 0)


def test_burgers_matches_dense_quadrature():
    a = np.random.default_rng(5).uniform(-1, 1, 10) / np.arange(1, 11)
    b = SpectralBasis(10)
    assert np.allclose(burgers_b2(a, b), dense_burgers(a), atol=1e-9)


def test_burgers_requires_laplacian():
    with pytest.raises(ValueError):
        burgers_b2(np.ones(4), SpectralBasis(4, 0.5))


def test_skew_pairing_examples():
    b = SpectralBasis(64)
    assert skew_pairing(np.zeros(64), b) == 0
    assert abs(skew_pairing(unit(64, 1), b)) <= 1e-14
    a = np.random.default_rng(3).standard_normal(64)
    a /= h_norm(a)
    assert abs(skew_pairing(a, b)) <= 1e-10


def test_dual_norm_examples():
    b = SpectralBasis(8)
    e1 = unit(8, 1)
    d = dual_norm(burgers_b2(e1, b), b)
    assert d == pytest.approx(1 / (2 * math.sqrt(2)), rel=1e-12)
    assert dual_norm(burgers_b2(np.zeros(8), b), b) == 0
    ratio = d / (h_norm(e1) ** 1.5 * v_norm(e1, b) ** 0.5)
    assert ratio == pytest.approx(0.19947, abs=1e-5)
    assert ratio < 1 / math.sqrt(2)


def test_dual_norm_bound_chain_numerically():
    # ||B(u)||_{V*}^2 <= |u|_{L4}^4 / 4 and |u|_{L4}^4 <= 2 |u|_H^3 ||u||_V, via dense quadrature
    rng = np.random.default_rng(8)
    b = SpectralBasis(12)
    x = np.linspace(0, 1, 20_001)
    for _ in range(20):
        a = rng.standard_normal(12) / np.arange(1, 13) ** rng.uniform(0, 2)
        u = dense_field(a, x)
        l4 = np.trapezoid(u**4, x)
        assert dual_norm(burgers_b2(a, b), b) ** 2 <= l4 / 4 * (1 + 1e-6)
        assert l4 <= 2 * h_norm(a) ** 3 * v_norm(a, b) * (1 + 1e-6)


def test_h2ii_residual_examples():
    b = SpectralBasis(16)
    rng = np.random.default_rng(4)
    u = rng.uniform(-1, 1, 16) / np.arange(1, 17)
    assert h2ii_residual(u, u, b) == 0
    r = h2ii_residual(u, np.zeros(16), b)
    peak = np.max(b.synthesize(u) ** 2)
    assert r == pytest.approx(skew_pairing(u, b) - 0.5 * v_norm(u, b) ** 2 - 0.5 * peak * h_norm(u) ** 2)
    assert r <= 0


def test_h2ii_residual_random_pairs():
    b = SpectralBasis(32)
    rng = np.random.default_rng(9)
    k = np.arange(1, 33)
    u = rng.uniform(-1, 1, (1000, 32)) / k
    v = rng.uniform(-1, 1, (1000, 32)) / k
    assert h2ii_residual(u, v, b).max() <= 1e-10


def test_nemytskii_linear():
    b = SpectralBasis(8)
    a = np.random.default_rng(2).standard_normal(8)
    assert np.array_equal(nemytskii_apply(NemytskiiFn.linear(1.0), a, b), a)
    assert np.allclose(nemytskii_apply(NemytskiiFn.linear(2.5), unit(8, 1), b), 2.5 * unit(8, 1))


def test_nemytskii_sine_matches_dense_projection():
    from scipy.integrate import simpson
    N = 16
    b = SpectralBasis(N)
    got = nemytskii_apply(NemytskiiFn.scaled_sine(1.0, 1.0), unit(N, 1), b)
    x = np.linspace(0, 1, 10_001)
    g = np.sin(math.sqrt(2) * np.sin(PI * x))
    oracle = [simpson(g * math.sqrt(2) * np.sin(k * PI * x), x=x) for k in range(1, N + 1)]
    assert np.allclose(got, oracle, atol=1e-8)


def test_grid_round_trip_exact():
    b = SpectralBasis(64)
    a = np.random.default_rng(6).standard_normal((20, 64))
    assert np.abs(b.analyze(b.synthesize(a)) - a).max() <= 1e-13 * np.abs(a).max()


def test_nemytskii_lipschitz_constant():
    f = NemytskiiFn.scaled_sine(0.7, 3.0)
    assert f.lipschitz_constant == pytest.approx(2.1)
    assert f(0.0) == 0 and NemytskiiFn.linear(-2.0)(0.0) == 0
    x, y = np.random.default_rng(0).standard_normal((2, 1000)) * 5
    assert np.all(np.abs(f(x) - f(y)) <= f.lipschitz_constant * np.abs(x - y) + 1e-15)


def test_project_sigma():
    w = np.random.default_rng(1).standard_normal(10)
    assert np.array_equal(project_sigma(10, w), w)
    p = project_sigma(3, w)
    assert np.all(p[3:] == 0) and np.array_equal(p[:3], w[:3])
    assert h_norm(p) <= h_norm(w)
    with pytest.raises(ValueError):
        project_sigma(0, w)
    with pytest.raises(ValueError):
        project_sigma(11, w)


@pytest.mark.parametrize("f", [NemytskiiFn.linear(0.5), NemytskiiFn.scaled_sine(1.0, 2.0)])
def test_projection_keeps_lipschitz(f):
    b = SpectralBasis(32)
    rng = np.random.default_rng(12)
    k = np.arange(1, 33)
    u = rng.uniform(-1, 1, (1000, 32)) / k
    v = rng.uniform(-1, 1, (1000, 32)) / k
    for n in (4, 16, 32):
        lhs = h_norm(project_sigma(n, nemytskii_apply(f, u, b)) - project_sigma(n, nemytskii_apply(f, v, b)))
        assert np.all(lhs <= f.lipschitz_constant * h_norm(u - v) * (1 + 1e-12))


def test_model_spec_validation():
    b = SpectralBasis(8)
    m = ModelSpec(b, NemytskiiFn.linear(1.0), np.array([1.0, 2.0]))
    assert m.h.shape == (8,) and m.h[1] == 2.0
    with pytest.raises(ValueError):
        ModelSpec(SpectralBasis(8, 0.5), NemytskiiFn.linear(1.0), np.zeros(8), burgers=True)
    with pytest.raises(ValueError):
        ModelSpec(b, NemytskiiFn.linear(1.0), np.zeros(8), sigma_projection_n=9)
    with pytest.raises(ValueError):
        ModelSpec(b, NemytskiiFn.linear(1.0), np.zeros(9))
    assert ModelSpec(SpectralBasis(8, 0.5), NemytskiiFn.linear(1.0), np.zeros(8), burgers=False).basis.s == 0.5


def test_model_diffusion_projection():
    b = SpectralBasis(8)
    a = np.arange(1.0, 9.0)
    m = ModelSpec(b, NemytskiiFn.linear(2.0), np.zeros(8), sigma_projection_n=3)
    assert np.array_equal(m.diffusion(a), np.r_[2 * a[:3], np.zeros(5)])
    assert np.array_equal(m.with_projection(None).diffusion(a), 2 * a)
