import math

import numpy as np
import pytest
from scipy import integrate

from jumpspde import levy
from jumpspde.generator import (
    CylinderFunction,
    eval_L,
    eval_L_eps,
    generator_gap_sweep,
    jump_moments,
    sample_ball,
)
from jumpspde.spectral import ModelSpec, NemytskiiFn, SpectralBasis, apply_A

N = 8
PI = math.pi
ONE_SIDED = levy.StableLike(1.0, 1.0, "positive")
SYMMETRIC = levy.StableLike(1.0, 1.0)


def model(sigma=None, b1=None):
    return ModelSpec(SpectralBasis(N), sigma or NemytskiiFn.linear(1.0), np.zeros(N), burgers=True, b1=b1)


def e(k):
    z = np.zeros(N)
    z[k - 1] = 1.0
    return z


def fd_gradient(f, z, h=1e-4):
    g = np.zeros(len(z))
    for i in range(len(z)):
        d = np.zeros(len(z))
        d[i] = h
        g[i] = (f(z + d) - f(z - d)) / (2 * h)
    return g


def fd_hessian(f, z, h=1e-3):
    n = len(z)
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            di = np.zeros(n)
            dj = np.zeros(n)
            di[i] = h
            dj[j] = h
            H[i, j] = (f(z + di + dj) - f(z + di - dj) - f(z - di + dj) + f(z - di - dj)) / (4 * h * h)
    return H


def fd_L(m, f, z):
    """Diffusion generator from finite differences of f over all N coordinates."""
    g = fd_gradient(f, z)
    H = fd_hessian(f, z)
    s = m.diffusion(z)
    return -g @ apply_A(z, m.basis) + g @ m.drift(z) + 0.5 * s @ H @ s


SQUARE = CylinderFunction([1], {(2,): 1.0})
LINEAR = CylinderFunction([1], {(1,): 1.0})
CUBE = CylinderFunction([1], {(3,): 1.0})
MIXED = CylinderFunction([1, 2, 4], {(1, 1, 1): 0.7, (2, 0, 1): -1.3, (0, 2, 0): 0.4, (1, 0, 0): 2.0, (0, 0, 0): 5.0})
QUAD = CylinderFunction([2, 3], {(2, 0): 1.0, (1, 1): -0.5, (0, 1): 3.0})


def test_eval_L_examples():
    m = model()
    assert eval_L(m, SQUARE, e(1)) == pytest.approx(-2 * PI**2 + 1, rel=1e-13)
    assert eval_L(m, SQUARE, e(1)) == pytest.approx(-18.7392089, abs=1e-7)
    assert eval_L(m, LINEAR, e(1)) == pytest.approx(-PI**2, rel=1e-13)
    const = CylinderFunction([3], {(0,): 4.2})
    assert eval_L(m, const, np.random.default_rng(0).standard_normal(N)) == 0


@pytest.mark.parametrize("f", [SQUARE, CUBE, MIXED, QUAD])
def test_eval_L_matches_finite_differences(f):
    m = model(NemytskiiFn.scaled_sine(0.8, 1.5), b1=NemytskiiFn.linear(-0.3))
    rng = np.random.default_rng(1)
    for _ in range(5):
        z = rng.uniform(-1, 1, N) / np.arange(1, N + 1)
        assert eval_L(m, f, z) == pytest.approx(fd_L(m, f, z), rel=1e-5, abs=1e-6)


@pytest.mark.parametrize("f", [CUBE, MIXED])
def test_directional_derivatives_match_finite_differences(f):
    rng = np.random.default_rng(2)
    for _ in range(10):
        y = rng.standard_normal(len(f.modes))
        w = rng.standard_normal(len(f.modes))
        z = np.zeros(N)
        dz = np.zeros(N)
        idx = [k - 1 for k in f.modes]
        z[idx] = y
        dz[idx] = w
        line = lambda t: f(z + t * dz)
        t0, d1, d2, d3 = f.directional(y, w)
        h = 1e-3
        assert t0 == pytest.approx(f(z), rel=1e-12, abs=1e-12)
        fd1 = (8 * (line(h) - line(-h)) - (line(2 * h) - line(-2 * h))) / (12 * h)
        assert d1 == pytest.approx(fd1, abs=1e-6)
        assert 2 * d2 == pytest.approx((line(h) - 2 * line(0) + line(-h)) / h**2, abs=1e-5)
        fd3 = (line(2 * h) - 2 * line(h) + 2 * line(-h) - line(-2 * h)) / (2 * h**3)
        assert 6 * d3 == pytest.approx(fd3, abs=1e-4)


def jump_integral_quadrature(m, measure, eps, f, z):
    """Drift part plus the jump integral, integrated numerically against nu."""
    a = levy.alpha(measure, eps)
    s = m.diffusion(z)
    grad_s = fd_gradient(lambda t: f(z + t[0] * s), np.zeros(1), h=1e-5)[0]

    def integrand(x):
        w = s * x / a
        return (f(z + w) - f(z) - grad_s * x / a) * measure.density(x)

    total = integrate.quad(integrand, 0, eps, epsabs=1e-11, epsrel=1e-9, limit=200)[0]
    total += integrate.quad(integrand, -eps, 0, epsabs=1e-11, epsrel=1e-9, limit=200)[0]
    g = fd_gradient(f, z)
    return -g @ apply_A(z, m.basis) + g @ m.drift(z) + total


# quad reports roundoff near x = 0 where the integrand cancels; the result still meets tolerance
@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("measure", [ONE_SIDED, SYMMETRIC, levy.StableLike(2.0, 0.6, "positive")])
@pytest.mark.parametrize("f", [CUBE, MIXED])
def test_eval_L_eps_matches_quadrature(measure, f):
    m = model(NemytskiiFn.linear(0.9))
    z = np.random.default_rng(3).uniform(-1, 1, N) / np.arange(1, N + 1)
    got = eval_L_eps(m, measure, 0.1, f, z)
    assert got == pytest.approx(jump_integral_quadrature(m, measure, 0.1, f, z), rel=1e-5, abs=1e-6)


@pytest.mark.parametrize("measure", [SYMMETRIC, ONE_SIDED, levy.UniformDensity(1.0, 1.0),
                                     levy.Atomic(((0.05, 1.0), (-0.03, 2.0)))])
@pytest.mark.parametrize("f", [SQUARE, LINEAR, QUAD])
def test_quadratic_functions_exact(measure, f):
    m = model(NemytskiiFn.scaled_sine(1.0, 1.0))
    rng = np.random.default_rng(4)
    for eps in (0.5, 0.1, 0.04):
        for _ in range(5):
            z = rng.standard_normal(N)
            lhs, rhs = eval_L_eps(m, measure, eps, f, z), eval_L(m, f, z)
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_cubic_gap_one_sided_example():
    m = model()
    gap = eval_L_eps(m, ONE_SIDED, 0.04, CUBE, e(1)) - eval_L(m, CUBE, e(1))
    assert gap == pytest.approx(0.1, abs=1e-9)
    assert eval_L_eps(m, SYMMETRIC, 0.04, CUBE, e(1)) - eval_L(m, CUBE, e(1)) == 0


def test_cubic_gap_closed_form_and_bound():
    m = model(NemytskiiFn.linear(0.7))
    rng = np.random.default_rng(5)
    for eps in (0.3, 0.05, 0.002):
        a, _, third = jump_moments(ONE_SIDED, eps)
        assert abs(third) <= eps / a
        for _ in range(5):
            z = rng.standard_normal(N) * 0.3
            s = m.diffusion(z)[0]
            gap = eval_L_eps(m, ONE_SIDED, eps, CUBE, z) - eval_L(m, CUBE, z)
            # (1/6) D3f(s,s,s) = s_1^3 for f = z_1^3
            assert gap == pytest.approx(s**3 * third, rel=1e-9, abs=1e-14)


def test_sweep_cubic_one_sided():
    m = model()
    z = sample_ball(N, 1.0, 32, np.random.default_rng(6))
    sweep = generator_gap_sweep(m, ONE_SIDED, CUBE, 1.0, z, [2.0**-k for k in range(2, 10)])
    assert not sweep.exact
    assert sweep.slope == pytest.approx(0.5, abs=1e-6)
    for row in sweep.rows:
        assert row.sup_gap == pytest.approx(row.predicted_gap, rel=1e-9)
        assert row.ratio == pytest.approx(row.eps / row.alpha)


def test_sweep_cubic_symmetric_and_quadratic():
    m = model()
    z = sample_ball(N, 2.0, 32, np.random.default_rng(7))
    grid = [2.0**-k for k in range(2, 10)]
    sweep = generator_gap_sweep(m, SYMMETRIC, CUBE, 2.0, z, grid)
    assert max(r.sup_gap for r in sweep.rows) <= 1e-14 * 100  # relative to |Lf| ~ 1e2
    sweep = generator_gap_sweep(m, ONE_SIDED, QUAD, 2.0, z, grid)
    assert sweep.exact and sweep.slope is None


def test_sample_ball_radius():
    z = sample_ball(5, 1.5, 1000, np.random.default_rng(0))
    assert np.linalg.norm(z, axis=1).max() <= 1.5


def test_cylinder_validation():
    with pytest.raises(ValueError):
        CylinderFunction([1], {(4,): 1.0})
    with pytest.raises(ValueError):
        CylinderFunction([1, 1], {(1, 1): 1.0})
    with pytest.raises(ValueError):
        CylinderFunction([1, 2, 3, 4, 5], {(1, 0, 0, 0, 0): 1.0})
    with pytest.raises(ValueError):
        CylinderFunction([1, 2], {(1,): 1.0})
    assert MIXED.degree == 3 and QUAD.degree == 2


def test_alpha_zero_raises():
    with pytest.raises(levy.SmallJumpMassAbsent):
        eval_L_eps(model(), levy.Atomic(((0.5, 1.0),)), 0.1, CUBE, e(1))
