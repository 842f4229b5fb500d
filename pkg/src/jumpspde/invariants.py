"""Property suite for the spectral model and the measure toolkit.

Each check returns a :class:`Check`; the CLI prints them and exits nonzero
if any fails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import integrate

from . import levy
from .spectral import (
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


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.detail}"


def random_states(rng: np.random.Generator, count: int, N: int) -> np.ndarray:
    """Coefficients ``U(-1, 1) / k`` with a random overall scale in ``[0.1, 10]``."""
    k = np.arange(1, N + 1)
    a = rng.uniform(-1.0, 1.0, (count, N)) / k
    return a * 10.0 ** rng.uniform(-1.0, 1.0, (count, 1))


def quadrature_second_moment(m: levy.LevyMeasure, eps: float) -> float:
    """Independent route to ``int_{|x|<=eps} x^2 nu(dx)``: adaptive quadrature or a finite sum."""
    if isinstance(m, levy.Atomic):
        return math.fsum(w * x * x for x, w in m.atoms if abs(x) <= eps)
    top = min(eps, m.R) if isinstance(m, levy.UniformDensity) else eps
    pos, _ = integrate.quad(lambda x: x * x * m.density(x), 0.0, top, epsabs=0.0, epsrel=1e-13, limit=200)
    neg, _ = integrate.quad(lambda x: x * x * m.density(-x), 0.0, top, epsabs=0.0, epsrel=1e-13, limit=200)
    return pos + neg


def check_orthonormality(N: int) -> Check:
    basis = SpectralBasis(N)
    E = basis.basis_on_grid()
    err = float(np.abs(E @ E.T / (basis.grid_size + 1) - np.eye(N)).max())
    return Check(f"orthonormality N={N}", err <= 1e-12, f"max Gram error {err:.2e}")


def check_coercivity(rng, N: int = 32, count: int = 1000, s: float = 1.0) -> Check:
    basis = SpectralBasis(N, s)
    a = random_states(rng, count, N)
    lhs = 2.0 * np.sum(apply_A(a, basis) * a, axis=-1)
    rhs = 2.0 * v_norm(a, basis) ** 2
    err = float(np.max(np.abs(lhs - rhs) / rhs))
    return Check(f"coercivity identity N={N} s={s}", err <= 1e-12, f"max rel error {err:.2e}")


def check_skew(rng, N: int = 64, count: int = 1000) -> Check:
    basis = SpectralBasis(N)
    a = random_states(rng, count, N)
    ratio = np.abs(skew_pairing(a, basis)) / (1.0 + h_norm(a)) ** 3
    worst = float(ratio.max())
    return Check(f"skew pairing N={N}", worst <= 1e-10, f"max |<B(u),u>|/(1+|u|)^3 = {worst:.2e}")


def check_dual_norm(rng, N: int = 64, count: int = 10000) -> Check:
    basis = SpectralBasis(N)
    a = random_states(rng, count, N)
    ratio = dual_norm(burgers_b2(a, basis), basis) / (h_norm(a) ** 1.5 * v_norm(a, basis) ** 0.5)
    worst = float(ratio.max())
    bound = 1.0 / math.sqrt(2.0) + 1e-9
    return Check(f"dual-norm bound N={N}", worst <= bound, f"max ratio {worst:.6f} (bound {bound:.6f})")


def check_h2ii(rng, N: int = 32, count: int = 1000) -> Check:
    basis = SpectralBasis(N)
    k = np.arange(1, N + 1)
    a = rng.uniform(-1.0, 1.0, (count, N)) / k
    b = rng.uniform(-1.0, 1.0, (count, N)) / k
    worst = float(h2ii_residual(a, b, basis).max())
    return Check(f"h2ii residual N={N}", worst <= 1e-10, f"max residual {worst:.3e}")


def check_roundtrip(rng, N: int = 64, count: int = 100) -> Check:
    basis = SpectralBasis(N)
    a = rng.standard_normal((count, N))
    err = float(np.abs(basis.analyze(basis.synthesize(a)) - a).max() / np.abs(a).max())
    return Check(f"grid round trip N={N}", err <= 1e-13, f"max rel error {err:.2e}")


def check_projected_lipschitz(rng, f: NemytskiiFn, N: int = 32, n: int = 8, count: int = 1000) -> Check:
    basis = SpectralBasis(N)
    u = random_states(rng, count, N)
    v = random_states(rng, count, N)
    lhs = h_norm(project_sigma(n, nemytskii_apply(f, u, basis)) - project_sigma(n, nemytskii_apply(f, v, basis)))
    rhs = f.lipschitz_constant * h_norm(u - v)
    worst = float(np.max(lhs - rhs * (1 + 1e-12)))
    return Check(f"projected Lipschitz {f.kind} n={n}", worst <= 0, f"max excess {worst:.2e}")


def default_measures() -> list[levy.LevyMeasure]:
    return [
        levy.StableLike(1.0, 0.5),
        levy.StableLike(1.0, 1.0),
        levy.StableLike(1.0, 1.5),
        levy.StableLike(1.0, 1.0, "positive"),
        levy.UniformDensity(1.0, 1.0),
        levy.Atomic(((0.05, 1.0), (-0.05, 1.0), (0.3, 0.5))),
    ]


EPS_GRID = [2.0**-k for k in range(0, 13)]


def check_moment_oracle(m: levy.LevyMeasure, eps_grid=EPS_GRID) -> Check:
    worst = 0.0
    for eps in eps_grid:
        exact = levy.truncated_second_moment(m, eps)
        oracle = quadrature_second_moment(m, eps)
        if exact == oracle == 0:
            continue
        worst = max(worst, abs(exact - oracle) / abs(oracle))
    return Check(f"second moment vs quadrature {m!r}", worst <= 1e-9, f"max rel error {worst:.2e}")


def check_alpha_monotone(m: levy.LevyMeasure, eps_grid=EPS_GRID) -> Check:
    values = [levy.alpha(m, e) for e in sorted(eps_grid)]
    ok = all(b >= a for a, b in zip(values, values[1:]))
    return Check(f"alpha nondecreasing {m!r}", ok, "checked on log grid")


def check_stable_power_law(m: levy.StableLike, eps_grid=EPS_GRID) -> Check:
    sides = 2 if m.sided == "symmetric" else 1
    worst = 0.0
    for eps in eps_grid:
        law = math.sqrt((2 - m.beta) / (sides * m.c)) * eps ** (m.beta / 2)
        worst = max(worst, abs(levy.small_jump_ratio(m, eps) - law) / law)
    return Check(f"ratio power law {m!r}", worst <= 1e-9, f"max rel error {worst:.2e}")


def run_suite(model: ModelSpec, measure: levy.LevyMeasure, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks: list[Callable[[], Check]] = [
        lambda: check_orthonormality(model.basis.N),
        lambda: check_orthonormality(64),
        lambda: check_coercivity(rng, model.basis.N, s=model.basis.s),
        lambda: check_coercivity(rng, 32, s=0.5),
        lambda: check_skew(rng),
        lambda: check_dual_norm(rng),
        lambda: check_h2ii(rng),
        lambda: check_roundtrip(rng),
        lambda: check_projected_lipschitz(rng, model.sigma, N=model.basis.N,
                                          n=model.sigma_projection_n or max(1, model.basis.N // 2)),
        lambda: check_projected_lipschitz(rng, NemytskiiFn.scaled_sine(1.0, 2.0)),
    ]
    measures: Iterable[levy.LevyMeasure] = default_measures() + [measure]
    for m in measures:
        checks.append(lambda m=m: check_moment_oracle(m))
        checks.append(lambda m=m: check_alpha_monotone(m))
        if isinstance(m, levy.StableLike):
            checks.append(lambda m=m: check_stable_power_law(m))
    return [c() for c in checks]
