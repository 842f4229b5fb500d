"""Diffusion and small-jump generators on polynomial cylinder functions.

For ``f(z) = g(<z, e_k1>, ..., <z, e_km>)`` with ``g`` of total degree at
most three, the jump integrand is exactly its second- and third-order Taylor
terms, so

    L^eps f - L f = 1/2 f''(z)[s, s] (M2 / alpha^2 - 1) + 1/6 f'''[s, s, s] M3 / alpha^3

with ``s = sigma(z)``, ``M2 = alpha^2`` and ``M3 = int_{|x|<=eps} x^3 nu(dx)``.
All derivatives are directional, read off the Taylor coefficients of
``t -> g(y + t w)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
from numpy.polynomial import polynomial as P

from . import levy
from .spectral import ModelSpec, apply_A


@dataclass(frozen=True)
class CylinderFunction:
    """``modes`` are 1-based mode indices; ``terms`` maps exponent tuples to coefficients."""

    modes: tuple[int, ...]
    terms: tuple[tuple[tuple[int, ...], float], ...]

    def __init__(self, modes, terms: Mapping | list):
        modes = tuple(int(k) for k in modes)
        items = terms.items() if isinstance(terms, Mapping) else terms
        terms = tuple((tuple(int(p) for p in exp), float(c)) for exp, c in items)
        if not 1 <= len(modes) <= 4:
            raise ValueError(f"cylinder functions use 1 to 4 modes, got {len(modes)}")
        if len(set(modes)) != len(modes) or min(modes) < 1:
            raise ValueError(f"modes must be distinct positive indices, got {modes}")
        for exp, _ in terms:
            if len(exp) != len(modes) or min(exp) < 0:
                raise ValueError(f"exponent {exp} does not match modes {modes}")
            if sum(exp) > 3:
                raise ValueError(f"total degree must be at most 3, got {exp}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "terms", terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, c in self.terms if c != 0), default=0)

    def coordinates(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float)[..., [k - 1 for k in self.modes]]

    def __call__(self, z: np.ndarray) -> float:
        y = self.coordinates(z)
        return math.fsum(c * float(np.prod(y ** np.array(e))) for e, c in self.terms)

    def directional(self, y: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Taylor coefficients ``[g(y), Dg[w], D2g[w,w]/2, D3g[w,w,w]/6]``."""
        out = np.zeros(4)
        for exp, c in self.terms:
            poly = np.array([c])
            for yi, wi, p in zip(y, w, exp):
                for _ in range(p):
                    poly = P.polymul(poly, [yi, wi])
            out[: len(poly)] += poly
        return out


def _sigma_modes(model: ModelSpec, f: CylinderFunction, z: np.ndarray) -> np.ndarray:
    return f.coordinates(model.diffusion(z))


def _drift_part(model: ModelSpec, f: CylinderFunction, z: np.ndarray) -> float:
    # -<A f'(z), z> + <b1(z) + b2(z), f'(z)> = Dg[-Az + b1 + b2] on the cylinder modes
    z = np.asarray(z, dtype=float)
    w = f.coordinates(-apply_A(z, model.basis) + model.drift(z))
    return f.directional(f.coordinates(z), w)[1]


def eval_L(model: ModelSpec, f: CylinderFunction, z: np.ndarray) -> float:
    """Diffusion generator ``L f(z)``."""
    y = f.coordinates(z)
    taylor = f.directional(y, _sigma_modes(model, f, z))
    # 1/2 <f'' s, s> = taylor[2]
    return _drift_part(model, f, z) + taylor[2]


def jump_moments(m: levy.LevyMeasure, eps: float) -> tuple[float, float, float]:
    """``(alpha, M2 / alpha^2, M3 / alpha^3)``."""
    m2 = levy.truncated_second_moment(m, eps)
    if m2 == 0:
        raise levy.SmallJumpMassAbsent(f"alpha({eps}) = 0")
    a = math.sqrt(m2)
    return a, m2 / (a * a), levy.truncated_third_moment(m, eps) / a**3


def eval_L_eps(model: ModelSpec, m: levy.LevyMeasure, eps: float,
               f: CylinderFunction, z: np.ndarray) -> float:
    """Small-jump generator ``L^eps f(z)``, evaluated through the two jump moments."""
    _, second, third = jump_moments(m, eps)
    y = f.coordinates(z)
    taylor = f.directional(y, _sigma_modes(model, f, z))
    # 1/6 D3f[s,s,s] = taylor[3]
    return _drift_part(model, f, z) + taylor[2] * second + taylor[3] * third


def sample_ball(N: int, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples from the H-ball of the given radius in N modes."""
    g = rng.standard_normal((count, N))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / N)
    return g * r[:, None]


@dataclass
class GapRow:
    eps: float
    alpha: float
    ratio: float
    sup_gap: float
    predicted_gap: float

    CSV_COLUMNS = ("eps", "alpha", "ratio", "sup_gap", "predicted_gap")

    def csv_values(self) -> tuple:
        return tuple(getattr(self, c) for c in self.CSV_COLUMNS)


@dataclass
class GapSweep:
    rows: list[GapRow]
    slope: Optional[float]  # None when every gap is zero up to roundoff
    exact: bool


def generator_gap_sweep(model: ModelSpec, m: levy.LevyMeasure, f: CylinderFunction,
                        ball_radius: float, z_samples: np.ndarray, eps_grid,
                        exact_tol: float = 1e-12) -> GapSweep:
    """Sup over sampled ``z`` of ``|L^eps f(z) - L f(z)|`` along an eps grid."""
    z_samples = np.asarray(z_samples, dtype=float)
    norms = np.linalg.norm(z_samples, axis=1)
    if np.any(norms > ball_radius * (1 + 1e-12)):
        raise ValueError("sample points must lie in the ball")
    base = [eval_L(model, f, z) for z in z_samples]
    third_dir = [abs(f.directional(f.coordinates(z), _sigma_modes(model, f, z))[3])
                 for z in z_samples]
    scale = 1.0 + max(abs(b) for b in base)

    rows = []
    for eps in eps_grid:
        a, _, third = jump_moments(m, eps)
        gaps = [abs(eval_L_eps(model, m, eps, f, z) - b) for z, b in zip(z_samples, base)]
        rows.append(GapRow(float(eps), a, eps / a, max(gaps), max(third_dir) * abs(third)))

    sup = np.array([r.sup_gap for r in rows])
    exact = bool(np.all(sup <= exact_tol * scale))
    slope = None
    if not exact and len(rows) >= 2:
        slope = float(np.polyfit(np.log([r.eps for r in rows]), np.log(sup), 1)[0])
    return GapSweep(rows, slope, exact)

