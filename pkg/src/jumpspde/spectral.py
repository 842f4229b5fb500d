"""Diagonal spectral realization of the Gelfand triple on (0, 1).

States are coefficient vectors ``a_1..a_N`` in the Dirichlet sine basis
``e_k(x) = sqrt(2) sin(k pi x)``; every routine accepts a single vector or a
batch with coefficients along the last axis.

Pointwise operations (the Burgers term, Nemytskii maps) go through a
collocation grid of ``M = 3N + 1`` interior points ``x_j = j / P`` with
``P = M + 1``.  On that grid the trapezoidal rule integrates every
trigonometric polynomial of degree below ``2P`` exactly, which covers all
products that appear when pairing ``u^2`` against ``e_k'`` with ``k <= N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import fft

# coercivity constants of the diagonal realization: 2<Au,u> = 2||u||_V^2 exactly
COERCIVITY_ALPHA0 = 2.0
COERCIVITY_ALPHA1 = 2.0
COERCIVITY_LAMBDA0 = 0.0


@dataclass(frozen=True)
class SpectralBasis:
    N: int
    s: float = 1.0
    eigenvalues: np.ndarray = field(init=False, repr=False, compare=False)
    wavenumbers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if not 0 < self.s <= 1:
            raise ValueError(f"fractional power s must lie in (0, 1], got {self.s}")
        k = np.arange(1, self.N + 1, dtype=float)
        object.__setattr__(self, "wavenumbers", k)
        object.__setattr__(self, "eigenvalues", (math.pi**2 * k**2) ** self.s)

    @property
    def grid_size(self) -> int:
        """Number of interior collocation points."""
        return 3 * self.N + 1

    @property
    def grid(self) -> np.ndarray:
        P = self.grid_size + 1
        return np.arange(1, P) / P

    def basis_on_grid(self) -> np.ndarray:
        """Matrix ``E[k-1, j] = e_k(x_j)``; used by tests, not by the transforms."""
        return math.sqrt(2.0) * np.sin(np.pi * np.outer(self.wavenumbers, self.grid))

    def synthesize(self, a: np.ndarray) -> np.ndarray:
        """Coefficients -> values on the collocation grid."""
        a = np.asarray(a, dtype=float)
        padded = np.zeros(a.shape[:-1] + (self.grid_size,))
        padded[..., : self.N] = a
        return (math.sqrt(2.0) / 2.0) * fft.dst(padded, type=1, axis=-1)

    def analyze(self, g: np.ndarray) -> np.ndarray:
        """Grid values -> first N sine coefficients (discrete L2 projection)."""
        g = np.asarray(g, dtype=float)
        P = self.grid_size + 1
        y = fft.dst(g, type=1, axis=-1)
        return (math.sqrt(2.0) / (2.0 * P)) * y[..., : self.N]


def h_norm(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.sqrt(np.sum(a * a, axis=-1))


def v_norm(a: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.sqrt(np.sum(basis.eigenvalues * a * a, axis=-1))


def apply_A(a: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    return basis.eigenvalues * np.asarray(a, dtype=float)


def burgers_b2(a: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    """Dual coefficients ``d_k = <u u', e_k> = -1/2 int u^2 e_k'``.

    ``u^2`` vanishes at both ends, so the DCT-I over the closed grid reduces
    to the interior cosine sum.
    """
    if basis.s != 1:
        raise ValueError("the Burgers term is defined for the Dirichlet Laplacian (s = 1)")
    u = basis.synthesize(a)
    P = basis.grid_size + 1
    closed = np.zeros(u.shape[:-1] + (P + 1,))
    closed[..., 1:P] = u * u
    y = fft.dct(closed, type=1, axis=-1)[..., 1 : basis.N + 1]
    return -(math.sqrt(2.0) * math.pi / (4.0 * P)) * basis.wavenumbers * y


def skew_pairing(a: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    """``<B(u), u>``; zero up to roundoff."""
    a = np.asarray(a, dtype=float)
    return np.sum(burgers_b2(a, basis) * a, axis=-1)


def dual_norm(d: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    """V*-norm of a dual coefficient sequence: ``sqrt(sum d_k^2 / lambda_k)``."""
    d = np.asarray(d, dtype=float)
    return np.sqrt(np.sum(d * d / basis.eigenvalues, axis=-1))


def h2ii_residual(a: np.ndarray, b: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    """Slack in the one-sided bound for the Burgers nonlinearity.

    Returns ``<B(u)-B(v), u-v> - 1/2 ||u-v||_V^2 - 1/2 max_grid (u+v)^2 |u-v|_H^2``,
    which Young's inequality makes non-positive.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w = a - b
    pairing = np.sum((burgers_b2(a, basis) - burgers_b2(b, basis)) * w, axis=-1)
    peak = np.max(basis.synthesize(a + b) ** 2, axis=-1)
    return pairing - 0.5 * v_norm(w, basis) ** 2 - 0.5 * peak * h_norm(w) ** 2


@dataclass(frozen=True)
class NemytskiiFn:
    """Pointwise map ``s`` with ``s(0) = 0``: ``linear`` (``kappa x``) or ``scaled_sine`` (``a sin(b x)``)."""

    kind: str
    kappa: float = 0.0
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "scaled_sine"):
            raise ValueError(f"unknown Nemytskii kind {self.kind!r}")

    @classmethod
    def linear(cls, kappa: float) -> "NemytskiiFn":
        return cls("linear", kappa=kappa)

    @classmethod
    def scaled_sine(cls, a: float, b: float) -> "NemytskiiFn":
        return cls("scaled_sine", a=a, b=b)

    @property
    def lipschitz_constant(self) -> float:
        if self.kind == "linear":
            return abs(self.kappa)
        return abs(self.a * self.b)

    def __call__(self, x):
        if self.kind == "linear":
            return self.kappa * x
        return self.a * np.sin(self.b * x)


def nemytskii_apply(f: NemytskiiFn, a: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    """Coefficients of ``P_N s(u(.))``; exact ``kappa * u`` for the linear kind."""
    a = np.asarray(a, dtype=float)
    if f.kind == "linear":
        return f.kappa * a
    return basis.analyze(f(basis.synthesize(a)))


def project_sigma(n: int, w: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the first ``n`` modes."""
    w = np.asarray(w, dtype=float)
    N = w.shape[-1]
    if not 1 <= n <= N:
        raise ValueError(f"projection size must lie in [1, {N}], got {n}")
    out = w.copy()
    out[..., n:] = 0.0
    return out


@dataclass(frozen=True)
class ModelSpec:
    basis: SpectralBasis
    sigma: NemytskiiFn
    h: np.ndarray
    burgers: bool = True
    b1: Optional[NemytskiiFn] = None
    sigma_projection_n: Optional[int] = None

    def __post_init__(self):
        h = np.zeros(self.basis.N)
        given = np.asarray(self.h, dtype=float).ravel()
        if len(given) > self.basis.N:
            raise ValueError(f"initial condition has {len(given)} modes, basis has {self.basis.N}")
        h[: len(given)] = given
        if not np.all(np.isfinite(h)):
            raise ValueError("initial condition must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        if self.burgers and self.basis.s != 1:
            raise ValueError("Burgers nonlinearity requires fractional power s = 1")
        n = self.sigma_projection_n
        if n is not None and not 1 <= n <= self.basis.N:
            raise ValueError(f"sigma_projection_n must lie in [1, {self.basis.N}], got {n}")

    def with_projection(self, n: Optional[int]) -> "ModelSpec":
        return ModelSpec(self.basis, self.sigma, self.h, self.burgers, self.b1, n)

    def drift(self, a: np.ndarray) -> np.ndarray:
        """Explicit part of the drift, ``b1(u) + b2(u)``, without ``-Au``."""
        out = np.zeros_like(np.asarray(a, dtype=float))
        if self.b1 is not None:
            out += nemytskii_apply(self.b1, a, self.basis)
        if self.burgers:
            out += burgers_b2(a, self.basis)
        return out

    def diffusion(self, a: np.ndarray) -> np.ndarray:
        """``sigma_n(u)`` if a projection is configured, else ``sigma(u)``."""
        out = nemytskii_apply(self.sigma, a, self.basis)
        if self.sigma_projection_n is not None:
            out = project_sigma(self.sigma_projection_n, out)
        return out
