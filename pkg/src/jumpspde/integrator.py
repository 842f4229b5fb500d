"""Semi-implicit Euler time stepping of the Galerkin system.

Both drivers are scalar (one Brownian motion, or one Poisson random measure
on the real line), so the noise of a step reduces to a per-path multiplier
``xi`` and the kick is ``sigma(u) * xi`` with ``u`` frozen at the start of
the step:

* Brownian: ``xi = dB``;
* small jumps: ``xi = (sum of jump sizes in the step - dt * band mean) / alpha``.

Noise is generated per path from its own stream, then all paths of a batch
are stepped together.  Per-path arithmetic does not depend on the batch, so
results are identical however paths are grouped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import levy
from .errors import NonFinite
from .spectral import ModelSpec, h_norm


@dataclass(frozen=True)
class TimeGrid:
    T: float
    dt: float
    save_stride: int = 1

    def __post_init__(self):
        if not self.T > 0 or not self.dt > 0:
            raise ValueError(f"T and dt must be positive, got T={self.T}, dt={self.dt}")
        n = round(self.T / self.dt)
        if n < 1 or abs(n * self.dt - self.T) > 1e-9 * self.T:
            raise ValueError(f"T/dt must be a positive integer, got {self.T}/{self.dt}")
        if int(self.save_stride) != self.save_stride or self.save_stride < 1:
            raise ValueError(f"save_stride must be an integer >= 1, got {self.save_stride}")

    @property
    def n_steps(self) -> int:
        return round(self.T / self.dt)

    def save_mask(self) -> np.ndarray:
        """Boolean over step indices 0..n_steps (state after that many steps)."""
        k = np.arange(self.n_steps + 1)
        mask = k % self.save_stride == 0
        mask[-1] = True
        return mask


@dataclass(frozen=True)
class Brownian:
    pass


@dataclass(frozen=True)
class SmallJump:
    measure: levy.LevyMeasure
    epsilon: float
    plan: levy.CutoffPlan
    budget: float = levy.DEFAULT_JUMP_BUDGET
    alpha: float = field(init=False)

    def __post_init__(self):
        a = levy.alpha(self.measure, self.epsilon)
        if a == 0:
            raise levy.SmallJumpMassAbsent(f"alpha({self.epsilon}) = 0")
        levy.jump_intensity(self.measure, self.plan.delta, self.epsilon)
        object.__setattr__(self, "alpha", a)

    @classmethod
    def build(cls, measure, epsilon, neglect_tol=levy.DEFAULT_NEGLECT_TOL,
              budget=levy.DEFAULT_JUMP_BUDGET) -> "SmallJump":
        return cls(measure, epsilon, levy.inner_cutoff(measure, epsilon, neglect_tol), budget)

    @property
    def ratio(self) -> float:
        return self.epsilon / self.alpha


NoiseDriver = Union[Brownian, SmallJump]


def brownian_increments(grid: TimeGrid, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(grid.n_steps) * math.sqrt(grid.dt)


@dataclass
class PathNoise:
    """Step multipliers of a batch of paths, shape ``(paths, steps)``."""

    xi: np.ndarray
    max_abs: np.ndarray  # largest |x_j| / alpha within each step; zero for Brownian
    jump_count: np.ndarray

    @classmethod
    def stack(cls, items: Sequence["PathNoise"]) -> "PathNoise":
        return cls(
            np.vstack([p.xi for p in items]),
            np.vstack([p.max_abs for p in items]),
            np.concatenate([p.jump_count for p in items]),
        )


def path_noise(driver: NoiseDriver, grid: TimeGrid, rng: np.random.Generator) -> PathNoise:
    n = grid.n_steps
    if isinstance(driver, Brownian):
        dB = brownian_increments(grid, rng)
        return PathNoise(dB[None, :], np.zeros((1, n)), np.zeros(1, dtype=np.int64))
    events = levy.sample_jumps(driver.measure, driver.plan, grid.T, rng, driver.budget)
    idx = np.minimum((events.times / grid.dt).astype(np.int64), n - 1)
    sums = np.bincount(idx, weights=events.sizes, minlength=n)
    comp = levy.compensator_mean(driver.measure, driver.plan.delta, driver.epsilon)
    xi = (sums - grid.dt * comp) / driver.alpha
    big = np.zeros(n)
    np.maximum.at(big, idx, np.abs(events.sizes))
    return PathNoise(xi[None, :], (big / driver.alpha)[None, :],
                     np.array([len(events)], dtype=np.int64))


def step(model: ModelSpec, state: np.ndarray, kick: np.ndarray, dt: float) -> np.ndarray:
    """One linearly implicit Euler step: implicit in A, explicit in drift and noise."""
    lam = model.basis.eigenvalues
    return (state + dt * model.drift(state) + kick) / (1.0 + lam * dt)


@dataclass
class BatchResult:
    final: np.ndarray        # (paths, N); NaN rows for blown-up paths
    sup_h: np.ndarray        # sup over save times of |X_t|_H
    max_jump: np.ndarray     # J statistic
    max_sigma: np.ndarray    # max over steps of |sigma(u)|_H
    jump_count: np.ndarray
    blown: np.ndarray        # bool
    saved: Optional[np.ndarray] = None  # (paths, saves, N) when requested


def integrate(
    models: Sequence[ModelSpec],
    noise: PathNoise,
    grid: TimeGrid,
    keep_saved: bool = False,
) -> tuple[list[BatchResult], np.ndarray]:
    """Step every model in ``models`` through the same noise.

    Returns one :class:`BatchResult` per model and, for each model, the sup
    over all grid times of ``|X^model - X^models[0]|_H`` (shape
    ``(len(models), paths)``), which is the coupled difference used with
    common random numbers.
    """
    n_models = len(models)
    B = noise.xi.shape[0]
    N = models[0].basis.N
    dt = grid.dt
    save_mask = grid.save_mask()

    states = [np.tile(m.h, (B, 1)) for m in models]
    sup_h = [h_norm(s) for s in states]
    J = [np.zeros(B) for _ in models]
    max_sigma = [np.zeros(B) for _ in models]
    blown = [np.zeros(B, dtype=bool) for _ in models]
    sup_diff = np.zeros((n_models, B))
    saved = [[s.copy()] for s in states] if keep_saved else None

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(grid.n_steps):
            xi = noise.xi[:, k]
            big = noise.max_abs[:, k]
            for v, model in enumerate(models):
                a = states[v]
                sig = model.diffusion(a)
                sig_norm = h_norm(sig)
                max_sigma[v] = np.maximum(max_sigma[v], sig_norm)
                J[v] = np.maximum(J[v], sig_norm * big)
                a = step(model, a, sig * xi[:, None], dt)
                bad = ~np.all(np.isfinite(a), axis=-1)
                if bad.any():
                    blown[v] |= bad
                    a[bad] = 0.0
                states[v] = a
                if save_mask[k + 1]:
                    sup_h[v] = np.maximum(sup_h[v], h_norm(a))
                    if keep_saved:
                        saved[v].append(a.copy())
            if n_models > 1:
                for v in range(1, n_models):
                    sup_diff[v] = np.maximum(sup_diff[v], h_norm(states[v] - states[0]))

    results = []
    for v in range(n_models):
        final = states[v]
        final[blown[v]] = np.nan
        stacked = None
        if keep_saved:
            stacked = np.stack(saved[v], axis=1)
            stacked[blown[v]] = np.nan
        results.append(BatchResult(final, sup_h[v], J[v], max_sigma[v],
                                   noise.jump_count.copy(), blown[v], stacked))
    return results, sup_diff


@dataclass
class PathSample:
    times: np.ndarray
    states: np.ndarray
    max_jump: float
    max_sigma: float
    jump_count: int
    blowup: bool


def simulate_path(model: ModelSpec, driver: NoiseDriver, grid: TimeGrid,
                  rng: np.random.Generator) -> PathSample:
    """Simulate one path and keep the states at the save times."""
    noise = path_noise(driver, grid, rng)
    (res,), _ = integrate([model], noise, grid, keep_saved=True)
    times = np.flatnonzero(grid.save_mask()) * grid.dt
    sample = PathSample(times, res.saved[0], float(res.max_jump[0]), float(res.max_sigma[0]),
                        int(res.jump_count[0]), bool(res.blown[0]))
    return sample


def require_finite(sample: PathSample) -> PathSample:
    if sample.blowup:
        raise NonFinite("path blew up (non-finite coefficients)")
    return sample
