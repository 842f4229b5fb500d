"""Monte Carlo ensembles and the statistics built on them."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist

from . import levy
from .errors import BlowUpThreshold, ConfigError, EmptySample
from .integrator import BatchResult, Brownian, NoiseDriver, PathNoise, SmallJump, TimeGrid, integrate, path_noise
from .spectral import ModelSpec, h_norm
from .streams import GOLDEN_GAMMA, MASK64, mix64, path_stream

# Paths are grouped in fixed-size chunks; the grouping never depends on the
# number of worker threads.
CHUNK_SIZE = 250
BLOWUP_LIMIT = 0.10


def derive_seed(master_seed: int, tag: int) -> int:
    """Seed of an auxiliary ensemble; ``tag = 0`` returns the master seed."""
    if tag == 0:
        return master_seed
    return mix64((master_seed + tag * GOLDEN_GAMMA) & MASK64)


def _run_chunks(models: Sequence[ModelSpec], driver: NoiseDriver, grid: TimeGrid,
                M: int, seed: int, threads: int = 1):
    def work(start):
        stop = min(start + CHUNK_SIZE, M)
        noise = PathNoise.stack([path_noise(driver, grid, path_stream(seed, i))
                                 for i in range(start, stop)])
        return integrate(models, noise, grid)

    starts = range(0, M, CHUNK_SIZE)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]

    merged = []
    for v in range(len(models)):
        pieces = [p[0][v] for p in parts]
        merged.append(BatchResult(
            final=np.vstack([r.final for r in pieces]),
            sup_h=np.concatenate([r.sup_h for r in pieces]),
            max_jump=np.concatenate([r.max_jump for r in pieces]),
            max_sigma=np.concatenate([r.max_sigma for r in pieces]),
            jump_count=np.concatenate([r.jump_count for r in pieces]),
            blown=np.concatenate([r.blown for r in pieces]),
        ))
    sup_diff = np.hstack([p[1] for p in parts])
    return merged, sup_diff


@dataclass
class FunctionalVector:
    """Per-path functionals, one row per path."""

    coeffs: np.ndarray   # <X_T, e_k>, k = 1..K
    h2: np.ndarray       # |X_T|_H^2
    sup_h: np.ndarray    # sup over save times of |X_t|_H
    max_jump: np.ndarray
    tail: np.ndarray     # share of |X_T|_H^2 carried by modes k > N/2

    def features(self) -> np.ndarray:
        """Vectors fed to the two-sample statistics: first K modes plus |X_T|_H^2."""
        return np.column_stack([self.coeffs, self.h2])

    def subset(self, sel) -> "FunctionalVector":
        return FunctionalVector(self.coeffs[sel], self.h2[sel], self.sup_h[sel],
                                self.max_jump[sel], self.tail[sel])


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if len(x) == 0:
        return math.nan, math.nan
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.nan
    return mean, se


@dataclass
class EnsembleReport:
    functionals: FunctionalVector   # non-blown paths, in path order
    paths: int
    blowups: int
    moments: dict                   # p -> (E[sup_t |X_t|_H^p], standard error)
    mean_J: float
    se_J: float
    max_sigma: np.ndarray

    @property
    def kept(self) -> int:
        return self.paths - self.blowups


def summarize(res: BatchResult, N: int, K: int, paths: int) -> EnsembleReport:
    keep = ~res.blown
    final = res.final[keep]
    h2 = np.sum(final * final, axis=-1)
    high = np.sum(final[:, N // 2:] ** 2, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        tail = np.where(h2 > 0, high / h2, 0.0)
    fv = FunctionalVector(final[:, :K].copy(), h2, res.sup_h[keep], res.max_jump[keep], tail)
    moments = {p: _mean_se(fv.sup_h**p) for p in (2, 4)}
    mean_J, se_J = _mean_se(fv.max_jump)
    return EnsembleReport(fv, paths, int(res.blown.sum()), moments, mean_J, se_J,
                          res.max_sigma[keep])


def _check_blowups(report: EnsembleReport) -> None:
    if report.blowups > BLOWUP_LIMIT * report.paths:
        raise BlowUpThreshold(
            f"{report.blowups} of {report.paths} paths blew up (limit {BLOWUP_LIMIT:.0%})"
        )


def run_ensemble(model: ModelSpec, driver: NoiseDriver, grid: TimeGrid, M: int,
                 master_seed: int, K: int = 3, threads: int = 1) -> EnsembleReport:
    if M < 1:
        raise ConfigError(f"ensemble size must be at least 1, got {M}")
    if not 1 <= K <= model.basis.N:
        raise ConfigError(f"K must lie in [1, {model.basis.N}], got {K}")
    (res,), _ = _run_chunks([model], driver, grid, M, master_seed, threads)
    report = summarize(res, model.basis.N, K, M)
    _check_blowups(report)
    return report


def _fsum_mean(d: np.ndarray) -> float:
    return math.fsum(d.ravel()) / d.size


def energy_distance(A, B) -> float:
    """V-statistic ``2 E|a-b| - E|a-a'| - E|b-b'|`` over all pairs.

    Sums are exactly rounded, so the value is invariant to sample order and
    symmetric in ``A`` and ``B`` bit for bit.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if len(A) == 0 or len(B) == 0:
        raise EmptySample("energy distance needs two nonempty samples")
    cross = _fsum_mean(cdist(A, B))
    within_a = _fsum_mean(cdist(A, A))
    within_b = _fsum_mean(cdist(B, B))
    return max(math.fsum([2.0 * cross, -within_a, -within_b]), 0.0)


def ks_statistic(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptySample("KS statistic needs two nonempty samples")
    return float(stats.ks_2samp(a, b).statistic)


@dataclass
class ConvergenceRow:
    eps: float
    alpha: float
    ratio: float
    energy_dist: float
    baseline: float
    mean_J: float
    J_bound: float
    m2: float
    m4: float
    blowups: int
    # not written to CSV
    se_J: float = math.nan
    se_m4: float = math.nan
    report: Optional[EnsembleReport] = None

    CSV_COLUMNS = ("eps", "alpha", "ratio", "energy_dist", "baseline", "mean_J",
                   "J_bound", "m2", "m4", "blowups")

    def csv_values(self) -> tuple:
        return tuple(getattr(self, c) for c in self.CSV_COLUMNS)


def split_half_baseline(features: np.ndarray) -> float:
    half = len(features) // 2
    return energy_distance(features[:half], features[half:])


def convergence_sweep(model: ModelSpec, measure: levy.LevyMeasure, eps_list, grid: TimeGrid,
                      M: int, seed: int, K: int = 3,
                      neglect_tol: float = levy.DEFAULT_NEGLECT_TOL,
                      budget: float = levy.DEFAULT_JUMP_BUDGET,
                      threads: int = 1) -> tuple[list[ConvergenceRow], EnsembleReport]:
    """Compare jump-driven ensembles against a Brownian reference for each eps.

    The reference uses ``seed``; all jump ensembles share ``derive_seed(seed, 1)``.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("eps_list must be strictly decreasing")
    drivers = [SmallJump.build(measure, e, neglect_tol, budget) for e in eps_list]
    if M < 2:
        raise ConfigError("convergence sweep needs at least 2 paths for the split-half baseline")

    reference = run_ensemble(model, Brownian(), grid, M, seed, K, threads)
    ref_features = reference.functionals.features()
    baseline = split_half_baseline(ref_features)

    rows = []
    jump_seed = derive_seed(seed, 1)
    for drv in drivers:
        rep = run_ensemble(model, drv, grid, M, jump_seed, K, threads)
        dist = energy_distance(rep.functionals.features(), ref_features)
        mean_sup = float(np.mean(rep.functionals.sup_h))
        rows.append(ConvergenceRow(
            eps=drv.epsilon, alpha=drv.alpha, ratio=drv.ratio, energy_dist=dist,
            baseline=baseline, mean_J=rep.mean_J, J_bound=drv.ratio * (1.0 + mean_sup),
            m2=rep.moments[2][0], m4=rep.moments[4][0], blowups=rep.blowups,
            se_J=rep.se_J, se_m4=rep.moments[4][1], report=rep,
        ))
    return rows, reference


@dataclass
class SigmaSweepRow:
    n: int
    delta: float
    exceed_prob: float
    stderr: float
    sup_diff: Optional[np.ndarray] = None

    CSV_COLUMNS = ("n", "delta", "exceed_prob", "stderr")

    def csv_values(self) -> tuple:
        return tuple(getattr(self, c) for c in self.CSV_COLUMNS)


def sigma_projection_sweep(model: ModelSpec, driver: SmallJump, n_list, grid: TimeGrid,
                           M: int, seed: int, delta: float,
                           threads: int = 1) -> list[SigmaSweepRow]:
    """Empirical ``P(sup_t |X^{n,eps}_t - X^eps_t|_H > delta)`` with common random numbers."""
    N = model.basis.N
    n_list = [int(n) for n in n_list]
    for n in n_list:
        if not 1 <= n <= N:
            raise ConfigError(f"projection size {n} outside [1, {N}]")
    if M < 1:
        raise ConfigError(f"ensemble size must be at least 1, got {M}")
    models = [model.with_projection(None)] + [model.with_projection(n) for n in n_list]
    results, sup_diff = _run_chunks(models, driver, grid, M, seed, threads)

    rows = []
    for v, n in enumerate(n_list, start=1):
        keep = ~(results[0].blown | results[v].blown)
        if keep.sum() < (1.0 - BLOWUP_LIMIT) * M:
            raise BlowUpThreshold(f"too many blow-ups in the projection sweep at n={n}")
        d = sup_diff[v][keep]
        p = float(np.mean(d > delta))
        rows.append(SigmaSweepRow(n, float(delta), p, math.sqrt(p * (1.0 - p) / len(d)), d))
    return rows
