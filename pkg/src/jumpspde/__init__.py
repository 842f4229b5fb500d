"""Spectral-Galerkin simulation of SPDEs driven by scaled small-jump noise and
by Brownian noise, with the tools to compare the two."""

from .levy import (
    Atomic,
    CutoffPlan,
    StableLike,
    UniformDensity,
    alpha,
    compensator_mean,
    inner_cutoff,
    jump_intensity,
    ratio_verdict,
    sample_jumps,
    small_jump_ratio,
    truncated_second_moment,
)
from .spectral import ModelSpec, NemytskiiFn, SpectralBasis
from .integrator import Brownian, SmallJump, TimeGrid, simulate_path
from .ensemble import convergence_sweep, energy_distance, run_ensemble, sigma_projection_sweep

__version__ = "0.1.0"
