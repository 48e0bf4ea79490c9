"""Noise primitives and the two private estimators.

* smooth-Laplace: T(F_n) + SS_beta(T, F_n) * (2 / alpha) * Z with Z standard
  Laplace and beta = alpha / (2 ln(1/delta)); (alpha, delta)-DP.
* exponential: density proportional to mu(theta) exp(-(n alpha / 2K) |Psi(F_n, theta)|);
  alpha-DP.  Sampled by tabulating the density on a grid and inverting the
  trapezoid CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import SampleData
from .errors import GridTooCoarse, ValidationError
from .functionals import FunctionalSpec
from .mestimation import (
    CauchyPrior,
    PriorSpec,
    PsiSpec,
    UniformPrior,
    solve_m_estimator,
)
from .seeding import as_rng
from .sensitivity import PrivacyParams, smooth_sensitivity

MAX_GRID = 2**22
# single-cell mass above which a table is rejected outright
COARSE_MASS = 0.5
# refinement target: two cells either side of a sharp peak can each hold just
# under half the mass, so refinement continues well below COARSE_MASS
REFINED_MASS = 0.05


class ZeroNoise:
    """Generator stand-in whose uniforms are all 1/2, so every Laplace draw is 0.

    Harness testing only: a release made with it is not private.
    """

    def random(self, size=None):
        return 0.5 if size is None else np.full(size, 0.5)


def laplace_draws(rng, size) -> np.ndarray:
    """Standard Laplace variates by inverse CDF: z = -sign(u - 1/2) ln(1 - 2|u - 1/2|)."""
    u = np.asarray(rng.random(size), dtype=float)
    while np.any(u == 0.0):  # ln(0); probability 2^-53 per draw
        u = np.where(u == 0.0, rng.random(u.shape), u)
    c = u - 0.5
    return -np.sign(c) * np.log(1.0 - 2.0 * np.abs(c)) + 0.0  # no negative zero


def laplace_draw(rng) -> float:
    return float(laplace_draws(rng, None))


@dataclass(frozen=True)
class PrivateEstimate:
    value: float
    nonprivate_value: float
    noise_scale: Optional[float]
    mechanism: str
    params: PrivacyParams
    seed: Optional[int] = None
    z: Optional[float] = None
    grid_size: Optional[int] = None

    def to_record(self) -> dict:
        """Flat record for CSV rows; privacy parameters first."""
        return {
            "alpha": self.params.alpha,
            "delta": self.params.delta,
            "mechanism": self.mechanism,
            "value": self.value,
            "nonprivate_value": self.nonprivate_value,
            "noise_scale": self.noise_scale,
            "seed": self.seed,
        }


def _seed_of(rng):
    return int(rng) if isinstance(rng, (int, np.integer)) else None


def smooth_sensitivity_release(
    T: FunctionalSpec, sample: SampleData, params: PrivacyParams, rng
) -> PrivateEstimate:
    seed = _seed_of(rng)
    gen = as_rng(rng)
    beta = params.beta
    ss = smooth_sensitivity(T, sample, beta).smooth
    scale = ss * 2.0 / params.alpha
    z = laplace_draw(gen)
    plug = T.evaluate(sample)
    return PrivateEstimate(plug + scale * z, plug, scale, "smooth-laplace", params, seed, z)


def replay(estimate: PrivateEstimate, T: FunctionalSpec, sample: SampleData) -> PrivateEstimate:
    """Recompute a seeded smooth-Laplace release."""
    if estimate.seed is None:
        raise ValidationError("seed", "only seeded releases can be replayed")
    return smooth_sensitivity_release(T, sample, estimate.params, estimate.seed)


def _exponent(psi: PsiSpec, sample: SampleData, params: PrivacyParams) -> float:
    return sample.n * params.alpha / (2.0 * psi.K)


def exp_mech_density(psi: PsiSpec, sample: SampleData, params: PrivacyParams, prior: PriorSpec, theta):
    """Unnormalised density mu(theta) exp(-(n alpha / 2K) |Psi(F_n, theta)|)."""
    c = _exponent(psi, sample, params)
    return prior.density(theta) * np.exp(-c * np.abs(psi.big_psi(sample, theta)))


@dataclass(frozen=True)
class DensityTable:
    """Tabulated exponential-mechanism density on a grid in the sampling axis."""

    axis: np.ndarray  # grid in theta (uniform prior) or in u = arctan(theta)
    cdf: np.ndarray
    masses: np.ndarray
    tangent: bool

    def to_theta(self, x):
        return np.tan(x) if self.tangent else x

    def sample(self, rng, size=None) -> np.ndarray:
        u = np.asarray(rng.random(size), dtype=float)
        j = np.clip(np.searchsorted(self.cdf, u, side="right") - 1, 0, len(self.masses) - 1)
        m = self.masses[j]
        frac = np.where(m > 0, (u - self.cdf[j]) / np.where(m > 0, m, 1.0), 0.5)
        x = self.axis[j] + np.clip(frac, 0.0, 1.0) * (self.axis[j + 1] - self.axis[j])
        return self.to_theta(x)


def exp_mech_table(
    psi: PsiSpec,
    sample: SampleData,
    params: PrivacyParams,
    prior: PriorSpec,
    grid_size: int,
    max_cell_mass: float = COARSE_MASS,
) -> DensityTable:
    if grid_size < 64:
        raise ValidationError("grid_size", "need at least 64 grid points")
    c = _exponent(psi, sample, params)
    if isinstance(prior, UniformPrior):
        axis = np.linspace(prior.lo, prior.hi, grid_size)
        theta, tangent = axis, False
    elif isinstance(prior, CauchyPrior):
        # mu(tan u) sec^2(u) = 1/pi, so the prior is flat in u
        axis = np.linspace(-math.pi / 2.0, math.pi / 2.0, grid_size)
        theta, tangent = np.tan(axis), True
    else:
        raise ValidationError("prior", f"unsupported prior {prior!r}")
    logw = -c * np.abs(psi.big_psi(sample, theta))
    w = np.exp(logw - logw.max())
    cells = 0.5 * (w[:-1] + w[1:]) * np.diff(axis)
    masses = cells / cells.sum()
    if masses.max() > max_cell_mass:
        raise GridTooCoarse(f"a single cell holds {masses.max():.3f} of the mass at grid_size={grid_size}")
    cdf = np.concatenate([[0.0], np.cumsum(masses)])
    cdf[-1] = 1.0
    return DensityTable(axis, cdf, masses, tangent)


def refined_table(psi, sample, params, prior, grid_size: int, refine: bool) -> DensityTable:
    if not refine:
        return exp_mech_table(psi, sample, params, prior, grid_size)
    size = grid_size
    while True:
        try:
            return exp_mech_table(psi, sample, params, prior, size, REFINED_MASS)
        except GridTooCoarse:
            if size * 2 > MAX_GRID:
                raise
            size *= 2


def exp_mech_sample(
    psi: PsiSpec,
    sample: SampleData,
    params: PrivacyParams,
    prior: PriorSpec,
    rng,
    grid_size: int = 1024,
    refine: bool = False,
) -> PrivateEstimate:
    """One draw from the exponential mechanism.

    A grid where one cell holds more than half the mass raises
    :class:`GridTooCoarse`.  With ``refine`` the grid is instead doubled until
    no cell holds more than ``REFINED_MASS``.
    """
    if params.delta != 0.0:
        raise ValidationError("delta", "the exponential mechanism is pure alpha-DP; set delta = 0")
    seed = _seed_of(rng)
    gen = as_rng(rng)
    table = refined_table(psi, sample, params, prior, grid_size, refine)
    value = float(table.sample(gen))
    plug = solve_m_estimator(psi, sample)
    return PrivateEstimate(value, plug, None, "exponential", params, seed, None, len(table.axis))


def group_privacy_factor(params: PrivacyParams, k: int) -> PrivacyParams:
    """Guarantee for datasets at Hamming distance k: (k alpha, k e^{(k-1) alpha} delta)."""
    if k < 1:
        raise ValidationError("k", "need k >= 1")
    return PrivacyParams(k * params.alpha, k * math.exp((k - 1) * params.alpha) * params.delta)


# Mechanism objects: callables (sample, rng) -> released value, used by the
# experiment harness.


@dataclass(frozen=True)
class SmoothLaplace:
    functional: FunctionalSpec
    params: PrivacyParams
    name = "smooth-laplace"

    def __post_init__(self):
        self.params.beta  # raises at delta = 0

    def release(self, sample, rng) -> PrivateEstimate:
        return smooth_sensitivity_release(self.functional, sample, self.params, rng)

    def __call__(self, sample, rng) -> float:
        return self.release(sample, rng).value

    def sample_many(self, sample, rng, size) -> np.ndarray:
        ss = smooth_sensitivity(self.functional, sample, self.params.beta).smooth
        return self.functional.evaluate(sample) + ss * 2.0 / self.params.alpha * laplace_draws(rng, size)

    def target(self, F) -> float:
        return self.functional.evaluate(F)

    def nonprivate(self, sample) -> float:
        return self.functional.evaluate(sample)


@dataclass(frozen=True)
class ExponentialMechanism:
    psi: PsiSpec
    prior: PriorSpec
    params: PrivacyParams
    grid_size: int = 1024
    refine: bool = True
    name = "exponential"

    def __post_init__(self):
        if self.params.delta != 0.0:
            raise ValidationError("delta", "the exponential mechanism is pure alpha-DP; set delta = 0")

    def release(self, sample, rng) -> PrivateEstimate:
        return exp_mech_sample(self.psi, sample, self.params, self.prior, rng, self.grid_size, self.refine)

    def __call__(self, sample, rng) -> float:
        table = refined_table(self.psi, sample, self.params, self.prior, self.grid_size, self.refine)
        return float(table.sample(rng))

    def sample_many(self, sample, rng, size) -> np.ndarray:
        table = refined_table(self.psi, sample, self.params, self.prior, self.grid_size, self.refine)
        return table.sample(rng, size)

    def target(self, F) -> float:
        return solve_m_estimator(self.psi, F, tol=1e-12)

    def nonprivate(self, sample) -> float:
        return solve_m_estimator(self.psi, sample)


@dataclass(frozen=True)
class PlugIn:
    """The non-private plug-in estimator, wrapped as a mechanism."""

    functional: FunctionalSpec
    name = "plug-in"
    params = None

    def __call__(self, sample, rng) -> float:
        return self.functional.evaluate(sample)

    def sample_many(self, sample, rng, size) -> np.ndarray:
        return np.full(size, self.functional.evaluate(sample))

    def target(self, F) -> float:
        return self.functional.evaluate(F)

    def nonprivate(self, sample) -> float:
        return self.functional.evaluate(sample)

