"""M-estimation with bounded, monotone psi functions.

Psi(G, theta) is computed exactly for samples and for every analytic model
(the models' CDFs are piecewise linear, so the integrals are closed form).
Roots are found by bisection: monotonicity in theta is guaranteed, smoothness
is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import DistributionModel, SampleData, draw_matrix
from .errors import (
    DegenerateDerivative,
    EpsTooLarge,
    NonDifferentiable,
    NoSignChange,
    Unbounded,
    ValidationError,
)
from .seeding import derive_rng


class PsiSpec:
    """A psi(x, theta) with range in [-K, K], nondecreasing in theta."""

    scale: float = 1.0
    name = ""

    @property
    def K(self) -> float:
        raise NotImplementedError

    def psi(self, x, theta):
        raise NotImplementedError

    def big_psi(self, dist, theta):
        """Psi(dist, theta) = integral of psi(x, theta) d dist(x); vectorised in theta."""
        theta = np.asarray(theta, dtype=float)
        if isinstance(dist, SampleData):
            out = self._sample_psi(dist.values, theta)
        else:
            out = self._model_psi(dist, theta)
        return out if np.ndim(out) else float(out)

    def to_record(self) -> dict:
        rec = {"kind": self.name}
        if self.scale != 1.0:
            rec["scale"] = repr(float(self.scale))
        return rec


@dataclass(frozen=True)
class SignMedian(PsiSpec):
    """psi(x, theta) = sign(theta - x); the root is the (lower) median."""

    scale: float = 1.0
    name = "sign_median"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValidationError("psi.scale", "scale must be positive")

    @property
    def K(self):
        return self.scale

    def psi(self, x, theta):
        return self.scale * np.sign(np.asarray(theta, dtype=float) - np.asarray(x, dtype=float))

    def _sample_psi(self, x, theta):
        n = x.size
        below = np.searchsorted(x, theta, side="left")
        above = n - np.searchsorted(x, theta, side="right")
        return self.scale * (below - above) / n

    def _model_psi(self, model, theta):
        p = model.pieces
        total = np.zeros_like(theta)
        for k, a in zip(p.knots, p.atoms):
            if a > 0:
                total = total + a * np.sign(theta - k)
        for i, mass in enumerate(p.segment_masses if len(p.knots) > 1 else []):
            if mass > 0:
                lo, hi = p.knots[i], p.knots[i + 1]
                frac = np.clip((theta - lo) / (hi - lo), 0.0, 1.0)
                total = total + mass * (2.0 * frac - 1.0)
        return self.scale * total

    def rows_psi(self, rows, theta):
        n = rows.shape[1]
        below = (rows < theta[:, None]).sum(axis=1)
        above = (rows > theta[:, None]).sum(axis=1)
        return self.scale * (below - above) / n


@dataclass(frozen=True)
class ClippedShift(PsiSpec):
    """Huber-type psi(x, theta) = clamp(theta - x, -c, c)."""

    c: float = 1.0
    scale: float = 1.0
    name = "clipped_shift"

    def __post_init__(self):
        if not self.c > 0:
            raise ValidationError("psi.c", "clip level must be positive")
        if not self.scale > 0:
            raise ValidationError("psi.scale", "scale must be positive")

    @property
    def K(self):
        return self.scale * self.c

    def psi(self, x, theta):
        d = np.asarray(theta, dtype=float) - np.asarray(x, dtype=float)
        return self.scale * np.clip(d, -self.c, self.c)

    def _antiderivative(self, y):
        c = self.c
        ay = np.abs(y)
        return np.where(ay <= c, 0.5 * y * y, c * ay - 0.5 * c * c)

    def _sample_psi(self, x, theta):
        c, n = self.c, x.size
        csum = np.concatenate([[0.0], np.cumsum(x)])
        low = np.searchsorted(x, theta - c, side="right")
        high = np.searchsorted(x, theta + c, side="left")
        mid = high - low
        total = c * low - c * (n - high) + theta * mid - (csum[high] - csum[low])
        return self.scale * total / n

    def _model_psi(self, model, theta):
        p = model.pieces
        total = np.zeros_like(theta)
        for k, a in zip(p.knots, p.atoms):
            if a > 0:
                total = total + a * np.clip(theta - k, -self.c, self.c)
        for i, mass in enumerate(p.segment_masses if len(p.knots) > 1 else []):
            if mass > 0:
                lo, hi = p.knots[i], p.knots[i + 1]
                part = self._antiderivative(theta - lo) - self._antiderivative(theta - hi)
                total = total + mass / (hi - lo) * part
        return self.scale * total

    def rows_psi(self, rows, theta):
        return self.scale * np.clip(theta[:, None] - rows, -self.c, self.c).mean(axis=1)

    def to_record(self):
        rec = super().to_record()
        rec["c"] = repr(float(self.c))
        return rec


def psi_from_record(record) -> PsiSpec:
    rec = dict(record)
    kind = rec.pop("kind", None)
    scale = float(rec.pop("scale", 1.0))
    if kind == "sign_median":
        spec = SignMedian(scale)
    elif kind == "clipped_shift":
        spec = ClippedShift(float(rec.pop("c", 1.0)), scale)
    else:
        raise ValidationError("psi.kind", f"unknown psi {kind!r}")
    if rec:
        raise ValidationError(f"psi.{sorted(rec)[0]}", "unknown key")
    return spec


def big_psi(psi: PsiSpec, dist, theta):
    return psi.big_psi(dist, theta)


def big_psi_prime(psi: PsiSpec, dist: DistributionModel, theta: float) -> float:
    """d/dtheta Psi(dist, theta), from the model's density and masses."""
    p = dist.pieces
    if isinstance(psi, SignMedian):
        if p.atom_at(theta) > 0:
            raise NonDifferentiable(f"sign psi has no derivative at the atom theta={theta}")
        return 2.0 * psi.scale * p.density(theta)
    if isinstance(psi, ClippedShift):
        hi, lo = theta + psi.c, theta - psi.c
        # atoms sitting exactly on theta +- c count half (symmetric derivative)
        upper = 0.5 * (p.cdf(hi) + p.cdf_left(hi))
        lower = 0.5 * (p.cdf(lo) + p.cdf_left(lo))
        return psi.scale * float(upper - lower)
    value, _ = big_psi_prime_fd(psi, dist, theta)
    return value


def big_psi_prime_fd(psi: PsiSpec, dist, theta: float) -> tuple[float, float]:
    """Central finite difference; returns (derivative, step)."""
    h = 1e-5 * (1.0 + abs(theta))
    return (psi.big_psi(dist, theta + h) - psi.big_psi(dist, theta - h)) / (2.0 * h), h


def _bracket(domain) -> tuple[float, float]:
    L, U = domain
    pad = max(U - L, 1.0)
    return L - pad, U + pad


def solve_m_estimator(psi: PsiSpec, dist, tol: float = 1e-10) -> float:
    """Smallest root inf{theta : Psi(dist, theta) >= 0}, to within ``tol``.

    On a flat zero stretch (sign psi on an even-size sample) this is the left
    end, i.e. the lower median.
    """
    if not tol > 0:
        raise ValidationError("tol", "tolerance must be positive")
    lo, hi = _bracket(dist.domain)
    if psi.big_psi(dist, lo) >= 0 or psi.big_psi(dist, hi) < 0:
        raise NoSignChange(f"Psi does not change sign on [{lo}, {hi}]")
    for _ in range(400):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if psi.big_psi(dist, mid) >= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def solve_rows(psi: PsiSpec, rows: np.ndarray, domain, tol: float = 1e-10) -> np.ndarray:
    """Vectorised :func:`solve_m_estimator` for each row of a sample matrix."""
    lo0, hi0 = _bracket(domain)
    lo = np.full(rows.shape[0], lo0)
    hi = np.full(rows.shape[0], hi0)
    iters = int(math.ceil(math.log2((hi0 - lo0) / tol))) + 1
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pos = psi.rows_psi(rows, mid) >= 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SmoothnessSpec:
    """Local Lipschitz constants of Psi' (user supplied per model)."""

    r1: float
    r2: float
    lambda1: float
    lambda2: float

    def __post_init__(self):
        for name in ("r1", "r2", "lambda1", "lambda2"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"smoothness.{name}", "must be positive")


def sign_median_uniform_smoothness() -> SmoothnessSpec:
    """Constants valid for sign psi on the uniform shift family.

    Within the family Psi'(U_g, theta) = 1 whenever |theta - g| < 1, and
    d_GC(U_g, U_0) = |g| / 2.  With r1 = 0.25 and r2 = 0.4 every admissible
    (G, theta) keeps |theta - g| <= 0.9, so both differences vanish and any
    positive Lipschitz constants work; tiny ones keep them from binding.
    """
    return SmoothnessSpec(r1=0.25, r2=0.4, lambda1=1e-6, lambda2=1e-6)


class PriorSpec:
    name = ""

    def density(self, theta):
        raise NotImplementedError


@dataclass(frozen=True)
class UniformPrior(PriorSpec):
    lo: float
    hi: float
    name = "uniform"

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError("prior", f"need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def density(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.where((theta >= self.lo) & (theta <= self.hi), 1.0 / self.length, 0.0)
        return out if out.ndim else float(out)

    def to_record(self):
        return {"kind": "uniform", "lo": repr(float(self.lo)), "hi": repr(float(self.hi))}


@dataclass(frozen=True)
class CauchyPrior(PriorSpec):
    name = "cauchy"

    def density(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = 1.0 / (math.pi * (1.0 + theta * theta))
        return out if out.ndim else float(out)

    def to_record(self):
        return {"kind": "cauchy"}


def prior_from_record(record) -> PriorSpec:
    rec = dict(record)
    kind = rec.pop("kind", None)
    if kind == "uniform":
        try:
            prior = UniformPrior(float(rec.pop("lo")), float(rec.pop("hi")))
        except KeyError as exc:
            raise ValidationError(f"prior.{exc.args[0]}", "required for kind=uniform") from None
    elif kind == "cauchy":
        prior = CauchyPrior()
    else:
        raise ValidationError("prior.kind", f"unknown prior {kind!r}")
    if rec:
        raise ValidationError(f"prior.{sorted(rec)[0]}", "unknown key")
    return prior


@dataclass(frozen=True)
class MEstimationContext:
    psi: PsiSpec
    F: DistributionModel
    root: float
    psi_prime_at_root: float
    ges_bound: float
    smoothness: Optional[SmoothnessSpec] = None

    @property
    def eps1(self) -> float:
        s = self._need_smoothness()
        return min(s.r1, abs(self.psi_prime_at_root) / (6.0 * s.lambda1))

    @property
    def eps2(self) -> float:
        s = self._need_smoothness()
        return min(s.r2 / 2.0, abs(self.psi_prime_at_root) / (6.0 * s.lambda2))

    def _need_smoothness(self) -> SmoothnessSpec:
        if self.smoothness is None:
            raise ValidationError("smoothness", "context was built without smoothness constants")
        return self.smoothness


def ges_bound_from_smoothness(psi: PsiSpec, F: DistributionModel, smoothness: Optional[SmoothnessSpec] = None) -> MEstimationContext:
    """Root of Psi(F, .), the slope there, and the GES bound K / |Psi'|."""
    root = solve_m_estimator(psi, F, tol=1e-12)
    slope = big_psi_prime(psi, F, root)
    if abs(slope) < 1e-12:
        raise DegenerateDerivative(f"Psi'(F, T(F)) = {slope} is too close to zero")
    return MEstimationContext(psi, F, root, slope, psi.K / abs(slope), smoothness)


@dataclass(frozen=True)
class SampleSizeEstimate:
    n: int
    p_hat: float
    standard_error: float
    trials: int
    adjustment: str = "accept n when p_hat + one binomial standard error <= eta"
    probes: tuple = field(default=(), repr=False)

    def __int__(self):
        return self.n


def _exceedance(psi, F, target, eps, n, trials, seed, chunk_elems=2_000_000) -> float:
    rng = derive_rng(seed, "sample-size", n)
    hits = 0
    per_chunk = max(1, chunk_elems // n)
    done = 0
    while done < trials:
        m = min(per_chunk, trials - done)
        rows = draw_matrix(F, m, n, rng)
        roots = solve_rows(psi, rows, F.domain, tol=1e-9)
        hits += int(np.count_nonzero(np.abs(roots - target) > eps))
        done += m
    return hits / trials


def estimate_sample_size(
    psi: PsiSpec,
    F: DistributionModel,
    eps: float,
    eta: float,
    trials: int = 1000,
    seed: int = 0,
    n_max: int = 2**24,
) -> SampleSizeEstimate:
    """Monte Carlo estimate of the smallest n with Pr[|T(F_n) - T(F)| > eps] <= eta.

    Doubling search followed by bisection.  Each n uses its own derived
    stream, so different eps values see the same samples.
    """
    if trials < 1000:
        raise ValidationError("trials", "need at least 1000 trials")
    if not eps > 0:
        raise ValidationError("eps", "eps must be positive")
    target = solve_m_estimator(psi, F, tol=1e-12)
    probes = {}

    def passes(n):
        if n not in probes:
            p = _exceedance(psi, F, target, eps, n, trials, seed)
            probes[n] = (p, math.sqrt(p * (1.0 - p) / trials))
        p, se = probes[n]
        return p + se <= eta

    hi = 1
    while not passes(hi):
        if hi >= n_max:
            raise Unbounded(f"exceedance probability still above {eta} at n = {n_max}")
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    p, se = probes[hi]
    return SampleSizeEstimate(hi, p, se, trials, probes=tuple(sorted((k, v[0]) for k, v in probes.items())))


def exp_mech_sample_size_terms(
    ctx: MEstimationContext, prior: PriorSpec, eps: float, eta: float, alpha: float, n_eps2_eta: int
) -> dict:
    """The individual sample-size requirements for the exponential mechanism."""
    eps2 = ctx.eps2
    if not 0 < eps < eps2:
        raise EpsTooLarge(f"eps must lie in (0, eps2) = (0, {eps2}), got {eps}")
    if not 0 < eta < 1:
        raise ValidationError("eta", f"eta must lie in (0, 1), got {eta}")
    gamma = ctx.ges_bound
    baseline = math.log(2.0 / eta) / (2.0 * ctx.eps1**2)
    if isinstance(prior, UniformPrior):
        R = prior.length
        prior_term = 8.0 * math.log(6.0 * R / (eps * eta)) / (alpha * eps) * gamma
        case = 1
    elif isinstance(prior, CauchyPrior):
        inner = (2.0 * (abs(ctx.root) + eps2) ** 2 + 1.0) / (eps / 3.0) + eps / 6.0
        prior_term = 8.0 / (alpha * eps) * math.log(math.pi / eta * inner) * gamma
        case = 2
    else:
        raise ValidationError("prior", f"unsupported prior {prior!r}")
    return {"baseline": baseline, "n_eps2_eta": n_eps2_eta, "prior_term": prior_term, "case": case}


def exp_mech_sample_size(
    ctx: MEstimationContext, prior: PriorSpec, eps: float, eta: float, alpha: float, n_eps2_eta: int
) -> int:
    """Sample size after which the exponential mechanism is eps-accurate w.p. >= 1 - 3 eta."""
    t = exp_mech_sample_size_terms(ctx, prior, eps, eta, alpha, n_eps2_eta)
    return int(math.ceil(max(t["baseline"], t["n_eps2_eta"], t["prior_term"])))
