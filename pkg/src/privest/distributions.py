"""Analytic distribution models, samples, empirical CDFs and distances.

Every model here has a CDF that is piecewise linear with jumps: uniform
pieces contribute linear ramps and atoms contribute jumps.  Models expose
that structure through :class:`Pieces`, which makes CDF/quantile evaluation,
means, Glivenko-Cantelli distance and total variation distance exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import UnsupportedPair, ValidationError
from .seeding import as_rng

Interval = tuple  # closed interval (lower, upper)

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Pieces:
    """Knot representation of a CDF.

    ``right[i]`` is F(knots[i]) and ``left[i]`` is the left limit F(knots[i]-).
    Between consecutive knots the CDF is linear from ``right[i]`` to
    ``left[i+1]``.  The CDF is 0 before the first knot and 1 from the last.
    """

    knots: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        k, lo, hi = self.knots, self.left, self.right
        idx = np.searchsorted(k, t, side="right") - 1
        return self._interp(t, idx, lo, hi)

    def cdf_left(self, t):
        t = np.asarray(t, dtype=float)
        k, lo, hi = self.knots, self.left, self.right
        idx = np.searchsorted(k, t, side="left") - 1
        return self._interp(t, idx, lo, hi)

    def _interp(self, t, idx, lo, hi):
        k = self.knots
        m = len(k)
        inner = np.clip(idx, 0, max(m - 2, 0))
        if m >= 2:
            width = k[inner + 1] - k[inner]
            frac = (t - k[inner]) / width
            ramp = hi[inner] + (lo[inner + 1] - hi[inner]) * frac
        else:
            ramp = np.zeros_like(t)
        out = np.where(idx < 0, 0.0, np.where(idx >= m - 1, hi[-1], ramp))
        return out if out.ndim else float(out)

    def quantile(self, p):
        """Left-continuous inverse: inf{t : F(t) >= p}."""
        p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
        k, lo, hi = self.knots, self.left, self.right
        i = np.searchsorted(hi, p, side="left")
        i = np.minimum(i, len(k) - 1)
        prev = np.maximum(i - 1, 0)
        on_ramp = (i > 0) & (lo[i] >= p) & (lo[i] > hi[prev])
        denom = np.where(on_ramp, lo[i] - hi[prev], 1.0)
        ramp = k[prev] + (p - hi[prev]) / denom * (k[i] - k[prev])
        out = np.where(on_ramp, ramp, k[i])
        return out if out.ndim else float(out)

    @property
    def atoms(self) -> np.ndarray:
        return self.right - self.left

    @property
    def segment_masses(self) -> np.ndarray:
        return self.left[1:] - self.right[:-1]

    def mean(self) -> float:
        k = self.knots
        total = float(np.dot(self.atoms, k))
        if len(k) >= 2:
            total += float(np.dot(self.segment_masses, 0.5 * (k[:-1] + k[1:])))
        return total

    def density(self, t: float) -> float:
        """Density of the continuous part; averages one-sided values at knots."""
        k = self.knots
        if len(k) < 2:
            return 0.0
        slopes = self.segment_masses / np.diff(k)
        pos = np.searchsorted(k, t, side="left")
        if pos < len(k) and k[pos] == t:
            left_slope = slopes[pos - 1] if pos >= 1 else 0.0
            right_slope = slopes[pos] if pos < len(slopes) else 0.0
            return float(0.5 * (left_slope + right_slope))
        if pos == 0 or pos == len(k):
            return 0.0
        return float(slopes[pos - 1])

    def atom_at(self, t: float) -> float:
        return float(self.cdf(t) - self.cdf_left(t))


def _make_pieces(knots, left, right) -> Pieces:
    knots = np.asarray(knots, dtype=float)
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    if abs(right[-1] - 1.0) <= 1e-9:
        right = right.copy()
        right[-1] = 1.0
    for arr in (knots, left, right):
        arr.setflags(write=False)
    return Pieces(knots, left, right)


def _check_domain(domain, lo: float, hi: float, what: str) -> tuple:
    L, U = float(domain[0]), float(domain[1])
    if not L <= U:
        raise ValidationError("domain", f"lower {L} exceeds upper {U}")
    if lo < L - 1e-12 or hi > U + 1e-12:
        raise ValidationError("domain", f"{what} support [{lo}, {hi}] not inside [{L}, {U}]")
    return (L, U)


class DistributionModel:
    """Common behaviour for the analytic models; subclasses provide ``pieces``."""

    domain: tuple

    @cached_property
    def pieces(self) -> Pieces:
        return self._build_pieces()

    def _build_pieces(self) -> Pieces:  # pragma: no cover - abstract
        raise NotImplementedError

    def cdf(self, t):
        return self.pieces.cdf(t)

    def cdf_left(self, t):
        return self.pieces.cdf_left(t)

    def quantile(self, p):
        return self.pieces.quantile(p)

    def mean(self) -> float:
        return self.pieces.mean()

    def density(self, t: float) -> float:
        return self.pieces.density(t)

    def atom_at(self, t: float) -> float:
        return self.pieces.atom_at(t)

    def to_record(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformShift(DistributionModel):
    """Uniform distribution on [gamma - 1, gamma + 1]."""

    gamma: float
    domain: tuple = None

    def __post_init__(self):
        g = float(self.gamma)
        object.__setattr__(self, "gamma", g)
        domain = (g - 1.0, g + 1.0) if self.domain is None else self.domain
        object.__setattr__(self, "domain", _check_domain(domain, g - 1.0, g + 1.0, "uniform"))

    def _build_pieces(self):
        return _make_pieces([self.gamma - 1.0, self.gamma + 1.0], [0.0, 1.0], [0.0, 1.0])

    def to_record(self):
        return {"kind": "uniform_shift", "gamma": _fmt(self.gamma), **_domain_record(self.domain)}


@dataclass(frozen=True)
class BoundedDiscrete(DistributionModel):
    """Finitely supported distribution on the closed interval ``domain``."""

    points: tuple
    weights: tuple
    domain: tuple = None

    def __post_init__(self):
        pts = tuple(float(x) for x in self.points)
        wts = tuple(float(w) for w in self.weights)
        if not pts or len(pts) != len(wts):
            raise ValidationError("weights", "need one weight per point and at least one point")
        if any(w < 0 for w in wts) or abs(sum(wts) - 1.0) > _WEIGHT_TOL:
            raise ValidationError("weights", f"weights must be non-negative and sum to 1, got {sum(wts)!r}")
        order = sorted(range(len(pts)), key=pts.__getitem__)
        pts = tuple(pts[i] for i in order)
        wts = tuple(wts[i] for i in order)
        domain = (pts[0], pts[-1]) if self.domain is None else self.domain
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)
        object.__setattr__(self, "domain", _check_domain(domain, pts[0], pts[-1], "discrete"))

    def _build_pieces(self):
        knots, masses = _merge_atoms(self.points, self.weights)
        right = np.cumsum(masses)
        left = right - masses
        return _make_pieces(knots, left, right)

    def to_record(self):
        return {
            "kind": "discrete",
            "points": ",".join(_fmt(x) for x in self.points),
            "weights": ",".join(_fmt(w) for w in self.weights),
            **_domain_record(self.domain),
        }


@dataclass(frozen=True)
class PointMass(DistributionModel):
    x: float
    domain: tuple = None

    def __post_init__(self):
        x = float(self.x)
        object.__setattr__(self, "x", x)
        domain = (x, x) if self.domain is None else self.domain
        object.__setattr__(self, "domain", _check_domain(domain, x, x, "point mass"))

    def _build_pieces(self):
        return _make_pieces([self.x], [0.0], [1.0])

    def to_record(self):
        return {"kind": "point_mass", "x": _fmt(self.x), **_domain_record(self.domain)}


@dataclass(frozen=True)
class Contaminated(DistributionModel):
    """Mixture (1 - rho) * base + rho * point mass at x."""

    base: DistributionModel
    x: float
    rho: float
    domain: tuple = None

    def __post_init__(self):
        x, rho = float(self.x), float(self.rho)
        if not 0.0 <= rho <= 1.0:
            raise ValidationError("rho", f"contamination mass must lie in [0, 1], got {rho}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "rho", rho)
        bL, bU = self.base.domain
        hull = (min(bL, x), max(bU, x))
        domain = hull if self.domain is None else self.domain
        object.__setattr__(self, "domain", _check_domain(domain, hull[0], hull[1], "mixture"))

    def _build_pieces(self):
        bp = self.base.pieces
        knots = np.union1d(bp.knots, [self.x])
        step_right = (knots >= self.x).astype(float)
        step_left = (knots > self.x).astype(float)
        w = 1.0 - self.rho
        left = w * bp.cdf_left(knots) + self.rho * step_left
        right = w * bp.cdf(knots) + self.rho * step_right
        return _make_pieces(knots, left, right)

    def cdf(self, t):
        # mixture formula directly, so rho = 0 reproduces the base bit for bit
        t = np.asarray(t, dtype=float)
        out = (1.0 - self.rho) * np.asarray(self.base.cdf(t)) + self.rho * (t >= self.x)
        return out if out.ndim else float(out)

    def cdf_left(self, t):
        t = np.asarray(t, dtype=float)
        out = (1.0 - self.rho) * np.asarray(self.base.cdf_left(t)) + self.rho * (t > self.x)
        return out if out.ndim else float(out)

    def to_record(self):
        chain = []
        model = self
        while isinstance(model, Contaminated):
            chain.append(f"{_fmt(model.x)}:{_fmt(model.rho)}")
            model = model.base
        rec = model.to_record()
        rec["contaminations"] = ";".join(reversed(chain))
        rec.update(_domain_record(self.domain))
        return rec


def _merge_atoms(points, weights):
    pts = np.asarray(points, dtype=float)
    wts = np.asarray(weights, dtype=float)
    knots, inverse = np.unique(pts, return_inverse=True)
    masses = np.zeros(len(knots))
    np.add.at(masses, inverse, wts)
    return knots, masses


def _fmt(x: float) -> str:
    return repr(float(x))


def _domain_record(domain) -> dict:
    return {"lower": _fmt(domain[0]), "upper": _fmt(domain[1])}


def model_from_record(record: Mapping[str, str]) -> DistributionModel:
    """Inverse of ``to_record``; unknown keys are rejected."""
    rec = dict(record)
    kind = rec.pop("kind", None)
    domain = None
    if "lower" in rec or "upper" in rec:
        try:
            domain = (float(rec.pop("lower")), float(rec.pop("upper")))
        except KeyError as exc:
            raise ValidationError("distribution", "lower and upper must be given together") from exc
    contaminations = rec.pop("contaminations", "")

    def take(key):
        try:
            return rec.pop(key)
        except KeyError:
            raise ValidationError(f"distribution.{key}", f"required for kind={kind}") from None

    def floats(text):
        return [float(v) for v in text.split(",") if v.strip()]

    chain = []
    for item in filter(None, (s.strip() for s in contaminations.split(";"))):
        xs, _, rs = item.partition(":")
        chain.append((float(xs), float(rs)))

    # base domain must not include contamination points outside its support
    base_domain = None if chain else domain
    if kind == "uniform_shift":
        model = UniformShift(float(take("gamma")), base_domain)
    elif kind == "discrete":
        model = BoundedDiscrete(floats(take("points")), floats(take("weights")), base_domain)
    elif kind == "point_mass":
        model = PointMass(float(take("x")), base_domain)
    else:
        raise ValidationError("distribution.kind", f"unknown kind {kind!r}")
    for i, (x, rho) in enumerate(chain):
        last = i == len(chain) - 1
        model = Contaminated(model, x, rho, domain if last else None)
    if rec:
        raise ValidationError(f"distribution.{sorted(rec)[0]}", "unknown key")
    return model


@dataclass(frozen=True, eq=False)
class SampleData:
    """A real-valued dataset on a bounded domain.

    ``values`` is sorted; ``origin`` keeps the entries in their original order
    so neighbouring datasets can be compared position by position.
    """

    values: np.ndarray
    domain: tuple
    origin: np.ndarray
    provenance: dict = field(default=None)

    @classmethod
    def from_values(cls, values: Sequence[float], domain, provenance=None) -> "SampleData":
        origin = np.array(values, dtype=float).ravel()
        if origin.size < 1:
            raise ValidationError("values", "a sample needs at least one value")
        L, U = float(domain[0]), float(domain[1])
        if origin.min() < L or origin.max() > U:
            raise ValidationError("values", f"sample values must lie in [{L}, {U}]")
        srt = np.sort(origin)
        origin.setflags(write=False)
        srt.setflags(write=False)
        return cls(srt, (L, U), origin, provenance)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @cached_property
    def pieces(self) -> Pieces:
        knots, masses = _merge_atoms(self.values, np.full(self.n, 1.0 / self.n))
        right = np.cumsum(masses)
        return _make_pieces(knots, right - masses, right)

    def cdf(self, t):
        return empirical_cdf(self, t)

    def cdf_left(self, t):
        t = np.asarray(t, dtype=float)
        out = np.searchsorted(self.values, t, side="left") / self.n
        return out if out.ndim else float(out)

    def replace(self, index: int, value: float) -> "SampleData":
        """Neighbouring dataset with the entry at original position ``index`` replaced."""
        origin = np.array(self.origin)
        origin[index] = value
        return SampleData.from_values(origin, self.domain, self.provenance)

    def hamming(self, other: "SampleData") -> int:
        if self.n != other.n:
            raise ValueError("Hamming distance needs datasets of equal size")
        return int(np.count_nonzero(self.origin != other.origin))


def cdf(model, t):
    return model.cdf(t)


def draw_sample(model: DistributionModel, n: int, rng) -> SampleData:
    """Draw ``n`` i.i.d. values by inverse-CDF transform of uniforms."""
    if n < 1:
        raise ValidationError("n", "sample size must be at least 1")
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    gen = as_rng(rng)
    values = np.asarray(model.quantile(gen.random(n)), dtype=float).reshape(n)
    provenance = {"model": model.to_record(), "seed": seed}
    return SampleData.from_values(values, model.domain, provenance)


def draw_matrix(model: DistributionModel, trials: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``trials`` independent samples of size ``n``, each row sorted."""
    out = np.asarray(model.quantile(rng.random((trials, n))), dtype=float).reshape(trials, n)
    out.sort(axis=1)
    return out


def empirical_cdf(sample: SampleData, t):
    t = np.asarray(t, dtype=float)
    out = np.searchsorted(sample.values, t, side="right") / sample.n
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Distance:
    value: float
    method: str  # "exact" or "grid"

    def __float__(self):
        return self.value


def gc_distance(a, b, grid_points: int = 10_000) -> Distance:
    """sup_t |A(t) - B(t)|.

    Exact when both arguments expose knot pieces: the difference is linear
    between the union of knots, so the supremum sits at a knot or a left limit.
    """
    pa, pb = getattr(a, "pieces", None), getattr(b, "pieces", None)
    if pa is not None and pb is not None:
        knots = np.union1d(pa.knots, pb.knots)
        diff_right = np.abs(pa.cdf(knots) - pb.cdf(knots))
        diff_left = np.abs(pa.cdf_left(knots) - pb.cdf_left(knots))
        return Distance(float(max(diff_right.max(), diff_left.max())), "exact")
    lo = min(a.domain[0], b.domain[0])
    hi = max(a.domain[1], b.domain[1])
    grid = np.linspace(lo, hi, grid_points)
    return Distance(float(np.max(np.abs(np.asarray(a.cdf(grid)) - np.asarray(b.cdf(grid))))), "grid")


def tv_distance(a, b) -> float:
    """Total variation distance between two piecewise models.

    Atoms are compared mass by mass; on each interval between the union of
    knots both densities are constant, so the continuous part reduces to a
    sum of absolute mass differences.
    """
    pa, pb = getattr(a, "pieces", None), getattr(b, "pieces", None)
    if pa is None or pb is None:
        raise UnsupportedPair(f"no closed-form TV distance for {type(a).__name__} vs {type(b).__name__}")
    knots = np.union1d(pa.knots, pb.knots)
    atoms_a = pa.cdf(knots) - pa.cdf_left(knots)
    atoms_b = pb.cdf(knots) - pb.cdf_left(knots)
    total = np.abs(atoms_a - atoms_b).sum()
    if len(knots) >= 2:
        seg_a = pa.cdf_left(knots[1:]) - pa.cdf(knots[:-1])
        seg_b = pb.cdf_left(knots[1:]) - pb.cdf(knots[:-1])
        total += np.abs(seg_a - seg_b).sum()
    return float(min(1.0, 0.5 * total))


def dkw_radius(n: int, eta: float) -> float:
    """Radius r with Pr[sup |F_n - F| > r] <= eta (Massart's constant)."""
    return math.sqrt(math.log(2.0 / eta) / (2.0 * n))
