"""Statistical functionals, fixed-scale influence functions and GES.

Mean, Median, Quantile and TrimmedMean are L-functionals: weighted integrals
of the quantile function.  On a sample they reduce to weighted sums of order
statistics (see :meth:`FunctionalSpec.order_weights`), which is what the
sensitivity module relies on.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .distributions import (
    BoundedDiscrete,
    Contaminated,
    DistributionModel,
    Pieces,
    SampleData,
    UniformShift,
    gc_distance,
)
from .errors import ValidationError


def order_index(n: int, p: float) -> int:
    """0-based index of the order statistic returned by the left-continuous inverse."""
    np_ = n * p
    nearest = round(np_)
    k = nearest if abs(np_ - nearest) < 1e-9 else math.ceil(np_)
    return min(max(int(k), 1), n) - 1


class FunctionalSpec:
    """Base for statistical functionals T: distributions -> R."""

    name: str = ""
    range_hint: Optional[tuple] = None

    def evaluate(self, dist) -> float:
        if isinstance(dist, SampleData):
            return self._on_sample(dist)
        return self._on_model(dist)

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        """Plug-in values for each row of a matrix of sorted samples."""
        n = rows.shape[1]
        return rows @ self.order_weights(n)

    def order_weights(self, n: int) -> np.ndarray:
        raise TypeError(f"{self.name} is not an L-statistic")

    def range_for(self, domain) -> tuple:
        """The interval [lambda, lambda'] all values fall into."""
        if self.range_hint is not None:
            return tuple(self.range_hint)
        return (float(domain[0]), float(domain[1]))

    def range_length(self, domain) -> float:
        lo, hi = self.range_for(domain)
        return hi - lo

    @property
    def monotone_influence(self) -> bool:
        """True when IF_rho(x) is monotone in x, so GES sits at a domain endpoint."""
        return True

    def _on_sample(self, sample: SampleData) -> float:
        return float(np.dot(self.order_weights(sample.n), sample.values))

    def _on_model(self, model) -> float:
        raise NotImplementedError

    def to_record(self) -> dict:
        rec = {"name": self.name}
        rec.update(self._params())
        if self.range_hint is not None:
            rec["range_lower"] = repr(float(self.range_hint[0]))
            rec["range_upper"] = repr(float(self.range_hint[1]))
        return rec

    def _params(self) -> dict:
        return {}


@dataclass(frozen=True)
class Mean(FunctionalSpec):
    range_hint: Optional[tuple] = None
    name = "mean"

    def order_weights(self, n):
        return np.full(n, 1.0 / n)

    def _on_sample(self, sample):
        return float(np.mean(sample.values))

    def _on_model(self, model):
        return model.pieces.mean()


@dataclass(frozen=True)
class Quantile(FunctionalSpec):
    p: float = 0.5
    range_hint: Optional[tuple] = None
    name = "quantile"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError("functional.p", f"quantile level must lie in [0, 1], got {self.p}")

    def index(self, n: int) -> int:
        return order_index(n, self.p)

    def order_weights(self, n):
        w = np.zeros(n)
        w[self.index(n)] = 1.0
        return w

    def evaluate_rows(self, rows):
        return rows[:, self.index(rows.shape[1])].copy()

    def _on_sample(self, sample):
        return float(sample.values[self.index(sample.n)])

    def _on_model(self, model):
        return float(model.quantile(self.p))

    def _params(self):
        return {"p": repr(float(self.p))}


@dataclass(frozen=True)
class Median(Quantile):
    """Lower median: order statistic ceil(n/2) on samples."""

    p: float = field(default=0.5, init=False)
    range_hint: Optional[tuple] = None
    name = "median"

    def _params(self):
        return {}


@dataclass(frozen=True)
class TrimmedMean(FunctionalSpec):
    trim: float = 0.1
    range_hint: Optional[tuple] = None
    name = "trimmed_mean"

    def __post_init__(self):
        if not 0.0 <= self.trim < 0.5:
            raise ValidationError("functional.trim", f"trim must lie in [0, 0.5), got {self.trim}")

    def order_weights(self, n):
        edges = np.arange(n + 1) / n
        lo, hi = self.trim, 1.0 - self.trim
        overlap = np.clip(np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo), 0.0, None)
        return overlap / (hi - lo)

    def _on_model(self, model):
        lo, hi = self.trim, 1.0 - self.trim
        return _integrate_quantile(model.pieces, lo, hi) / (hi - lo)

    def _params(self):
        return {"trim": repr(float(self.trim))}


def _integrate_quantile(pieces: Pieces, a: float, b: float) -> float:
    """Exact integral of the quantile function over [a, b]."""
    k, left, right = pieces.knots, pieces.left, pieces.right
    total = 0.0
    for i in range(len(k)):
        lo, hi = max(left[i], a), min(right[i], b)
        if hi > lo:
            total += (hi - lo) * k[i]
        if i + 1 < len(k):
            u0, u1 = right[i], left[i + 1]
            lo, hi = max(u0, a), min(u1, b)
            if hi > lo and u1 > u0:
                slope = (k[i + 1] - k[i]) / (u1 - u0)
                q_lo = k[i] + slope * (lo - u0)
                q_hi = k[i] + slope * (hi - u0)
                total += 0.5 * (hi - lo) * (q_lo + q_hi)
    return total


_FORM_RE = re.compile(r"^\s*(\w+)\s*\((.*)\)\s*$")


def _parse_linear_form(form: str):
    m = _FORM_RE.match(form)
    if not m:
        raise ValidationError("functional.g", f"cannot parse {form!r}")
    kind, args = m.group(1), m.group(2)
    if kind in ("indicator_le", "indicator_gt"):
        c = float(args)
        if kind == "indicator_le":
            return (lambda x: (np.asarray(x) <= c).astype(float)), 0.0, 1.0, (c,)
        return (lambda x: (np.asarray(x) > c).astype(float)), 0.0, 1.0, (c,)
    if kind == "clip":
        a, b = (float(v) for v in args.split(","))
        return (lambda x: np.clip(np.asarray(x, dtype=float), a, b)), a, b, (a, b)
    if kind == "table":
        pairs = [item.split(":") for item in args.split(";") if item.strip()]
        xs = np.array([float(p[0]) for p in pairs])
        ys = np.array([float(p[1]) for p in pairs])
        order = np.argsort(xs)
        xs, ys = xs[order], ys[order]
        g = lambda x: np.interp(np.asarray(x, dtype=float), xs, ys)  # noqa: E731
        return g, float(ys.min()), float(ys.max()), tuple(xs)
    if kind == "constant":
        c = float(args)
        return (lambda x: np.full(np.shape(x), c)), c, c, ()
    raise ValidationError("functional.g", f"unknown form {kind!r}")


@dataclass(frozen=True)
class Linear(FunctionalSpec):
    """T(F) = integral of a bounded function g against F.

    ``form`` names g: ``indicator_le(c)``, ``indicator_gt(c)``, ``clip(a,b)``,
    ``constant(c)`` or ``table(x1:y1;x2:y2;...)`` (linear interpolation).
    Alternatively pass a vectorised callable ``g`` with its declared
    ``g_inf`` and ``g_sup``; ``breakpoints`` lists kinks or jumps of g so
    model integrals are split there.
    """

    form: Optional[str] = None
    g: Optional[Callable] = None
    g_inf: Optional[float] = None
    g_sup: Optional[float] = None
    breakpoints: tuple = ()
    range_hint: Optional[tuple] = None
    name = "linear"

    def __post_init__(self):
        if self.form is not None:
            g, lo, hi, kinks = _parse_linear_form(self.form)
            object.__setattr__(self, "breakpoints", kinks)
            object.__setattr__(self, "g", g)
            object.__setattr__(self, "g_inf", lo)
            object.__setattr__(self, "g_sup", hi)
        if self.g is None or self.g_inf is None or self.g_sup is None:
            raise ValidationError("functional.g", "Linear needs g with finite g_inf and g_sup")
        if not (math.isfinite(self.g_inf) and math.isfinite(self.g_sup)):
            raise ValidationError("functional.g", "g must be bounded")

    @property
    def monotone_influence(self):
        return False

    def range_for(self, domain):
        if self.range_hint is not None:
            return tuple(self.range_hint)
        return (float(self.g_inf), float(self.g_sup))

    def evaluate_rows(self, rows):
        return np.mean(self.g(rows), axis=1)

    def _on_sample(self, sample):
        return float(np.mean(self.g(sample.values)))

    def _on_model(self, model):
        p = model.pieces
        total = float(np.dot(p.atoms, self.g(p.knots)))
        for i, mass in enumerate(p.segment_masses if len(p.knots) > 1 else []):
            if mass <= 0:
                continue
            a, b = p.knots[i], p.knots[i + 1]
            inner = [c for c in self.breakpoints if a < c < b] or None
            val, _ = integrate.quad(lambda x: float(self.g(x)), a, b, points=inner, epsabs=1e-12, limit=200)
            total += mass / (b - a) * val
        return total

    def _params(self):
        if self.form is None:
            return {"g_inf": repr(self.g_inf), "g_sup": repr(self.g_sup)}
        return {"g": self.form}


def functional_from_record(record) -> FunctionalSpec:
    rec = dict(record)
    name = rec.pop("name", None)
    hint = None
    if "range_lower" in rec or "range_upper" in rec:
        try:
            hint = (float(rec.pop("range_lower")), float(rec.pop("range_upper")))
        except KeyError:
            raise ValidationError("functional", "range_lower and range_upper must be given together") from None
    if name == "mean":
        spec = Mean(range_hint=hint)
    elif name == "median":
        spec = Median(range_hint=hint)
    elif name == "quantile":
        spec = Quantile(float(rec.pop("p", 0.5)), range_hint=hint)
    elif name == "trimmed_mean":
        spec = TrimmedMean(float(rec.pop("trim", 0.1)), range_hint=hint)
    elif name == "linear":
        if "g" not in rec:
            raise ValidationError("functional.g", "required for name=linear")
        spec = Linear(rec.pop("g"), range_hint=hint)
    else:
        raise ValidationError("functional.name", f"unknown functional {name!r}")
    if rec:
        raise ValidationError(f"functional.{sorted(rec)[0]}", "unknown key")
    return spec


def evaluate(T: FunctionalSpec, dist) -> float:
    return T.evaluate(dist)


def contaminate(F: DistributionModel, x: float, rho: float) -> Contaminated:
    return Contaminated(F, x, rho, F.domain)


def influence_rho(T: FunctionalSpec, F: DistributionModel, x: float, rho: float) -> float:
    """(T((1 - rho) F + rho delta_x) - T(F)) / rho."""
    if not 0.0 < rho <= 1.0:
        raise ValidationError("rho", f"scale must lie in (0, 1], got {rho}")
    L, U = F.domain
    if not L <= x <= U:
        raise ValidationError("x", f"contamination point {x} outside domain [{L}, {U}]")
    return (T.evaluate(contaminate(F, x, rho)) - T.evaluate(F)) / rho


@dataclass(frozen=True)
class GES:
    value: float
    x_star: float
    method: str

    def __float__(self):
        return self.value


def ges_rho(T: FunctionalSpec, F: DistributionModel, rho: float, grid_points: int = 2001) -> GES:
    """sup_x |IF_rho(x, T, F)| over the domain of F, with its maximiser."""
    L, U = F.domain
    if T.monotone_influence:
        xs, method = np.array([L, U]), "exact"
    else:
        xs, method = np.linspace(L, U, grid_points), "grid"
    vals = np.array([abs(influence_rho(T, F, float(x), rho)) for x in xs])
    i = int(np.argmax(vals))
    return GES(float(vals[i]), float(xs[i]), method)


@dataclass(frozen=True)
class RobustnessProfile:
    rho: float
    ges_rho: float
    gamma_n: float
    eta: float
    radius: float
    method: str
    family: str
    notes: tuple = ()


def gc_radius(n: int, eta: float) -> float:
    return math.sqrt(2.0 * math.log(2.0 / eta) / n)


def _shift_candidates(F: UniformShift, radius: float, T: FunctionalSpec, k: int):
    L, U = F.domain
    reach = 2.0 * radius if radius < 1.0 else math.inf
    lo = max(F.gamma - reach, L + 1.0)
    hi = min(F.gamma + reach, U - 1.0)
    if T.monotone_influence:
        gammas = sorted({lo, F.gamma, hi})
    else:
        gammas = np.unique(np.concatenate([np.linspace(lo, hi, k), [F.gamma]]))
    return [UniformShift(float(g), F.domain) for g in gammas]


def _perturbation_candidates(F: DistributionModel, radius: float, k: int):
    """CDF bumps of size <= radius: point-mass mixtures and atom transfers."""
    L, U = F.domain
    s = min(radius, 1.0)
    locations = np.linspace(L, U, k)
    out = [F]
    for y in locations:
        out.append(Contaminated(F, float(y), s, F.domain))
    if isinstance(F, BoundedDiscrete):
        for a, w in zip(F.points, F.weights):
            moved = min(s, w)
            if moved <= 0:
                continue
            for y in locations:
                pts = list(F.points) + [float(y)]
                wts = list(F.weights) + [moved]
                j = F.points.index(a)
                wts[j] -= moved
                out.append(BoundedDiscrete(pts, _renormalise(wts), F.domain))
    return [G for G in out if gc_distance(F, G).value <= radius + 1e-12]


def _renormalise(wts):
    wts = np.clip(np.asarray(wts, dtype=float), 0.0, None)
    return list(wts / wts.sum())


def gamma_n(
    T: FunctionalSpec,
    F: DistributionModel,
    n: int,
    eta: float,
    radius: Optional[float] = None,
    k: int = 33,
) -> RobustnessProfile:
    """Supremum of GES_{1/n}(T, G) over a Glivenko-Cantelli ball around F.

    For a uniform-shift model the ball is taken inside the shift family and
    the result is exact.  Otherwise the supremum is searched over a recorded
    family of CDF-bump perturbations and tagged ``method="search"``.
    """
    if n < 2:
        raise ValidationError("n", "need n >= 2")
    if not 0.0 < eta < 1.0:
        raise ValidationError("eta", f"eta must lie in (0, 1), got {eta}")
    rho = 1.0 / n
    r = gc_radius(n, eta) if radius is None else float(radius)
    center = ges_rho(T, F, rho).value
    notes = []
    if r == 0.0:
        return RobustnessProfile(rho, center, center, eta, r, "exact", "center only")
    if isinstance(F, UniformShift):
        candidates = _shift_candidates(F, r, T, k)
        method = "exact" if T.monotone_influence else "grid"
        family = "uniform shifts U_g inside the domain with d_GC <= radius"
        if isinstance(T, Quantile) and T.p == 0.5:
            notes.append("median GES of a density-1/2 uniform is 1/(1-rho); a unit-length interval would give half that")
    else:
        candidates = _perturbation_candidates(F, r, k)
        method = "search"
        family = f"point-mass mixtures and atom transfers of size min(radius,1) at {k} grid locations"
    best = max(ges_rho(T, G, rho).value for G in candidates)
    return RobustnessProfile(rho, center, max(best, center), eta, r, method, family, tuple(notes))
