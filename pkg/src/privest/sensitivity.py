"""Local and smooth sensitivity of plug-in estimators, plus bound calculators.

Neighbouring datasets differ by replacing one entry; the dataset size is
public.  Replacement values range over the sample's closed domain [L, U].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .distributions import SampleData
from .errors import BetaNegative, EtaOutOfRange, TooLarge, ValidationError
from .functionals import FunctionalSpec, Linear, Quantile


@dataclass(frozen=True)
class PrivacyParams:
    alpha: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValidationError("alpha", f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.delta < 1.0:
            raise ValidationError("delta", f"delta must lie in [0, 1), got {self.delta}")

    @property
    def beta(self) -> float:
        """Smoothing parameter alpha / (2 ln(1/delta)); undefined at delta = 0."""
        if self.delta == 0.0:
            raise ValidationError("delta", "beta(alpha, delta) is undefined at delta = 0")
        return self.alpha / (2.0 * math.log(1.0 / self.delta))


@dataclass(frozen=True)
class SensitivityResult:
    local: float
    smooth: float
    beta: float
    method: str  # exact | global-bound | oracle
    k_star: Optional[int] = None
    capped: bool = False


def _shift_sensitivities(x: np.ndarray, w: np.ndarray, L: float, U: float) -> tuple[float, float]:
    """Largest upward and downward change of sum(w * x_sorted) under one replacement.

    Moving one order statistic to U shifts every later order statistic down
    by one slot; the change is sum_i w_i * gap_i with gap_i = x_(i+1) - x_(i)
    and a final gap U - x_(n).  Non-negative weights make replacing x_(1)
    the worst case, and symmetrically for L.
    """
    up_gaps = np.append(np.diff(x), U - x[-1])
    down_gaps = np.insert(np.diff(x), 0, x[0] - L)
    return float(np.dot(w, up_gaps)), float(np.dot(w, down_gaps))


def local_sensitivity(T: FunctionalSpec, sample: SampleData) -> float:
    """sup |T(D) - T(D')| over datasets D' differing from D in one entry."""
    L, U = sample.domain
    x = sample.values
    n = sample.n
    if isinstance(T, Linear):
        gx = np.asarray(T.g(x), dtype=float)
        return float(max(np.max(T.g_sup - gx), np.max(gx - T.g_inf)) / n)
    if isinstance(T, Quantile):
        m = T.index(n)
        up = (x[m + 1] if m + 1 < n else U) - x[m]
        down = x[m] - (x[m - 1] if m >= 1 else L)
        return float(max(up, down))
    up, down = _shift_sensitivities(x, T.order_weights(n), L, U)
    return max(up, down)


def order_statistic_smooth(x: np.ndarray, m: int, L: float, U: float, beta: float) -> tuple[float, int]:
    """beta-smooth sensitivity of the order statistic at 0-based index ``m``.

    SS = max_k e^{-beta k} max_{0<=t<=k+1} (x_{m+t} - x_{m+t-k-1}), with
    out-of-range order statistics clamped to L below and U above.  The loop
    stops once e^{-beta k} (U - L) cannot beat the running maximum.
    """
    n = len(x)
    xp = np.concatenate([np.full(n + 1, L), x, np.full(n + 1, U)])
    base = n + 1 + m
    span = U - L
    best, k_best = -1.0, 0
    for k in range(n + 1):
        decay = math.exp(-beta * k)
        if decay * span <= best:
            break
        gap = float(np.max(xp[base : base + k + 2] - xp[base - k - 1 : base + 1]))
        val = decay * gap
        if val > best:
            best, k_best = val, k
    return best, k_best


def global_sensitivity(T: FunctionalSpec, n: int, domain) -> float:
    """Data-independent bound on LS for the non order-statistic functionals."""
    L, U = domain
    if isinstance(T, Linear):
        return (T.g_sup - T.g_inf) / n
    if isinstance(T, Quantile):
        return U - L
    return (U - L) * float(np.max(T.order_weights(n)))


def smooth_sensitivity(T: FunctionalSpec, sample: SampleData, beta: float) -> SensitivityResult:
    """beta-smooth sensitivity at ``sample``, capped at the range length R.

    Exact for Median/Quantile.  Mean, TrimmedMean and Linear release their
    constant global sensitivity, which upper-bounds SS_beta and is itself
    beta-smooth for every beta.
    """
    if beta < 0:
        raise BetaNegative(f"beta must be non-negative, got {beta}")
    L, U = sample.domain
    local = local_sensitivity(T, sample)
    R = T.range_length(sample.domain)
    if isinstance(T, Quantile):
        smooth, k_star = order_statistic_smooth(sample.values, T.index(sample.n), L, U, beta)
        method = "exact"
    else:
        smooth, k_star = global_sensitivity(T, sample.n, sample.domain), None
        method = "global-bound"
    capped = smooth > R
    return SensitivityResult(local, min(smooth, R), beta, method, k_star, capped)


def _rows_evaluate(T: FunctionalSpec, rows: np.ndarray) -> np.ndarray:
    rows = np.sort(rows, axis=-1)
    shape = rows.shape
    flat = rows.reshape(-1, shape[-1])
    return T.evaluate_rows(flat).reshape(shape[:-1])


def smooth_sensitivity_oracle(
    T: FunctionalSpec,
    sample: SampleData,
    beta: float,
    grid: Sequence[float],
    chunk: int = 4096,
) -> float:
    """Brute-force SS_beta with every dataset restricted to grid ∪ sample values.

    Plug-in estimators are symmetric, so candidate datasets D' are enumerated
    as multisets; the positional Hamming distance minimised over orderings is
    n minus the size of the multiset intersection with D.  LS(D') is brute
    forced over all single replacements by values of the same set.
    """
    n = sample.n
    grid = np.asarray(grid, dtype=float)
    if n > 7 or grid.size > 12:
        raise TooLarge(f"oracle limited to n <= 7 and |grid| <= 12 (got n={n}, |grid|={grid.size})")
    if beta < 0:
        raise BetaNegative(f"beta must be non-negative, got {beta}")
    L, U = sample.domain
    if grid.size and (grid.min() < L or grid.max() > U):
        raise ValidationError("grid", "grid values must lie in the sample domain")
    V = np.union1d(grid, sample.values)
    nv = V.size
    d_counts = np.bincount(np.searchsorted(V, sample.values), minlength=nv)
    combos = np.array(list(itertools.combinations_with_replacement(range(nv), n)), dtype=np.intp)
    best = 0.0
    for start in range(0, len(combos), chunk):
        idx = combos[start : start + chunk]
        rows = V[idx]
        counts = np.zeros((len(idx), nv), dtype=np.intp)
        np.add.at(counts, (np.repeat(np.arange(len(idx)), n), idx.ravel()), 1)
        dist = n - np.minimum(counts, d_counts).sum(axis=1)
        base = _rows_evaluate(T, rows)
        # every single replacement: (rows, position, value, n)
        repl = np.broadcast_to(rows[:, None, None, :], (len(idx), n, nv, n)).copy()
        pos = np.arange(n)
        repl[:, pos, :, pos] = V[None, None, :]
        moved = _rows_evaluate(T, repl)
        ls = np.abs(moved - base[:, None, None]).max(axis=(1, 2))
        best = max(best, float(np.max(np.exp(-beta * dist) * ls)))
    return min(best, T.range_length(sample.domain))


def smooth_sensitivity_bound(R: float, gamma_n: float, n: int, beta: float, eta: float) -> float:
    """High-probability bound on SS_beta(T, F_n) from bounded range and GES."""
    if not 0.0 < eta < 1.0:
        raise EtaOutOfRange(f"eta must lie in (0, 1), got {eta}")
    tail = R * math.exp(-beta * (math.sqrt(n * math.log(2.0 / eta) / 2.0) - 1.0))
    return max(2.0 * gamma_n / n, tail)


def privacy_error_term(R: float, gamma_n: float, n: int, params: PrivacyParams, eta: float) -> float:
    """The noise-induced part of the smooth-Laplace error bound."""
    if not 0.0 < eta < 0.25:
        raise EtaOutOfRange(f"eta must lie in (0, 1/4), got {eta}")
    if params.delta <= 0.0:
        raise ValidationError("delta", "the smooth-Laplace bound needs delta > 0")
    a = params.alpha
    if math.isinf(a):
        return 0.0
    tail = R * math.exp(-a * math.sqrt(n * math.log(2.0 / eta)) / (74.0 * math.log(1.0 / params.delta)))
    return (2.0 * math.log(1.0 / eta) / a) * max(2.0 * gamma_n / n, tail)


def private_error_bound(
    nonprivate_err: float, R: float, gamma_n: float, n: int, params: PrivacyParams, eta: float
) -> float:
    """|A_T(F_n) - T(F)| bound holding with probability >= 1 - 2 eta."""
    return nonprivate_err + privacy_error_term(R, gamma_n, n, params, eta)
