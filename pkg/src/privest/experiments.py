"""Seeded Monte Carlo checks of the upper and lower bounds.

Every experiment draws its randomness from streams derived from a root seed
and the cell it is computing (see :mod:`privest.seeding`), so a report is
reproduced bit for bit from its configuration and seed, whatever the number
of worker threads.  Expectation claims are checked with a 3-sigma slack on
the Monte Carlo standard error; the bounds' constants are used as stated.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Callable, Optional, Sequence

import numpy as np

from .distributions import (
    Contaminated,
    DistributionModel,
    SampleData,
    UniformShift,
    draw_sample,
)
from .errors import AlphaOutOfRange, EtaOutOfRange, NotNeighbors, ValidationError
from .functionals import FunctionalSpec, Median, gamma_n, ges_rho
from .mechanisms import ExponentialMechanism, SmoothLaplace, ZeroNoise
from .mestimation import (
    MEstimationContext,
    PriorSpec,
    PsiSpec,
    estimate_sample_size,
    exp_mech_sample_size,
    exp_mech_sample_size_terms,
    solve_m_estimator,
)
from .seeding import derive_rng
from .sensitivity import PrivacyParams, privacy_error_term

SCHEMA = 1
SIGMAS = 3.0


def contamination_radius(n: int, alpha: float) -> float:
    """Contamination radius (1/n) * ceil(ln 2 / (2 alpha))."""
    return math.ceil(math.log(2.0) / (2.0 * alpha)) / n


def range_error_threshold(range_length: float, n: int, alpha: float) -> float:
    """(1/4) * range_length / (2 + e^{alpha n}); zero once e^{alpha n} overflows."""
    an = alpha * n
    if an > 700.0:
        return 0.0
    return 0.25 * range_length / (2.0 + math.exp(an))


@dataclass
class Row:
    cell: str
    n: int
    trials: int
    gamma: Optional[float] = None
    mean_abs_err_private: Optional[float] = None
    se_private: Optional[float] = None
    mean_abs_err_nonprivate: Optional[float] = None
    se_nonprivate: Optional[float] = None
    coverage: Optional[float] = None
    statistic: Optional[float] = None
    bound_value: Optional[float] = None
    bound_satisfied: Optional[bool] = None


ROW_FIELDS = [f.name for f in fields(Row)]
LEAD_FIELDS = ["alpha", "delta", "mechanism", "experiment_id"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return float(format(v, ".17g")) if math.isfinite(v) else _fmt(v)
    return value


@dataclass
class ExperimentReport:
    experiment_id: str
    root_seed: int
    config_echo: dict
    trials: int
    rows: list
    verdict: str  # pass | fail | inconclusive
    notes: list = field(default_factory=list)
    privacy: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.rows:
            raise ValueError("a report needs at least one row")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(LEAD_FIELDS + ROW_FIELDS)
        lead = [_fmt(self.privacy.get("alpha")), _fmt(self.privacy.get("delta")),
                _fmt(self.privacy.get("mechanism")), self.experiment_id]
        for row in self.rows:
            writer.writerow(lead + [_fmt(getattr(row, name)) for name in ROW_FIELDS])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "schema": SCHEMA,
            "alpha": self.privacy.get("alpha"),
            "delta": self.privacy.get("delta"),
            "mechanism": self.privacy.get("mechanism"),
            "experiment_id": self.experiment_id,
            "verdict": self.verdict,
            "root_seed": self.root_seed,
            "trials": self.trials,
            "notes": list(self.notes),
            "config_echo": self.config_echo,
            "rows": [{name: getattr(r, name) for name in ROW_FIELDS} for r in self.rows],
        }
        return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"

    def summary(self) -> str:
        return f"{self.experiment_id}: verdict={self.verdict} rows={len(self.rows)} seed={self.root_seed}"


def _privacy_of(mechanism) -> dict:
    params = getattr(mechanism, "params", None)
    return {
        "alpha": None if params is None else params.alpha,
        "delta": None if params is None else params.delta,
        "mechanism": getattr(mechanism, "name", type(mechanism).__name__),
    }


def _mechanism_echo(mechanism) -> dict:
    echo = _privacy_of(mechanism)
    if hasattr(mechanism, "functional"):
        echo["functional"] = mechanism.functional.to_record()
    if hasattr(mechanism, "psi"):
        echo["psi"] = mechanism.psi.to_record()
        echo["prior"] = mechanism.prior.to_record()
        echo["grid_size"] = mechanism.grid_size
    return echo


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def _run_cells(fn: Callable, cells: Sequence, threads: int) -> list:
    if threads <= 1 or len(cells) <= 1:
        return [fn(i, c) for i, c in enumerate(cells)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(len(cells)), cells))


def _draw(F: DistributionModel, n: int, rng) -> SampleData:
    return draw_sample(F, n, rng)


def convergence_curve(
    mechanism,
    F: DistributionModel,
    n_list: Sequence[int],
    trials: int,
    seed: int,
    ratio_limit: float = 2.0,
    threads: int = 1,
) -> ExperimentReport:
    """Mean absolute error of the private and plug-in estimates against T(F), per n.

    Each row's bound is ``ratio_limit`` times the plug-in error; the verdict
    is pass when the largest n meets it (private cost eventually negligible)
    and inconclusive otherwise.
    """
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValidationError("n_list", "must be strictly increasing")
    if trials < 100:
        raise ValidationError("trials", "need at least 100 trials")
    target = mechanism.target(F)

    def cell(i, n):
        rng = derive_rng(seed, "convergence", i)
        priv = np.empty(trials)
        plug = np.empty(trials)
        for t in range(trials):
            sample = _draw(F, n, rng)
            priv[t] = abs(mechanism(sample, rng) - target)
            plug[t] = abs(mechanism.nonprivate(sample) - target)
        mp, sp = _mean_se(priv)
        mn, sn = _mean_se(plug)
        bound = ratio_limit * mn
        return Row(f"n={n}", n, trials, None, mp, sp, mn, sn, None, mp / mn if mn > 0 else None,
                   bound, mp <= bound)

    rows = _run_cells(cell, n_list, threads)
    verdict = "pass" if rows[-1].bound_satisfied else "inconclusive"
    echo = {"experiment": "convergence", "mechanism": _mechanism_echo(mechanism), "distribution": F.to_record(),
            "n_list": n_list, "trials": trials, "ratio_limit": ratio_limit}
    notes = ["statistic column is the private / plug-in error ratio"]
    return ExperimentReport("convergence", seed, echo, trials, rows, verdict, notes, _privacy_of(mechanism))


def coupled_contamination(sample: SampleData, x_star: float, rho: float, rng) -> SampleData:
    """Replace each entry by x_star independently with probability rho.

    Applied to a sample from F this yields a sample from (1-rho) F + rho delta_x*,
    coupled entry by entry with the original.
    """
    origin = np.array(sample.origin)
    flips = rng.random(origin.size) < rho
    origin[flips] = x_star
    return SampleData.from_values(origin, sample.domain, sample.provenance)


def contamination_lower_bound_check(
    T: FunctionalSpec,
    F: DistributionModel,
    mechanism,
    n: int,
    alpha: float,
    trials: int,
    seed: int,
) -> ExperimentReport:
    """Either the error at F or at its rho-contamination G clears (rho/16) GES_rho."""
    if not 0.0 < alpha < math.log(2.0) / 2.0:
        raise AlphaOutOfRange(f"alpha must lie in (0, ln2/2), got {alpha}")
    rho = contamination_radius(n, alpha)
    if rho > 1.0:
        raise ValidationError("n", f"radius {rho} exceeds 1; increase n")
    ges = ges_rho(T, F, rho)
    G = Contaminated(F, ges.x_star, rho, F.domain)
    bound = rho / 16.0 * ges.value
    tF, tG = T.evaluate(F), T.evaluate(G)
    rng = derive_rng(seed, "contamination")
    err = {"F": np.empty(trials), "G": np.empty(trials)}
    plug = {"F": np.empty(trials), "G": np.empty(trials)}
    for t in range(trials):
        sF = _draw(F, n, rng)
        sG = coupled_contamination(sF, ges.x_star, rho, rng)
        err["F"][t] = abs(mechanism(sF, rng) - tF)
        err["G"][t] = abs(mechanism(sG, rng) - tG)
        plug["F"][t] = abs(T.evaluate(sF) - tF)
        plug["G"][t] = abs(T.evaluate(sG) - tG)
    rows = []
    for label in ("F", "G"):
        mp, sp = _mean_se(err[label])
        mn, sn = _mean_se(plug[label])
        rows.append(Row(label, n, trials, None, mp, sp, mn, sn, None, None, bound, mp >= bound - SIGMAS * sp))
    verdict = "pass" if any(r.bound_satisfied for r in rows) else "fail"
    total = rows[0].mean_abs_err_private + rows[1].mean_abs_err_private
    notes = [
        f"rho={rho!r} x_star={ges.x_star!r} GES_rho={ges.value!r} ({ges.method})",
        f"sum of the two errors {total!r} vs rho/8 * GES_rho = {rho / 8.0 * ges.value!r}",
    ]
    if getattr(mechanism, "params", None) is None:
        notes.append("mechanism is not differentially private; the lower bound does not apply")
    echo = {"experiment": "contamination", "functional": T.to_record(), "distribution": F.to_record(),
            "mechanism": _mechanism_echo(mechanism), "n": n, "alpha": alpha, "trials": trials}
    return ExperimentReport("contamination", seed, echo, trials, rows, verdict, notes, _privacy_of(mechanism))


def range_lower_bound_check(
    R: float,
    mechanism,
    n: int,
    alpha: float,
    gamma_grid: Sequence[float],
    trials: int,
    seed: int,
    threads: int = 1,
) -> ExperimentReport:
    """Worst-case error of the median over the shift family {U_g : g in [-R, R]}."""
    gamma_grid = [float(g) for g in gamma_grid]
    if any(abs(g) > R for g in gamma_grid):
        raise ValidationError("gamma_grid", f"shifts must lie in [-{R}, {R}]")
    params = getattr(mechanism, "params", None)
    if params is not None and params.delta != 0.0:
        raise ValidationError("delta", "the range lower bound is for (alpha, 0)-DP mechanisms")
    threshold = range_error_threshold(2.0 * R, n, alpha)
    domain = (-R - 1.0, R + 1.0)
    median = Median()

    def cell(i, g):
        rng = derive_rng(seed, "range", i)
        F = UniformShift(g, domain)
        priv = np.empty(trials)
        plug = np.empty(trials)
        for t in range(trials):
            sample = _draw(F, n, rng)
            priv[t] = abs(mechanism(sample, rng) - g)
            plug[t] = abs(median.evaluate(sample) - g)
        mp, sp = _mean_se(priv)
        mn, sn = _mean_se(plug)
        return Row(f"gamma={g!r}", n, trials, g, mp, sp, mn, sn, None, None, threshold,
                   mp >= threshold - SIGMAS * sp)

    rows = _run_cells(cell, gamma_grid, threads)
    verdict = "pass" if any(r.bound_satisfied for r in rows) else "fail"
    notes = [f"threshold (1/4)(2R)/(2+e^(alpha n)) = {threshold!r}"]
    if threshold < 1e-12:
        notes.append("alpha * n is large; the threshold is negligible and the check is vacuous")
    echo = {"experiment": "range", "R": R, "mechanism": _mechanism_echo(mechanism), "n": n, "alpha": alpha,
            "gamma_grid": gamma_grid, "trials": trials}
    return ExperimentReport("range", seed, echo, trials, rows, verdict, notes, _privacy_of(mechanism))


def _coverage_row(label, n, holds, priv, plug, guaranteed, extra=None) -> Row:
    trials = holds.size
    cov = float(holds.mean())
    se = math.sqrt(cov * (1.0 - cov) / trials)
    mp, sp = _mean_se(priv)
    mn, sn = _mean_se(plug)
    return Row(label, n, trials, None, mp, sp, mn, sn, cov, extra, guaranteed, cov >= guaranteed - SIGMAS * se)


def smooth_laplace_coverage(
    T: FunctionalSpec,
    F: DistributionModel,
    n_list: Sequence[int],
    params: PrivacyParams,
    eta: float,
    trials: int,
    seed: int,
    gamma_values: Optional[dict] = None,
    noise_stub: bool = False,
    threads: int = 1,
) -> ExperimentReport:
    """Frequency with which the smooth-Laplace error bound holds; should be >= 1 - 2 eta.

    Gamma_n comes from :func:`gamma_n` unless ``gamma_values`` maps n to a value.
    """
    if not 0.0 < eta < 0.25:
        raise EtaOutOfRange(f"eta must lie in (0, 1/4), got {eta}")
    mech = SmoothLaplace(T, params)
    R = T.range_length(F.domain)
    target = T.evaluate(F)
    notes = []

    def cell(i, n):
        if gamma_values and n in gamma_values:
            gam, method = float(gamma_values[n]), "given"
        else:
            prof = gamma_n(T, F, n, eta)
            gam, method = prof.gamma_n, prof.method
        term = privacy_error_term(R, gam, n, params, eta)
        rng = derive_rng(seed, "smooth_coverage", i)
        noise = ZeroNoise() if noise_stub else rng
        holds = np.empty(trials, dtype=bool)
        priv = np.empty(trials)
        plug = np.empty(trials)
        for t in range(trials):
            sample = _draw(F, n, rng)
            est = mech.release(sample, noise)
            priv[t] = abs(est.value - target)
            plug[t] = abs(est.nonprivate_value - target)
            holds[t] = priv[t] <= plug[t] + term
        note = f"n={n}: Gamma_n={gam!r} ({method}), R={R!r}, privacy term={term!r}"
        return _coverage_row(f"n={n}", n, holds, priv, plug, 1.0 - 2.0 * eta, term), note

    results = _run_cells(cell, [int(n) for n in n_list], threads)
    rows = [r for r, _ in results]
    notes.extend(note for _, note in results)
    if isinstance(F, UniformShift) and T == Median():
        notes.append("statistic column is the privacy term; a unit-length reading of the family gives Gamma_n = 1/2")
    if noise_stub:
        notes.append("noise stubbed to zero: harness check only, not a private release")
    verdict = "pass" if all(r.bound_satisfied for r in rows) else "fail"
    echo = {"experiment": "smooth_coverage", "functional": T.to_record(), "distribution": F.to_record(),
            "n_list": [int(n) for n in n_list], "alpha": params.alpha, "delta": params.delta, "eta": eta,
            "trials": trials, "noise_stub": noise_stub}
    return ExperimentReport("smooth_coverage", seed, echo, trials, rows, verdict, notes, _privacy_of(mech))


def exp_mech_coverage(
    psi: PsiSpec,
    F: DistributionModel,
    prior: PriorSpec,
    eps: float,
    eta: float,
    alpha: float,
    ctx: MEstimationContext,
    trials: int,
    seed: int,
    n: Optional[int] = None,
    grid_size: int = 1024,
    sample_size_trials: int = 1000,
) -> ExperimentReport:
    """Frequency of |A - T(F)| <= |T(F_n) - T(F)| + eps; should be >= 1 - 3 eta at the prescribed n."""
    n_eps2 = estimate_sample_size(psi, F, ctx.eps2, eta, sample_size_trials, seed)
    terms = exp_mech_sample_size_terms(ctx, prior, eps, eta, alpha, n_eps2.n)
    required = exp_mech_sample_size(ctx, prior, eps, eta, alpha, n_eps2.n)
    n = required if n is None else int(n)
    mech = ExponentialMechanism(psi, prior, PrivacyParams(alpha, 0.0), grid_size, refine=True)
    target = ctx.root
    rng = derive_rng(seed, "exp_coverage", n)
    holds = np.empty(trials, dtype=bool)
    priv = np.empty(trials)
    plug = np.empty(trials)
    for t in range(trials):
        sample = _draw(F, n, rng)
        priv[t] = abs(mech(sample, rng) - target)
        plug[t] = abs(solve_m_estimator(psi, sample) - target)
        holds[t] = priv[t] <= plug[t] + eps
    row = _coverage_row(f"n={n}", n, holds, priv, plug, 1.0 - 3.0 * eta)
    if row.bound_satisfied:
        verdict = "pass"
    else:
        verdict = "fail" if n >= required else "inconclusive"
    notes = [
        f"required n={required} (baseline={terms['baseline']!r}, N_eps2_eta={n_eps2.n}, "
        f"prior term={terms['prior_term']!r}, case {terms['case']})",
        f"Gamma={ctx.ges_bound!r}, eps1={ctx.eps1!r}, eps2={ctx.eps2!r}",
    ]
    if n < required:
        notes.append(f"n={n} is below the required sample size; the guarantee does not apply")
    echo = {"experiment": "exp_coverage", "psi": psi.to_record(), "distribution": F.to_record(), "prior": prior.to_record(),
            "eps": eps, "eta": eta, "alpha": alpha, "n": n, "trials": trials, "grid_size": grid_size,
            "smoothness": None if ctx.smoothness is None else vars(ctx.smoothness)}
    return ExperimentReport("exp_coverage", seed, echo, trials, [row], verdict, notes, _privacy_of(mech))


def _audit_stats(outputs_a, outputs_b, bins, alpha, delta):
    pooled = np.concatenate([outputs_a, outputs_b])
    edges = np.unique(np.quantile(pooled, np.linspace(0.0, 1.0, bins + 1))[1:-1])
    idx_a = np.searchsorted(edges, outputs_a, side="right")
    idx_b = np.searchsorted(edges, outputs_b, side="right")
    k = edges.size + 1
    pa = np.bincount(idx_a, minlength=k) / outputs_a.size
    pb = np.bincount(idx_b, minlength=k) / outputs_b.size
    ea = math.exp(alpha)

    def excess(p, q, tp, tq):
        se = np.sqrt(p * (1 - p) / tp + ea * ea * q * (1 - q) / tq)
        return p - ea * q - delta, SIGMAS * se

    ex_ab, sl_ab = excess(pa, pb, outputs_a.size, outputs_b.size)
    ex_ba, sl_ba = excess(pb, pa, outputs_b.size, outputs_a.size)
    return pa, pb, ex_ab, sl_ab, ex_ba, sl_ba


def dp_audit(
    mechanism,
    D: SampleData,
    D_prime: SampleData,
    bins: int,
    trials: int,
    params: PrivacyParams,
    seed: int,
) -> ExperimentReport:
    """Binned empirical check of Pr[A(D) in S] <= e^alpha Pr[A(D') in S] + delta.

    A pass means no violation was detected beyond 3 standard errors; it is
    not a proof of privacy.
    """
    if bins < 8:
        raise ValidationError("bins", "need at least 8 bins")
    if D.n != D_prime.n or D.hamming(D_prime) > 1:
        raise NotNeighbors("datasets must have equal size and differ in at most one entry")
    out_a = np.asarray(mechanism.sample_many(D, derive_rng(seed, "audit", 0), trials), dtype=float)
    out_b = np.asarray(mechanism.sample_many(D_prime, derive_rng(seed, "audit", 1), trials), dtype=float)
    pa, pb, ex_ab, sl_ab, ex_ba, sl_ba = _audit_stats(out_a, out_b, bins, params.alpha, params.delta)
    rows = []
    for b in range(pa.size):
        worse_ab = ex_ab[b] - sl_ab[b] >= ex_ba[b] - sl_ba[b]
        stat, slack = (ex_ab[b], sl_ab[b]) if worse_ab else (ex_ba[b], sl_ba[b])
        rows.append(Row(f"bin={b}", D.n, trials, None, None, None, None, None, float(pa[b]), float(stat),
                        float(slack), bool(stat <= slack)))
    violations = [r.cell for r in rows if not r.bound_satisfied]
    verdict = "fail" if violations else "pass"
    notes = [
        "coverage column: empirical bin probability under D; statistic: worst-direction "
        "p(A) - e^alpha p(B) - delta; bound_value: 3 joint standard errors",
        "pass means no violation detected; this is not a privacy proof",
    ]
    if violations:
        notes.append("violations in " + ", ".join(violations))
    echo = {"experiment": "audit", "mechanism": _mechanism_echo(mechanism), "D": list(map(float, D.origin)),
            "D_prime": list(map(float, D_prime.origin)), "domain": list(D.domain), "bins": bins,
            "trials": trials, "alpha": params.alpha, "delta": params.delta}
    return ExperimentReport("audit", seed, echo, trials, rows, verdict, notes, _privacy_of(mechanism))


def audit_false_positive_rate(
    mechanism,
    D: SampleData,
    D_prime: SampleData,
    bins: int,
    trials: int,
    params: PrivacyParams,
    seed: int,
    reruns: int = 50,
    max_rate: float = 0.01,
) -> ExperimentReport:
    """Rerun :func:`dp_audit` on a known-private mechanism and count false alarms."""
    rows = []
    for r in range(reruns):
        rep = dp_audit(mechanism, D, D_prime, bins, trials, params, int(derive_rng(seed, "fpr", r).integers(2**63)))
        worst = max(rows_.statistic - rows_.bound_value for rows_ in rep.rows)
        rows.append(Row(f"rerun={r}", D.n, trials, None, None, None, None, None, None, worst, 0.0,
                        rep.verdict == "pass"))
    rate = sum(not r.bound_satisfied for r in rows) / reruns
    verdict = "pass" if rate <= max_rate else "fail"
    notes = [f"false-positive rate {rate!r} over {reruns} reruns (limit {max_rate!r})",
             "statistic column: largest excess over the 3-sigma slack in that rerun"]
    echo = {"experiment": "audit_calibration", "mechanism": _mechanism_echo(mechanism), "bins": bins,
            "trials": trials, "reruns": reruns, "alpha": params.alpha, "delta": params.delta}
    return ExperimentReport("audit_calibration", seed, echo, trials, rows, verdict, notes, _privacy_of(mechanism))


def nonprivate_rate(
    psi: PsiSpec,
    F: DistributionModel,
    n_list: Sequence[int],
    trials: int,
    seed: int,
    expected_slope: float = -0.5,
    tolerance: float = 0.15,
) -> ExperimentReport:
    """Log-log slope of the median plug-in error against n."""
    from .distributions import draw_matrix
    from .mestimation import solve_rows

    target = solve_m_estimator(psi, F, tol=1e-12)
    rows, meds = [], []
    for i, n in enumerate(n_list):
        rng = derive_rng(seed, "rate", i)
        roots = solve_rows(psi, draw_matrix(F, trials, int(n), rng), F.domain, tol=1e-10)
        errs = np.abs(roots - target)
        med = float(np.median(errs))
        meds.append(med)
        m, s = _mean_se(errs)
        rows.append(Row(f"n={n}", int(n), trials, None, None, None, m, s, None, med))
    slope = float(np.polyfit(np.log(np.asarray(n_list, dtype=float)), np.log(meds), 1)[0])
    ok = abs(slope - expected_slope) <= tolerance
    for r in rows:
        r.bound_value = slope
        r.bound_satisfied = ok
    notes = [f"fitted slope {slope!r}; expected {expected_slope!r} +- {tolerance!r}",
             "statistic column: median absolute error; bound_value: fitted log-log slope"]
    echo = {"experiment": "rate", "psi": psi.to_record(), "distribution": F.to_record(),
            "n_list": [int(n) for n in n_list], "trials": trials}
    return ExperimentReport("rate", seed, echo, trials, rows, "pass" if ok else "fail", notes,
                            {"alpha": None, "delta": None, "mechanism": "plug-in"})
