"""Acceptance criteria 1-10.  Each test carries a ``criterion`` marker; the
conftest prints one PASS/FAIL line per criterion at the end of the run."""

import math

import mpmath as mp
import numpy as np
import pytest

from privest.cli import main
from privest.distributions import SampleData, UniformShift, draw_sample
from privest.experiments import (
    audit_false_positive_rate,
    contamination_lower_bound_check,
    contamination_radius,
    convergence_curve,
    dp_audit,
    exp_mech_coverage,
    nonprivate_rate,
    range_lower_bound_check,
    smooth_laplace_coverage,
)
from privest.functionals import Median
from privest.mechanisms import (
    ExponentialMechanism,
    PlugIn,
    SmoothLaplace,
    laplace_draws,
)
from privest.mestimation import (
    CauchyPrior,
    MEstimationContext,
    SignMedian,
    SmoothnessSpec,
    UniformPrior,
    estimate_sample_size,
    exp_mech_sample_size_terms,
    ges_bound_from_smoothness,
    sign_median_uniform_smoothness,
)
from privest.seeding import derive_rng
from privest.sensitivity import (
    PrivacyParams,
    privacy_error_term,
    smooth_sensitivity,
    smooth_sensitivity_bound,
    smooth_sensitivity_oracle,
)

U0 = UniformShift(0.0)


@pytest.mark.criterion(1, "smooth sensitivity equals the neighbour-enumeration oracle")
def test_smooth_sensitivity_oracle_equivalence(detail):
    rng = derive_rng(2024, "acceptance", 1)
    worst, count = 0.0, 0
    for _ in range(240):
        interior = np.round(rng.random(int(rng.integers(1, 8))), 2)
        grid = np.unique(np.concatenate([[0.0, 1.0], interior]))
        s = SampleData.from_values(rng.choice(grid, int(rng.integers(1, 6))), (0.0, 1.0))
        beta = float(rng.choice([0.0, 0.3, 1.0, 5.0]))
        exact = smooth_sensitivity(Median(), s, beta).smooth
        oracle = smooth_sensitivity_oracle(Median(), s, beta, grid)
        if oracle > 0:
            worst = max(worst, abs(exact - oracle) / oracle)
        else:
            assert exact == 0.0
        count += 1
    detail(f"{count} instances, worst rel err {worst:.2e}")
    assert count >= 200 and worst <= 1e-9


@pytest.mark.criterion(2, "Laplace tail Pr[|Z| > t] against e^-t")
def test_laplace_tail(detail):
    n = 10**6
    z = np.abs(laplace_draws(derive_rng(2024, "acceptance", 2), n))
    parts, ok = [], True
    for t in (1, 2, 3):
        p = math.exp(-t)
        emp = float(np.mean(z > t))
        sigma = math.sqrt(p * (1 - p) / n)
        parts.append(f"t={t}: {emp:.5f} vs {p:.5f} ({abs(emp - p) / sigma:.1f} sd)")
        ok &= abs(emp - p) <= 3 * sigma
    detail("; ".join(parts))
    assert ok


@pytest.mark.criterion(3, "smooth-Laplace median coverage >= 0.8 - 0.04")
def test_smooth_laplace_coverage(detail):
    rep = smooth_laplace_coverage(Median(), U0, [10**4], PrivacyParams(1.0, 1e-3), 0.1, 1000, 2024)
    cov = rep.rows[0].coverage
    detail(f"coverage {cov:.3f}")
    assert cov >= 0.8 - 0.04


@pytest.mark.criterion(4, "exponential-mechanism coverage >= 0.7 - 0.05 at the case-1 sample size")
def test_exp_mech_coverage(detail):
    psi, prior = SignMedian(), UniformPrior(-20.0, 20.0)
    eps, eta, alpha = 0.1, 0.1, 0.5
    ctx = ges_bound_from_smoothness(psi, U0, sign_median_uniform_smoothness())
    n_eps2 = estimate_sample_size(psi, U0, ctx.eps2, eta, 1000, 2024)
    terms = exp_mech_sample_size_terms(ctx, prior, eps, eta, alpha, n_eps2.n)
    assert terms["case"] == 1
    rep = exp_mech_coverage(psi, U0, prior, eps, eta, alpha, ctx, 1000, 2024)
    row = rep.rows[0]
    detail(f"n={row.n} (prior term {terms['prior_term']:.1f}), frequency {row.coverage:.3f}")
    assert row.n >= terms["prior_term"]
    assert row.coverage >= 0.7 - 0.05


@pytest.mark.criterion(5, "either/or lower bound (rho/16) GES_rho for both mechanisms")
@pytest.mark.parametrize("alpha,n", [(0.3, 100), (0.1, 50)])
@pytest.mark.parametrize("kind", ["smooth-laplace", "exponential"])
def test_contamination_lower_bound(detail, alpha, n, kind):
    if kind == "smooth-laplace":
        mech = SmoothLaplace(Median(), PrivacyParams(alpha, 1e-3))
    else:
        mech = ExponentialMechanism(SignMedian(), UniformPrior(-1.0, 1.0), PrivacyParams(alpha))
    rep = contamination_lower_bound_check(Median(), U0, mech, n, alpha, 1000, 2024)
    best = max(rep.rows, key=lambda r: r.mean_abs_err_private - 3 * r.se_private)
    detail(f"{kind} a={alpha} n={n}: {best.mean_abs_err_private:.4f} vs {best.bound_value:.5f}")
    rho = contamination_radius(n, alpha)
    assert rep.rows[0].bound_value == pytest.approx(rho / 16 / (1 - rho))  # GES_rho of the median on U0
    assert rep.verdict == "pass"


@pytest.mark.criterion(6, "worst-case error over the shift family >= (1/4) 2R / (2 + e^(alpha n))")
def test_range_lower_bound(detail):
    R, alpha, n = 50.0, 0.05, 20
    mech = ExponentialMechanism(SignMedian(), UniformPrior(-R, R), PrivacyParams(alpha))
    rep = range_lower_bound_check(R, mech, n, alpha, np.linspace(-R, R, 11), 1000, 2024)
    worst = max(rep.rows, key=lambda r: r.mean_abs_err_private)
    detail(f"worst error {worst.mean_abs_err_private:.2f} at {worst.cell}, threshold {worst.bound_value:.2f}")
    assert worst.bound_value == pytest.approx(0.25 * 2 * R / (2 + math.e))
    assert rep.verdict == "pass"


def _audit_pair():
    D = draw_sample(U0, 25, derive_rng(2024, "acceptance", 7))
    return D, D.replace(int(np.argsort(D.origin)[12]), 1.0)


@pytest.mark.criterion(7, "binned DP audit: private median passes, plug-in flagged, false alarms <= 1%")
def test_dp_audit(detail):
    p = PrivacyParams(1.0, 1e-3)
    D, Dp = _audit_pair()
    assert Median().evaluate(D) != Median().evaluate(Dp)
    ok = dp_audit(SmoothLaplace(Median(), p), D, Dp, 20, 10**5, p, 2024)
    bad = dp_audit(PlugIn(Median()), D, Dp, 20, 10**5, p, 2024)
    fpr = audit_false_positive_rate(SmoothLaplace(Median(), p), D, Dp, 20, 10**5, p, 2024, reruns=50)
    rate = sum(not r.bound_satisfied for r in fpr.rows) / len(fpr.rows)
    detail(f"private {ok.verdict}, plug-in {bad.verdict}, false-positive rate {rate:.2f}")
    assert ok.verdict == "pass" and bad.verdict == "fail"
    assert rate <= 0.01 and fpr.verdict == "pass"


@pytest.mark.criterion(8, "sample-median error slope -0.5 +- 0.15 on log-log axes")
def test_nonprivate_rate(detail):
    rep = nonprivate_rate(SignMedian(), U0, [100, 1000, 10000], 1000, 2024)
    slope = rep.rows[0].bound_value
    detail(f"slope {slope:.3f}")
    assert abs(slope + 0.5) <= 0.15


@pytest.mark.criterion(9, "formula calculators match 50-digit evaluation to 1e-12")
def test_formulas_high_precision(detail):
    mp.mp.dps = 50
    rng = derive_rng(2024, "acceptance", 9)
    worst = 0.0

    def check(got, want):
        nonlocal worst
        rel = abs(got - float(want)) / abs(float(want))
        worst = max(worst, rel)
        assert rel <= 1e-12

    for _ in range(100):
        R, g = rng.uniform(0.1, 50), rng.uniform(0.1, 5)
        n = int(rng.integers(2, 10**7))
        alpha, delta, eta = rng.uniform(0.05, 3), 10 ** rng.uniform(-9, -1), rng.uniform(0.01, 0.24)
        a_, d_, e_, R_, g_, n_ = map(mp.mpf, (alpha, delta, eta, R, g, n))
        beta = PrivacyParams(alpha, delta).beta
        check(beta, a_ / (2 * mp.log(1 / d_)))
        check(smooth_sensitivity_bound(R, g, n, beta, eta),
              max(2 * g_ / n_, R_ * mp.exp(-mp.mpf(beta) * (mp.sqrt(n_ * mp.log(2 / e_) / 2) - 1))))
        tail = R_ * mp.exp(-a_ * mp.sqrt(n_ * mp.log(2 / e_)) / (74 * mp.log(1 / d_)))
        check(privacy_error_term(R, g, n, PrivacyParams(alpha, delta), eta),
              2 * mp.log(1 / e_) / a_ * max(2 * g_ / n_, tail))
        a1 = rng.uniform(1e-3, math.log(2) / 2 * 0.999)
        check(contamination_radius(n, a1), mp.ceil(mp.log(2) / (2 * mp.mpf(a1))) / n_)

        gam, root = rng.uniform(0.2, 5), rng.uniform(-10, 10)
        eps1, eps2 = rng.uniform(0.01, 1), rng.uniform(0.05, 1)
        eps = rng.uniform(0.001, 0.99) * eps2
        ctx = MEstimationContext(SignMedian(), U0, root, 1.0 / gam, gam, SmoothnessSpec(eps1, 2 * eps2, 1e-9, 1e-9))
        L = rng.uniform(0.5, 100)
        t1 = exp_mech_sample_size_terms(ctx, UniformPrior(-L / 2, L / 2), eps, eta, alpha, 1)
        t2 = exp_mech_sample_size_terms(ctx, CauchyPrior(), eps, eta, alpha, 1)
        G, E, E2, T = map(mp.mpf, (gam, eps, eps2, root))
        check(t1["prior_term"], 8 * mp.log(6 * mp.mpf(L) / (E * e_)) / (a_ * E) * G)
        inner = (2 * (abs(T) + E2) ** 2 + 1) / (E / 3) + E / 6
        check(t2["prior_term"], 8 / (a_ * E) * mp.log(mp.pi / e_ * inner) * G)
        check(t1["baseline"], mp.log(2 / e_) / (2 * mp.mpf(eps1) ** 2))
    detail(f"100 draws, worst rel err {worst:.1e}")


@pytest.mark.criterion(10, "identical config and seed give byte-identical CSV and JSON")
def test_determinism(tmp_path, detail):
    mech = SmoothLaplace(Median(), PrivacyParams(1.0, 1e-3))
    a = convergence_curve(mech, U0, [50, 100, 200], 200, 77, threads=1)
    b = convergence_curve(mech, U0, [50, 100, 200], 200, 77, threads=4)
    assert a.to_csv() == b.to_csv() and a.to_json() == b.to_json()
    exp = ExponentialMechanism(SignMedian(), UniformPrior(-5, 5), PrivacyParams(0.5))
    c = range_lower_bound_check(5.0, exp, 20, 0.5, [-5, 0, 5], 100, 77)
    d = range_lower_bound_check(5.0, exp, 20, 0.5, [-5, 0, 5], 100, 77, threads=3)
    assert c.to_csv() == d.to_csv() and c.to_json() == d.to_json()

    cfg = tmp_path / "c.ini"
    cfg.write_text("[distribution]\nkind = uniform_shift\ngamma = 0\n[functional]\nname = median\n"
                   "[privacy]\nalpha = 1\ndelta = 1e-3\n[experiment]\nn_list = 100,200\ntrials = 100\n")
    outputs = {}
    for fmt in ("csv", "json"):
        out = tmp_path / f"r.{fmt}"
        args = ["experiment", "convergence", "--config", str(cfg), "--seed", "123", "--out", str(out), "--format", fmt]
        runs = []
        for _ in range(2):
            assert main(args) == 0
            runs.append(out.read_bytes())
        outputs[fmt] = runs
    detail(f"csv {len(outputs['csv'][0])} bytes, json {len(outputs['json'][0])} bytes")
    assert all(r[0] == r[1] for r in outputs.values())
