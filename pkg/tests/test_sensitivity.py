import math

import mpmath as mp
import numpy as np
import pytest

from privest.distributions import SampleData, UniformShift, draw_sample
from privest.errors import BetaNegative, EtaOutOfRange, TooLarge, ValidationError
from privest.functionals import Linear, Mean, Median, Quantile, TrimmedMean, gamma_n
from privest.seeding import derive_rng
from privest.sensitivity import (
    PrivacyParams,
    local_sensitivity,
    privacy_error_term,
    private_error_bound,
    smooth_sensitivity,
    smooth_sensitivity_bound,
    smooth_sensitivity_oracle,
)

mp.mp.dps = 50


def brute_local(T, sample, grid):
    """LS by trying every replacement value from a grid at every position."""
    base = T.evaluate(sample)
    return max(abs(T.evaluate(sample.replace(i, v)) - base) for i in range(sample.n) for v in grid)


def test_privacy_params_beta():
    p = PrivacyParams(1.0, 1e-3)
    assert p.beta == pytest.approx(1.0 / (2.0 * math.log(1000.0)), rel=1e-15)
    with pytest.raises(ValidationError):
        PrivacyParams(1.0, 0.0).beta
    with pytest.raises(ValidationError):
        PrivacyParams(0.0, 0.1)


def test_local_sensitivity_examples():
    s = SampleData.from_values([1, 2, 3], (0, 10))
    assert local_sensitivity(Median(), s) == 1.0
    s100 = SampleData.from_values(np.linspace(0, 1, 100), (0, 1))
    assert local_sensitivity(Linear("indicator_le(0.5)"), s100) == pytest.approx(0.01)
    assert local_sensitivity(Linear("constant(3)"), s100) == 0.0


@pytest.mark.parametrize("T", [Mean(), Median(), Quantile(0.25), Quantile(0.8), TrimmedMean(0.2),
                               Linear("clip(0.3,0.7)")], ids=lambda t: t.name)
def test_local_sensitivity_matches_replacement_search(T):
    rng = derive_rng(3, "ls", T.name)
    grid = np.concatenate([np.linspace(0, 1, 201), [0.0, 1.0]])
    for _ in range(15):
        n = int(rng.integers(2, 9))
        s = SampleData.from_values(np.round(rng.random(n), 3), (0.0, 1.0))
        assert local_sensitivity(T, s) == pytest.approx(brute_local(T, s, np.union1d(grid, s.values)), abs=1e-12)


def test_mean_local_sensitivity_closed_form():
    s = SampleData.from_values([0.2, 0.5, 0.9], (0.0, 1.0))
    x = s.values
    assert local_sensitivity(Mean(), s) == pytest.approx(max(np.max(x - 0), np.max(1 - x)) / 3)


def test_smooth_beta_zero_is_global():
    s = SampleData.from_values([2, 4, 7, 8, 9], (0, 10))
    assert smooth_sensitivity(Median(), s, 0.0).smooth == 10.0


def test_smooth_large_beta_is_local():
    s = SampleData.from_values([2, 4, 7, 8, 9], (0, 10))
    assert smooth_sensitivity(Median(), s, 50.0).smooth == pytest.approx(local_sensitivity(Median(), s))


def test_smooth_matches_oracle_example():
    s = SampleData.from_values([2, 4, 7, 8, 9], (0, 10))
    grid = np.linspace(0, 10, 11)
    exact = smooth_sensitivity(Median(), s, 0.5).smooth
    assert exact == pytest.approx(smooth_sensitivity_oracle(Median(), s, 0.5, grid), rel=1e-9)


def test_smooth_oracle_random_five_point():
    rng = derive_rng(17, "oracle")
    grid = np.linspace(0, 1, 6)
    for _ in range(20):
        s = SampleData.from_values(rng.choice(grid, 5), (0.0, 1.0))
        beta = float(rng.choice([0.0, 0.3, 1.0, 5.0]))
        assert smooth_sensitivity(Median(), s, beta).smooth == pytest.approx(
            smooth_sensitivity_oracle(Median(), s, beta, grid), rel=1e-9, abs=1e-15
        )


def test_oracle_limits_and_constant():
    s = SampleData.from_values(np.zeros(8), (0, 1))
    with pytest.raises(TooLarge):
        smooth_sensitivity_oracle(Median(), s, 1.0, [0, 1])
    s = SampleData.from_values([0.1, 0.2], (0, 1))
    with pytest.raises(TooLarge):
        smooth_sensitivity_oracle(Median(), s, 1.0, np.linspace(0, 1, 13))
    assert smooth_sensitivity_oracle(Linear("constant(1)"), s, 0.5, [0.0, 1.0]) == 0.0


def test_oracle_beta_zero_is_grid_global():
    s = SampleData.from_values([0.2, 0.4, 0.6], (0, 1))
    grid = [0.0, 0.5, 1.0]
    assert smooth_sensitivity_oracle(Median(), s, 0.0, grid) == pytest.approx(1.0)


def test_beta_negative():
    s = SampleData.from_values([1, 2], (0, 3))
    with pytest.raises(BetaNegative):
        smooth_sensitivity(Median(), s, -0.1)


@pytest.mark.parametrize("T", [Median(), Quantile(0.3), Mean(), TrimmedMean(0.1)], ids=lambda t: t.name)
def test_smooth_monotone_in_beta_and_above_local(T):
    rng = derive_rng(4, "mono", T.name)
    betas = [0.0, 0.01, 0.1, 0.5, 1.0, 3.0, 10.0]
    for _ in range(20):
        s = SampleData.from_values(rng.random(int(rng.integers(1, 40))), (0.0, 1.0))
        vals = [smooth_sensitivity(T, s, b).smooth for b in betas]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
        assert vals[-1] >= local_sensitivity(T, s) - 1e-15


def test_smooth_capped_at_range():
    s = SampleData.from_values([0.5], (0.0, 1.0))
    res = smooth_sensitivity(Median(range_hint=(0.25, 0.75)), s, 0.0)
    assert res.smooth == 0.5 and res.capped


def test_smooth_sensitivity_bound_example():
    beta = 1.0 / (2.0 * math.log(100.0))
    got = smooth_sensitivity_bound(20.0, 0.5, 100, beta, 0.1)
    assert got == pytest.approx(5.90, abs=0.01)
    assert smooth_sensitivity_bound(0.0, 0.5, 100, beta, 0.1) == pytest.approx(0.01)


def test_smooth_sensitivity_bound_single_crossover():
    beta, gam, R, eta = 0.1, 0.5, 20.0, 0.1
    first_branch = [2 * gam / n >= smooth_sensitivity_bound(R, gam, n, beta, eta) - 1e-300 for n in (2**k for k in range(1, 30))]
    # once the 2 Gamma / n branch takes over it keeps the lead
    switch = first_branch.index(True) if True in first_branch else len(first_branch)
    assert all(first_branch[switch:])
    assert not any(first_branch[:switch])


def _mp_ss_bound(R, g, n, beta, eta):
    R, g, n, beta, eta = map(mp.mpf, (R, g, n, beta, eta))
    return max(2 * g / n, R * mp.exp(-beta * (mp.sqrt(n * mp.log(2 / eta) / 2) - 1)))


def _mp_privacy_term(R, g, n, alpha, delta, eta):
    R, g, n, alpha, delta, eta = map(mp.mpf, (R, g, n, alpha, delta, eta))
    tail = R * mp.exp(-alpha * mp.sqrt(n * mp.log(2 / eta)) / (74 * mp.log(1 / delta)))
    return 2 * mp.log(1 / eta) / alpha * max(2 * g / n, tail)


def test_formulas_against_high_precision():
    rng = derive_rng(9, "formulas")
    for _ in range(100):
        R, g = rng.uniform(0.1, 50), rng.uniform(0.1, 5)
        n = int(rng.integers(2, 10**7))
        alpha, delta, eta = rng.uniform(0.05, 3), 10 ** rng.uniform(-9, -1), rng.uniform(0.01, 0.24)
        beta = PrivacyParams(alpha, delta).beta
        assert beta == pytest.approx(float(mp.mpf(alpha) / (2 * mp.log(1 / mp.mpf(delta)))), rel=1e-14)
        assert smooth_sensitivity_bound(R, g, n, beta, eta) == pytest.approx(float(_mp_ss_bound(R, g, n, beta, eta)), rel=1e-12)
        got = privacy_error_term(R, g, n, PrivacyParams(alpha, delta), eta)
        assert got == pytest.approx(float(_mp_privacy_term(R, g, n, alpha, delta, eta)), rel=1e-12)


def test_privacy_error_term_examples():
    p = PrivacyParams(1.0, 1e-3)
    term = privacy_error_term(20.0, 0.5, 10**6, p, 0.1)
    first = 2 * math.log(10) * (2 * 0.5 / 10**6)
    tail = 2 * math.log(10) * 20 * math.exp(-math.sqrt(1e6 * math.log(20)) / (74 * math.log(1000)))
    assert first == pytest.approx(4.6e-6, rel=0.01)
    assert term == pytest.approx(max(first, tail), rel=1e-12)
    assert private_error_bound(0.3, 20.0, 0.5, 100, p, 0.1) - 0.3 == pytest.approx(
        private_error_bound(0.0, 20.0, 0.5, 100, p, 0.1), rel=1e-12)
    assert private_error_bound(0.3, 20.0, 0.5, 100, PrivacyParams(math.inf, 1e-3), 0.1) == 0.3


def test_privacy_error_term_eta_range():
    p = PrivacyParams(1.0, 1e-3)
    privacy_error_term(2.0, 1.0, 100, p, 0.24)
    with pytest.raises(EtaOutOfRange):
        privacy_error_term(2.0, 1.0, 100, p, 0.3)
    with pytest.raises(EtaOutOfRange):
        privacy_error_term(2.0, 1.0, 100, p, 0.0)


def test_smooth_sensitivity_bound_coverage_median_uniform():
    F, n, eta = UniformShift(0.0), 400, 0.1
    beta = PrivacyParams(1.0, 1e-3).beta
    g = gamma_n(Median(), F, n, eta).gamma_n
    bound = smooth_sensitivity_bound(2.0, g, n, beta, eta)
    rng = derive_rng(21, "smooth_sensitivity_bound")
    hits = sum(smooth_sensitivity(Median(), draw_sample(F, n, rng), beta).smooth <= bound for _ in range(500))
    assert hits / 500 >= 1 - eta - 0.03
