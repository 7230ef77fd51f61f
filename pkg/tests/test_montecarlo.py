import math

import numpy as np
import pytest

from osasim import (
    Conditioning,
    ProtocolKind,
    SimWindow,
    SystemParams,
    build_realization,
    coverage_primary_no_secondaries,
    estimate_conditional_density,
    estimate_coverage_primary,
    estimate_coverage_secondary,
    estimate_spatial_opportunity,
    estimate_throughput,
    exclusion_opportunity,
    max_sensed_power,
    spatial_opportunity,
    threshold_for_opportunity,
)

N09 = threshold_for_opportunity(0.9, 0.01, 5.0, 4.0)
N05 = threshold_for_opportunity(0.5, 0.01, 5.0, 4.0)


def z_gap(a_mean, a_se, b_mean, b_se=0.0):
    return abs(a_mean - b_mean) / math.hypot(a_se, b_se)


def test_opportunity_validation():
    p = SystemParams(N_ra=N09)
    with pytest.raises(ValueError):
        estimate_spatial_opportunity(p, ProtocolKind.ALL_ACTIVE)
    with pytest.raises(ValueError):
        estimate_spatial_opportunity(p, ProtocolKind.PRA, n_trials=0)


def test_opportunity_no_primaries_is_certain():
    p = SystemParams(mu_p=0.0, N_ra=N09)
    est = estimate_spatial_opportunity(p, ProtocolKind.PRA, n_trials=5000, seed=1)
    assert est.mean == 1.0 and est.stderr == 0.0


def test_opportunity_stderr_is_bernoulli():
    p = SystemParams(N_ra=N05)
    est = estimate_spatial_opportunity(p, ProtocolKind.PRA, n_trials=4000, seed=2)
    assert est.stderr == pytest.approx(
        math.sqrt(est.mean * (1 - est.mean) / est.n_trials), rel=1e-12
    )
    assert est.n_trials == 4000 and est.n_rejected == 0 and est.master_seed == 2


def test_opportunity_matches_exclusion_formula():
    p = SystemParams(D_excl=3.0)
    est = estimate_spatial_opportunity(p, ProtocolKind.ERR, n_trials=20_000, seed=3)
    assert z_gap(est.mean, est.stderr, exclusion_opportunity(0.01, 3.0)) < 3.0


def test_opportunity_vectorized_path_matches_realization_path():
    # The estimator samples sensing sources directly; rebuilding full
    # realizations and probing the origin must give a statistically identical
    # answer.
    p = SystemParams(lambda_0=0.0, N_ra=N05)
    fast = estimate_spatial_opportunity(p, ProtocolKind.PRA, n_trials=10_000, seed=5)
    rng = np.random.default_rng(55)
    w = SimWindow(50.0)
    hits = 0
    trials = 10_000
    origin = np.zeros(2)
    for _ in range(trials):
        real = build_realization(p, w, ProtocolKind.PRA, Conditioning.NONE, rng)
        fad = rng.exponential(size=real.sensing_sources.shape[0])
        sensed = max_sensed_power(origin, real.sensing_sources, fad, p.P_p, p.alpha)
        hits += sensed <= p.N_ra
    lit_mean = hits / trials
    lit_se = math.sqrt(lit_mean * (1 - lit_mean) / trials)
    assert z_gap(fast.mean, fast.stderr, lit_mean, lit_se) < 3.0


def test_opportunity_truncation_negligible():
    # Paired design: same far-field draws scored with the 50-window subset and
    # the doubled window; the activation verdicts must essentially never
    # differ, keeping the truncation bias under one standard error.
    p = SystemParams(N_ra=N09)
    rng = np.random.default_rng(17)
    n = 50_000
    big = 100.0
    mean_count = p.mu_p * math.pi * big**2
    counts = rng.poisson(mean_count, size=n)
    total = int(counts.sum())
    radii = big * np.sqrt(rng.random(total))
    fadings = rng.exponential(size=total)
    over = p.P_p * fadings * radii ** (-p.alpha) > p.N_ra
    ids = np.repeat(np.arange(n), counts)
    blocked_big = np.bincount(ids[over], minlength=n) > 0
    near = radii <= 50.0
    blocked_small = np.bincount(ids[over & near], minlength=n) > 0
    p_small = 1.0 - blocked_small.mean()
    p_big = 1.0 - blocked_big.mean()
    se = math.sqrt(max(p_small * (1 - p_small), 1e-12) / n)
    assert 0.0 <= p_small - p_big < se


def test_coverage_primary_none_active_matches_closed_form():
    p = SystemParams(lambda_0=0.05)
    est = estimate_coverage_primary(p, ProtocolKind.NONE_ACTIVE, n_trials=4000, seed=7)
    assert z_gap(est.mean, est.stderr, coverage_primary_no_secondaries(p)) < 3.0


def test_coverage_primary_truncation_window_doubling():
    # Doubling the window moves the estimate by far less than its own noise:
    # the mean interference from beyond R=50 is bounded by
    # 2 pi (mu_p P_p + lambda_s P_s) R^(2-alpha) / (alpha - 2), orders below
    # one standard error at these trial counts.
    p = SystemParams(lambda_0=0.01, N_ra=N09)
    lam_s = p.lambda_0 * spatial_opportunity(p.mu_p, p.P_p, N09, p.alpha)
    tail_mean = 2 * math.pi * (p.mu_p * p.P_p + lam_s * p.P_s) * 50.0 ** (2 - p.alpha) / (p.alpha - 2)
    n = 2000
    base = estimate_coverage_primary(p, ProtocolKind.PRA, n_trials=n, seed=11)
    assert tail_mean < base.stderr
    doubled = estimate_coverage_primary(p, ProtocolKind.PRA, n_trials=n, seed=12, r_sim=100.0)
    assert z_gap(base.mean, base.stderr, doubled.mean, doubled.stderr) < 3.0


def test_coverage_secondary_reports_rejections():
    p = SystemParams(lambda_0=0.01, N_ra=N05)
    n = 2000
    est = estimate_coverage_secondary(p, ProtocolKind.PRA, n_trials=n, seed=13)
    # Attempts per accepted trial are geometric with success probability Q.
    q = 0.5
    rate = est.n_rejected / n
    se = math.sqrt((1 - q) / q**2 / n)
    assert abs(rate - (1 - q) / q) < 3 * se


def test_coverage_secondary_all_active_never_rejects():
    p = SystemParams(lambda_0=0.02)
    est = estimate_coverage_secondary(p, ProtocolKind.ALL_ACTIVE, n_trials=1500, seed=14)
    assert est.n_rejected == 0
    assert 0.0 < est.mean < 1.0


def test_profile_validation():
    p = SystemParams(lambda_0=0.02, N_ra=N09)
    with pytest.raises(ValueError):
        estimate_conditional_density(p, ProtocolKind.PRA, "typical_moon", "active_STs",
                                     [0, 1, 2])
    with pytest.raises(ValueError):
        estimate_conditional_density(p, ProtocolKind.PRA, "typical_PR", "quiet_STs",
                                     [0, 1, 2])
    with pytest.raises(ValueError):
        estimate_conditional_density(p, ProtocolKind.PRA, "typical_PR", "active_STs",
                                     [2, 1])
    with pytest.raises(ValueError):
        # Outermost bin too close to the truncation boundary.
        estimate_conditional_density(p, ProtocolKind.PRA, "typical_PR", "active_STs",
                                     [0, 60], r_sim=50.0)


def test_profile_no_secondaries_all_zero():
    p = SystemParams(lambda_0=0.0, N_ra=N09)
    prof = estimate_conditional_density(p, ProtocolKind.PRA, "typical_PR", "active_STs",
                                        np.linspace(0, 5, 11), n_trials=50, seed=15,
                                        r_sim=20.0)
    assert (prof.bin_density == 0).all() and (prof.bin_stderr == 0).all()
    np.testing.assert_allclose(prof.bin_centers, np.arange(0.25, 5.0, 0.5))


def test_profile_all_active_flat():
    # With activation forced on, the ST field around the typical PR is the
    # plain homogeneous field: every bin agrees with lambda_0 within 3 sigma.
    p = SystemParams(lambda_0=0.05)
    prof = estimate_conditional_density(p, ProtocolKind.ALL_ACTIVE, "typical_PR",
                                        "active_STs", np.linspace(0, 5, 11),
                                        n_trials=3000, seed=16, r_sim=20.0)
    for rho, se in zip(prof.bin_density, prof.bin_stderr):
        assert abs(rho - p.lambda_0) < 3 * max(se, 1e-6)


def test_throughput_silent_secondary_tier():
    p = SystemParams(lambda_0=0.02)
    primary, secondary = estimate_throughput(p, ProtocolKind.NONE_ACTIVE,
                                             n_trials=600, seed=17)
    assert secondary.mean == 0.0 and secondary.stderr == 0.0
    assert primary.mean > 0.0
    primary, secondary = estimate_throughput(p.replace(lambda_0=0.0, N_ra=N09),
                                             ProtocolKind.PRA, n_trials=600, seed=18)
    assert secondary.mean == 0.0


def test_throughput_combines_factor_estimates():
    # The secondary throughput must equal lambda_0 * Q * tau_s built from the
    # same-seed factor estimates, with the delta-method standard error.
    p = SystemParams(lambda_0=0.01, N_ra=N09)
    n, seed = 1500, 19
    primary, secondary = estimate_throughput(p, ProtocolKind.PRA, n_trials=n, seed=seed)
    q = estimate_spatial_opportunity(p, ProtocolKind.PRA, n_trials=n, seed=seed)
    cov_p = estimate_coverage_primary(p, ProtocolKind.PRA, n_trials=n, seed=seed)
    cov_s = estimate_coverage_secondary(p, ProtocolKind.PRA, n_trials=n, seed=seed)
    assert primary.mean == pytest.approx(p.mu_p * cov_p.mean, rel=1e-12)
    assert secondary.mean == pytest.approx(p.lambda_0 * q.mean * cov_s.mean, rel=1e-12)
    expected_se = p.lambda_0 * math.sqrt(
        (q.mean * cov_s.stderr) ** 2 + (cov_s.mean * q.stderr) ** 2
    )
    assert secondary.stderr == pytest.approx(expected_se, rel=1e-12)


def test_estimators_deterministic_and_thread_invariant():
    p = SystemParams(lambda_0=0.02, N_ra=N05, N_ta=N05, D_excl=2.0)
    opp = [
        estimate_spatial_opportunity(p, ProtocolKind.PTA, n_trials=6000, seed=21,
                                     n_jobs=jobs)
        for jobs in (1, 1, 4)
    ]
    assert opp[0] == opp[1] == opp[2]
    cov = [
        estimate_coverage_primary(p, ProtocolKind.PRA, n_trials=1200, seed=22,
                                  r_sim=25.0, n_jobs=jobs)
        for jobs in (1, 1, 4)
    ]
    assert cov[0] == cov[1] == cov[2]
    sec = [
        estimate_coverage_secondary(p, ProtocolKind.ERR, n_trials=800, seed=23,
                                    r_sim=25.0, n_jobs=jobs)
        for jobs in (1, 1, 4)
    ]
    assert sec[0] == sec[1] == sec[2]
    profs = [
        estimate_conditional_density(p, ProtocolKind.PRA, "typical_PR", "active_STs",
                                     [0, 1, 2, 3], n_trials=1200, seed=24,
                                     r_sim=25.0, n_jobs=jobs)
        for jobs in (1, 1, 4)
    ]
    for other in profs[1:]:
        np.testing.assert_array_equal(profs[0].bin_density, other.bin_density)
        np.testing.assert_array_equal(profs[0].bin_stderr, other.bin_stderr)
