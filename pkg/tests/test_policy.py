import numpy as np
import pytest

from placement import ConfigurationError, DomainError
from placement.calibration import AVERAGE_SALARY, calibrated_config, calibrated_params
from placement.equilibrium import expected_outcomes
from placement.generate import generate_market
from placement.design import job_cutoffs
from placement.equilibrium import MarketArrays
from placement.policy import (DemandRegime, PolicyKind, PolicyReport, PolicySpec, apply_policy,
                              apply_precollege, apply_subsidy, compute_moments,
                              cost_effectiveness, equalize_scores, ks_distance, policy_draws,
                              quota_pairs, solve_quota, subsidy_utility, wtp_employer,
                              wtp_employer_se, wtp_student, wtp_student_se, wtp_tables)


def test_wtp_student_metro_city():
    pct, usd = wtp_student(0.045, 2.482, 56767.29)
    assert pct == pytest.approx(1.830, abs=1e-3)
    # the reference dollars come from the unrounded coefficient
    assert usd == pytest.approx(1038.84, abs=1.0)


def test_wtp_employer_gpa():
    pct, usd = wtp_employer(0.077, 1.893, 56767.29)
    assert pct == pytest.approx(3.986, abs=1e-3)
    assert usd == pytest.approx(2262.74, abs=1.0)


def test_zero_coefficient_is_worth_nothing():
    assert wtp_student(0.0, 2.0) == (0.0, 0.0)
    assert wtp_employer(0.0, 2.0) == (0.0, 0.0)


def test_wtp_signs_follow_coefficient():
    assert wtp_student(-0.1, 2.0)[0] < 0 < wtp_student(0.1, 2.0)[0]


def test_wtp_domain_errors():
    with pytest.raises(DomainError):
        wtp_student(0.1, 0.0)
    with pytest.raises(DomainError):
        wtp_employer(0.1, -1.0)


def test_wtp_student_standard_error():
    # inputs are rounded to three decimals; 0.005 covers [0.0045, 0.0055)
    lo = wtp_student_se(0.156, 2.482, 0.0045, 0.008, AVERAGE_SALARY)[0]
    hi = wtp_student_se(0.156, 2.482, 0.0055, 0.008, AVERAGE_SALARY)[0]
    assert lo < 0.211 < hi
    assert wtp_student_se(0.156, 2.482, 0.005, 0.008)[0] == pytest.approx(0.211, rel=0.025)


def test_wtp_se_matches_numeric_delta_method():
    h = 1e-6
    c, phi = -0.093, 1.893
    dc = (wtp_employer(c + h, phi)[0] - wtp_employer(c - h, phi)[0]) / (2 * h)
    dp = (wtp_employer(c, phi + h)[0] - wtp_employer(c, phi - h)[0]) / (2 * h)
    want = np.hypot(dc * 0.02, dp * 0.05)
    assert wtp_employer_se(c, phi, 0.02, 0.05)[0] == pytest.approx(want, rel=1e-6)


def test_wtp_tables_cover_every_covariate():
    cfg = calibrated_config(n_students=50)
    p = calibrated_params(cfg.layout)
    rows = wtp_tables(p, cfg.layout, se={"eta": 0.01, "phi": 0.02})
    names = [r[1] for r in rows]
    assert "eta" in names and "delta" in names
    eta_row = rows[names.index("eta")]
    assert np.isfinite(eta_row[5])
    assert np.isnan(rows[0][5])


def test_policy_spec_from_dict():
    spec = PolicySpec.from_dict({"kind": "Quota", "quota_ratio": 0.4})
    assert spec.kind is PolicyKind.QUOTA
    assert PolicySpec.from_dict(spec.to_dict()).to_dict() == spec.to_dict()
    for bad in ({"kind": "Lottery"}, {"quota_ratio": 1.5}, {"draws": 0}, {"colour": 1},
                {"subsidy_units": "yen"}, {"external_cost_per_sd": -3}):
        with pytest.raises(ConfigurationError):
            PolicySpec.from_dict(bad)


def test_subsidy_units():
    p = calibrated_params()
    assert subsidy_utility(p, PolicySpec()) == -p.eta
    pct = wtp_employer(p.eta, p.phi)[0]
    spec = PolicySpec(subsidy_size=pct, subsidy_units="percent")
    assert subsidy_utility(p, spec) == pytest.approx(-p.eta, rel=1e-12)
    with pytest.raises(DomainError):
        subsidy_utility(p, PolicySpec(subsidy_size=100.0, subsidy_units="percent"))


@pytest.fixture(scope="module")
def market():
    cfg = calibrated_config(n_students=300)
    m = generate_market(cfg, calibrated_params(cfg.layout), seed=9)
    return m, m.oracle.params


def test_elastic_subsidy_leaves_advantaged_alone(market):
    m, p = market
    r = apply_subsidy(m, p, PolicySpec(draws=20))
    assert r.hires_by_caste_after[0] == pytest.approx(r.hires_by_caste_before[0], abs=1e-9)
    assert r.unemployment_change()["advantaged"] == pytest.approx(0.0, abs=1e-9)
    assert r.hires_by_caste_after[1] >= r.hires_by_caste_before[1]
    assert r.accounting_gap() < 1e-9


def test_inelastic_subsidy_displaces_advantaged(market):
    m, p = market
    r = apply_subsidy(m, p, PolicySpec(demand_regime=DemandRegime.INELASTIC, draws=20))
    assert np.allclose(r.listing_hires_after, r.listing_hires_before, atol=1e-6)
    assert r.hires_by_caste_after[0] < r.hires_by_caste_before[0]
    assert r.hires_by_caste_after[1] > r.hires_by_caste_before[1]


def test_zero_score_shift_is_a_no_op(market):
    m, p = market
    r = apply_precollege(m, p, PolicySpec(kind="PreCollegeIntervention",
                                          score_shift=np.zeros(m.n_students), draws=10))
    assert all(abs(v) < 1e-12 for v in r.changes.values() if np.isfinite(v))
    assert r.subsidy_percent == 0.0


def test_dead_entrance_coefficients_leave_outcomes(market):
    m, p = market
    alpha = p.alpha.copy()
    cols = [k for k, n in enumerate(m.layout.alpha_names) if n.startswith("entrance_")]
    alpha[cols] = 0.0
    dead = p.replace(alpha=alpha)
    r = apply_precollege(m, dead, PolicySpec(kind="PreCollegeIntervention", draws=10))
    assert np.allclose(r.listing_hires_after, r.listing_hires_before, atol=1e-12)
    assert r.subsidy_percent == 0.0


def test_equalize_scores_within_degree():
    rng = np.random.default_rng(0)
    n = 4000
    degree = rng.integers(0, 2, n)
    dis = rng.random(n) < 0.3
    scores = rng.normal(0, 1, n) - 0.6 * dis + 0.3 * degree
    new, skipped = equalize_scores(scores, dis, degree)
    assert skipped == []
    assert np.array_equal(new[~dis], scores[~dis])
    for g in (0, 1):
        a, d = (degree == g) & ~dis, (degree == g) & dis
        assert ks_distance(new[a], new[d]) < 1 / np.sqrt(n)
    # rank order within each caste-degree cell is kept
    cell = (degree == 0) & dis
    assert np.all(np.diff(new[cell][np.argsort(scores[cell])]) >= 0)


def test_one_caste_degree_is_skipped():
    new, skipped = equalize_scores([0.1, 0.5, 0.2], [True, True, False], [0, 0, 1])
    assert skipped == [0, 1]
    assert np.array_equal(new, [0.1, 0.5, 0.2])


def test_quota_two_student_pool():
    n, ka, kd = quota_pairs([1.2], [0.6], threshold=0.5)
    assert n == 1
    assert ka < 1.2 and kd < 0.6


def test_quota_pairs_stop_at_threshold():
    n, ka, kd = quota_pairs([2.0, 1.0, 0.2], [1.0, 0.0, -0.5], threshold=0.4)
    assert n == 2
    assert 0.2 < ka < 1.0
    assert -0.5 < kd < 0.0
    with pytest.raises(DomainError):
        quota_pairs([1.0], [], 0.0)


def baseline(m, p, spec):
    arrays = MarketArrays.build(m, p)
    q = policy_draws(m.n_students, p.sigma_q, spec.draws, spec.seed)
    k0 = job_cutoffs(m.jobs, p)
    return arrays, q, k0, expected_outcomes(arrays, k0, q)


def test_quota_equalises_caste_hires(market):
    m, p = market
    spec = PolicySpec(kind="Quota", draws=10)
    arrays, q, k0, before = baseline(m, p, spec)
    K, exempt = solve_quota(arrays, k0, before.hires, q)
    assert exempt == []
    after = expected_outcomes(arrays, np.where(arrays.disadvantaged[:, None], K[1], K[0]), q)
    H = after.hires_by_caste()
    assert np.allclose(H[0], H[1], atol=1e-6)
    assert np.all(after.hires <= before.hires + 1e-9)
    r = apply_policy(m, p, spec)
    assert r.total_hires_after == pytest.approx(after.hires.sum(), rel=1e-12)


def test_quota_exempts_one_caste_pools(market):
    m, p = market
    arrays, q, k0, before = baseline(m, p, PolicySpec(draws=5))
    arrays.disadvantaged = np.zeros_like(arrays.disadvantaged)
    K, exempt = solve_quota(arrays, k0, before.hires, q)
    assert len(exempt) == m.n_jobs
    assert np.array_equal(K[0], k0) and np.array_equal(K[1], k0)


def fake_report(dollars=0.0, before=(10.0, 2.0), after=(10.0, 4.0), shift=0.0, treated=0):
    return PolicyReport("x", "y", 100, 50, {}, {}, list(before), list(after), [], [], [], [], [], [],
                        subsidy_dollars=dollars, mean_score_shift=shift, n_treated=treated)


def test_cost_effectiveness_ratios():
    sub = fake_report(dollars=1000.0)  # 1000 * 4 paid for 2 extra hires
    pre = fake_report(shift=0.5, treated=40)
    assert cost_effectiveness(sub, pre, 200.0).ratio == pytest.approx(1.0)
    r2 = cost_effectiveness(sub, pre, 400.0)
    assert r2.ratio == pytest.approx(2.0)
    assert r2.flag == "subsidy cheaper"
    none = fake_report(shift=0.5, treated=40, after=(10.0, 2.0))
    r = cost_effectiveness(sub, none, 200.0)
    assert np.isinf(r.ratio)
    assert "no hiring gain" in r.flag


def test_cost_effectiveness_needs_external_cost():
    with pytest.raises(ConfigurationError, match="external_cost_per_sd"):
        cost_effectiveness(fake_report(), fake_report(), None)


def test_model_fit_at_true_parameters(market):
    m, p = market
    fit = compute_moments(m, p, replications=100, seed=1)
    for name, data, model, sd in fit.rows:
        if np.isfinite(data) and sd > 0:
            assert abs(data - model) < 4 * sd, name
    one = compute_moments(m, p, replications=1)
    assert all(sd == 0.0 for *_, sd in one.rows)
    assert "unemployment_rate" in fit.as_table()
    with pytest.raises(DomainError):
        compute_moments(m, p, replications=0)
