import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from records import job, student

from placement import Caste, ConfigurationError, CovariateLayout, DomainError, ParameterSet
from placement.calibration import calibrated_config, calibrated_params
from placement.design import employer_base
from placement.estimation import market_subset
from placement.generate import generate_market, simulate_offers
from placement.hiring import (HIRE_ALL, HIRE_NONE, DayAssignment, acceptance_probability,
                              employer_utility, feasible_offer_vectors, offer_day_probability,
                              offer_vector_probability, pool_hires, solve_pool_cutoff,
                              verify_cutoff_optimality)
from placement.oracles import best_deterministic_rule, day_tree_offer_probability


def penalty_only():
    return ParameterSet.zeros(CovariateLayout(), eta=-0.093, phi=1.893,
                              cutoffs={"F01/D1": 0.0})


def test_employer_utility_penalty():
    p = penalty_only()
    assert employer_utility(student(), job(), p) == 0.0
    assert employer_utility(student(Caste.DISADVANTAGED), job(), p) == pytest.approx(-0.093, abs=1e-15)


def test_twins_differ_by_eta():
    p = calibrated_params()
    a = employer_utility(student(gpa=0.7, entrance=-0.2), job(wage=11.0), p)
    d = employer_utility(student(Caste.DISADVANTAGED, gpa=0.7, entrance=-0.2), job(wage=11.0), p)
    assert d - a == pytest.approx(p.eta, abs=1e-14)


def test_wage_lowers_value_by_phi():
    p = calibrated_params()
    v0 = employer_utility(student(), job(wage=10.0), p)
    v1 = employer_utility(student(), job(wage=10.25), p)
    assert v0 - v1 == pytest.approx(p.phi * 0.25, abs=1e-12)


def test_missing_cutoff():
    with pytest.raises(ConfigurationError):
        acceptance_probability(student(), job(firm="F09"), penalty_only())


def test_logistic_midpoint_and_limit():
    p = penalty_only()
    assert acceptance_probability(student(), job(), p) == 0.5
    far = p.replace(cutoffs={"F01/D1": 1e3})
    assert acceptance_probability(student(), job(), far) < 1e-300


def test_acceptance_matches_simulated_match_shocks():
    p = calibrated_params(cutoffs={"F01/D1": 0.4})
    s, j = student(gpa=0.5), job(wage=0.2)
    pi = acceptance_probability(s, j, p)
    mu = np.random.default_rng(0).logistic(size=1_000_000)
    freq = np.mean(employer_utility(s, j, p) + mu > 0.4)
    assert abs(freq - pi) < 3 * np.sqrt(pi * (1 - pi) / mu.size)


@settings(max_examples=50)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_penalty_displaces_disadvantaged(gpa, k):
    p = calibrated_params(cutoffs={"F01/D1": k})
    a = acceptance_probability(student(gpa=gpa), job(), p)
    d = acceptance_probability(student(Caste.DISADVANTAGED, gpa=gpa), job(), p)
    assert d < a or a == d == 0.0


# -- offer law ----------------------------------------------------------------


def test_single_application():
    pi = np.array([0.3])
    a = np.array([True])
    assert offer_day_probability(pi, [True], a) == pytest.approx(0.3)
    assert offer_day_probability(pi, [False], a) == pytest.approx(0.7)


def test_independent_product():
    assert offer_day_probability([0.5, 0.4], [True, True], [True, True]) == pytest.approx(0.2)


def test_day_probability_matches_enumeration():
    rng = np.random.default_rng(2)
    pi = rng.uniform(0.05, 0.95, 5)
    a = np.array([True, False, True, True, True])
    for z in itertools.product((False, True), repeat=5):
        z = np.array(z)
        if np.any(z & ~a):
            continue
        want = np.prod([pi[j] if z[j] else 1 - pi[j] for j in range(5) if a[j]])
        assert offer_day_probability(pi, z, a) == pytest.approx(want, abs=1e-15)


def test_two_day_example():
    pi = np.array([0.5, 0.4])
    a = np.array([True, True])
    days = np.array([1, 2])
    assert offer_vector_probability(pi, [False, True], a, days) == pytest.approx(0.2)
    assert offer_vector_probability(pi, [False, False], a, days) == pytest.approx(0.3)
    assert day_tree_offer_probability(pi, [False, True], a, days) == pytest.approx(0.2)


def test_no_applications():
    assert offer_vector_probability([0.5, 0.5], [False, False], [False, False], [1, 2]) == 1.0


def test_offer_errors():
    with pytest.raises(DomainError):
        offer_vector_probability([0.5, 0.4], [True, True], [True, True], [1, 2])
    with pytest.raises(DomainError):
        offer_vector_probability([0.5, 0.4], [True, False], [False, True], [1, 2])
    with pytest.raises(ConfigurationError):
        DayAssignment([1, 2], [([1, 2], 0.5), ([2, 1], 0.4)])


@st.composite
def offer_instance(draw, max_jobs=7):
    J = draw(st.integers(1, max_jobs))
    pi = np.array(draw(st.lists(st.floats(0.0, 1.0), min_size=J, max_size=J)))
    applied = np.array(draw(st.lists(st.booleans(), min_size=J, max_size=J)))
    days = np.array(draw(st.lists(st.integers(1, 3), min_size=J, max_size=J)))
    return pi, applied, days


@settings(max_examples=100, deadline=None)
@given(offer_instance())
def test_offer_law_normalises_and_matches_tree(inst):
    pi, applied, days = inst
    total = 0.0
    for z in feasible_offer_vectors(applied, days):
        f = offer_vector_probability(pi, z, applied, days)
        assert f == pytest.approx(day_tree_offer_probability(pi, z, applied, days), abs=1e-12)
        total += f
    assert total == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(offer_instance(), st.integers(0, 6), st.floats(0.0, 1.0))
def test_raising_pi_raises_any_offer(inst, j, bump):
    pi, applied, days = inst
    j = j % pi.size
    none = np.zeros(pi.size, bool)
    before = 1 - offer_vector_probability(pi, none, applied, days)
    pi2 = pi.copy()
    pi2[j] = max(pi[j], bump)
    after = 1 - offer_vector_probability(pi2, none, applied, days)
    assert after >= before - 1e-15


def test_simulated_offer_vectors_match_law():
    cfg = calibrated_config(n_students=60)
    market = generate_market(cfg, calibrated_params(cfg.layout, sigma_q=0.0), seed=3)
    params = market.oracle.params
    i = int(np.argmax(market.interview.sum(axis=1)))
    T = 100_000
    big = market_subset(market, [i] * T)
    rng = np.random.default_rng(0)
    mu = rng.logistic(size=(T, market.n_jobs))
    eps = rng.gumbel(size=(T, market.n_jobs + 1))
    offered, _ = simulate_offers(big, params, np.zeros(T), mu, eps)
    k = np.array([params.cutoffs[p] for p in market.jobs.position])
    v = employer_base(market.students.subset([i]), market.jobs, params)[0]
    pi = np.where(market.interview[i], 1 / (1 + np.exp(-(v - k))), 0.0)
    a = market.interview[i]
    patterns, counts = np.unique(offered, axis=0, return_counts=True)
    for z, c in zip(patterns, counts):
        f = offer_vector_probability(pi, z, a, market.jobs.day)
        assert abs(c / T - f) < 3 * np.sqrt(f * (1 - f) / T) + 1e-12


def test_extreme_cutoffs():
    cfg = calibrated_config(n_students=80)
    market = generate_market(cfg, calibrated_params(cfg.layout), seed=1)
    params = market.oracle.params
    n, J = market.n_students, market.n_jobs
    rng = np.random.default_rng(0)
    q, mu, eps = np.zeros(n), rng.logistic(size=(n, J)), rng.gumbel(size=(n, J + 1))
    offered, _ = simulate_offers(market, params, q, mu, eps, cutoffs=np.full(J, HIRE_ALL))
    first = market.jobs.day.min()
    day1 = market.interview & (market.jobs.day == first)[None, :]
    assert np.array_equal(offered[day1.any(axis=1)], day1[day1.any(axis=1)])
    offered, chosen = simulate_offers(market, params, q, mu, eps, cutoffs=np.full(J, HIRE_NONE))
    assert not offered.any()
    assert np.all(chosen == -1)


# -- cutoffs ------------------------------------------------------------------


def test_cutoff_errors_and_sentinels():
    v = np.array([0.3, 1.2, -0.4])
    p = np.array([0.5, 0.9, 0.7])
    with pytest.raises(DomainError):
        solve_pool_cutoff(v, p, -1.0)
    assert solve_pool_cutoff(v, p, 3.0) == HIRE_ALL
    assert solve_pool_cutoff(v, p, p.sum()) == HIRE_ALL
    k = solve_pool_cutoff(v, p, 0.0)
    assert k >= v.max()
    assert pool_hires(v, p, k) == 0.0


def test_bisection_matches_breakpoint_scan():
    rng = np.random.default_rng(8)
    V = rng.normal(size=(5, 2))
    P = rng.uniform(0.2, 1.0, (5, 2))
    for j in range(2):
        target = 0.45 * P[:, j].sum()
        k = solve_pool_cutoff(V[:, j], P[:, j], target, tol=1e-12)
        # smallest breakpoint cutoff meeting the constraint
        feasible = [c for c in np.sort(V[:, j]) if pool_hires(V[:, j], P[:, j], c) <= target]
        scan = min(feasible)
        assert pool_hires(V[:, j], P[:, j], k) == pool_hires(V[:, j], P[:, j], scan)
        assert k <= scan + 1e-9


@settings(max_examples=50)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=8), st.floats(-4, 4), st.floats(0, 2))
def test_expected_hires_nonincreasing_in_cutoff(values, k, dk):
    v = np.array(values)
    p = np.full(v.size, 0.6)
    assert pool_hires(v, p, k + dk) <= pool_hires(v, p, k)


def test_degenerate_and_trivial_pools():
    assert verify_cutoff_optimality(np.ones(4), np.full(4, 0.5), 1.0).status == "degenerate tie"
    assert verify_cutoff_optimality([0.7], [0.4], 0.2).status == "trivial"
    with pytest.raises(DomainError):
        verify_cutoff_optimality(np.zeros(13), np.ones(13), 1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-2, 3), st.floats(0.05, 1.0)), min_size=8, max_size=8),
       st.floats(0.1, 6.0))
def test_cutoff_rule_beats_every_deterministic_rule(pool, cap):
    values = np.array([v for v, _ in pool])
    accept = np.array([p for _, p in pool])
    report = verify_cutoff_optimality(values, accept, cap)
    assert report.optimal
    assert report.improving_exchanges == 0
    assert report.cutoff_value >= best_deterministic_rule(values, accept, cap) - 1e-9
