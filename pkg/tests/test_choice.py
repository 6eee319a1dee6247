import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from records import job, student

from placement import CovariateLayout, DomainError, ParameterSet, Sector
from placement.calibration import calibrated_params
from placement.choice import (OfferModel, choice_probability, choose, choose_index,
                              expected_max_utility, logit_probabilities, marginal_values,
                              optimize_portfolio, student_utility)
from placement.oracles import brute_force_expected_max, brute_force_portfolio


def test_zero_parameters_give_zero_utility():
    p = ParameterSet.zeros(CovariateLayout())
    assert student_utility(student(gpa=1.3), job(Sector.TECHNOLOGY, wage=11.0), p) == 0.0


def test_signing_bonus_utility():
    layout = CovariateLayout(n_amenities=1)
    p = ParameterSet.zeros(layout, psi=[0.156], tau=2.482)
    assert student_utility(student(q=0.0), job(amenities=(1.0,)), p) == pytest.approx(0.156, abs=1e-15)


def test_doubling_q_keeps_the_argmax():
    p = calibrated_params(gamma=np.zeros(2), sigma_q=1.0)
    jobs = [job(Sector.TECHNOLOGY, 11.2, (1, 0), jid=1), job(Sector.CONSULTING, 11.0, (0, 1), jid=2),
            job(Sector.MANUFACTURING, 10.7, (1, 1), jid=3)]
    u1 = [student_utility(student(q=0.4), j, p) for j in jobs]
    u2 = [student_utility(student(q=0.8), j, p) for j in jobs]
    assert np.argmax(u1) == np.argmax(u2)
    assert np.allclose(np.subtract(u2, u1), u2[0] - u1[0])


def test_symmetric_logit():
    assert np.allclose(logit_probabilities([0.0]), [0.5, 0.5])


def test_closed_form_logit():
    e = np.e
    assert np.allclose(logit_probabilities([1.0, 0.0]), [1 / (e + 2), e / (e + 2), 1 / (e + 2)])


@given(st.lists(st.floats(-30, 30), min_size=0, max_size=8))
def test_logit_probabilities_sum_to_one(u):
    p = logit_probabilities(np.array(u, dtype=float))
    assert p.shape == (len(u) + 1,)
    assert np.all(p >= 0)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_choice_shares_match_logit_by_simulation():
    rng = np.random.default_rng(0)
    u = np.array([0.3, -0.5, 1.1])
    n = 1_000_000
    eps = rng.gumbel(size=(n, 4))
    picks = np.argmax(np.concatenate([np.zeros((n, 1)), np.broadcast_to(u, (n, 3))], axis=1) + eps,
                      axis=1)
    shares = np.bincount(picks, minlength=4) / n
    p = logit_probabilities(u)
    assert np.all(np.abs(shares - p) < 3 * np.sqrt(p * (1 - p) / n))


def test_choose_empty_offer_set():
    p = calibrated_params()
    assert choose(student(), [], [0.3], p) == 0


def test_choose_dominant_offer():
    p = calibrated_params()
    big = job(Sector.TECHNOLOGY, 1e6, jid=7)
    assert choose(student(), [big], [0.0, 0.0], p) == 7


def test_choose_needs_one_shock_per_option():
    with pytest.raises(DomainError):
        choose(student(), [job()], [0.0], calibrated_params())


def test_choose_distribution_matches_choice_probability():
    p = calibrated_params()
    s = student(q=0.0)
    offers = [job(Sector.TECHNOLOGY, 0.3, jid=2), job(Sector.CONSULTING, -0.2, (1, 0), jid=5)]
    rng = np.random.default_rng(1)
    n = 100_000
    counts = {0: 0, 2: 0, 5: 0}
    eps = rng.gumbel(size=(n, 3))
    for row in eps:
        counts[choose(s, offers, row, p)] += 1
    prob = choice_probability(s, offers, p)
    shares = np.array([counts[0], counts[2], counts[5]]) / n
    assert np.all(np.abs(shares - prob) < 3 * np.sqrt(prob * (1 - prob) / n))


def test_choose_index_ties_go_first():
    assert choose_index([1.0, 1.0], [0.0, 0.0, 0.0]) == 0


def model_strategy(J):
    return st.tuples(
        st.lists(st.floats(0.02, 0.98), min_size=J, max_size=J),
        st.lists(st.integers(1, 2), min_size=J, max_size=J),
        st.lists(st.floats(-3, 3), min_size=J, max_size=J),
        st.floats(0.0, 0.3),
    )


@settings(max_examples=60, deadline=None)
@given(model_strategy(4))
def test_portfolio_matches_exhaustive_search(data):
    pi, day, u, cost = data
    model = OfferModel(np.array(pi), np.array(day), np.array(u))
    got = optimize_portfolio(model, cost)
    _, best = brute_force_portfolio(model.pi, model.day, model.utility, cost)
    assert got.value == pytest.approx(best, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(model_strategy(6))
def test_portfolio_not_dominated_by_local_moves(data):
    pi, day, u, cost = data
    model = OfferModel(np.array(pi), np.array(day), np.array(u))
    res = optimize_portfolio(model, cost, exhaustive_max=0)
    a = res.applications
    mv = marginal_values(model, a, cost)
    # members have MV >= 0 (dropping hurts), non-members MV <= 0
    assert np.all(mv[a] >= -1e-12)
    assert np.all(mv[~a] <= 1e-12)
    for out in np.flatnonzero(a):
        for inn in np.flatnonzero(~a):
            trial = a.copy()
            trial[out], trial[inn] = False, True
            v = expected_max_utility(model, trial) - cost * trial.sum()
            assert v <= res.value + 1e-12


def test_free_applications_apply_everywhere():
    # on a single interview day an extra offer only adds an option
    rng = np.random.default_rng(4)
    model = OfferModel(rng.uniform(0.1, 0.9, 5), np.ones(5, int), rng.normal(0, 1, 5))
    assert optimize_portfolio(model, 0.0).applications.all()


def test_early_poor_offer_can_crowd_out_later_days():
    # an offer on day 1 ends the search, so a bad day-1 job is worth skipping
    model = OfferModel(np.array([0.9, 0.5]), np.array([1, 2]), np.array([-3.0, 2.0]))
    res = optimize_portfolio(model, 0.0)
    assert res.applications.tolist() == [False, True]
    both = expected_max_utility(model, np.array([True, True]))
    assert res.value > both


def test_prohibitive_cost_applies_nowhere():
    rng = np.random.default_rng(5)
    model = OfferModel(rng.uniform(0.1, 0.9, 5), rng.integers(1, 3, 5), rng.normal(0, 1, 5))
    res = optimize_portfolio(model, 100.0)
    assert not res.applications.any()
    assert res.value == 0.0


def test_negative_cost_rejected():
    model = OfferModel(np.array([0.5]), np.array([1]), np.array([0.0]))
    with pytest.raises(DomainError):
        optimize_portfolio(model, -1.0)


@settings(max_examples=40, deadline=None)
@given(model_strategy(5), st.lists(st.booleans(), min_size=5, max_size=5))
def test_expected_max_matches_enumeration(data, applied):
    pi, day, u, _ = data
    model = OfferModel(np.array(pi), np.array(day), np.array(u))
    a = np.array(applied)
    assert expected_max_utility(model, a) == pytest.approx(
        brute_force_expected_max(model.pi, model.day, model.utility, a), abs=1e-12)


def test_monte_carlo_expected_max_close_to_exact():
    rng = np.random.default_rng(6)
    model = OfferModel(rng.uniform(0.1, 0.9, 6), rng.integers(1, 3, 6), rng.normal(0, 1, 6))
    a = np.ones(6, bool)
    exact = expected_max_utility(model, a)
    mc = expected_max_utility(model, a, n_draws=200_000, max_enumerate=0)
    assert mc == pytest.approx(exact, abs=0.01)


def test_inclusion_probabilities_with_temperature():
    model = OfferModel(np.array([0.5, 0.4]), np.array([1, 2]), np.array([1.0, -3.0]))
    res = optimize_portfolio(model, 0.05, temperature=0.005)
    assert res.inclusion[0] > 0.99
    assert res.inclusion[1] < 0.01
