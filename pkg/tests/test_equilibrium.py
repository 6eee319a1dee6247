import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from placement import ConfigurationError
from placement.calibration import calibrated_config, calibrated_params
from placement.equilibrium import (MAX_SAME_DAY, MarketArrays, expected_outcomes,
                                   listing_cutoffs, position_hires, reach_probability,
                                   same_day_acceptance, solve_equilibrium)
from placement.generate import generate_market
from placement.oracles import brute_force_acceptance, monte_carlo_hires


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(-4, 4), st.integers(1, 2)),
                min_size=1, max_size=7))
def test_same_day_acceptance_matches_enumeration(rows):
    pi = np.array([r[0] for r in rows])
    u = np.array([r[1] for r in rows])
    day = np.array([r[2] for r in rows])
    got = same_day_acceptance(pi[None], u[None], day)[0]
    want = brute_force_acceptance(pi, u, day)
    offered = pi > 0
    assert np.allclose(got[offered], want[offered], atol=1e-12)
    assert np.all(got[~offered] == 0)


def test_too_many_same_day_rivals():
    J = MAX_SAME_DAY + 1
    with pytest.raises(ConfigurationError):
        same_day_acceptance(np.full((1, J), 0.5), np.zeros((1, J)), np.ones(J, int))


def test_reach_probability_two_days():
    pi = np.array([[0.5, 0.4, 0.2]])
    day = np.array([1, 1, 2])
    assert np.allclose(reach_probability(pi, day), [[1.0, 1.0, 0.3]])


@pytest.fixture(scope="module")
def small():
    cfg = calibrated_config(n_students=150)
    params = calibrated_params(cfg.layout, sigma_q=0.0)
    market = generate_market(cfg, params, seed=4)
    return market, market.oracle.params


def test_equilibrium_hits_targets(small):
    market, params = small
    arrays = MarketArrays.build(market, params)
    q = np.zeros((market.n_students, 1))
    k0 = arrays.position_cutoffs(params.cutoffs)
    targets = position_hires(arrays, expected_outcomes(arrays, listing_cutoffs(arrays, k0), q))
    k = solve_equilibrium(arrays, targets, q, start=k0 + 0.5)
    got = position_hires(arrays, expected_outcomes(arrays, listing_cutoffs(arrays, k), q))
    assert np.allclose(got, targets, atol=1e-7)


def test_expected_hires_match_simulation(small):
    market, params = small
    arrays = MarketArrays.build(market, params)
    q = np.zeros((market.n_students, 1))
    k = listing_cutoffs(arrays, arrays.position_cutoffs(params.cutoffs))
    exact = expected_outcomes(arrays, k, q).hires
    n = 4000
    mc = monte_carlo_hires(market, params, k, n, seed=1)
    # per-listing hires are bounded by the pool, so the variance is at most exact * pool
    sd = np.sqrt(np.maximum(exact, 1e-3) * market.interview.sum(axis=0).max() / n)
    assert np.all(np.abs(mc - exact) < 4 * sd)
    assert abs(mc.sum() - exact.sum()) < 0.02 * exact.sum()


def test_outcome_probabilities_are_coherent(small):
    market, params = small
    arrays = MarketArrays.build(market, params)
    q = np.zeros((market.n_students, 1))
    out = expected_outcomes(arrays, listing_cutoffs(arrays, arrays.position_cutoffs(params.cutoffs)), q)
    assert np.all(out.employment <= 1 + 1e-12)
    assert np.all(out.take <= out.offer + 1e-15)
    assert np.all(out.offer[~market.interview] == 0)
    assert np.allclose(out.hires_by_caste().sum(axis=0), out.hires)
