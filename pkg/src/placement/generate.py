"""Synthetic placement markets drawn from known structural parameters."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .design import employer_base, job_cutoffs, student_base, student_loading
from .equilibrium import MarketArrays, expected_outcomes, listing_cutoffs, solve_equilibrium
from .market import (JobTable, Market, MarketConfig, Oracle, ParameterSet, StudentTable,
                     position_key)

STREAMS = ("students", "jobs", "screening", "q", "mu", "epsilon")


def rng_streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(s) for name, s in zip(STREAMS, children)}


def draw_students(config: MarketConfig, rng: np.random.Generator) -> StudentTable:
    n = config.n_students
    year = 1 + np.arange(n) % config.n_years
    degree = rng.choice(4, size=n, p=np.asarray(config.degree_shares))
    disadv = rng.random(n) < np.asarray(config.disadvantaged_share)[degree]
    sign = np.where(disadv, -0.5, 0.5)

    def score(gap):
        return rng.standard_normal(n) + sign * gap

    gpa = score(np.asarray(config.gpa_gap)[degree])
    entrance = score(np.asarray(config.entrance_gap)[degree])
    grade10 = score(config.grade10_gap)
    grade12 = score(config.grade12_gap)
    experience = rng.standard_normal((n, config.n_experience)) + sign[:, None] * config.experience_gap
    major = np.array([f"M{m + 1}" for m in rng.integers(config.n_majors, size=n)], dtype=object)
    return StudentTable(
        id=np.arange(1, n + 1), year=year, disadvantaged=disadv, degree=degree, major=major,
        gpa=gpa, entrance_score=entrance, grade10=grade10, grade12=grade12, experience=experience,
    )


def draw_jobs(config: MarketConfig, rng: np.random.Generator):
    """Listings (one per position and year) plus each position's degree eligibility."""
    P, Y = config.n_positions, config.n_years
    sector = rng.choice(3, size=P, p=np.asarray(config.sector_shares))
    mean_wage = np.asarray(config.sector_wage_means)[sector] + config.position_wage_sd * rng.standard_normal(P)
    # better-paid positions tend to interview earlier
    rank = np.argsort(np.argsort(-mean_wage + config.day_noise_sd * rng.standard_normal(P)))
    day = 1 + (rank * config.n_days) // P
    client = rng.random(P) < config.client_facing_rate
    eligible = rng.random((P, 4)) < config.eligibility_rate
    eligible[~eligible.any(axis=1), rng.integers(4)] = True
    firm = np.array([f"F{p // 2 + 1:02d}" for p in range(P)], dtype=object)
    designation = np.array([f"D{p % 2 + 1}" for p in range(P)], dtype=object)

    pos = np.repeat(np.arange(P), Y)
    year = np.tile(np.arange(1, Y + 1), P)
    J = P * Y
    wage = mean_wage[pos] + config.within_position_wage_sd * rng.standard_normal(J)
    amenities = (rng.random((J, config.n_amenities))
                 < np.asarray(config.amenity_prevalence, dtype=float)[None, :]).astype(float)
    jobs = JobTable(
        id=np.arange(1, J + 1), firm=firm[pos], designation=designation[pos], year=year,
        sector=sector[pos], wage=wage, amenities=amenities, client_facing=client[pos],
        day=day[pos], cap=np.zeros(J),
    )
    return jobs, eligible[pos]


def draw_screening(config: MarketConfig, students: StudentTable, applied: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray:
    """Nested pass flags for application reading, written test and group debate."""
    n, J = applied.shape
    flags = np.zeros((n, J, 3), dtype=bool)
    alive = applied.copy()
    shift = np.where(students.disadvantaged, config.screen_caste_shift, 0.0)[:, None]
    for s, rate in enumerate(config.stage_pass_rates):
        rate = min(max(rate, 1e-12), 1 - 1e-12)
        p = expit(np.log(rate / (1 - rate)) + shift)
        alive = alive & (rng.random((n, J)) < p)
        flags[..., s] = alive
    return flags


def simulate_offers(market: Market, params: ParameterSet, q, mu, epsilon, cutoffs=None, shift=None):
    """Run the placement days once for given latent draws.

    Each day every listing offers to the still-unplaced interview candidates
    with V_ij > cutoff; a student holding any offer picks the best option in
    {outside} + offers and leaves the market.  Returns (offered, chosen) with
    ``chosen`` a listing index or -1.
    """
    jobs = market.jobs
    if cutoffs is None:
        cutoffs = job_cutoffs(jobs, params)
    u = student_base(market.students, jobs, params) + np.outer(q, student_loading(jobs, params))
    v = employer_base(market.students, jobs, params) + params.delta * np.asarray(q)[:, None] + mu
    if shift is not None:
        v = v + shift
    hire = market.interview & (v > np.asarray(cutoffs))
    n, J = hire.shape
    offered = np.zeros((n, J), dtype=bool)
    chosen = np.full(n, -1)
    free = np.ones(n, dtype=bool)
    total_u = np.concatenate([epsilon[:, :1], u + epsilon[:, 1:]], axis=1)
    for d in np.unique(jobs.day):
        today = jobs.day == d
        got = hire & today[None, :] & free[:, None]
        who = got.any(axis=1)
        offered[who] = got[who]
        # options ordered by listing id; column 0 is the outside option
        masked = np.where(np.concatenate([np.ones((n, 1), bool), got], axis=1), total_u, -np.inf)
        pick = np.argmax(masked[who], axis=1) - 1
        chosen[who] = pick
        free &= ~who
    return offered, chosen


def equal_targets(market: Market, share: float) -> np.ndarray:
    """Expected hires per position so that ``share`` of students would be placed."""
    P = len(market.positions)
    return np.full(P, share * market.n_students / P)


def generate_market(config: MarketConfig, params: ParameterSet, seed: int | None = None) -> Market:
    """Draw a complete market; latent draws and the full parameters go to ``oracle``.

    When ``params.cutoffs`` is empty the cutoffs are solved so that every
    position expects the same number of hires, with total expected
    employment ``config.target_employment``.  Hiring caps are set to the
    expected hires at the final cutoffs.
    """
    config.validate()
    layout = config.layout
    params.validate(layout)
    seed = config.seed if seed is None else seed
    rng = rng_streams(seed)

    students = draw_students(config, rng["students"])
    jobs, degree_ok = draw_jobs(config, rng["jobs"])
    applied = (degree_ok.T[students.degree] & (students.year[:, None] == jobs.year[None, :]))
    flags = draw_screening(config, students, applied, rng["screening"])
    n, J = applied.shape
    q = params.sigma_q * rng["q"].standard_normal(n)
    mu = rng["mu"].logistic(size=(n, J))
    eps = rng["epsilon"].gumbel(size=(n, J + 1))

    market = Market(students, jobs, applied, flags, np.zeros((n, J), bool), np.full(n, -1), layout)
    arrays = MarketArrays.build(market, params)
    qmat = q[:, None]
    if params.cutoffs:
        pos_k = arrays.position_cutoffs(params.cutoffs)
    else:
        pos_k = solve_equilibrium(arrays, equal_targets(market, config.target_employment), qmat)
        params = params.replace(cutoffs=dict(zip(arrays.positions, pos_k.tolist())))
    kj = listing_cutoffs(arrays, pos_k)
    jobs.cap = expected_outcomes(arrays, kj, qmat).hires

    offered, chosen = simulate_offers(market, params, q, mu, eps, cutoffs=kj)
    market.offered = offered
    market.chosen = chosen
    market.oracle = Oracle(q=q, mu=mu, epsilon=eps, params=params)
    market.metadata = {"seed": seed, "config_hash": config.digest()}
    market.validate()
    return market


def position_keys(config: MarketConfig) -> list[str]:
    return sorted(position_key(f"F{p // 2 + 1:02d}", f"D{p % 2 + 1}") for p in range(config.n_positions))

