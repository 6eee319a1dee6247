"""Brute-force reference computations.

These deliberately avoid the recursions and closed forms used by the main
modules so that the two can be checked against each other.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.special import expit

from .design import employer_design, student_design
from .hiring import DayAssignment
from .market import Market, ParameterSet


def day_tree_distribution(pi, applied, assignment) -> dict:
    """Law of the offer vector by enumerating which jobs would make an offer.

    Every job in A independently "wants" the student with probability pi.
    Days are visited in order; on the first day with a wanting job the
    student receives exactly those offers and leaves.  Returns a dict from
    ``z.tobytes()`` (bool vector) to probability.
    """
    pi = np.asarray(pi, dtype=float)
    apps = np.flatnonzero(np.asarray(applied, dtype=bool))
    if not isinstance(assignment, DayAssignment):
        assignment = DayAssignment(assignment)
    out: dict = {}
    for days, weight in assignment.support():
        order = sorted(set(days[apps].tolist()))
        for want in itertools.product((False, True), repeat=apps.size):
            prob = 1.0
            for j, w in zip(apps, want):
                prob *= pi[j] if w else 1.0 - pi[j]
            z = np.zeros(pi.size, dtype=bool)
            wanting = apps[np.array(want, dtype=bool)] if apps.size else apps
            for d in order:
                today = wanting[days[wanting] == d]
                if today.size:
                    z[today] = True
                    break
            key = z.tobytes()
            out[key] = out.get(key, 0.0) + weight * prob
    return out


def day_tree_offer_probability(pi, offered, applied, assignment) -> float:
    """f(Z|A) read off :func:`day_tree_distribution`."""
    law = day_tree_distribution(pi, applied, assignment)
    return law.get(np.asarray(offered, dtype=bool).tobytes(), 0.0)


def brute_force_acceptance(pi, u, day) -> np.ndarray:
    """Same-day acceptance by looping over every rival subset of every job."""
    pi = np.asarray(pi, dtype=float)
    u = np.asarray(u, dtype=float)
    out = np.zeros(pi.size)
    for j in range(pi.size):
        rivals = [k for k in range(pi.size) if day[k] == day[j] and k != j]
        for bits in itertools.product((0, 1), repeat=len(rivals)):
            prob = 1.0
            denom = 1.0 + np.exp(u[j])
            for k, b in zip(rivals, bits):
                prob *= pi[k] if b else 1.0 - pi[k]
                if b:
                    denom += np.exp(u[k])
            out[j] += prob * np.exp(u[j]) / denom
    return out


def brute_force_expected_max(pi, day, utility, applied) -> float:
    """E[log(1 + sum over offers of exp u)] by enumerating willingness vectors."""
    apps = np.flatnonzero(np.asarray(applied, dtype=bool))
    total = 0.0
    for want in itertools.product((False, True), repeat=apps.size):
        want = np.array(want, dtype=bool)
        prob = np.prod(np.where(want, pi[apps], 1.0 - pi[apps])) if apps.size else 1.0
        value = 0.0
        for d in sorted(set(day[apps].tolist())):
            today = apps[(day[apps] == d) & want]
            if today.size:
                value = np.log1p(np.exp(utility[today]).sum())
                break
        total += prob * value
    return float(total)


def brute_force_portfolio(pi, day, utility, application_cost: float, eligible=None):
    """Best application set over all subsets of the eligible jobs: (applied, value)."""
    pi, day, utility = (np.asarray(a) for a in (pi, day, utility))
    J = pi.size
    elig = np.flatnonzero(np.ones(J, bool) if eligible is None else np.asarray(eligible, bool))
    best, best_set = -np.inf, None
    for bits in itertools.product((False, True), repeat=elig.size):
        a = np.zeros(J, dtype=bool)
        a[elig[np.array(bits, dtype=bool)]] = True
        v = brute_force_expected_max(pi, day, utility, a) - application_cost * a.sum()
        if v > best + 1e-12:
            best, best_set = v, a
    return best_set, float(best)


def pinv_ols(X, y) -> np.ndarray:
    return np.linalg.pinv(np.asarray(X, dtype=float)) @ np.asarray(y, dtype=float)


def best_deterministic_rule(values, accept, cap: float) -> float:
    """max over subsets H with sum_H P <= cap of sum_H V P."""
    values = np.asarray(values, dtype=float)
    accept = np.asarray(accept, dtype=float)
    best = 0.0
    for bits in itertools.product((False, True), repeat=values.size):
        h = np.array(bits, dtype=bool)
        if accept[h].sum() <= cap + 1e-12:
            best = max(best, float((values * accept)[h].sum()))
    return best


def logit_information(market: Market, params: ParameterSet):
    """Analytic information of the sigma_q = 0 model, in estimator parameter order.

    With q switched off each relevant interview is a binary logit in
    (alpha, eta, phi, cutoffs) and each choice among offers a multinomial
    logit in (beta, psi, tau); both Hessians are free of the outcomes.
    Returns (matrix, names) restricted to those parameters.
    """
    from .estimation import ParamSpace

    space = ParamSpace(market.layout, market.positions)
    K = space.size
    interview = market.interview
    od = market.offer_day
    day = market.jobs.day
    relevant = interview & ((od[:, None] == 0) | (day[None, :] <= od[:, None]))
    S = employer_design(market.students, market.jobs)
    X = student_design(market.students, market.jobs)
    d = market.students.disadvantaged.astype(float)
    w = market.jobs.wage
    pos = market.job_position_index
    NP = market.jobs.amenities
    info = np.zeros((K, K))
    ii, jj = np.nonzero(relevant)
    k = np.array([params.cutoffs[p] for p in market.positions])
    lin = S[ii, jj] @ params.alpha + params.eta * d[ii] - params.phi * w[jj] - k[pos[jj]]
    p = expit(lin)
    G = np.zeros((ii.size, K))
    G[:, space.alpha] = S[ii, jj]
    G[:, space.eta] = d[ii]
    G[:, space.phi] = -w[jj]
    G[np.arange(ii.size), space.cutoffs.start + pos[jj]] = -1.0
    info += (G * (p * (1 - p))[:, None]).T @ G
    for i in np.flatnonzero(market.offered.any(axis=1)):
        js = np.flatnonzero(market.offered[i])
        Z = np.zeros((js.size + 1, K))
        Z[1:, space.beta] = X[i, js]
        Z[1:, space.psi] = NP[js]
        Z[1:, space.tau] = w[js]
        U = np.r_[0.0, Z[1:, space.beta] @ params.beta + NP[js] @ params.psi + params.tau * w[js]]
        P = np.exp(U - U.max())
        P /= P.sum()
        zbar = P @ Z
        C = Z - zbar
        info += (C * P[:, None]).T @ C
    keep = list(range(space.beta.start, space.psi.stop)) + [space.tau]
    keep += list(range(space.alpha.start, space.alpha.stop)) + [space.eta, space.phi]
    keep += list(range(space.cutoffs.start, space.cutoffs.stop))
    return info[np.ix_(keep, keep)], [space.names[j] for j in keep]


def monte_carlo_hires(market: Market, params: ParameterSet, cutoffs, n_draws: int, seed: int = 0):
    """Average realised hires per listing over fresh draws of (q, mu, epsilon)."""
    from .generate import simulate_offers

    rng = np.random.default_rng(seed)
    n, J = market.n_students, market.n_jobs
    total = np.zeros(J)
    for _ in range(n_draws):
        q = params.sigma_q * rng.standard_normal(n)
        mu = rng.logistic(size=(n, J))
        eps = rng.gumbel(size=(n, J + 1))
        _, chosen = simulate_offers(market, params, q, mu, eps, cutoffs=cutoffs)
        total += np.bincount(chosen[chosen >= 0], minlength=J)
    return total / n_draws
