"""Oracle suites: the main code paths against brute-force references."""

from __future__ import annotations

import numpy as np

from .choice import OfferModel, optimize_portfolio
from .equilibrium import same_day_acceptance
from .hiring import (DayAssignment, feasible_offer_vectors, offer_vector_probability,
                     verify_cutoff_optimality)
from .oracles import (best_deterministic_rule, brute_force_acceptance, brute_force_portfolio,
                      day_tree_distribution, pinv_ols)
from .stages import ols


def random_offer_instance(rng: np.random.Generator, max_jobs: int = 12):
    """Random (pi, applied, day assignment); the assignment is a lottery half the time."""
    J = int(rng.integers(1, max_jobs + 1))
    n_days = int(rng.integers(1, 5))
    pi = rng.uniform(0.01, 0.99, J)
    applied = rng.random(J) < 0.7
    if not applied.any():
        applied[rng.integers(J)] = True
    days = rng.integers(1, n_days + 1, J)
    if rng.random() < 0.5:
        return pi, applied, DayAssignment(days)
    k = int(rng.integers(2, 4))
    weights = rng.dirichlet(np.ones(k))
    alts = [(rng.integers(1, n_days + 1, J), w) for w in weights]
    alts[0] = (days, alts[0][1])
    # exact unit total for the validator
    alts[-1] = (alts[-1][0], 1.0 - sum(w for _, w in alts[:-1]))
    return pi, applied, DayAssignment(days, alts)


def offer_law_suite(seed: int, instances: int):
    """Normalisation and day-tree agreement of f(Z|A): (max |sum - 1|, max |f - tree|)."""
    rng = np.random.default_rng([seed, 11])
    worst_sum = worst_tree = 0.0
    for _ in range(instances):
        pi, applied, assign = random_offer_instance(rng)
        vectors = {}
        for days, _ in assign.support():
            for z in feasible_offer_vectors(applied, days):
                vectors[z.tobytes()] = z
        law = day_tree_distribution(pi, applied, assign)
        total = 0.0
        for key, z in vectors.items():
            f = offer_vector_probability(pi, z, applied, assign)
            tree = law.get(key, 0.0)
            worst_tree = max(worst_tree, abs(f - tree))
            total += f
        stray = [p for key, p in law.items() if key not in vectors]
        worst_tree = max([worst_tree] + stray)
        worst_sum = max(worst_sum, abs(total - 1.0))
    return worst_sum, worst_tree


def cutoff_suite(seed: int, instances: int, pool: int = 8):
    """Cutoff rule against every deterministic rule: (violations, worst shortfall)."""
    rng = np.random.default_rng([seed, 12])
    violations = 0
    worst = 0.0
    for _ in range(instances):
        values = rng.normal(0.5, 1.0, pool)
        accept = rng.uniform(0.05, 1.0, pool)
        cap = rng.uniform(0.1, accept.sum())
        rep = verify_cutoff_optimality(values, accept, cap)
        best = best_deterministic_rule(values, accept, cap)
        short = best - rep.cutoff_value
        worst = max(worst, short)
        if short > 1e-9 or not rep.optimal:
            violations += 1
    return violations, worst


def acceptance_suite(seed: int, instances: int):
    rng = np.random.default_rng([seed, 13])
    worst = 0.0
    for _ in range(instances):
        J = int(rng.integers(1, 8))
        pi = rng.uniform(0, 1, J)
        u = rng.normal(0, 1.5, J)
        day = rng.integers(1, 3, J)
        worst = max(worst, float(np.max(np.abs(same_day_acceptance(pi[None], u[None], day)[0]
                                               - brute_force_acceptance(pi, u, day)))))
    return worst


def portfolio_suite(seed: int, instances: int, J: int = 4):
    """Greedy-plus-swap search against all 2^J portfolios: number of mismatches."""
    rng = np.random.default_rng([seed, 14])
    misses = 0
    for _ in range(instances):
        model = OfferModel(rng.uniform(0.05, 0.9, J), rng.integers(1, 3, J), rng.normal(0, 1.5, J))
        cost = float(rng.uniform(0, 0.2))
        got = optimize_portfolio(model, cost)
        _, best = brute_force_portfolio(model.pi, model.day, model.utility, cost)
        if got.value < best - 1e-10:
            misses += 1
    return misses


def ols_suite(seed: int, instances: int):
    rng = np.random.default_rng([seed, 15])
    worst = 0.0
    for _ in range(instances):
        n, k = int(rng.integers(20, 60)), int(rng.integers(1, 6))
        X = np.column_stack([np.ones(n), rng.normal(size=(n, k))])
        y = X @ rng.normal(size=k + 1) + rng.normal(size=n)
        worst = max(worst, float(np.max(np.abs(ols(X, y).coef - pinv_ols(X, y)))))
    return worst


def run_suites(seed: int = 0, instances: int = 50):
    out = []
    s, t = offer_law_suite(seed, instances)
    out.append(("offer law", s <= 1e-10 and t <= 1e-12,
                f"max |sum f - 1| = {s:.2e}, max |f - day tree| = {t:.2e}"))
    v, w = cutoff_suite(seed, instances)
    out.append(("cutoff optimality", v == 0, f"{v} violations, worst shortfall {w:.2e}"))
    a = acceptance_suite(seed, instances)
    out.append(("same-day acceptance", a <= 1e-12, f"max error {a:.2e}"))
    m = portfolio_suite(seed, instances)
    out.append(("application portfolio", m == 0, f"{m} of {instances} below exhaustive optimum"))
    o = ols_suite(seed, instances)
    out.append(("ols", o <= 1e-10, f"max |b - pinv b| = {o:.2e}"))
    return out
