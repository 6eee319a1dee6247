"""Student side: utilities, logit choice over realised offers, portfolio search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit, logsumexp

from .design import (employer_base, layout_of, resolve_q, student_base,
                     student_loading, tables_from_records)
from .errors import DomainError
from .market import Job, ParameterSet, Student


@dataclass(frozen=True)
class ChoiceShocks:
    """Type-1 extreme value preference draws; column 0 is the outside option."""

    epsilon: np.ndarray

    @classmethod
    def draw(cls, rng: np.random.Generator, n_students: int, n_jobs: int) -> "ChoiceShocks":
        return cls(rng.gumbel(size=(n_students, n_jobs + 1)))


def student_utility(student: Student, job: Job, params: ParameterSet, q: float | None = None) -> float:
    """Systematic utility of ``job`` to ``student`` (the outside option is 0)."""
    params.validate(layout_of(student, job))
    st, jt = tables_from_records([student], [job])
    qi = resolve_q(student, q)
    return float(student_base(st, jt, params)[0, 0] + qi * student_loading(jt, params)[0])


def logit_probabilities(utilities) -> np.ndarray:
    """Choice probabilities over (outside option, offers...) given offer utilities.

    Works along the last axis so a batch of students can be passed at once.
    """
    u = np.asarray(utilities, dtype=float)
    full = np.concatenate([np.zeros(u.shape[:-1] + (1,)), u], axis=-1)
    return np.exp(full - logsumexp(full, axis=-1, keepdims=True))


def choice_probability(student: Student, offers: Sequence[Job], params: ParameterSet,
                       q: float | None = None) -> np.ndarray:
    """Probability of each option in O(Z): index 0 is the outside option."""
    u = [student_utility(student, job, params, q) for job in offers]
    return logit_probabilities(np.array(u))


def choose_index(utilities, epsilon) -> int:
    """Argmax of U over (outside, offers...), ties to the earliest option.

    Returns -1 for the outside option, otherwise the position in ``utilities``.
    """
    total = np.concatenate([[0.0], np.asarray(utilities, dtype=float)]) + np.asarray(epsilon)
    return int(np.argmax(total)) - 1


def choose(student: Student, offers: Sequence[Job], shocks, params: ParameterSet,
           q: float | None = None) -> int:
    """Utility-maximising option: a job id, or 0 for the outside option.

    ``shocks`` holds one draw for the outside option followed by one per offer,
    in the order given.  Ties go to the lowest job id.
    """
    eps = np.asarray(shocks, dtype=float)
    if eps.shape != (len(offers) + 1,):
        raise DomainError("need one shock per offer plus one for the outside option")
    order = sorted(range(len(offers)), key=lambda k: offers[k].id)
    u = [student_utility(student, offers[k], params, q) for k in order]
    pick = choose_index(u, np.concatenate([[eps[0]], eps[1:][order]]))
    return 0 if pick < 0 else offers[order[pick]].id


# --------------------------------------------------------------------------
# Application portfolios
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OfferModel:
    """What a student knows when applying: offer odds, interview days, utilities."""

    pi: np.ndarray
    day: np.ndarray
    utility: np.ndarray

    @classmethod
    def for_student(cls, student: Student, jobs: Sequence[Job], params: ParameterSet,
                    cutoffs: Sequence[float], q: float | None = None) -> "OfferModel":
        st, jt = tables_from_records([student], jobs)
        qi = resolve_q(student, q)
        u = student_base(st, jt, params)[0] + qi * student_loading(jt, params)
        v = employer_base(st, jt, params)[0] + params.delta * qi
        return cls(expit(v - np.asarray(cutoffs, dtype=float)), jt.day.copy(), u)


@dataclass
class PortfolioResult:
    applications: np.ndarray
    value: float
    evaluations: int
    inclusion: np.ndarray | None = None


def expected_max_utility(model: OfferModel, applied, n_draws: int = 20000,
                         rng: np.random.Generator | None = None,
                         max_enumerate: int = 15) -> float:
    """E_Z[ log(1 + sum_{j in Z} exp u_j) ] under the day-sequenced offer law.

    The log-sum is the expected maximum of U over O(Z) net of the Euler
    constant.  Offers on a day are reached only when every earlier day came up
    empty.  Exact enumeration up to ``max_enumerate`` applications, Monte-Carlo
    beyond that.
    """
    idx = np.flatnonzero(np.asarray(applied, dtype=bool))
    if idx.size == 0:
        return 0.0
    if idx.size > max_enumerate:
        return _expected_max_mc(model, idx, n_draws, rng)
    total = 0.0
    reach = 1.0
    for day in np.unique(model.day[idx]):
        group = idx[model.day[idx] == day]
        p = model.pi[group]
        u = model.utility[group]
        for z in itertools.product((0, 1), repeat=group.size):
            z = np.array(z, dtype=bool)
            if not z.any():
                continue
            prob = np.prod(np.where(z, p, 1 - p))
            total += reach * prob * logsumexp(np.concatenate([[0.0], u[z]]))
        reach *= np.prod(1 - p)
    return float(total)


def _expected_max_mc(model, idx, n_draws, rng):
    rng = np.random.default_rng(0) if rng is None else rng
    days = model.day[idx]
    hit = rng.random((n_draws, idx.size)) < model.pi[idx]
    out = np.zeros(n_draws)
    done = np.zeros(n_draws, dtype=bool)
    for day in np.unique(days):
        cols = days == day
        got = hit[:, cols] & ~done[:, None]
        any_ = got.any(axis=1)
        u = np.where(got, model.utility[idx][cols][None, :], -np.inf)
        val = logsumexp(np.concatenate([np.zeros((n_draws, 1)), u], axis=1), axis=1)
        out[any_] = val[any_]
        done |= any_
    return float(out.mean())


def portfolio_value(model: OfferModel, applied, application_cost: float, **kw) -> float:
    applied = np.asarray(applied, dtype=bool)
    return expected_max_utility(model, applied, **kw) - application_cost * applied.sum()


def optimize_portfolio(model: OfferModel, application_cost: float, eligible=None,
                       temperature: float | None = None, exhaustive_max: int = 8,
                       **kw) -> PortfolioResult:
    """Job-by-job portfolio search with adjacent and single-swap refinement.

    Starting from the empty portfolio, add the job with the largest marginal
    value while it is positive (at most J(J+1)/2 evaluations).  Then apply
    improving adjacent (add/drop one job) or single-swap moves until none is
    left, so the result satisfies MV >= 0 for every member and MV <= 0 for every
    non-member.  Local search can stop at a local optimum, so when at most
    ``exhaustive_max`` jobs are eligible every subset is also scored and the
    best one kept.  With ``temperature`` set, also report logit-smoothed inclusion
    probabilities expit(MV / T).
    """
    if application_cost < 0:
        raise DomainError("application_cost must be >= 0")
    J = model.pi.size
    eligible = np.ones(J, dtype=bool) if eligible is None else np.asarray(eligible, dtype=bool)
    evals = 0
    cache: dict[bytes, float] = {}

    def value(a):
        nonlocal evals
        key = a.tobytes()
        if key not in cache:
            evals += 1
            cache[key] = portfolio_value(model, a, application_cost, **kw)
        return cache[key]

    current = np.zeros(J, dtype=bool)
    base = value(current)
    while True:
        best, best_j = base, -1
        for j in np.flatnonzero(eligible & ~current):
            trial = current.copy()
            trial[j] = True
            v = value(trial)
            if v > best:
                best, best_j = v, j
        if best_j < 0:
            break
        current[best_j] = True
        base = best

    improved = True
    while improved:
        improved = False
        moves = []
        for j in np.flatnonzero(eligible):
            trial = current.copy()
            trial[j] = ~trial[j]
            moves.append(trial)
        for out in np.flatnonzero(current):
            for inn in np.flatnonzero(eligible & ~current):
                trial = current.copy()
                trial[out], trial[inn] = False, True
                moves.append(trial)
        for trial in moves:
            v = value(trial)
            if v > base + 1e-12:
                current, base, improved = trial, v, True
                break

    elig = np.flatnonzero(eligible)
    if elig.size <= exhaustive_max:
        for bits in itertools.product((False, True), repeat=elig.size):
            trial = np.zeros(J, dtype=bool)
            trial[elig[np.array(bits, dtype=bool)]] = True
            v = value(trial)
            if v > base + 1e-12:
                current, base = trial, v

    inclusion = None
    if temperature is not None:
        if temperature <= 0:
            raise DomainError("temperature must be > 0")
        mv = np.zeros(J)
        for j in range(J):
            flipped = current.copy()
            flipped[j] = ~flipped[j]
            diff = base - value(flipped)
            mv[j] = diff if current[j] else -diff
        inclusion = np.where(eligible, expit(mv / temperature), 0.0)
    return PortfolioResult(current, float(base), evals, inclusion)


def marginal_values(model: OfferModel, applied, application_cost: float, **kw) -> np.ndarray:
    """MV_k = V(A with k) - V(A without k) for every job k.

    At an optimum MV_k >= 0 for members and MV_k <= 0 for non-members.
    """
    applied = np.asarray(applied, dtype=bool)
    base = portfolio_value(model, applied, application_cost, **kw)
    out = np.empty(applied.size)
    for k in range(applied.size):
        flipped = applied.copy()
        flipped[k] = ~flipped[k]
        diff = base - portfolio_value(model, flipped, application_cost, **kw)
        out[k] = diff if applied[k] else -diff
    return out
