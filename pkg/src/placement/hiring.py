"""Employer side: utilities, cutoff hiring and the day-sequenced offer law."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

from .design import employer_base, layout_of, resolve_q, tables_from_records
from .errors import ConfigurationError, DomainError
from .market import Job, ParameterSet, Student

# Finite stand-ins for k = -inf / +inf.
HIRE_ALL = -1e9
HIRE_NONE = 1e9


@dataclass(frozen=True)
class MatchShocks:
    """Standard logistic match terms mu_ij, seen by the job only."""

    mu: np.ndarray

    @classmethod
    def draw(cls, rng: np.random.Generator, n_students: int, n_jobs: int) -> "MatchShocks":
        return cls(rng.logistic(size=(n_students, n_jobs)))


@dataclass
class DayAssignment:
    """Interview day per job, optionally a lottery over several assignments.

    ``alternatives`` is a list of (days, probability) pairs; when empty the
    assignment is degenerate at ``days``.
    """

    days: np.ndarray
    alternatives: list = field(default_factory=list)

    def __post_init__(self):
        self.days = np.asarray(self.days, dtype=int)
        if self.alternatives:
            probs = np.array([p for _, p in self.alternatives], dtype=float)
            if np.any(probs < 0) or not np.isclose(probs.sum(), 1.0, atol=1e-12):
                raise ConfigurationError("assignment probabilities must be >= 0 and sum to 1")
            self.alternatives = [(np.asarray(d, dtype=int), float(p)) for d, p in self.alternatives]

    def support(self):
        if not self.alternatives:
            return [(self.days, 1.0)]
        return self.alternatives


def employer_utility(student: Student, job: Job, params: ParameterSet, q: float | None = None) -> float:
    """Systematic employer value of ``student`` to ``job`` (match term excluded)."""
    params.validate(layout_of(student, job))
    st, jt = tables_from_records([student], [job])
    return float(employer_base(st, jt, params)[0, 0] + params.delta * resolve_q(student, q))


def acceptance_probability(student: Student, job: Job, params: ParameterSet,
                           q: float | None = None) -> float:
    """pi = Pr(mu > k - v): probability that ``job`` makes ``student`` an offer."""
    try:
        k = params.cutoffs[job.position]
    except KeyError:
        raise ConfigurationError(f"no cutoff for position {job.position!r}") from None
    return float(expit(employer_utility(student, job, params, q) - k))


# --------------------------------------------------------------------------
# Offer probabilities
# --------------------------------------------------------------------------


def offer_day_probability(pi, offered, applied) -> float:
    """f_k(Z^k | A^k) for the jobs of one interview day, given eligibility."""
    pi = np.asarray(pi, dtype=float)
    z = np.asarray(offered, dtype=bool)
    a = np.asarray(applied, dtype=bool)
    if np.any(z & ~a):
        raise DomainError("offer from a job the student did not apply to")
    terms = np.where(a, np.where(z, pi, 1.0 - pi), 1.0)
    return float(np.prod(terms))


def _single_assignment(pi, z, a, days) -> float:
    if not z.any():
        return float(np.prod(np.where(a, 1.0 - pi, 1.0)))
    offer_days = np.unique(days[z])
    if offer_days.size > 1:
        return np.nan
    k = offer_days[0]
    before = a & (days < k)
    today = days == k
    return (float(np.prod(np.where(before, 1.0 - pi, 1.0)))
            * offer_day_probability(pi[today], z[today], a[today]))


def offer_vector_probability(pi, offered, applied, assignment) -> float:
    """f(Z | A): probability of the realised offer vector.

    A student is eligible on day k only if every earlier day produced no
    offer; the all-zero vector needs every day to come up empty.  With a
    lottery over day assignments the result is the probability-weighted mix.
    """
    pi = np.asarray(pi, dtype=float)
    z = np.asarray(offered, dtype=bool)
    a = np.asarray(applied, dtype=bool)
    if np.any(z & ~a):
        raise DomainError("offer from a job the student did not apply to")
    if not isinstance(assignment, DayAssignment):
        assignment = DayAssignment(assignment)
    total = 0.0
    feasible = False
    for days, prob in assignment.support():
        value = _single_assignment(pi, z, a, days)
        if np.isnan(value):
            continue
        feasible = True
        total += prob * value
    if not feasible:
        raise DomainError("offers span more than one interview day")
    return total


def feasible_offer_vectors(applied, days):
    """All offer vectors reachable from ``applied``: zero plus single-day patterns."""
    a = np.asarray(applied, dtype=bool)
    days = np.asarray(days)
    out = [np.zeros(a.size, dtype=bool)]
    for k in np.unique(days[a]):
        idx = np.flatnonzero(a & (days == k))
        for mask in range(1, 1 << idx.size):
            z = np.zeros(a.size, dtype=bool)
            z[idx[[(mask >> b) & 1 == 1 for b in range(idx.size)]]] = True
            out.append(z)
    return out


# --------------------------------------------------------------------------
# Cutoffs
# --------------------------------------------------------------------------


def solve_cutoff(hires: Callable[[float], float], target: float, *, lo: float = -50.0,
                 hi: float = 50.0, tol: float = 1e-8, max_iter: int = 400) -> float:
    """Smallest cutoff k with ``hires(k) <= target`` for nonincreasing ``hires``.

    Bisection; stops once the constraint holds within ``tol`` expected hires
    or the bracket collapses to floating-point resolution.  Returns
    ``HIRE_ALL`` when the constraint is slack at every cutoff.
    """
    if target < 0:
        raise DomainError("target expected hires must be >= 0")
    if hires(HIRE_ALL) <= target:
        return HIRE_ALL
    while hires(lo) <= target:
        lo = 2 * lo - 1
        if lo < HIRE_ALL:
            return HIRE_ALL
    while hires(hi) > target:
        hi = 2 * hi + 1
        if hi > HIRE_NONE:
            return HIRE_NONE
    for _ in range(max_iter):
        if target - hires(hi) <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if hires(mid) > target:
            lo = mid
        else:
            hi = mid
    return hi


def pool_hires(values, accept, cutoff: float) -> float:
    """Expected hires sum_{i: V_i > k} P_i for a pool with realised values."""
    values = np.asarray(values, dtype=float)
    return float(np.sum(np.asarray(accept, dtype=float)[values > cutoff]))


def solve_pool_cutoff(values, accept, target: float, tol: float = 1e-8) -> float:
    """Cutoff for a pool of applicants whose employer values are known.

    ``accept`` holds Pr(C* = j) for each applicant if offered.
    """
    values = np.asarray(values, dtype=float)
    accept = np.asarray(accept, dtype=float)
    if target < 0:
        raise DomainError("target expected hires must be >= 0")
    if target >= values.size or accept.sum() <= target:
        return HIRE_ALL
    span = np.abs(values).max() + 1.0
    return solve_cutoff(lambda k: pool_hires(values, accept, k), target,
                        lo=-span, hi=span, tol=tol)


def fractional_cutoff_rule(values, accept, cap: float) -> np.ndarray:
    """Optimal hiring rule Hire in [0,1]^n for max sum V P Hire s.t. sum P Hire <= cap.

    Fills applicants in decreasing V while V > 0 and capacity remains; the
    marginal applicant is hired with the probability that exhausts the cap.
    """
    values = np.asarray(values, dtype=float)
    accept = np.asarray(accept, dtype=float)
    hire = np.zeros(values.size)
    room = float(cap)
    for i in np.argsort(-values, kind="stable"):
        if values[i] <= 0 or room <= 0:
            break
        if accept[i] <= room:
            hire[i] = 1.0
            room -= accept[i]
        else:
            hire[i] = room / accept[i]
            room = 0.0
    return hire


@dataclass
class CutoffReport:
    status: str
    cutoff_value: float
    best_deterministic_value: float
    rules_checked: int
    exchange_pairs_checked: int
    improving_exchanges: int
    hire: list

    @property
    def optimal(self) -> bool:
        return self.status in ("optimal", "degenerate tie", "trivial")

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


def verify_cutoff_optimality(values, accept, cap: float, max_pool: int = 12,
                             eps: float = 1e-9) -> CutoffReport:
    """Check the cutoff rule against every deterministic rule and every exchange.

    Deterministic rules are all subsets of the pool whose expected size is at
    most ``cap``.  Exchanges are the moves of the contradiction argument:
    shift expected hires from an applicant with higher V to one with lower V.
    """
    values = np.asarray(values, dtype=float)
    accept = np.asarray(accept, dtype=float)
    n = values.size
    if n > max_pool:
        raise DomainError(f"pool of {n} exceeds the exhaustive-check limit of {max_pool}")
    if cap < 0:
        raise DomainError("cap must be >= 0")
    hire = fractional_cutoff_rule(values, accept, cap)
    best = float(np.sum(values * accept * hire))

    masks = (np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1
    size = masks @ accept
    worth = masks @ (values * accept)
    ok = size <= cap + 1e-12
    best_det = float(worth[ok].max())

    pairs = improving = 0
    for i in range(n):
        for k in range(n):
            if values[i] > values[k] and hire[i] > 0 and hire[k] < 1:
                pairs += 1
                step = min(hire[i] * accept[i], (1 - hire[k]) * accept[k])
                if step * (values[k] - values[i]) > eps:
                    improving += 1
            elif values[i] > values[k] and hire[i] < 1 and hire[k] > 0:
                # the rule itself would be improvable: a true violation
                pairs += 1
                improving += 1

    if n <= 1:
        status = "trivial"
    elif np.allclose(values, values[0]):
        status = "degenerate tie"
    elif improving == 0 and best >= best_det - eps:
        status = "optimal"
    else:
        status = "violated"
    return CutoffReport(status, best, best_det, int(ok.sum()), pairs, improving, hire.tolist())
