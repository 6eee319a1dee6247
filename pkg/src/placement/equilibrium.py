"""Expected market outcomes and day-sequential cutoff solving.

Everything here integrates the match terms mu analytically (offer odds are
logistic) and the preference shocks analytically (logit choice), so expected
hires are smooth in the cutoffs.  The latent q is integrated by averaging over
the columns of a ``q`` matrix of shape (N, R).

A job's expected cohort uses consistent beliefs: student i accepts job j with
probability E[exp(u_j) / (1 + exp(u_j) + sum_{l in Z_-j} exp(u_l))], where
Z_-j are the other offers the student may collect on the same interview day,
and i only reaches j's day when every earlier day gave no offer.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit

from .design import employer_base, employer_design, job_cutoffs, student_base, student_loading
from .errors import ConfigurationError
from .hiring import HIRE_ALL, HIRE_NONE, solve_cutoff
from .market import Market, ParameterSet

log = logging.getLogger(__name__)

MAX_SAME_DAY = 14


@lru_cache(maxsize=None)
def subset_matrix(g: int) -> np.ndarray:
    """All 2^g indicator rows over g items."""
    return np.array(list(itertools.product((0, 1), repeat=g)), dtype=bool).reshape(1 << g, g)


@dataclass
class MarketArrays:
    """Static (N, J) arrays needed to evaluate outcomes under one ParameterSet."""

    interview: np.ndarray
    day: np.ndarray
    base_u: np.ndarray
    load: np.ndarray
    base_v: np.ndarray
    delta: float
    disadvantaged: np.ndarray
    position: np.ndarray
    positions: list

    @classmethod
    def build(cls, market: Market, params: ParameterSet, students=None) -> "MarketArrays":
        """``students`` overrides the market's student table (e.g. shifted scores)."""
        st = market.students if students is None else students
        params.validate(market.layout)
        return cls(
            interview=market.interview,
            day=market.jobs.day.copy(),
            base_u=student_base(st, market.jobs, params),
            load=student_loading(market.jobs, params),
            base_v=employer_base(st, market.jobs, params, S=employer_design(st, market.jobs)),
            delta=params.delta,
            disadvantaged=st.disadvantaged.copy(),
            position=market.job_position_index,
            positions=market.positions,
        )

    @property
    def days(self) -> np.ndarray:
        return np.unique(self.day)

    def u(self, q: np.ndarray) -> np.ndarray:
        return self.base_u[None, :, :] + q.T[:, :, None] * self.load[None, None, :]

    def v(self, q: np.ndarray, shift=None) -> np.ndarray:
        out = self.base_v[None, :, :] + self.delta * q.T[:, :, None]
        if shift is not None:
            out = out + shift
        return out

    def position_cutoffs(self, cutoff_map: dict) -> np.ndarray:
        try:
            return np.array([cutoff_map[p] for p in self.positions], dtype=float)
        except KeyError as exc:
            raise ConfigurationError(f"no cutoff for position {exc.args[0]!r}") from None


def _acceptance_rows(pi, u, j, rivals):
    """Exact acceptance of job j over all subsets of ``rivals`` for a batch of rows."""
    g = rivals.size
    B = subset_matrix(g)
    pr = pi[..., rivals]
    # P(subset) for every rival subset, shape (..., 2^g)
    with np.errstate(divide="ignore"):
        logp = np.log(np.where(B, pr[..., None, :], 1 - pr[..., None, :])).sum(axis=-1)
    ur = np.where(B, u[..., None, rivals], -np.inf)
    terms = np.concatenate(
        [np.zeros(ur.shape[:-1] + (1,)),
         np.broadcast_to(u[..., None, j:j + 1], ur.shape[:-1] + (1,)), ur], axis=-1)
    top = terms.max(axis=-1, keepdims=True)
    lse = top[..., 0] + np.log(np.exp(terms - top).sum(axis=-1))
    with np.errstate(divide="ignore"):
        return np.exp(logp + u[..., None, j] - lse).sum(axis=-1)


def same_day_acceptance(pi: np.ndarray, u: np.ndarray, day: np.ndarray, only=None) -> np.ndarray:
    """Pr(student takes job j | offered j and still eligible on j's day).

    ``pi`` and ``u`` have shape (R, N, J) (or (N, J)); rival offers on the
    same day are enumerated exactly.  Rivals whose offer probability is zero
    for every student j can hire cannot matter and are left out of the
    enumeration.  Entries where j never offers are 0.  With ``only`` just
    those columns are filled in.
    """
    squeeze = pi.ndim == 2
    if squeeze:
        pi, u = pi[None], u[None]
    acc = np.zeros_like(pi)
    cols = range(pi.shape[-1]) if only is None else np.atleast_1d(only)
    for j in cols:
        group = np.flatnonzero(day == day[j])
        others = group[group != j]
        rows = np.flatnonzero((pi[..., j] > 0).any(axis=0))
        if rows.size == 0:
            continue
        p_rows = pi[:, rows]
        rivals = others[(p_rows[..., others] > 0).any(axis=(0, 1))]
        if rivals.size + 1 > MAX_SAME_DAY:
            raise ConfigurationError(
                f"{rivals.size + 1} jobs share day {day[j]}; exact same-day enumeration "
                f"supports {MAX_SAME_DAY}")
        acc[:, rows, j] = _acceptance_rows(p_rows, u[:, rows], j, rivals)
    return acc[0] if squeeze else acc


def reach_probability(pi: np.ndarray, day: np.ndarray) -> np.ndarray:
    """Probability of still being unplaced when each job's day starts, (..., J)."""
    out = np.empty_like(pi)
    with np.errstate(divide="ignore"):
        log_none = np.log1p(-pi)
    for d in np.unique(day):
        before = day < d
        out[..., day == d] = np.exp(log_none[..., before].sum(axis=-1))[..., None]
    return out


@dataclass
class Outcomes:
    """Expected outcomes averaged over q draws."""

    pi: np.ndarray          # (R, N, J) offer odds given eligibility
    reach: np.ndarray       # (R, N, J)
    accept: np.ndarray      # (R, N, J)
    disadvantaged: np.ndarray

    @property
    def offer(self) -> np.ndarray:
        """Pr(offer from j), (N, J)."""
        return (self.reach * self.pi).mean(axis=0)

    @property
    def take(self) -> np.ndarray:
        """Pr(student ends in job j), (N, J)."""
        return (self.reach * self.pi * self.accept).mean(axis=0)

    @property
    def hires(self) -> np.ndarray:
        return self.take.sum(axis=0)

    @property
    def employment(self) -> np.ndarray:
        return self.take.sum(axis=1)

    def hires_by_caste(self) -> np.ndarray:
        take = self.take
        d = self.disadvantaged
        return np.stack([take[~d].sum(axis=0), take[d].sum(axis=0)])

    def rates(self) -> dict:
        emp = self.employment
        d = self.disadvantaged
        return {
            "employment_advantaged": float(emp[~d].mean()) if (~d).any() else float("nan"),
            "employment_disadvantaged": float(emp[d].mean()) if d.any() else float("nan"),
            "employment_overall": float(emp.mean()),
        }


def expected_outcomes(arrays: MarketArrays, cutoffs, q: np.ndarray, shift=None) -> Outcomes:
    """Outcomes when listing j hires iff V_ij > cutoff.

    ``cutoffs`` broadcasts against (N, J): a vector per listing, or a matrix
    for caste-specific cutoffs.  ``shift`` is added to employer utility.
    """
    v = arrays.v(q, shift)
    u = arrays.u(q)
    pi = np.where(arrays.interview[None], expit(v - np.asarray(cutoffs)[None]), 0.0)
    return Outcomes(pi, reach_probability(pi, arrays.day),
                    same_day_acceptance(pi, u, arrays.day), arrays.disadvantaged)


def listing_cutoffs(arrays: MarketArrays, position_cutoffs: np.ndarray) -> np.ndarray:
    return np.asarray(position_cutoffs, dtype=float)[arrays.position]


def solve_equilibrium(arrays: MarketArrays, targets: np.ndarray, q: np.ndarray, shift=None,
                      start=None, tol: float = 1e-10, max_sweeps: int = 200) -> np.ndarray:
    """Position cutoffs that make expected hires equal ``targets`` (per position).

    Day by day: positions on earlier days are final when a day is solved, so
    eligibility on the current day is fixed.  Within a day each position's
    cutoff is re-solved against its rivals' current cutoffs until no expected
    hire moves by more than ``tol``.
    """
    targets = np.asarray(targets, dtype=float)
    P = len(arrays.positions)
    k = np.zeros(P) if start is None else np.array(start, dtype=float)
    v = arrays.v(q, shift)
    u = arrays.u(q)
    inter = arrays.interview[None]
    for d in arrays.days:
        dcols = np.flatnonzero(arrays.day == d)
        todays = np.unique(arrays.position[dcols])
        for _ in range(max_sweeps):
            pi = np.where(inter, expit(v - listing_cutoffs(arrays, k)[None, None]), 0.0)
            reach = reach_probability(pi, arrays.day)[..., dcols]
            moved = 0.0
            for p in todays:
                local = np.flatnonzero(arrays.position[dcols] == p)
                cols = dcols[local]
                acc = same_day_acceptance(pi, u, arrays.day, only=cols)
                w = np.where(inter[..., cols], reach[..., local] * acc[..., cols], 0.0)
                vp = v[..., cols]
                R = q.shape[1]
                nz = w != 0

                def hires(c, w=w[nz], vv=vp[nz]):
                    return float(np.sum(w * expit(vv - c)) / R)

                new = solve_cutoff(hires, targets[p], tol=tol * 1e-2)
                moved = max(moved, abs(hires(new) - hires(k[p])))
                k[p] = new
                pi[..., cols] = np.where(inter[..., cols], expit(vp - new), 0.0)
            if moved <= tol:
                break
        else:
            log.warning("cutoffs on day %s did not settle after %d sweeps", d, max_sweeps)
    return k


def position_hires(arrays: MarketArrays, outcomes: Outcomes) -> np.ndarray:
    return np.bincount(arrays.position, weights=outcomes.hires, minlength=len(arrays.positions))
