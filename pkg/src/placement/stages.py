"""Caste earnings gaps along the stages of job search.

For each stage the outcome of a student is the mean log wage over the
listings still in contention at that stage; the gap is the OLS coefficient
on the disadvantaged indicator, controlling for the student's background.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import ConfigurationError, DataError
from .market import DEGREES, SECTORS, Market

log = logging.getLogger(__name__)


class Stage(str, enum.Enum):
    APPLICATION = "Application"
    APTITUDE_TESTS = "AptitudeTests"
    GROUP_DEBATES = "GroupDebates"
    PERSONAL_INTERVIEWS = "PersonalInterviews"
    OFFERS = "Offers"
    ACCEPTED_OFFERS = "AcceptedOffers"


STAGES = tuple(Stage)
PRE_INTERVIEW = (Stage.APPLICATION, Stage.APTITUDE_TESTS, Stage.GROUP_DEBATES)


@dataclass
class StageOutcome:
    """Listings in contention, (N, J) per stage, and their mean log wage."""

    sets: dict
    wage: np.ndarray

    @classmethod
    def from_market(cls, market: Market, jobs_mask=None) -> "StageOutcome":
        keep = np.ones(market.n_jobs, dtype=bool) if jobs_mask is None else np.asarray(jobs_mask)
        chosen = np.zeros_like(market.offered)
        placed = np.flatnonzero(market.chosen >= 0)
        chosen[placed, market.chosen[placed]] = True
        flags = market.stage_flags
        raw = [market.applied, flags[..., 0], flags[..., 1], flags[..., 2], market.offered, chosen]
        sets = {s: m & keep[None, :] for s, m in zip(STAGES, raw)}
        return cls(sets, market.jobs.wage)

    def size(self, stage: Stage) -> np.ndarray:
        return self.sets[Stage(stage)].sum(axis=1)

    def mean_wage(self, stage: Stage) -> np.ndarray:
        """Mean log wage of each student's set; NaN when the set is empty."""
        m = self.sets[Stage(stage)]
        n = m.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(n > 0, (m @ self.wage) / n, np.nan)

    def nested(self) -> bool:
        return all(np.all(~b | a) for a, b in
                   zip((self.sets[s] for s in STAGES[:-1]), (self.sets[s] for s in STAGES[1:])))


# --------------------------------------------------------------------------
# OLS
# --------------------------------------------------------------------------


@dataclass
class OLSResult:
    coef: np.ndarray
    se: np.ndarray
    r2: float
    n: int
    names: list
    cov: np.ndarray = field(repr=False)

    def __getitem__(self, name):
        return self.coef[self.names.index(name)]


def _collinear(X: np.ndarray, names) -> list:
    kept = []
    bad = []
    for k in range(X.shape[1]):
        trial = kept + [k]
        if np.linalg.matrix_rank(X[:, trial]) == len(trial):
            kept = trial
        else:
            bad.append(names[k])
    return bad


def ols(X, y, names=None, robust: str = "HC1") -> OLSResult:
    """Least squares through a QR factorisation with heteroskedasticity-robust SEs.

    ``robust`` is "HC0", "HC1" (n / (n - k) small-sample scaling) or "none".
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    names = list(names) if names is not None else [f"x{j}" for j in range(k)]
    if n < k:
        raise DataError(f"{n} rows for {k} columns")
    if np.linalg.matrix_rank(X) < k:
        raise DataError("design matrix is rank deficient; collinear columns: "
                        + ", ".join(_collinear(X, names)))
    Q, R = np.linalg.qr(X)
    coef = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ coef
    Rinv = np.linalg.solve(R, np.eye(k))
    bread = Rinv @ Rinv.T
    if robust == "none":
        dof = max(n - k, 1)
        cov = bread * (resid @ resid) / dof
    elif robust in ("HC0", "HC1"):
        meat = (X * resid[:, None] ** 2).T @ X
        cov = bread @ meat @ bread
        if robust == "HC1" and n > k:
            cov *= n / (n - k)
    else:
        raise ConfigurationError(f"unknown robust option {robust!r}")
    tss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - (resid @ resid) / tss if tss > 0 else 1.0
    return OLSResult(coef, np.sqrt(np.clip(np.diag(cov), 0, None)), float(r2), n, names, cov)


# --------------------------------------------------------------------------
# Stage gaps
# --------------------------------------------------------------------------


@dataclass
class RegressionSpec:
    """Controls and sample for the stage regressions.

    ``degree`` is "linear", "quadratic", "cubic" or "interacted" (a full
    quadratic in the continuous controls with all pairwise products).
    Degree and major dummies always enter linearly.
    """

    controls: tuple = ("gpa", "entrance_score", "grade10", "grade12", "experience")
    degree: str = "linear"
    sector: str | None = None
    client_facing: bool | None = None
    dummies: tuple = ("degree", "major")
    robust: str = "HC1"

    def validate(self) -> None:
        if self.degree not in ("linear", "quadratic", "cubic", "interacted"):
            raise ConfigurationError(f"unknown polynomial degree {self.degree!r}")
        if self.sector is not None and self.sector not in [s.value for s in SECTORS]:
            raise ConfigurationError(f"unknown sector {self.sector!r}")

    def job_mask(self, market: Market) -> np.ndarray:
        keep = np.ones(market.n_jobs, dtype=bool)
        if self.sector is not None:
            keep &= market.jobs.sector == [s.value for s in SECTORS].index(self.sector)
        if self.client_facing is not None:
            keep &= market.jobs.client_facing == self.client_facing
        return keep


def control_matrix(market: Market, spec: RegressionSpec):
    """Intercept, disadvantaged indicator and controls; returns (X, names)."""
    st = market.students
    cont, cnames = [], []
    for c in spec.controls:
        if c == "experience":
            for e in range(st.experience.shape[1]):
                cont.append(st.experience[:, e])
                cnames.append(f"experience_{e + 1}")
        else:
            cont.append(np.asarray(getattr(st, c), dtype=float))
            cnames.append(c)
    cols = [np.ones(market.n_students), st.disadvantaged.astype(float)]
    names = ["const", "disadvantaged"]
    cols += cont
    names += cnames
    if spec.degree in ("quadratic", "cubic"):
        cols += [c**2 for c in cont]
        names += [f"{n}^2" for n in cnames]
    if spec.degree == "cubic":
        cols += [c**3 for c in cont]
        names += [f"{n}^3" for n in cnames]
    if spec.degree == "interacted":
        for (a, na), (b, nb) in itertools.combinations_with_replacement(zip(cont, cnames), 2):
            cols.append(a * b)
            names.append(f"{na}*{nb}")
    if "degree" in spec.dummies:
        for k in range(1, len(DEGREES)):
            cols.append((st.degree == k).astype(float))
            names.append(f"degree_{DEGREES[k].value}")
    if "major" in spec.dummies:
        for m in sorted(set(st.major.tolist()))[1:]:
            cols.append((st.major == m).astype(float))
            names.append(f"major_{m}")
    return np.column_stack(cols), names


@dataclass
class StageGap:
    stage: Stage
    beta: float
    se: float
    ci: tuple
    n: int
    mean_set_size: float

    def significant(self, z: float = 1.959963984540054) -> bool:
        return abs(self.beta) > z * self.se


def stage_gap(market: Market, spec: RegressionSpec | None = None, level: float = 0.95) -> list:
    """Coefficient on the disadvantaged indicator at every stage, with CIs.

    A stage where no student has a nonempty set is skipped with a warning.
    """
    spec = spec or RegressionSpec()
    spec.validate()
    outcome = StageOutcome.from_market(market, spec.job_mask(market))
    X, names = control_matrix(market, spec)
    z = norm.ppf(0.5 + level / 2)
    out = []
    for stage in STAGES:
        y = outcome.mean_wage(stage)
        rows = np.isfinite(y)
        if not rows.any():
            log.warning("stage %s: no student has a nonempty set; skipped", stage.value)
            continue
        Xs = X[rows]
        # drop dummies that are constant in the subsample
        keep = [k for k in range(Xs.shape[1])
                if k < 2 or not names[k].startswith(("degree_", "major_")) or np.ptp(Xs[:, k]) > 0]
        res = ols(Xs[:, keep], y[rows], [names[k] for k in keep], robust=spec.robust)
        b = float(res["disadvantaged"])
        se = float(res.se[res.names.index("disadvantaged")])
        out.append(StageGap(stage, b, se, (b - z * se, b + z * se), int(rows.sum()),
                            float(outcome.size(stage)[rows].mean())))
    return out


def gap_shares(gaps) -> dict:
    """Share of the AcceptedOffers gap already present at each stage."""
    by = {g.stage: g.beta for g in gaps}
    total = by.get(Stage.ACCEPTED_OFFERS)
    if total is None or total == 0:
        return {}
    return {s.value: b / total for s, b in by.items()}


def realized_gap(market: Market) -> float:
    """Raw difference in mean log wage of accepted jobs, disadvantaged minus advantaged."""
    placed = market.chosen >= 0
    w = market.jobs.wage[market.chosen[placed]]
    d = market.students.disadvantaged[placed]
    return float(w[d].mean() - w[~d].mean())
