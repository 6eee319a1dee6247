"""Covariate blocks for both sides of the market.

Student side: ``u_ij(q) = base_ij + q * load_j`` with
``base_ij = X_ij'beta + NP_j'psi + tau * w_j`` and ``load_j = 1 + NP_j'gamma``.

Employer side: ``v_ij(q) = S_ij'alpha + eta * disadv_i - phi * w_j + delta * q``.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .market import (CovariateLayout, Job, JobTable, ParameterSet, Sector,
                     Student, StudentTable, DEGREES, SECTORS)

TECH = SECTORS.index(Sector.TECHNOLOGY)
CONSULTING = SECTORS.index(Sector.CONSULTING)


def student_design(students: StudentTable, jobs: JobTable) -> np.ndarray:
    """X_ij as an (N, J, K) array in ``CovariateLayout.beta_names`` order."""
    d = students.disadvantaged.astype(float)[:, None]
    tech = (jobs.sector == TECH).astype(float)[None, :]
    cons = (jobs.sector == CONSULTING).astype(float)[None, :]
    n, J = len(students), len(jobs)
    cols = [
        np.broadcast_to(tech, (n, J)),
        np.broadcast_to(cons, (n, J)),
        d * jobs.wage[None, :],
        d * tech,
        d * cons,
    ]
    cols += [d * jobs.amenities[None, :, m] for m in range(jobs.amenities.shape[1])]
    return np.stack(cols, axis=2)


def employer_design(students: StudentTable, jobs: JobTable) -> np.ndarray:
    """S_ij as an (N, J, K) array in ``CovariateLayout.alpha_names`` order."""
    n, J = len(students), len(jobs)
    deg = students.degree
    tech = (jobs.sector == TECH).astype(float)[None, :]
    cons = (jobs.sector == CONSULTING).astype(float)[None, :]
    gpa = students.gpa[:, None]
    student_cols = [(deg == k).astype(float) for k in (1, 2, 3)]
    student_cols += [students.gpa * (deg == k) for k in range(len(DEGREES))]
    pair_cols = [gpa * cons, gpa * tech]
    tail = [students.entrance_score * (deg == k) for k in range(len(DEGREES))]
    tail += [students.grade10, students.grade12]
    tail += [students.experience[:, e] for e in range(students.experience.shape[1])]
    out = np.empty((n, J, len(student_cols) + len(pair_cols) + len(tail)))
    k = 0
    for c in student_cols:
        out[:, :, k] = c[:, None]
        k += 1
    for c in pair_cols:
        out[:, :, k] = c
        k += 1
    for c in tail:
        out[:, :, k] = c[:, None]
        k += 1
    return out


def student_base(students, jobs, params: ParameterSet, X=None) -> np.ndarray:
    """Systematic student utility with q = 0, shape (N, J)."""
    if X is None:
        X = student_design(students, jobs)
    return X @ params.beta + (jobs.amenities @ params.psi)[None, :] + params.tau * jobs.wage[None, :]


def student_loading(jobs, params: ParameterSet) -> np.ndarray:
    """Derivative of student utility with respect to q, shape (J,)."""
    return 1.0 + jobs.amenities @ params.gamma


def employer_base(students, jobs, params: ParameterSet, S=None) -> np.ndarray:
    """Systematic employer utility with q = 0, shape (N, J)."""
    if S is None:
        S = employer_design(students, jobs)
    return (S @ params.alpha + params.eta * students.disadvantaged.astype(float)[:, None]
            - params.phi * jobs.wage[None, :])


def job_cutoffs(jobs: JobTable, params: ParameterSet) -> np.ndarray:
    """Cutoff of every listing, looked up by position key."""
    out = np.empty(len(jobs))
    for j, key in enumerate(jobs.position):
        try:
            out[j] = params.cutoffs[key]
        except KeyError:
            raise ConfigurationError(f"no cutoff for position {key!r}") from None
    return out


# -- record adapters ---------------------------------------------------------


def tables_from_records(students, jobs) -> tuple[StudentTable, JobTable]:
    students = list(students)
    jobs = list(jobs)
    n_exp = {len(s.experience) for s in students}
    n_am = {len(j.amenities) for j in jobs}
    if len(n_exp) > 1 or len(n_am) > 1:
        raise ConfigurationError("covariate vectors must have one length market-wide")
    E = n_exp.pop() if n_exp else 0
    M = n_am.pop() if n_am else 0
    st = StudentTable(
        id=np.array([s.id for s in students], dtype=int),
        year=np.array([s.year for s in students], dtype=int),
        disadvantaged=np.array([s.disadvantaged for s in students], dtype=bool),
        degree=np.array([DEGREES.index(s.degree) for s in students], dtype=int),
        major=np.array([s.major for s in students], dtype=object),
        gpa=np.array([s.gpa for s in students], dtype=float),
        entrance_score=np.array([s.entrance_score for s in students], dtype=float),
        grade10=np.array([s.grade10 for s in students], dtype=float),
        grade12=np.array([s.grade12 for s in students], dtype=float),
        experience=np.array([s.experience for s in students], dtype=float).reshape(len(students), E),
    )
    jt = JobTable(
        id=np.array([j.id for j in jobs], dtype=int),
        firm=np.array([j.firm for j in jobs], dtype=object),
        designation=np.array([j.designation for j in jobs], dtype=object),
        year=np.array([j.year for j in jobs], dtype=int),
        sector=np.array([SECTORS.index(j.sector) for j in jobs], dtype=int),
        wage=np.array([j.wage for j in jobs], dtype=float),
        amenities=np.array([j.amenities for j in jobs], dtype=float).reshape(len(jobs), M),
        client_facing=np.array([j.client_facing for j in jobs], dtype=bool),
        day=np.array([j.interview_day for j in jobs], dtype=int),
        cap=np.array([j.hiring_cap for j in jobs], dtype=float),
    )
    return st, jt


def layout_of(student: Student, job: Job) -> CovariateLayout:
    return CovariateLayout(len(job.amenities), len(student.experience))


def resolve_q(student: Student, q: float | None) -> float:
    if q is not None:
        return float(q)
    if student.q is None:
        raise ConfigurationError(f"student {student.id} carries no latent q; pass q explicitly")
    return float(student.q)
