"""Domain types for the placement market.

A :class:`Market` is stored column-wise (one numpy array per field) because the
estimator and the policy engine work on whole-market arrays.  The record types
:class:`Student` and :class:`Job` are views used by the scalar API.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, ValidationError


class Caste(str, enum.Enum):
    ADVANTAGED = "Advantaged"
    DISADVANTAGED = "Disadvantaged"


class Degree(str, enum.Enum):
    BTECH = "BTech"
    DUAL = "Dual"
    MTECH = "MTech"
    MS = "MS"


class Sector(str, enum.Enum):
    TECHNOLOGY = "Technology"
    CONSULTING = "Consulting"
    MANUFACTURING = "Manufacturing"


DEGREES = tuple(Degree)
SECTORS = tuple(Sector)
STAGE_FLAG_NAMES = ("passed_reading", "passed_test", "passed_gd")


# --------------------------------------------------------------------------
# Covariate layout
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CovariateLayout:
    """Column layout of the student (X) and employer (S) covariate blocks."""

    n_amenities: int = 2
    n_experience: int = 1

    @property
    def beta_names(self) -> list[str]:
        names = [
            "technology",
            "consulting",
            "disadv_x_log_wage",
            "disadv_x_technology",
            "disadv_x_consulting",
        ]
        names += [f"disadv_x_amenity_{m + 1}" for m in range(self.n_amenities)]
        return names

    @property
    def alpha_names(self) -> list[str]:
        names = ["degree_dual", "degree_mtech", "degree_ms"]
        names += [f"gpa_{d.value.lower()}" for d in DEGREES]
        names += ["gpa_x_consulting", "gpa_x_technology"]
        names += [f"entrance_{d.value.lower()}" for d in DEGREES]
        names += ["grade10", "grade12"]
        names += [f"experience_{e + 1}" for e in range(self.n_experience)]
        return names

    @property
    def amenity_names(self) -> list[str]:
        return [f"amenity_{m + 1}" for m in range(self.n_amenities)]

    @property
    def n_beta(self) -> int:
        return len(self.beta_names)

    @property
    def n_alpha(self) -> int:
        return len(self.alpha_names)


# --------------------------------------------------------------------------
# Parameters
# --------------------------------------------------------------------------


@dataclass(eq=False)
class ParameterSet:
    """Structural coefficients of both sides of the market.

    ``cutoffs`` maps a position key (``"firm/designation"``) to its hiring
    cutoff in employer-utility units; all year listings of a position share it.
    """

    beta: np.ndarray
    psi: np.ndarray
    tau: float
    gamma: np.ndarray
    alpha: np.ndarray
    eta: float
    phi: float
    delta: float
    sigma_q: float
    cutoffs: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float).ravel()
        self.psi = np.asarray(self.psi, dtype=float).ravel()
        self.gamma = np.asarray(self.gamma, dtype=float).ravel()
        self.alpha = np.asarray(self.alpha, dtype=float).ravel()
        for name in ("tau", "eta", "phi", "delta", "sigma_q"):
            setattr(self, name, float(getattr(self, name)))
        self.cutoffs = {str(k): float(v) for k, v in self.cutoffs.items()}

    @classmethod
    def zeros(cls, layout: CovariateLayout, **overrides) -> "ParameterSet":
        base = dict(
            beta=np.zeros(layout.n_beta),
            psi=np.zeros(layout.n_amenities),
            tau=0.0,
            gamma=np.zeros(layout.n_amenities),
            alpha=np.zeros(layout.n_alpha),
            eta=0.0,
            phi=0.0,
            delta=0.0,
            sigma_q=0.0,
            cutoffs={},
        )
        base.update(overrides)
        return cls(**base)

    def validate(self, layout: CovariateLayout) -> None:
        expected = {
            "beta": layout.n_beta,
            "psi": layout.n_amenities,
            "gamma": layout.n_amenities,
            "alpha": layout.n_alpha,
        }
        for name, size in expected.items():
            got = getattr(self, name).size
            if got != size:
                raise ConfigurationError(
                    f"parameter block {name!r} has {got} entries, layout needs {size}"
                )
        if not self.sigma_q >= 0:
            raise ConfigurationError(f"sigma_q must be >= 0, got {self.sigma_q}")
        values = np.concatenate(
            [self.beta, self.psi, self.gamma, self.alpha,
             [self.tau, self.eta, self.phi, self.delta, self.sigma_q],
             list(self.cutoffs.values())]
        )
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("parameters must be finite")

    def replace(self, **changes) -> "ParameterSet":
        out = replace(self, **changes)
        if "cutoffs" not in changes:
            out.cutoffs = dict(self.cutoffs)
        return out

    def to_dict(self) -> dict:
        return {
            "beta": self.beta.tolist(),
            "psi": self.psi.tolist(),
            "tau": self.tau,
            "gamma": self.gamma.tolist(),
            "alpha": self.alpha.tolist(),
            "eta": self.eta,
            "phi": self.phi,
            "delta": self.delta,
            "sigma_q": self.sigma_q,
            "cutoffs": dict(sorted(self.cutoffs.items())),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParameterSet":
        try:
            return cls(**{k: data[k] for k in (
                "beta", "psi", "tau", "gamma", "alpha", "eta", "phi",
                "delta", "sigma_q")}, cutoffs=data.get("cutoffs", {}))
        except KeyError as exc:
            raise ConfigurationError(f"params missing block {exc.args[0]!r}") from None

    def equals(self, other: "ParameterSet") -> bool:
        return self.to_dict() == other.to_dict()


# --------------------------------------------------------------------------
# Records
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Student:
    id: int
    year: int
    caste: Caste
    degree: Degree
    major: str
    gpa: float
    entrance_score: float
    grade10: float
    grade12: float
    experience: tuple[float, ...]
    applications: tuple[int, ...]
    stage_flags: tuple[tuple[bool, bool, bool], ...]
    q: float | None = None

    @property
    def disadvantaged(self) -> bool:
        return self.caste is Caste.DISADVANTAGED


@dataclass(frozen=True)
class Job:
    id: int
    firm: str
    designation: str
    year: int
    sector: Sector
    wage: float
    amenities: tuple[float, ...]
    client_facing: bool
    interview_day: int
    hiring_cap: float

    @property
    def position(self) -> str:
        return position_key(self.firm, self.designation)


@dataclass(frozen=True)
class OfferVector:
    """Realised offers Z_i, the day they arrived and the chosen option.

    ``chosen`` is a job id, or 0 for the outside option.
    """

    offered: tuple[bool, ...]
    offer_day: int | None
    chosen: int


def position_key(firm: str, designation: str) -> str:
    return f"{firm}/{designation}"


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


@dataclass
class MarketConfig:
    """Settings for the synthetic market generator.

    Score gaps are advantaged-minus-disadvantaged mean differences in SD units;
    scores have unit SD within caste.  Wages are log annual salaries.
    """

    n_students: int = 1000
    n_positions: int = 10
    n_years: int = 2
    n_days: int = 4
    n_majors: int = 5
    n_amenities: int = 2
    n_experience: int = 1
    degree_shares: tuple[float, ...] = (0.31, 0.29, 0.29, 0.11)
    disadvantaged_share: tuple[float, ...] = (0.55, 0.50, 0.49, 0.27)
    entrance_gap: tuple[float, ...] = (0.78, 0.72, 0.54, -0.09)
    gpa_gap: tuple[float, ...] = (0.93, 0.86, 0.68, 0.18)
    grade10_gap: float = 0.05
    grade12_gap: float = 0.03
    experience_gap: float = 0.0
    amenity_prevalence: tuple[float, ...] = (0.5, 0.5)
    sector_shares: tuple[float, ...] = (0.52, 0.20, 0.28)
    sector_wage_means: tuple[float, ...] = (11.117, 11.059, 10.681)
    position_wage_sd: float = 0.25
    within_position_wage_sd: float = 0.10
    client_facing_rate: float = 0.15
    eligibility_rate: float = 0.8
    stage_pass_rates: tuple[float, float, float] = (0.65, 0.65, 0.65)
    screen_caste_shift: float = 0.0
    day_noise_sd: float = 0.1
    target_employment: float = 0.7
    seed: int = 0

    def validate(self) -> None:
        for name in ("n_students", "n_positions", "n_years", "n_days", "n_majors"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.n_amenities < 0 or self.n_experience < 0:
            raise ConfigurationError("covariate counts must be >= 0")
        probs = {
            "degree_shares": self.degree_shares,
            "disadvantaged_share": self.disadvantaged_share,
            "amenity_prevalence": self.amenity_prevalence,
            "sector_shares": self.sector_shares,
            "stage_pass_rates": self.stage_pass_rates,
        }
        for name, values in probs.items():
            arr = np.asarray(values, dtype=float)
            if np.any(arr < 0) or np.any(arr > 1):
                raise ConfigurationError(f"{name} entries must lie in [0, 1]")
        for name in ("client_facing_rate", "eligibility_rate", "target_employment"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ConfigurationError(f"{name} must lie in [0, 1]")
        for name, size in (("degree_shares", 4), ("disadvantaged_share", 4),
                           ("entrance_gap", 4), ("gpa_gap", 4),
                           ("sector_shares", 3), ("sector_wage_means", 3)):
            if len(getattr(self, name)) != size:
                raise ConfigurationError(f"{name} needs {size} entries")
        if len(self.amenity_prevalence) != self.n_amenities:
            raise ConfigurationError("amenity_prevalence length must equal n_amenities")
        if not np.isclose(sum(self.degree_shares), 1.0):
            raise ConfigurationError("degree_shares must sum to 1")
        if not np.isclose(sum(self.sector_shares), 1.0):
            raise ConfigurationError("sector_shares must sum to 1")
        if self.position_wage_sd < 0 or self.within_position_wage_sd < 0:
            raise ConfigurationError("wage SDs must be >= 0")

    @property
    def layout(self) -> CovariateLayout:
        return CovariateLayout(self.n_amenities, self.n_experience)

    def to_dict(self) -> dict:
        out = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "MarketConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        clean = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
        return cls(**clean)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# --------------------------------------------------------------------------
# Column tables
# --------------------------------------------------------------------------


@dataclass(eq=False)
class StudentTable:
    id: np.ndarray
    year: np.ndarray
    disadvantaged: np.ndarray
    degree: np.ndarray
    major: np.ndarray
    gpa: np.ndarray
    entrance_score: np.ndarray
    grade10: np.ndarray
    grade12: np.ndarray
    experience: np.ndarray

    def __len__(self) -> int:
        return len(self.id)

    def subset(self, idx) -> "StudentTable":
        return StudentTable(**{k: v[idx] for k, v in vars(self).items()})

    def with_entrance(self, scores: np.ndarray) -> "StudentTable":
        out = StudentTable(**vars(self))
        out.entrance_score = np.asarray(scores, dtype=float)
        return out


@dataclass(eq=False)
class JobTable:
    id: np.ndarray
    firm: np.ndarray
    designation: np.ndarray
    year: np.ndarray
    sector: np.ndarray
    wage: np.ndarray
    amenities: np.ndarray
    client_facing: np.ndarray
    day: np.ndarray
    cap: np.ndarray

    def __len__(self) -> int:
        return len(self.id)

    @property
    def position(self) -> np.ndarray:
        return np.array([position_key(f, d) for f, d in zip(self.firm, self.designation)],
                        dtype=object)


@dataclass(eq=False)
class Oracle:
    """Latent draws behind a generated market.  Never read by the estimator."""

    q: np.ndarray
    mu: np.ndarray
    epsilon: np.ndarray
    params: ParameterSet | None = None


@dataclass(eq=False)
class Market:
    students: StudentTable
    jobs: JobTable
    applied: np.ndarray
    stage_flags: np.ndarray
    offered: np.ndarray
    chosen: np.ndarray
    layout: CovariateLayout
    oracle: Oracle | None = None
    metadata: dict = field(default_factory=dict)

    # -- shapes -------------------------------------------------------------
    @property
    def n_students(self) -> int:
        return len(self.students)

    @property
    def n_jobs(self) -> int:
        return len(self.jobs)

    @property
    def interview(self) -> np.ndarray:
        """Applications that survived every pre-interview screen."""
        return self.applied & self.stage_flags.all(axis=2)

    @property
    def offer_day(self) -> np.ndarray:
        """Day of the realised offers per student; 0 when none."""
        days = np.where(self.offered, self.jobs.day[None, :], 0)
        return days.max(axis=1)

    @property
    def positions(self) -> list[str]:
        return sorted(set(self.jobs.position.tolist()))

    @property
    def job_position_index(self) -> np.ndarray:
        lookup = {p: k for k, p in enumerate(self.positions)}
        return np.array([lookup[p] for p in self.jobs.position], dtype=int)

    # -- record views ---------------------------------------------------------
    def student(self, i: int) -> Student:
        s = self.students
        q = None if self.oracle is None else float(self.oracle.q[i])
        return Student(
            id=int(s.id[i]),
            year=int(s.year[i]),
            caste=Caste.DISADVANTAGED if s.disadvantaged[i] else Caste.ADVANTAGED,
            degree=DEGREES[int(s.degree[i])],
            major=str(s.major[i]),
            gpa=float(s.gpa[i]),
            entrance_score=float(s.entrance_score[i]),
            grade10=float(s.grade10[i]),
            grade12=float(s.grade12[i]),
            experience=tuple(float(x) for x in s.experience[i]),
            applications=tuple(int(a) for a in self.applied[i]),
            stage_flags=tuple(tuple(bool(f) for f in row) for row in self.stage_flags[i]),
            q=q,
        )

    def job(self, j: int) -> Job:
        t = self.jobs
        return Job(
            id=int(t.id[j]),
            firm=str(t.firm[j]),
            designation=str(t.designation[j]),
            year=int(t.year[j]),
            sector=SECTORS[int(t.sector[j])],
            wage=float(t.wage[j]),
            amenities=tuple(float(a) for a in t.amenities[j]),
            client_facing=bool(t.client_facing[j]),
            interview_day=int(t.day[j]),
            hiring_cap=float(t.cap[j]),
        )

    def offer_vector(self, i: int) -> OfferVector:
        day = int(self.offer_day[i])
        c = int(self.chosen[i])
        return OfferVector(
            offered=tuple(bool(z) for z in self.offered[i]),
            offer_day=day if day > 0 else None,
            chosen=0 if c < 0 else int(self.jobs.id[c]),
        )

    def observed(self) -> "Market":
        """Copy without the latent oracle record."""
        return replace(self, oracle=None, metadata=dict(self.metadata))

    # -- invariants -----------------------------------------------------------
    def validate(self) -> None:
        n, j = self.n_students, self.n_jobs
        if n == 0:
            raise ValidationError("no students")
        if j == 0:
            raise ValidationError("no jobs")
        for name in ("applied", "offered"):
            if getattr(self, name).shape != (n, j):
                raise ValidationError(f"{name} must have shape ({n}, {j})")
        if self.stage_flags.shape != (n, j, 3):
            raise ValidationError("stage_flags must have shape (students, jobs, 3)")
        if len(set(self.students.id.tolist())) != n:
            raise ValidationError("duplicate student ids")
        if len(set(self.jobs.id.tolist())) != j:
            raise ValidationError("duplicate job ids")
        if np.any(self.jobs.id < 1):
            raise ValidationError("job ids must be >= 1 (0 is the outside option)")
        s = self.students
        for name in ("gpa", "entrance_score", "grade10", "grade12", "experience"):
            if not np.all(np.isfinite(getattr(s, name))):
                raise ValidationError(f"student {name} must be finite")
        if s.experience.shape != (n, self.layout.n_experience):
            raise ValidationError("experience width does not match layout")
        if not np.all(np.isin(s.degree, np.arange(4))):
            raise ValidationError("unknown degree code")
        t = self.jobs
        if not np.all(np.isfinite(t.wage)):
            raise ValidationError("job wages must be finite")
        if np.any(t.cap < 0):
            raise ValidationError("hiring caps must be >= 0")
        if np.any(t.day < 1):
            raise ValidationError("interview days must be >= 1")
        if t.amenities.shape != (j, self.layout.n_amenities):
            raise ValidationError("amenity width does not match layout")
        flags = self.stage_flags
        if np.any(flags[..., 0] & ~self.applied):
            raise ValidationError("screening flag set without an application")
        if np.any(flags[..., 1] & ~flags[..., 0]) or np.any(flags[..., 2] & ~flags[..., 1]):
            raise ValidationError("screening flags must be nested")
        bad = np.argwhere(self.offered & ~self.applied)
        if bad.size:
            i, k = bad[0]
            raise ValidationError(
                f"offer without application: student {s.id[i]}, job {t.id[k]}")
        bad = np.argwhere(self.offered & ~self.interview)
        if bad.size:
            i, k = bad[0]
            raise ValidationError(
                f"offer without a personal interview: student {s.id[i]}, job {t.id[k]}")
        days = np.where(self.offered, t.day[None, :], 0)
        lo = np.where(self.offered, t.day[None, :], np.iinfo(np.int64).max).min(axis=1)
        multi = self.offered.any(axis=1) & (lo != days.max(axis=1))
        if np.any(multi):
            i = int(np.argmax(multi))
            raise ValidationError(f"student {s.id[i]} holds offers from two interview days")
        c = self.chosen
        if c.shape != (n,) or np.any(c < -1) or np.any(c >= j):
            raise ValidationError("chosen must be a job index or -1")
        has = c >= 0
        if np.any(~self.offered[np.arange(n)[has], c[has]]):
            i = int(np.arange(n)[has][~self.offered[np.arange(n)[has], c[has]]][0])
            raise ValidationError(f"student {s.id[i]} chose a job that did not offer")
        if not np.all(np.isin(s.year, t.year)):
            raise ValidationError("student year without any job listing")
