"""Willingness to pay and counterfactual hiring policies.

Every policy is evaluated in expected terms: match terms and preference
shocks are integrated analytically (see ``equilibrium``) and q by averaging
over a fixed matrix of draws.  Two demand regimes bound the displacement:
with perfectly elastic demand listings keep their cutoffs, with perfectly
inelastic demand every listing re-solves its cutoff to keep its baseline
expected hires.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .calibration import AVERAGE_SALARY
from .design import employer_design, job_cutoffs
from .equilibrium import (MarketArrays, Outcomes, expected_outcomes, reach_probability,
                          same_day_acceptance, solve_equilibrium)
from .errors import ConfigurationError, DomainError
from .generate import simulate_offers
from .hiring import solve_cutoff
from .market import DEGREES, SECTORS, Market, ParameterSet

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# Willingness to pay
# --------------------------------------------------------------------------


def wtp_student(coefficient: float, tau: float, avg_salary: float = AVERAGE_SALARY):
    """Salary change equivalent to a student-utility term: (percent, dollars)."""
    if not tau > 0:
        raise DomainError("tau must be > 0")
    share = np.expm1(coefficient / tau)
    return 100.0 * share, share * avg_salary


def wtp_employer(coefficient: float, phi: float, avg_salary: float = AVERAGE_SALARY):
    """Wage subsidy that offsets an employer-utility term: (percent, dollars).

    A term of size |c| is worth the same to the job as cutting the log wage
    by |c| / phi, i.e. a subsidy of 1 - exp(-|c| / phi) of the salary.
    """
    if not phi > 0:
        raise DomainError("phi must be > 0")
    share = -np.expm1(-abs(coefficient) / phi)
    return 100.0 * share, share * avg_salary


def wtp_student_se(coefficient, tau, se_coefficient, se_tau, avg_salary: float = AVERAGE_SALARY):
    """Delta-method SE of ``wtp_student`` treating the two estimates as independent."""
    if not tau > 0:
        raise DomainError("tau must be > 0")
    e = np.exp(coefficient / tau)
    d_c = e / tau
    d_t = -e * coefficient / tau**2
    share = np.hypot(d_c * se_coefficient, d_t * se_tau)
    return 100.0 * share, share * avg_salary


def wtp_employer_se(coefficient, phi, se_coefficient, se_phi, avg_salary: float = AVERAGE_SALARY):
    """Delta-method SE of ``wtp_employer`` treating the two estimates as independent."""
    if not phi > 0:
        raise DomainError("phi must be > 0")
    a = abs(coefficient)
    e = np.exp(-a / phi)
    d_c = e / phi
    d_p = -e * a / phi**2
    share = np.hypot(d_c * se_coefficient, d_p * se_phi)
    return 100.0 * share, share * avg_salary


def wtp_tables(params: ParameterSet, layout, se: dict | None = None,
               avg_salary: float = AVERAGE_SALARY):
    """Rows (side, name, coefficient, percent, dollars, se_percent) for every covariate."""
    se = se or {}
    rows = []
    student = [(f"beta.{n}", c) for n, c in zip(layout.beta_names, params.beta)]
    student += [(f"psi.{n}", c) for n, c in zip(layout.amenity_names, params.psi)]
    for name, c in student:
        pct, usd = wtp_student(float(c), params.tau, avg_salary)
        sp = np.nan
        if name in se and "tau" in se:
            sp = wtp_student_se(float(c), params.tau, se[name], se["tau"], avg_salary)[0]
        rows.append(("student", name, float(c), pct, usd, sp))
    employer = [(f"alpha.{n}", c) for n, c in zip(layout.alpha_names, params.alpha)]
    employer += [("eta", params.eta), ("delta", params.delta)]
    for name, c in employer:
        pct, usd = wtp_employer(float(c), params.phi, avg_salary)
        sp = np.nan
        if name in se and "phi" in se:
            sp = wtp_employer_se(float(c), params.phi, se[name], se["phi"], avg_salary)[0]
        rows.append(("employer", name, float(c), pct, usd, sp))
    return rows


# --------------------------------------------------------------------------
# Policy specification and report
# --------------------------------------------------------------------------


class PolicyKind(str, enum.Enum):
    SUBSIDY = "Subsidy"
    PRECOLLEGE = "PreCollegeIntervention"
    QUOTA = "Quota"


class DemandRegime(str, enum.Enum):
    ELASTIC = "PerfectlyElastic"
    INELASTIC = "PerfectlyInelastic"


@dataclass
class PolicySpec:
    """What to change.  ``subsidy_size`` None means exactly -eta."""

    kind: PolicyKind = PolicyKind.SUBSIDY
    demand_regime: DemandRegime = DemandRegime.ELASTIC
    subsidy_size: float | None = None
    subsidy_units: str = "utility"
    score_shift: np.ndarray | None = None
    quota_ratio: float = 0.5
    external_cost_per_sd: float | None = None
    draws: int = 100
    seed: int = 0

    def __post_init__(self):
        self.kind = PolicyKind(self.kind)
        self.demand_regime = DemandRegime(self.demand_regime)

    def validate(self) -> None:
        if not 0 < self.quota_ratio < 1:
            raise ConfigurationError("quota_ratio must lie in (0, 1)")
        if self.subsidy_size is not None and self.subsidy_size < 0:
            raise ConfigurationError("subsidy_size must be >= 0")
        if self.subsidy_units not in ("utility", "percent"):
            raise ConfigurationError("subsidy_units must be 'utility' or 'percent'")
        if self.external_cost_per_sd is not None and not self.external_cost_per_sd > 0:
            raise ConfigurationError("external_cost_per_sd must be > 0")
        if self.draws < 1:
            raise ConfigurationError("draws must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "PolicySpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown policy keys: {sorted(unknown)}")
        data = dict(data)
        if data.get("score_shift") is not None:
            data["score_shift"] = np.asarray(data["score_shift"], dtype=float)
        try:
            spec = cls(**data)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        spec.validate()
        return spec

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "demand_regime": self.demand_regime.value,
                "subsidy_size": self.subsidy_size, "subsidy_units": self.subsidy_units,
                "score_shift": None if self.score_shift is None else self.score_shift.tolist(),
                "quota_ratio": self.quota_ratio,
                "external_cost_per_sd": self.external_cost_per_sd,
                "draws": self.draws, "seed": self.seed}


@dataclass
class PolicyReport:
    kind: str
    regime: str
    n_advantaged: int
    n_disadvantaged: int
    baseline: dict
    policy: dict
    hires_by_caste_before: list
    hires_by_caste_after: list
    listing_hires_before: list
    listing_hires_after: list
    listing_offers_before: list
    listing_offers_after: list
    cutoffs_before: list
    cutoffs_after: list
    subsidy_percent: float = 0.0
    subsidy_dollars: float = 0.0
    mean_score_shift: float = 0.0
    n_treated: int = 0
    notes: list = field(default_factory=list)

    @property
    def changes(self) -> dict:
        return {k: self.policy[k] - self.baseline[k] for k in self.baseline}

    @property
    def total_hires_before(self) -> float:
        return float(np.sum(self.listing_hires_before))

    @property
    def total_hires_after(self) -> float:
        return float(np.sum(self.listing_hires_after))

    @property
    def total_offers_before(self) -> float:
        return float(np.sum(self.listing_offers_before))

    @property
    def total_offers_after(self) -> float:
        return float(np.sum(self.listing_offers_after))

    def unemployment_change(self) -> dict:
        """Percent change in the number of unemployed, per caste."""
        out = {}
        for k, name, n in ((0, "advantaged", self.n_advantaged),
                           (1, "disadvantaged", self.n_disadvantaged)):
            before = n - self.hires_by_caste_before[k]
            after = n - self.hires_by_caste_after[k]
            out[name] = 100.0 * (after - before) / before if before > 0 else float("nan")
        return out

    def accounting_gap(self) -> float:
        """|sum of caste hires - total hires|, before and after, whichever is larger."""
        return max(abs(sum(self.hires_by_caste_before) - self.total_hires_before),
                   abs(sum(self.hires_by_caste_after) - self.total_hires_after))

    def to_dict(self) -> dict:
        out = {k: v for k, v in vars(self).items()}
        out["changes"] = self.changes
        out["unemployment_change_percent"] = self.unemployment_change()
        out["total_hires"] = [self.total_hires_before, self.total_hires_after]
        out["total_offers"] = [self.total_offers_before, self.total_offers_after]
        return out


# --------------------------------------------------------------------------
# Expected-outcome machinery
# --------------------------------------------------------------------------


def policy_draws(n: int, sigma_q: float, draws: int, seed: int) -> np.ndarray:
    """q matrix (N, R) used to integrate out the unobserved quality."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7013]))
    return sigma_q * rng.standard_normal((n, draws))


def listing_arrays(arrays: MarketArrays) -> MarketArrays:
    """Same market with every listing treated as its own cutoff unit."""
    J = arrays.day.size
    return MarketArrays(arrays.interview, arrays.day, arrays.base_u, arrays.load, arrays.base_v,
                        arrays.delta, arrays.disadvantaged, np.arange(J), list(range(J)))


def _summary(out: Outcomes, wage: np.ndarray) -> dict:
    rates = out.rates()
    take = out.take
    d = out.disadvantaged

    def mean_wage(mask):
        mass = take[mask].sum()
        return float((take[mask] @ wage).sum() / mass) if mass > 0 else float("nan")

    rates["mean_log_wage_advantaged"] = mean_wage(~d)
    rates["mean_log_wage_disadvantaged"] = mean_wage(d)
    rates["earnings_gap"] = rates["mean_log_wage_disadvantaged"] - rates["mean_log_wage_advantaged"]
    return rates


def _report(kind, regime, arrays, wage, before: Outcomes, after: Outcomes, k_before, k_after,
            **extra) -> PolicyReport:
    d = arrays.disadvantaged
    return PolicyReport(
        kind=kind, regime=regime, n_advantaged=int((~d).sum()), n_disadvantaged=int(d.sum()),
        baseline=_summary(before, wage), policy=_summary(after, wage),
        hires_by_caste_before=before.hires_by_caste().sum(axis=1).tolist(),
        hires_by_caste_after=after.hires_by_caste().sum(axis=1).tolist(),
        listing_hires_before=before.hires.tolist(), listing_hires_after=after.hires.tolist(),
        listing_offers_before=before.offer.sum(axis=0).tolist(),
        listing_offers_after=after.offer.sum(axis=0).tolist(),
        cutoffs_before=np.asarray(k_before).tolist(), cutoffs_after=np.asarray(k_after).tolist(),
        **extra)


def _resolve(arrays, targets, q, shift, start, regime):
    if regime is DemandRegime.ELASTIC:
        return np.asarray(start, dtype=float)
    return solve_equilibrium(listing_arrays(arrays), targets, q, shift, start=start)


def _baseline(market: Market, params: ParameterSet, spec: PolicySpec):
    arrays = MarketArrays.build(market, params)
    q = policy_draws(market.n_students, params.sigma_q, spec.draws, spec.seed)
    k0 = job_cutoffs(market.jobs, params)
    return arrays, q, k0, expected_outcomes(arrays, k0, q)


def subsidy_utility(params: ParameterSet, spec: PolicySpec) -> float:
    """Subsidy in employer-utility units."""
    if spec.subsidy_size is None:
        return -params.eta
    if spec.subsidy_units == "percent":
        share = spec.subsidy_size / 100.0
        if share >= 1:
            raise DomainError("a subsidy of 100% or more of the salary is not defined")
        return -params.phi * np.log1p(-share)
    return float(spec.subsidy_size)


def apply_subsidy(market: Market, params: ParameterSet, policy: PolicySpec) -> PolicyReport:
    """Add a hiring subsidy to the employer value of every disadvantaged applicant."""
    policy.validate()
    s = subsidy_utility(params, policy)
    arrays, q, k0, before = _baseline(market, params, policy)
    shift = np.where(arrays.disadvantaged, s, 0.0)[:, None]
    k1 = _resolve(arrays, before.hires, q, shift, k0, policy.demand_regime)
    after = expected_outcomes(arrays, k1, q, shift)
    pct, usd = wtp_employer(s, params.phi) if params.phi > 0 else (np.nan, np.nan)
    return _report(PolicyKind.SUBSIDY.value, policy.demand_regime.value, arrays, market.jobs.wage,
                   before, after, k0, k1, subsidy_percent=float(pct), subsidy_dollars=float(usd),
                   n_treated=int(arrays.disadvantaged.sum()))


# --------------------------------------------------------------------------
# Pre-college intervention
# --------------------------------------------------------------------------


def equalize_scores(scores, disadvantaged, degree) -> tuple[np.ndarray, list]:
    """Map disadvantaged scores onto the advantaged distribution within each degree.

    The r-th smallest of n disadvantaged scores goes to the advantaged
    empirical quantile at (r + 0.5) / n, interpolating linearly between
    order statistics.  Degrees with only one caste are left alone.
    """
    scores = np.asarray(scores, dtype=float)
    disadvantaged = np.asarray(disadvantaged, dtype=bool)
    degree = np.asarray(degree)
    out = scores.copy()
    skipped = []
    for g in np.unique(degree):
        adv = (degree == g) & ~disadvantaged
        dis = (degree == g) & disadvantaged
        if not adv.any() or not dis.any():
            skipped.append(g)
            continue
        idx = np.flatnonzero(dis)
        order = idx[np.argsort(scores[idx], kind="stable")]
        p = (np.arange(order.size) + 0.5) / order.size
        out[order] = np.quantile(scores[adv], p)
    return out, skipped


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def entrance_utility(market: Market, params: ParameterSet, scores) -> np.ndarray:
    """Employer-utility contribution of entrance scores, per student."""
    st = market.students.with_entrance(scores)
    S = employer_design(st, market.jobs)
    names = market.layout.alpha_names
    cols = [k for k, n in enumerate(names) if n.startswith("entrance_")]
    return S[:, 0, cols] @ params.alpha[cols]


def apply_precollege(market: Market, params: ParameterSet, policy: PolicySpec) -> PolicyReport:
    """Raise disadvantaged entrance scores to the advantaged distribution within degree."""
    policy.validate()
    st = market.students
    if policy.score_shift is not None:
        new = st.entrance_score + np.where(st.disadvantaged, policy.score_shift, 0.0)
        skipped = []
    else:
        new, skipped = equalize_scores(st.entrance_score, st.disadvantaged, st.degree)
    notes = []
    for g in skipped:
        log.warning("degree %s has one caste only; scores left unchanged", DEGREES[g].value)
        notes.append(f"degree {DEGREES[g].value} skipped: one caste only")
    arrays, q, k0, before = _baseline(market, params, policy)
    shifted = MarketArrays.build(market, params, students=st.with_entrance(new))
    k1 = _resolve(shifted, before.hires, q, None, k0, policy.demand_regime)
    after = expected_outcomes(shifted, k1, q)

    d = st.disadvantaged
    gain = entrance_utility(market, params, new) - entrance_utility(market, params, st.entrance_score)
    g = float(gain[d].mean()) if d.any() else 0.0
    if params.phi > 0:
        pct, usd = wtp_employer(g, params.phi)
        pct, usd = np.sign(g) * pct, np.sign(g) * usd
    else:
        pct = usd = np.nan
    return _report(PolicyKind.PRECOLLEGE.value, policy.demand_regime.value, arrays,
                   market.jobs.wage, before, after, k0, k1, subsidy_percent=float(pct),
                   subsidy_dollars=float(usd),
                   mean_score_shift=float((new - st.entrance_score)[d].mean()) if d.any() else 0.0,
                   n_treated=int(d.sum()), notes=notes)


# --------------------------------------------------------------------------
# Quotas
# --------------------------------------------------------------------------


def quota_pairs(values_advantaged, values_disadvantaged, threshold: float):
    """Deterministic quota hiring for one listing with known employer values.

    Applicants of each caste are taken in decreasing value, one of each at
    a time, while the pair's average value is at least ``threshold``.
    Returns (pairs, cutoff_advantaged, cutoff_disadvantaged); each cutoff
    lies between the last hired and the next applicant of its caste.
    """
    va = np.sort(np.asarray(values_advantaged, dtype=float))[::-1]
    vd = np.sort(np.asarray(values_disadvantaged, dtype=float))[::-1]
    if va.size == 0 or vd.size == 0:
        raise DomainError("quota needs applicants from both castes")
    n = 0
    while n < min(va.size, vd.size) and 0.5 * (va[n] + vd[n]) >= threshold:
        n += 1

    def cut(v):
        if n == 0:
            return float(v[0] + 1.0)
        if n < v.size:
            return float(0.5 * (v[n - 1] + v[n]))
        return float(v[n - 1] - 1.0)

    return n, cut(va), cut(vd)


def _quota_listing(w, vp, disadv, k_star, cap, rho, tol=1e-9):
    """Two cutoffs for one listing given acceptance weights ``w`` (R, N).

    The cutoffs move apart from the baseline cutoff with the weighted mean
    (1 - rho) k_a + rho k_d held at k_star until expected hires satisfy
    (1 - rho) H_d = rho H_a.  If that overshoots the listing's baseline
    hires, both castes are instead solved to their share of ``cap``.
    """
    R = w.shape[0]
    nz = w != 0
    adv = nz & ~disadv[None, :]
    dis = nz & disadv[None, :]
    wa, va = w[adv], vp[adv]
    wd, vd = w[dis], vp[dis]

    def Ha(k):
        return float(np.sum(wa * expit(va - k)) / R)

    def Hd(k):
        return float(np.sum(wd * expit(vd - k)) / R)

    def gap(t):
        return (1 - rho) * Hd(k_star - (1 - rho) * t) - rho * Ha(k_star + rho * t)

    lo, hi = -60.0, 60.0
    if gap(lo) > 0 or gap(hi) < 0:
        t = lo if gap(lo) > 0 else hi
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if gap(mid) > 0:
                hi = mid
            else:
                lo = mid
            if hi - lo < tol:
                break
        t = 0.5 * (lo + hi)
    ka, kd = k_star + rho * t, k_star - (1 - rho) * t
    if Ha(ka) + Hd(kd) > cap + 1e-9:
        ka = solve_cutoff(Ha, (1 - rho) * cap, tol=1e-12)
        kd = solve_cutoff(Hd, rho * cap, tol=1e-12)
    return ka, kd


def solve_quota(arrays: MarketArrays, k_star: np.ndarray, caps: np.ndarray, q: np.ndarray,
                rho: float = 0.5, tol: float = 1e-10, max_sweeps: int = 200):
    """Caste-specific cutoffs (2, J) for every listing, one interview day at a time.

    Listings whose interview pool lacks one caste keep the baseline cutoff
    for both castes.
    """
    J = arrays.day.size
    ka = np.asarray(k_star, dtype=float).copy()
    kd = ka.copy()
    v = arrays.v(q)
    u = arrays.u(q)
    inter = arrays.interview[None]
    disadv = arrays.disadvantaged
    exempt = []
    for j in range(J):
        pool = arrays.interview[:, j]
        if pool.any() and (not (pool & disadv).any() or not (pool & ~disadv).any()):
            exempt.append(j)
            log.info("listing %d exempt from the quota: one-caste pool", j)

    def cutoff_matrix():
        return np.where(disadv[:, None], kd[None, :], ka[None, :])

    for d in arrays.days:
        dcols = np.flatnonzero(arrays.day == d)
        for _ in range(max_sweeps):
            pi = np.where(inter, expit(v - cutoff_matrix()[None]), 0.0)
            reach = reach_probability(pi, arrays.day)[..., dcols]
            moved = 0.0
            for local, j in enumerate(dcols):
                if j in exempt or not arrays.interview[:, j].any():
                    continue
                acc = same_day_acceptance(pi, u, arrays.day, only=j)
                w = np.where(inter[..., j], reach[..., local] * acc[..., j], 0.0)
                new_a, new_d = _quota_listing(w, v[..., j], disadv, k_star[j], caps[j], rho)
                moved = max(moved, abs(new_a - ka[j]), abs(new_d - kd[j]))
                ka[j], kd[j] = new_a, new_d
                pi[..., j] = np.where(inter[..., j],
                                      expit(v[..., j] - np.where(disadv, kd[j], ka[j])[None]), 0.0)
            if moved <= tol:
                break
        else:
            log.warning("quota cutoffs on day %s did not settle", d)
    return np.stack([ka, kd]), exempt


def apply_quota(market: Market, params: ParameterSet, policy: PolicySpec) -> PolicyReport:
    """Equal expected hires per caste (or ``quota_ratio`` disadvantaged) in every listing."""
    policy.validate()
    arrays, q, k0, before = _baseline(market, params, policy)
    K, exempt = solve_quota(arrays, k0, before.hires, q, policy.quota_ratio)
    cut = np.where(arrays.disadvantaged[:, None], K[1][None, :], K[0][None, :])
    after = expected_outcomes(arrays, cut, q)
    notes = [f"listing {market.jobs.id[j]} exempt: one-caste pool" for j in exempt]
    return _report(PolicyKind.QUOTA.value, "quota", arrays, market.jobs.wage, before, after,
                   k0, K, notes=notes)


def apply_policy(market: Market, params: ParameterSet, policy: PolicySpec) -> PolicyReport:
    run = {PolicyKind.SUBSIDY: apply_subsidy, PolicyKind.PRECOLLEGE: apply_precollege,
           PolicyKind.QUOTA: apply_quota}[policy.kind]
    return run(market, params, policy)


# --------------------------------------------------------------------------
# Cost effectiveness and model fit
# --------------------------------------------------------------------------


@dataclass
class CostComparison:
    subsidy_cost: float
    precollege_cost: float
    subsidy_gain: float
    precollege_gain: float
    subsidy_cost_per_hire: float
    precollege_cost_per_hire: float
    ratio: float
    flag: str

    def to_dict(self) -> dict:
        return dict(vars(self))


def cost_effectiveness(subsidy_report: PolicyReport, precollege_report: PolicyReport,
                       external_cost_per_sd: float | None) -> CostComparison:
    """Cost per additional disadvantaged hire of the two policies and their ratio.

    The subsidy is paid on every disadvantaged hire under the policy.  The
    pre-college programme costs ``external_cost_per_sd`` per treated student
    per SD of score gain, scaled linearly, perfectly targeted and without
    fade-out.  ``ratio`` is pre-college cost per hire over subsidy cost per
    hire, so values above 1 mean the subsidy is cheaper.
    """
    if external_cost_per_sd is None:
        raise ConfigurationError("cost comparison needs external_cost_per_sd (cost of 1 SD of test score)")
    if not external_cost_per_sd > 0:
        raise ConfigurationError("external_cost_per_sd must be > 0")
    s_gain = subsidy_report.hires_by_caste_after[1] - subsidy_report.hires_by_caste_before[1]
    p_gain = precollege_report.hires_by_caste_after[1] - precollege_report.hires_by_caste_before[1]
    s_cost = subsidy_report.subsidy_dollars * subsidy_report.hires_by_caste_after[1]
    p_cost = external_cost_per_sd * abs(precollege_report.mean_score_shift) * precollege_report.n_treated
    s_per = s_cost / s_gain if s_gain > 0 else float("inf")
    p_per = p_cost / p_gain if p_gain > 0 else float("inf")
    if np.isinf(p_per) and np.isinf(s_per):
        ratio, flag = float("nan"), "neither policy raises disadvantaged hiring"
    elif np.isinf(p_per):
        ratio, flag = float("inf"), "pre-college intervention has no hiring gain"
    else:
        ratio = p_per / s_per
        flag = "subsidy cheaper" if ratio > 1 else ("equal" if ratio == 1 else "pre-college cheaper")
    return CostComparison(s_cost, p_cost, s_gain, p_gain, s_per, p_per, ratio, flag)


def _moments(market: Market, offered, chosen) -> dict:
    jobs = market.jobs
    out = {}
    n_off = offered.sum()
    for k, sector in enumerate(SECTORS):
        cols = jobs.sector == k
        out[f"offer_share_{sector.value}"] = float(offered[:, cols].sum() / n_off) if n_off else np.nan
    placed = chosen >= 0
    for k, sector in enumerate(SECTORS):
        out[f"choice_share_{sector.value}"] = (float(np.mean(jobs.sector[chosen[placed]] == k))
                                               if placed.any() else np.nan)
    out["unemployment_rate"] = float(1 - placed.mean())
    d = market.students.disadvantaged
    w = np.where(placed, jobs.wage[np.maximum(chosen, 0)], np.nan)
    adv = placed & ~d
    dis = placed & d
    out["earnings_gap"] = (float(np.mean(w[dis]) - np.mean(w[adv]))
                           if adv.any() and dis.any() else np.nan)
    return out


@dataclass
class ModelFit:
    rows: list  # (moment, data, model, model_sd)
    replications: int

    def as_table(self) -> str:
        lines = [f"{'moment':32s} {'Data':>10s} {'Model':>10s}"]
        for name, data, model, _ in self.rows:
            lines.append(f"{name:32s} {data:10.4f} {model:10.4f}")
        return "\n".join(lines)


def compute_moments(market: Market, params: ParameterSet, replications: int = 300,
                    seed: int = 0) -> ModelFit:
    """Data moments next to their average over ``replications`` simulated markets."""
    if replications < 1:
        raise DomainError("replications must be >= 1")
    data = _moments(market, market.offered, market.chosen)
    n, J = market.n_students, market.n_jobs
    sims = []
    for child in np.random.SeedSequence([seed, 4111]).spawn(replications):
        rng = np.random.default_rng(child)
        q = params.sigma_q * rng.standard_normal(n)
        mu = rng.logistic(size=(n, J))
        eps = rng.gumbel(size=(n, J + 1))
        offered, chosen = simulate_offers(market, params, q, mu, eps)
        sims.append(_moments(market, offered, chosen))
    rows = []
    for name, value in data.items():
        vals = np.array([s[name] for s in sims], dtype=float)
        rows.append((name, value, float(np.nanmean(vals)),
                     float(np.nanstd(vals)) if replications > 1 else 0.0))
    return ModelFit(rows, replications)
