"""Maximum simulated likelihood for the placement model.

For student i with q = sigma_q * z_r, the likelihood of the observed offers
and choice is f(Z*|A, q) * Pr(C*|Z*, q).  The offer part only involves the
interview candidacies on days up to the offer day (every day when no offer
came): each contributes pi or 1 - pi.  The q-integral is replaced by the mean
over R standard-normal draws held fixed for the whole optimisation, so the
objective is a smooth deterministic function of theta.

Internally sigma_q is optimised on the log scale.  The objective is computed
in fixed student blocks and the block sums are added in block order, so the
value does not depend on how many threads evaluate the blocks.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log_expit
from scipy.stats import norm, qmc

from .design import employer_design, student_design
from .errors import ConfigurationError, DataError, DomainError
from .hiring import HIRE_ALL, HIRE_NONE
from .market import CovariateLayout, Market, ParameterSet

log = logging.getLogger(__name__)

BLOCK = 256


# --------------------------------------------------------------------------
# Configuration and results
# --------------------------------------------------------------------------


@dataclass
class EstimationConfig:
    R: int = 300
    max_iter: int = 2000
    gtol: float = 1e-6
    fd_step: float = 1e-6
    seed: int = 0
    draws: str = "normal"
    fixed: tuple = ()
    threads: int = 1
    sigma_starts: tuple = (1.0,)

    def validate(self) -> None:
        if self.R < 1:
            raise ConfigurationError("R must be >= 1")
        if self.gtol <= 0 or self.fd_step <= 0:
            raise ConfigurationError("tolerances must be > 0")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if self.draws not in ("normal", "sobol"):
            raise ConfigurationError("draws must be 'normal' or 'sobol'")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")
        if not self.sigma_starts or min(self.sigma_starts) <= 0:
            raise ConfigurationError("sigma_starts must be nonempty and > 0")

    @classmethod
    def from_dict(cls, data: dict) -> "EstimationConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown estimation keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("fixed", "sigma_starts"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


def standard_draws(n: int, R: int, seed: int, kind: str = "normal") -> np.ndarray:
    """Standard-normal simulation draws, shape (n, R)."""
    if kind == "normal":
        return np.random.default_rng(seed).standard_normal((n, R))
    m = int(np.ceil(np.log2(max(R, 2))))
    out = np.empty((n, R))
    for i in range(n):
        u = qmc.Sobol(1, scramble=True, seed=np.random.default_rng([seed, i])).random_base2(m)[:R, 0]
        out[i] = norm.ppf(u)
    return out


@dataclass
class EstimationResult:
    theta_hat: ParameterSet
    log_likelihood: float
    names: list
    estimate: np.ndarray
    standard_errors: np.ndarray
    covariance: np.ndarray
    free: np.ndarray
    unidentified: dict
    converged: bool
    gradient_norm: float
    iterations: int
    message: str
    contributions: np.ndarray
    history: list = field(default_factory=list)

    def se(self, name: str) -> float:
        return float(self.standard_errors[self.names.index(name)])

    def value(self, name: str) -> float:
        return float(self.estimate[self.names.index(name)])

    def confidence_interval(self, name: str, z: float = 1.959963984540054):
        v, s = self.value(name), self.se(name)
        return v - z * s, v + z * s

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat.to_dict(),
            "log_likelihood": self.log_likelihood,
            "parameters": [
                {"name": n, "estimate": float(e),
                 "std_error": None if not np.isfinite(s) else float(s),
                 "free": bool(f)}
                for n, e, s, f in zip(self.names, self.estimate, self.standard_errors, self.free)
            ],
            "unidentified": self.unidentified,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
            "message": self.message,
        }


# --------------------------------------------------------------------------
# Parameter vector
# --------------------------------------------------------------------------


class ParamSpace:
    """Flat vector view of a ParameterSet for one market.

    Order: beta, psi, tau, gamma, alpha, eta, phi, delta, log sigma_q,
    one cutoff per position.
    """

    def __init__(self, layout: CovariateLayout, positions):
        self.layout = layout
        self.positions = list(positions)
        names = [f"beta.{n}" for n in layout.beta_names]
        names += [f"psi.{n}" for n in layout.amenity_names]
        names += ["tau"]
        names += [f"gamma.{n}" for n in layout.amenity_names]
        names += [f"alpha.{n}" for n in layout.alpha_names]
        names += ["eta", "phi", "delta", "sigma_q"]
        names += [f"cutoff.{p}" for p in self.positions]
        self.names = names
        kb, m, ka = layout.n_beta, layout.n_amenities, layout.n_alpha
        o = 0
        self.beta = slice(o, o + kb); o += kb
        self.psi = slice(o, o + m); o += m
        self.tau = o; o += 1
        self.gamma = slice(o, o + m); o += m
        self.alpha = slice(o, o + ka); o += ka
        self.eta, self.phi, self.delta, self.log_sigma = o, o + 1, o + 2, o + 3
        o += 4
        self.cutoffs = slice(o, o + len(self.positions))
        self.size = o + len(self.positions)

    def block_indices(self, block: str) -> list[int]:
        """Indices for a block name ('alpha', 'cutoffs', ...) or a single parameter name."""
        if block in ("beta", "psi", "gamma", "alpha", "cutoffs"):
            return list(range(self.size))[getattr(self, block)]
        if block in ("tau", "eta", "phi", "delta"):
            return [getattr(self, block)]
        if block in ("sigma_q", "log_sigma"):
            return [self.log_sigma]
        if block in self.names:
            return [self.names.index(block)]
        raise ConfigurationError(f"unknown parameter or block {block!r}")

    def to_vector(self, p: ParameterSet) -> np.ndarray:
        p.validate(self.layout)
        x = np.empty(self.size)
        x[self.beta], x[self.psi], x[self.tau] = p.beta, p.psi, p.tau
        x[self.gamma], x[self.alpha] = p.gamma, p.alpha
        x[self.eta], x[self.phi], x[self.delta] = p.eta, p.phi, p.delta
        with np.errstate(divide="ignore"):
            x[self.log_sigma] = np.log(p.sigma_q)
        x[self.cutoffs] = [p.cutoffs.get(k, 0.0) for k in self.positions]
        return x

    def from_vector(self, x) -> ParameterSet:
        x = np.asarray(x, dtype=float)
        return ParameterSet(
            beta=x[self.beta], psi=x[self.psi], tau=x[self.tau], gamma=x[self.gamma],
            alpha=x[self.alpha], eta=x[self.eta], phi=x[self.phi], delta=x[self.delta],
            sigma_q=float(np.exp(x[self.log_sigma])),
            cutoffs=dict(zip(self.positions, x[self.cutoffs].tolist())),
        )


# --------------------------------------------------------------------------
# Data
# --------------------------------------------------------------------------


@dataclass
class _Block:
    n: int
    # offer candidacies
    ps: np.ndarray
    S: np.ndarray
    d: np.ndarray
    w: np.ndarray
    pos: np.ndarray
    z: np.ndarray
    p_starts: np.ndarray
    p_owner: np.ndarray
    # choice options
    cs: np.ndarray
    X: np.ndarray
    NP: np.ndarray
    wc: np.ndarray
    chosen: np.ndarray
    c_starts: np.ndarray
    c_owner: np.ndarray


class EstimationData:
    """Likelihood-relevant records of an observed market, split in student blocks."""

    def __init__(self, market: Market, block: int = BLOCK):
        # a choice outside O(Z) has zero likelihood for every parameter value
        rows = np.flatnonzero((market.chosen >= 0) & (market.chosen < market.n_jobs))
        bad = rows[~market.offered[rows, market.chosen[rows]]]
        if bad.size:
            raise DataError(f"student {market.students.id[bad[0]]} chose a job that did not offer: "
                            "zero likelihood")
        market.validate()
        self.market = market
        self.n = market.n_students
        self.layout = market.layout
        self.positions = market.positions
        interview = market.interview
        offer_day = market.offer_day
        day = market.jobs.day
        relevant = interview & ((offer_day[:, None] == 0) | (day[None, :] <= offer_day[:, None]))
        self.relevant = relevant
        S_all = employer_design(market.students, market.jobs)
        X_all = student_design(market.students, market.jobs)
        pos_idx = market.job_position_index
        chosen = market.chosen
        self.blocks = []
        for start in range(0, self.n, block):
            stop = min(start + block, self.n)
            ii, jj = np.nonzero(relevant[start:stop])
            ci, cj = np.nonzero(market.offered[start:stop])
            gi = ii + start
            gci = ci + start
            self.blocks.append(_Block(
                n=stop - start,
                ps=ii, S=S_all[gi, jj], d=market.students.disadvantaged[gi].astype(float),
                w=market.jobs.wage[jj], pos=pos_idx[jj], z=market.offered[gi, jj],
                p_starts=_starts(ii), p_owner=np.unique(ii),
                cs=ci, X=X_all[gci, cj], NP=market.jobs.amenities[cj], wc=market.jobs.wage[cj],
                chosen=(chosen[gci] == cj), c_starts=_starts(ci), c_owner=np.unique(ci),
            ))

    def column_variation(self):
        S = np.concatenate([b.S for b in self.blocks]) if self.blocks else np.zeros((0, self.layout.n_alpha))
        X = np.concatenate([b.X for b in self.blocks])
        NP = np.concatenate([b.NP for b in self.blocks])
        return S, X, NP


def _starts(owner: np.ndarray) -> np.ndarray:
    if owner.size == 0:
        return np.zeros(0, dtype=int)
    return np.flatnonzero(np.r_[True, owner[1:] != owner[:-1]])


# --------------------------------------------------------------------------
# Objective
# --------------------------------------------------------------------------


def _dot(A, b):
    # elementwise product and pairwise sum: no BLAS, bit-stable
    return (A * b).sum(axis=1) if A.shape[1] else np.zeros(A.shape[0])


def _block_eval(b: _Block, space: ParamSpace, x: np.ndarray, z: np.ndarray,
                sigma_zero: bool, want_scores: bool):
    R = z.shape[1]
    sigma = 0.0 if sigma_zero else float(np.exp(x[space.log_sigma]))
    q = sigma * z
    alpha, beta = x[space.alpha], x[space.beta]
    psi, gamma = x[space.psi], x[space.gamma]
    tau, eta, phi, delta = x[space.tau], x[space.eta], x[space.phi], x[space.delta]
    kpos = x[space.cutoffs]

    logL = np.zeros((b.n, R))
    if b.ps.size:
        lin = _dot(b.S, alpha) + eta * b.d - phi * b.w - kpos[b.pos]
        Lp = lin[:, None] + delta * q[b.ps]
        sgn = np.where(b.z, 1.0, -1.0)[:, None]
        ll = log_expit(sgn * Lp)
        logL[b.p_owner] += np.add.reduceat(ll, b.p_starts, axis=0)
    if b.cs.size:
        uc = _dot(b.X, beta) + _dot(b.NP, psi) + tau * b.wc
        h = 1.0 + _dot(b.NP, gamma)
        U = uc[:, None] + q[b.cs] * h[:, None]
        m = np.maximum(np.maximum.reduceat(U, b.c_starts, axis=0), 0.0)
        mc = np.zeros((b.n, R))
        mc[b.c_owner] = m
        sums = np.add.reduceat(np.exp(U - mc[b.cs]), b.c_starts, axis=0)
        lse = m + np.log(np.exp(-m) + sums)
        chosen_u = np.add.reduceat(np.where(b.chosen[:, None], U, 0.0), b.c_starts, axis=0)
        logL[b.c_owner] += chosen_u - lse

    if not np.all(np.isfinite(logL).any(axis=1)):
        raise DataError("observed outcome has zero likelihood under the parameters")
    top = logL.max(axis=1, keepdims=True)
    ex = np.exp(logL - top)
    tot = ex.sum(axis=1)
    li = top[:, 0] + np.log(tot) - np.log(R)
    if not want_scores:
        return li, None
    wgt = ex / tot[:, None]

    K = space.size
    G = np.zeros((b.n, K))
    if b.ps.size:
        glin = np.where(b.z[:, None], expit(-Lp), -expit(Lp))
        A = wgt[b.ps] * glin
        gbar = A.sum(axis=1)
        Aq = (A * q[b.ps]).sum(axis=1)
        D = np.zeros((b.ps.size, K))
        D[:, space.alpha] = gbar[:, None] * b.S
        D[:, space.eta] = gbar * b.d
        D[:, space.phi] = -gbar * b.w
        D[:, space.delta] = Aq
        D[:, space.log_sigma] = delta * Aq
        cut0 = space.cutoffs.start
        D[np.arange(b.ps.size), cut0 + b.pos] = -gbar
        G[b.p_owner] += np.add.reduceat(D, b.p_starts, axis=0)
    if b.cs.size:
        P = np.exp(U - lse[np.searchsorted(b.c_owner, b.cs)])
        gu = b.chosen[:, None] - P
        B = wgt[b.cs] * gu
        gbar = B.sum(axis=1)
        hz = (B * q[b.cs]).sum(axis=1)
        D = np.zeros((b.cs.size, K))
        D[:, space.beta] = gbar[:, None] * b.X
        D[:, space.psi] = gbar[:, None] * b.NP
        D[:, space.tau] = gbar * b.wc
        D[:, space.gamma] = hz[:, None] * b.NP
        D[:, space.log_sigma] = h * hz
        G[b.c_owner] += np.add.reduceat(D, b.c_starts, axis=0)
    if sigma_zero:
        G[:, space.log_sigma] = 0.0
    return li, G


class MSLObjective:
    """Mean simulated log-likelihood with analytic per-student scores."""

    def __init__(self, data: EstimationData, z: np.ndarray, sigma_zero: bool = False,
                 threads: int = 1):
        if z.shape[0] != data.n:
            raise ConfigurationError("draw matrix must have one row per student")
        self.data = data
        self.space = ParamSpace(data.layout, data.positions)
        self.z = z
        self.sigma_zero = sigma_zero
        self.threads = threads
        self._zb = []
        o = 0
        for b in data.blocks:
            self._zb.append(z[o:o + b.n])
            o += b.n

    def _run(self, x, want_scores):
        jobs = list(zip(self.data.blocks, self._zb))

        def one(item):
            blk, zb = item
            return _block_eval(blk, self.space, x, zb, self.sigma_zero, want_scores)

        if self.threads > 1:
            with ThreadPoolExecutor(self.threads) as ex:
                parts = list(ex.map(one, jobs))
        else:
            parts = [one(j) for j in jobs]
        li = np.concatenate([p[0] for p in parts])
        G = np.concatenate([p[1] for p in parts]) if want_scores else None
        return li, G

    def contributions(self, x) -> np.ndarray:
        return self._run(np.asarray(x, dtype=float), False)[0]

    def value(self, x) -> float:
        li = self.contributions(x)
        return _ordered_sum(li) / self.data.n

    def scores(self, x) -> np.ndarray:
        return self._run(np.asarray(x, dtype=float), True)[1]

    def value_and_grad(self, x):
        li, G = self._run(np.asarray(x, dtype=float), True)
        return _ordered_sum(li) / self.data.n, _ordered_sum(G) / self.data.n


def _ordered_sum(a: np.ndarray):
    """Sum over the first axis block by block in a fixed order."""
    total = np.zeros(a.shape[1:])
    for start in range(0, a.shape[0], BLOCK):
        total = total + a[start:start + BLOCK].sum(axis=0)
    return total if a.ndim > 1 else float(total)


def student_likelihood(market: Market, i: int, params: ParameterSet, z) -> float:
    """Simulated L_i: mean over the draws ``z`` (standard normal) of f(Z*|A,q) Pr(C*|Z*,q)."""
    sub = market_subset(market, [i])
    data = EstimationData(sub)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    obj = MSLObjective(data, z, sigma_zero=params.sigma_q == 0)
    x = obj.space.to_vector(params)
    if params.sigma_q == 0:
        x[obj.space.log_sigma] = 0.0
    try:
        return float(np.exp(obj.contributions(x)[0]))
    except DataError:
        raise DataError(f"student {market.students.id[i]}: observed outcome has zero likelihood") from None


def market_subset(market: Market, rows) -> Market:
    rows = np.asarray(rows, dtype=int)
    return Market(market.students.subset(rows), market.jobs, market.applied[rows],
                  market.stage_flags[rows], market.offered[rows], market.chosen[rows],
                  market.layout, None, dict(market.metadata))


# --------------------------------------------------------------------------
# Identification checks
# --------------------------------------------------------------------------


def unidentified_parameters(data: EstimationData, space: ParamSpace, sigma_fixed_zero: bool):
    """Parameters the data cannot move, with the value to pin them at and why."""
    out = {}
    S, X, NP = data.column_variation()
    for k, name in enumerate(data.layout.alpha_names):
        if S.shape[0] == 0 or np.ptp(S[:, k]) == 0:
            out[f"alpha.{name}"] = (0.0, "covariate has no variation among interview candidacies")
    if X.shape[0] == 0:
        for idx in space.block_indices("beta") + space.block_indices("psi") + \
                space.block_indices("gamma") + [space.tau]:
            out[space.names[idx]] = (None, "no student holds an offer")
    else:
        for k, name in enumerate(data.layout.beta_names):
            if not X[:, k].any():
                out[f"beta.{name}"] = (0.0, "covariate is zero for every offered job")
        for k, name in enumerate(data.layout.amenity_names):
            if not NP[:, k].any():
                out[f"psi.{name}"] = (0.0, "amenity absent from every offered job")
                out[f"gamma.{name}"] = (0.0, "amenity absent from every offered job")
    d = data.market.students.disadvantaged
    if not d.any() or d.all():
        out["eta"] = (0.0, "market has students of one caste only")
    if sigma_fixed_zero:
        out["delta"] = (None, "sigma_q fixed at 0 removes q")
        for name in data.layout.amenity_names:
            out[f"gamma.{name}"] = (None, "sigma_q fixed at 0 removes q")
    pos_idx = data.market.job_position_index
    rel = data.relevant
    off = data.market.offered
    for p, key in enumerate(data.positions):
        cols = pos_idx == p
        n_rel = rel[:, cols].sum()
        n_off = (off[:, cols] & rel[:, cols]).sum()
        if n_rel == 0:
            out[f"cutoff.{key}"] = (None, "position has no interview candidates")
        elif n_off == 0:
            out[f"cutoff.{key}"] = (HIRE_NONE, "position made no offers (hire-none boundary)")
        elif n_off == n_rel:
            out[f"cutoff.{key}"] = (HIRE_ALL, "position made offers to every candidate (hire-all boundary)")
    return out


# --------------------------------------------------------------------------
# Estimation
# --------------------------------------------------------------------------


def default_start(market: Market) -> ParameterSet:
    """Neutral starting values; cutoffs from each position's offer rate."""
    layout = market.layout
    data_rel = market.interview
    pos_idx = market.job_position_index
    cut = {}
    for p, key in enumerate(market.positions):
        cols = pos_idx == p
        n = data_rel[:, cols].sum()
        k = (market.offered[:, cols]).sum()
        rate = (k + 0.5) / (n + 1.0)
        cut[key] = float(-np.log(rate / (1 - rate)))
    return ParameterSet.zeros(layout, tau=0.1, phi=0.0, sigma_q=0.5, cutoffs=cut)


def msl_estimate(market: Market, config: EstimationConfig | None = None,
                 start: ParameterSet | None = None) -> EstimationResult:
    """Maximise the mean simulated log-likelihood by BFGS with analytic gradients.

    Without an explicit ``start`` the search is staged: the model with
    sigma_q = 0 (plain logit on both sides) is fitted first, and the full
    model is then started from those estimates at each value in
    ``config.sigma_starts``, keeping the highest likelihood.  A cold start
    can drift to log sigma_q -> -inf, where the objective is flat and BFGS
    stops at a spurious stationary point.
    """
    config = config or EstimationConfig()
    config.validate()
    if market.n_students == 0:
        raise DomainError("market has no students")
    if start is not None:
        return _fit(market, config, start)
    cold = default_start(market)
    sigma_block = ParamSpace(market.layout, market.positions).log_sigma
    held = set()
    for block in config.fixed:
        held.update(ParamSpace(market.layout, market.positions).block_indices(block))
    if sigma_block in held:
        return _fit(market, config, cold)
    restricted = _fit(market, replace(config, fixed=tuple(config.fixed) + ("sigma_q",)),
                      cold.replace(sigma_q=0.0))
    warm = restricted.theta_hat
    best = None
    for s in config.sigma_starts:
        layout = market.layout
        trial = _fit(market, config, warm.replace(sigma_q=float(s), delta=0.0,
                                                  gamma=np.zeros(layout.n_amenities)))
        log.info("sigma start %.3g: log-likelihood %.6f", s, trial.log_likelihood)
        if best is None or trial.log_likelihood > best.log_likelihood:
            best = trial
    return best


def _fit(market: Market, config: EstimationConfig, start: ParameterSet) -> EstimationResult:
    data = EstimationData(market)
    space = ParamSpace(market.layout, market.positions)
    fixed = set()
    for block in config.fixed:
        fixed.update(space.block_indices(block))
    sigma_fixed_zero = space.log_sigma in fixed and start.sigma_q == 0
    x0 = space.to_vector(start)
    if sigma_fixed_zero:
        x0[space.log_sigma] = 0.0

    unident = unidentified_parameters(data, space, sigma_fixed_zero)
    for name, (value, why) in unident.items():
        k = space.names.index(name)
        if value is not None:
            x0[k] = value
        fixed.add(k)
        log.info("holding %s fixed: %s", name, why)
    free = np.ones(space.size, dtype=bool)
    free[sorted(fixed)] = False

    z = standard_draws(data.n, config.R, config.seed, config.draws)
    obj = MSLObjective(data, z, sigma_zero=sigma_fixed_zero, threads=config.threads)

    def full(xf):
        x = x0.copy()
        x[free] = xf
        return x

    history = []

    def fun(xf):
        v, g = obj.value_and_grad(full(xf))
        return -v, -g[free]

    def callback(xf):
        history.append(obj.value(full(xf)))

    G0 = obj.scores(x0)[:, free]
    opg = G0.T @ G0 / data.n
    h0 = _inverse_metric(opg)
    history.append(obj.value(x0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(fun, x0[free], jac=True, method="BFGS", callback=callback,
                       options={"gtol": config.gtol, "maxiter": config.max_iter,
                                "hess_inv0": h0, "c1": 1e-4, "c2": 0.9})
    x_hat = full(res.x)
    value, grad = obj.value_and_grad(x_hat)
    gnorm = float(np.max(np.abs(grad[free]))) if free.any() else 0.0
    converged = gnorm <= config.gtol
    if not converged:
        log.warning("MSL did not reach gradient tolerance: |g| = %.3g (%s)", gnorm, res.message)

    theta = space.from_vector(x_hat)
    if sigma_fixed_zero:
        theta.sigma_q = 0.0
    result = EstimationResult(
        theta_hat=theta, log_likelihood=value * data.n, names=list(space.names),
        estimate=_natural(space, x_hat, sigma_fixed_zero), standard_errors=np.full(space.size, np.nan),
        covariance=np.full((space.size, space.size), np.nan), free=free,
        unidentified={k: v[1] for k, v in unident.items()}, converged=converged,
        gradient_norm=gnorm, iterations=int(res.nit), message=str(res.message),
        contributions=obj.contributions(x_hat), history=history,
    )
    result._objective = obj
    result._x = x_hat
    cov, se = _opg_errors(obj, x_hat, free, space, sigma_fixed_zero)
    result.covariance, result.standard_errors = cov, se
    return result


def _inverse_metric(opg: np.ndarray) -> np.ndarray:
    """Positive-definite inverse of the starting outer-product matrix."""
    if opg.size == 0:
        return opg
    vals, vecs = np.linalg.eigh(0.5 * (opg + opg.T))
    floor = max(vals.max(), 1e-12) * 1e-8
    inv = (vecs / np.maximum(vals, floor)) @ vecs.T
    return 0.5 * (inv + inv.T)


def _natural(space, x, sigma_zero):
    out = x.copy()
    out[space.log_sigma] = 0.0 if sigma_zero else np.exp(x[space.log_sigma])
    return out


def _opg_errors(obj: MSLObjective, x, free, space, sigma_zero, cond_limit: float = 1e12):
    G = obj.scores(x)[:, free]
    opg = G.T @ G
    K = space.size
    cov = np.full((K, K), np.nan)
    if free.any():
        c = np.linalg.cond(opg)
        if not np.isfinite(c) or c > cond_limit:
            warnings.warn(f"outer-product matrix is ill-conditioned (cond={c:.3g}); using pseudo-inverse",
                          RuntimeWarning, stacklevel=3)
            V = np.linalg.pinv(opg)
        else:
            V = np.linalg.inv(opg)
        # map log sigma to sigma by the delta method
        jac = np.ones(free.sum())
        fidx = np.flatnonzero(free)
        if space.log_sigma in fidx and not sigma_zero:
            jac[np.searchsorted(fidx, space.log_sigma)] = np.exp(x[space.log_sigma])
        V = V * np.outer(jac, jac)
        cov[np.ix_(fidx, fidx)] = V
    se = np.sqrt(np.clip(np.diag(cov), 0, None))
    return cov, se


def standard_errors(result: EstimationResult, market: Market | None = None,
                    config: EstimationConfig | None = None) -> dict:
    """Information-identity standard errors: sqrt diag of (sum_i g_i g_i')^-1.

    Recomputed from the stored objective, or rebuilt from ``market`` and
    ``config`` when the result came from elsewhere.
    """
    obj = getattr(result, "_objective", None)
    if obj is None:
        if market is None or config is None:
            raise ConfigurationError("need the market and config to rebuild the objective")
        data = EstimationData(market)
        sigma_zero = result.theta_hat.sigma_q == 0
        obj = MSLObjective(data, standard_draws(data.n, config.R, config.seed, config.draws),
                           sigma_zero=sigma_zero, threads=config.threads)
        x = obj.space.to_vector(result.theta_hat)
        if sigma_zero:
            x[obj.space.log_sigma] = 0.0
    else:
        x = result._x
    _, se = _opg_errors(obj, x, result.free, obj.space, obj.sigma_zero)
    return {n: float(s) for n, s in zip(result.names, se)}


def finite_difference_gradient(f, x, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of scalar ``f`` at ``x``."""
    if step <= 0:
        raise DomainError("step must be > 0")
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = step
        g[k] = (f(x + e) - f(x - e)) / (2 * step)
    return g
