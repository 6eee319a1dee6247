"""Command line entry point: ``placement <command>``.

Exit codes: 0 success, 2 invalid input or configuration, 3 the estimator
did not converge.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from .errors import PlacementError

EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3


class Context:
    def __init__(self, seed, config, out, threads):
        self.seed = seed
        self.config_path = config
        self.out = Path(out)
        self.threads = threads

    def config(self) -> dict:
        if self.config_path is None:
            return {}
        try:
            return json.loads(Path(self.config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise click.BadParameter(f"cannot read config {self.config_path}: {exc}") from None


def _json_default(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    raise TypeError(type(x).__name__)


def _dump(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")


def _run(fn):
    """Map package errors to exit code 2."""
    try:
        return fn()
    except PlacementError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)


@click.group()
@click.option("--seed", type=int, default=0, show_default=True, help="Random seed.")
@click.option("--config", type=click.Path(dir_okay=False), default=None, help="JSON configuration.")
@click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True,
              help="Output directory.")
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def main(ctx, seed, config, out, threads, verbose):
    """Simulate, estimate and evaluate a day-sequenced campus placement market."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = Context(seed, config, out, threads)


def _market_params(cfg: dict):
    from .calibration import calibrated_config, calibrated_params, recovery_config, recovery_params
    from .market import MarketConfig

    preset = cfg.get("preset", "calibrated")
    if preset not in ("calibrated", "recovery"):
        raise click.BadParameter(f"unknown preset {preset!r}")
    make_cfg, make_params = ((calibrated_config, calibrated_params) if preset == "calibrated"
                             else (recovery_config, recovery_params))
    base = make_cfg().to_dict()
    unknown = set(cfg) - {"preset", "market", "params"}
    if unknown:
        raise click.BadParameter(f"unknown config sections: {sorted(unknown)}")
    base.update(cfg.get("market", {}))
    mcfg = MarketConfig.from_dict(base)
    overrides = {k: (np.asarray(v, dtype=float) if isinstance(v, list) else v)
                 for k, v in cfg.get("params", {}).items()}
    try:
        params = make_params(mcfg.layout, **overrides)
    except TypeError as exc:
        raise click.BadParameter(str(exc)) from None
    return mcfg, params


@main.command()
@click.pass_obj
def generate(obj: Context):
    """Draw a synthetic market and write it (with its true parameters) to --out."""
    from .generate import generate_market
    from .io import save_market, save_params

    def go():
        mcfg, params = _market_params(obj.config())
        market = generate_market(mcfg, params, seed=obj.seed)
        save_market(market, obj.out)
        save_params(market.oracle.params, obj.out / "params.json")
        _dump(obj.out / "config.json", mcfg.to_dict())
        click.echo(f"wrote market with {market.n_students} students and {market.n_jobs} listings "
                   f"to {obj.out}")

    _run(go)


@main.command()
@click.option("--market", "market_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.pass_obj
def estimate(obj: Context, market_dir):
    """Maximum simulated likelihood estimates with information-identity SEs."""
    from .estimation import EstimationConfig, msl_estimate
    from .io import load_market
    from .report import estimation_rows, format_table, write_table, provenance

    def go():
        market = load_market(market_dir)
        cfg = dict(obj.config())
        cfg.setdefault("seed", obj.seed)
        cfg.setdefault("threads", obj.threads)
        config = EstimationConfig.from_dict(cfg)
        result = msl_estimate(market, config)
        _dump(obj.out / "estimation.json", result.to_dict())
        rows = estimation_rows(result)
        write_table(obj.out / "estimates.csv", ["parameter", "estimate", "std_error"], rows,
                    provenance(market, R=config.R, draws_seed=config.seed))
        text = format_table(["parameter", "estimate", "std_error"], rows)
        (obj.out / "estimates.txt").write_text(text + "\n")
        click.echo(text)
        return result

    result = _run(go)
    if not result.converged:
        click.echo(f"estimator did not converge: {result.message}", err=True)
        sys.exit(EXIT_NOT_CONVERGED)


def _load_params(path, market_dir):
    from .io import load_params

    if path is not None:
        return load_params(path)
    candidate = Path(market_dir) / "params.json"
    if candidate.exists():
        return load_params(candidate)
    raise click.BadParameter("no --params given and no params.json next to the market")


@main.command()
@click.option("--market", "market_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--params", "params_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--replications", type=click.IntRange(min=1), default=300, show_default=True)
@click.pass_obj
def simulate(obj: Context, market_dir, params_path, replications):
    """Model-fit table: data moments next to simulated moments."""
    from .io import load_market
    from .policy import compute_moments
    from .report import FIT_HEADER, fit_rows, format_table, provenance, write_table

    def go():
        market = load_market(market_dir)
        params = _load_params(params_path, market_dir)
        fit = compute_moments(market, params, replications, seed=obj.seed)
        rows = fit_rows(fit)
        write_table(obj.out / "model_fit.csv", FIT_HEADER, rows,
                    provenance(market, replications=replications, sim_seed=obj.seed))
        click.echo(format_table(FIT_HEADER, rows))

    _run(go)


@main.command()
@click.option("--market", "market_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--degree", type=click.Choice(["linear", "quadratic", "cubic", "interacted"]),
              default="linear", show_default=True)
@click.option("--sector", default=None)
@click.pass_obj
def decompose(obj: Context, market_dir, degree, sector):
    """Caste earnings gap at every search stage."""
    from .io import load_market
    from .report import STAGE_HEADER, format_table, provenance, stage_rows, write_table
    from .stages import RegressionSpec, stage_gap

    def go():
        market = load_market(market_dir)
        spec = RegressionSpec(degree=degree, sector=sector)
        gaps = stage_gap(market, spec)
        rows = stage_rows(gaps)
        write_table(obj.out / "stage_gaps.csv", STAGE_HEADER, rows,
                    provenance(market, controls=degree, sector=sector))
        click.echo(format_table(STAGE_HEADER, rows))

    _run(go)


@main.command()
@click.option("--market", "market_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--params", "params_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--policy", "policy_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.pass_obj
def counterfactual(obj: Context, market_dir, params_path, policy_path):
    """Evaluate a subsidy, pre-college intervention or quota."""
    from .io import load_market
    from .policy import PolicySpec, apply_policy
    from .report import POLICY_HEADER, format_table, policy_rows, provenance, write_table

    def go():
        market = load_market(market_dir)
        params = _load_params(params_path, market_dir)
        try:
            data = json.loads(Path(policy_path).read_text())
        except json.JSONDecodeError as exc:
            raise click.BadParameter(f"policy file: {exc}") from None
        data.setdefault("seed", obj.seed)
        spec = PolicySpec.from_dict(data)
        report = apply_policy(market, params, spec)
        _dump(obj.out / "policy_report.json", {"policy": spec.to_dict(), **report.to_dict()})
        rows = policy_rows(report)
        write_table(obj.out / "policy.csv", POLICY_HEADER, rows,
                    provenance(market, policy=spec.kind.value, regime=report.regime))
        click.echo(format_table(POLICY_HEADER, rows))

    _run(go)


@main.command()
@click.option("--params", "params_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--estimates", "est_path", type=click.Path(exists=True, dir_okay=False),
              help="estimation.json, for standard errors.")
@click.option("--salary", type=float, default=None, help="Average salary in dollars.")
@click.pass_obj
def wtp(obj: Context, params_path, est_path, salary):
    """Student and employer willingness-to-pay tables."""
    from .calibration import AVERAGE_SALARY
    from .io import load_params
    from .policy import wtp_tables
    from .report import WTP_HEADER, format_table, write_table, wtp_rows, provenance
    from .market import CovariateLayout

    def go():
        params = load_params(params_path)
        m = params.psi.size
        layout = CovariateLayout(m, params.alpha.size - CovariateLayout(m, 0).n_alpha)
        se = {}
        if est_path:
            blob = json.loads(Path(est_path).read_text())
            se = {p["name"]: p["std_error"] for p in blob["parameters"] if p["std_error"] is not None}
        rows = wtp_rows(wtp_tables(params, layout, se, salary or AVERAGE_SALARY))
        write_table(obj.out / "wtp.csv", WTP_HEADER, rows,
                    provenance(None, params=Path(params_path).name))
        click.echo(format_table(WTP_HEADER, rows))

    _run(go)


@main.command()
@click.option("--instances", type=click.IntRange(min=1), default=50, show_default=True)
@click.pass_obj
def verify(obj: Context, instances):
    """Run the brute-force oracle suites and report pass/fail per suite."""
    from .verify import run_suites

    results = run_suites(obj.seed, instances)
    for name, ok, detail in results:
        click.echo(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)


if __name__ == "__main__":
    main()
