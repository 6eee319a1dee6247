import json

import pytest
from click.testing import CliRunner

from placement.cli import EXIT_INVALID, EXIT_NOT_CONVERGED, main


@pytest.fixture(scope="module")
def market_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "cfg.json"
    cfg.write_text(json.dumps({"preset": "recovery", "market": {"n_students": 150}}))
    res = CliRunner().invoke(main, ["--seed", "3", "--config", str(cfg), "--out", str(root / "m"),
                                    "generate"])
    assert res.exit_code == 0, res.output
    return root / "m"


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_generate_writes_market(market_dir):
    assert (market_dir / "params.json").exists()
    assert (market_dir / "config.json").exists()


def test_decompose_and_wtp(market_dir, tmp_path):
    res = run("--out", tmp_path, "decompose", "--market", market_dir)
    assert res.exit_code == 0, res.output
    assert "AcceptedOffers" in res.output
    assert (tmp_path / "stage_gaps.csv").exists()
    res = run("--out", tmp_path, "wtp", "--params", market_dir / "params.json")
    assert res.exit_code == 0, res.output
    assert "eta" in res.output


def test_counterfactual(market_dir, tmp_path):
    policy = tmp_path / "policy.json"
    policy.write_text(json.dumps({"kind": "Subsidy", "draws": 5}))
    res = run("--out", tmp_path, "counterfactual", "--market", market_dir, "--policy", policy)
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "policy_report.json").read_text())
    assert report["kind"] == "Subsidy"


def test_bad_policy_is_validation_error(market_dir, tmp_path):
    policy = tmp_path / "policy.json"
    policy.write_text(json.dumps({"kind": "Lottery"}))
    res = run("--out", tmp_path, "counterfactual", "--market", market_dir, "--policy", policy)
    assert res.exit_code == EXIT_INVALID


def test_bad_config_is_validation_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"preset": "recovery", "market": {"n_students": -5}}))
    res = run("--config", cfg, "--out", tmp_path, "generate")
    assert res.exit_code == EXIT_INVALID


def test_non_convergence_exit_code(market_dir, tmp_path):
    cfg = tmp_path / "est.json"
    cfg.write_text(json.dumps({"R": 5, "max_iter": 1}))
    res = run("--config", cfg, "--out", tmp_path, "estimate", "--market", market_dir)
    assert res.exit_code == EXIT_NOT_CONVERGED
    assert (tmp_path / "estimation.json").exists()


def test_simulate(market_dir, tmp_path):
    res = run("--out", tmp_path, "simulate", "--market", market_dir, "--replications", 3)
    assert res.exit_code == 0, res.output
    assert "unemployment_rate" in res.output


def test_verify_suites_pass(tmp_path):
    res = run("--out", tmp_path, "verify", "--instances", 5)
    assert res.exit_code == 0, res.output
    assert "FAIL" not in res.output
