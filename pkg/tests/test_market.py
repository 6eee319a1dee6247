import numpy as np
import pytest

from placement import ConfigurationError, MarketConfig, ParseError, ValidationError
from placement.calibration import calibrated_config, calibrated_params
from placement.generate import generate_market
from placement.io import load_market, load_params, markets_equal, save_market, save_params


def small_market(seed=42, **overrides):
    base = dict(n_students=100, n_positions=5)
    base.update(overrides)
    cfg = calibrated_config(**base)
    return generate_market(cfg, calibrated_params(cfg.layout), seed=seed)


def test_generated_market_invariants():
    m = small_market()
    assert not np.any(m.offered & ~m.applied)
    for i in range(m.n_students):
        days = np.unique(m.jobs.day[m.offered[i]])
        assert days.size <= 1
        if m.chosen[i] >= 0:
            assert m.offered[i, m.chosen[i]]


def test_same_seed_is_byte_identical(tmp_path):
    a, b = small_market(42), small_market(42)
    assert a.n_jobs == 10
    save_market(a, tmp_path / "a")
    save_market(b, tmp_path / "b")
    for name in ("students.csv", "jobs.csv", "offers.csv", "market.json", "oracle.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_different_seeds_differ():
    assert not markets_equal(small_market(1), small_market(2))


def test_round_trip(tmp_path):
    m = small_market()
    save_market(m, tmp_path)
    back = load_market(tmp_path, with_oracle=True)
    assert markets_equal(m, back)
    save_params(m.oracle.params, tmp_path / "p.json")
    assert load_params(tmp_path / "p.json").equals(m.oracle.params)


def test_offer_without_application_rejected(tmp_path):
    m = small_market()
    save_market(m, tmp_path, with_oracle=False)
    path = tmp_path / "offers.csv"
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    row = lines[1].split(",")
    for col in ("applied", "chosen", "passed_reading", "passed_test", "passed_gd"):
        row[header.index(col)] = "0"
    row[header.index("offered")] = "1"
    lines[1] = ",".join(row)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError):
        load_market(tmp_path)


def test_empty_student_file(tmp_path):
    m = small_market()
    save_market(m, tmp_path, with_oracle=False)
    path = tmp_path / "students.csv"
    path.write_text(path.read_text().splitlines()[0] + "\n")
    with pytest.raises(ValidationError, match="no students"):
        load_market(tmp_path)


def test_parse_error_names_row_and_field(tmp_path):
    m = small_market()
    save_market(m, tmp_path, with_oracle=False)
    path = tmp_path / "students.csv"
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    row = lines[3].split(",")
    row[header.index("gpa")] = "abc"
    lines[3] = ",".join(row)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as err:
        load_market(tmp_path)
    assert err.value.field == "gpa"
    assert err.value.row == 3


def test_dimension_mismatch_is_configuration_error():
    cfg = calibrated_config(n_students=50, n_amenities=3, amenity_prevalence=(0.5, 0.5, 0.5))
    with pytest.raises(ConfigurationError):
        generate_market(cfg, calibrated_params())


def test_invalid_probability_rejected():
    with pytest.raises(ConfigurationError):
        MarketConfig(eligibility_rate=1.5).validate()


def test_entrance_gap_matches_config():
    cfg = calibrated_config(n_students=20000, entrance_gap=(0.6,) * 4)
    m = generate_market(cfg, calibrated_params(cfg.layout), seed=0)
    s = m.students
    gaps = [s.entrance_score[(s.degree == g) & ~s.disadvantaged].mean()
            - s.entrance_score[(s.degree == g) & s.disadvantaged].mean() for g in range(4)]
    n_small = min(((s.degree == g) & s.disadvantaged).sum() for g in range(4))
    assert np.allclose(gaps, 0.6, atol=3 * np.sqrt(2 / n_small))


def test_no_penalty_equal_offer_rates():
    cfg = calibrated_config(n_students=20000, disadvantaged_share=(0.5,) * 4,
                            entrance_gap=(0.0,) * 4, gpa_gap=(0.0,) * 4,
                            grade10_gap=0.0, grade12_gap=0.0)
    m = generate_market(cfg, calibrated_params(cfg.layout, eta=0.0, sigma_q=0.0), seed=0)
    got = m.offered.any(axis=1)
    d = m.students.disadvantaged
    p = got.mean()
    band = 3 * np.sqrt(p * (1 - p) * (1 / d.sum() + 1 / (~d).sum()))
    assert abs(got[d].mean() - got[~d].mean()) < band


def test_covariate_moments():
    cfg = calibrated_config(n_students=10000)
    m = generate_market(cfg, calibrated_params(cfg.layout), seed=3)
    share = np.bincount(m.students.degree, minlength=4) / m.n_students
    assert np.allclose(share, cfg.degree_shares, atol=3 / np.sqrt(m.n_students))
    for g in range(4):
        mask = (m.students.degree == g) & m.students.disadvantaged
        assert abs(m.students.disadvantaged[m.students.degree == g].mean()
                   - cfg.disadvantaged_share[g]) < 3 / np.sqrt((m.students.degree == g).sum())
        assert abs(m.students.entrance_score[mask].std() - 1.0) < 3 / np.sqrt(mask.sum())
