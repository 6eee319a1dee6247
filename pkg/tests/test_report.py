from pathlib import Path

import numpy as np
import pytest

from placement import ParseError, PlacementError
from placement.calibration import calibrated_config, calibrated_params
from placement.generate import generate_market
from placement.report import (STAGE_HEADER, format_table, provenance, read_table, stage_rows,
                              table_text, write_table)
from placement.stages import stage_gap

GOLDEN = Path(__file__).parent / "golden" / "stage_gaps_seed7.csv"


@pytest.fixture(scope="module")
def market():
    cfg = calibrated_config(n_students=400)
    return generate_market(cfg, calibrated_params(cfg.layout), seed=7)


def test_stage_series_round_trip(market, tmp_path):
    rows = stage_rows(stage_gap(market))
    path = write_table(tmp_path / "gaps.csv", STAGE_HEADER, rows, provenance(market))
    prov, header, back = read_table(path)
    assert header == STAGE_HEADER
    assert [r[0] for r in back] == [r[0] for r in rows]
    assert np.array_equal(np.array([r[1:] for r in back], dtype=float),
                          np.array([r[1:] for r in rows], dtype=float))


def test_provenance_header(market):
    text = table_text(["a"], [[1.5]], provenance(market, sector=None, controls="cubic"))
    lines = text.splitlines()
    assert lines[:3] == [f"# config_hash: {market.metadata['config_hash']}", "# controls: cubic",
                         "# seed: 7"]
    assert lines[3:] == ["a", "1.5"]


def test_golden_stage_gaps(market, tmp_path):
    path = write_table(tmp_path / "gaps.csv", STAGE_HEADER, stage_rows(stage_gap(market)),
                       provenance(market, controls="linear"))
    assert path.read_text() == GOLDEN.read_text()


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        read_table(tmp_path / "nope.csv")
    (tmp_path / "empty.csv").write_text("# seed: 1\n")
    with pytest.raises(ParseError):
        read_table(tmp_path / "empty.csv")


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(PlacementError, match="cannot write"):
        write_table(blocker / "t.csv", ["a"], [])


def test_format_table_aligns():
    text = format_table(["name", "value"], [["alpha", 1.0], ["b", -2.5]], width=8)
    lines = text.splitlines()
    assert len({len(l) for l in lines}) == 1
    assert lines[1].endswith("  1.0000")
