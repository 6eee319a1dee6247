"""CSV tables with a provenance header, and the text tables printed by the CLI."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import ParseError, PlacementError


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return str(x)


def table_text(header, rows, provenance: dict | None = None) -> str:
    buf = io.StringIO()
    for key in sorted(provenance or {}):
        buf.write(f"# {key}: {provenance[key]}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def write_table(path, header, rows, provenance: dict | None = None) -> Path:
    """Write a CSV whose leading ``# key: value`` lines record where it came from."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(table_text(header, rows, provenance))
    except OSError as exc:
        raise PlacementError(f"cannot write {path}: {exc.strerror}") from None
    return path


def read_table(path):
    """Inverse of :func:`write_table`: (provenance, header, rows as strings)."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ParseError(path, 0, "", f"cannot read file ({exc.strerror})") from None
    prov = {}
    k = 0
    while k < len(lines) and lines[k].startswith("# "):
        key, _, value = lines[k][2:].partition(": ")
        prov[key] = value
        k += 1
    rows = list(csv.reader(lines[k:]))
    if not rows:
        raise ParseError(path, k + 1, "", "missing header row")
    return prov, rows[0], rows[1:]


def provenance(market=None, **extra) -> dict:
    out = {}
    if market is not None:
        out["seed"] = market.metadata.get("seed", "")
        out["config_hash"] = market.metadata.get("config_hash", "")
    out.update({k: v for k, v in extra.items() if v is not None})
    return out


# -- table builders ----------------------------------------------------------


STAGE_HEADER = ["stage", "beta", "se", "ci_low", "ci_high", "n", "mean_set_size"]


def stage_rows(gaps):
    return [[g.stage.value, g.beta, g.se, g.ci[0], g.ci[1], g.n, g.mean_set_size] for g in gaps]


WTP_HEADER = ["side", "parameter", "coefficient", "percent", "dollars", "se_percent"]


def wtp_rows(rows):
    return [list(r) for r in rows]


FIT_HEADER = ["moment", "data", "model", "model_sd"]


def fit_rows(fit):
    return [list(r) for r in fit.rows]


def policy_rows(report):
    """Long-format rows (quantity, baseline, policy, change) of a PolicyReport."""
    rows = [[k, report.baseline[k], report.policy[k], report.changes[k]] for k in report.baseline]
    ub = report.unemployment_change()
    rows.append(["hires_advantaged", report.hires_by_caste_before[0],
                 report.hires_by_caste_after[0],
                 report.hires_by_caste_after[0] - report.hires_by_caste_before[0]])
    rows.append(["hires_disadvantaged", report.hires_by_caste_before[1],
                 report.hires_by_caste_after[1],
                 report.hires_by_caste_after[1] - report.hires_by_caste_before[1]])
    rows.append(["total_hires", report.total_hires_before, report.total_hires_after,
                 report.total_hires_after - report.total_hires_before])
    rows.append(["total_offers", report.total_offers_before, report.total_offers_after,
                 report.total_offers_after - report.total_offers_before])
    rows.append(["unemployed_advantaged_change_percent", "", "", ub["advantaged"]])
    rows.append(["unemployed_disadvantaged_change_percent", "", "", ub["disadvantaged"]])
    return rows


POLICY_HEADER = ["quantity", "baseline", "policy", "change"]


def format_table(header, rows, width: int = 14) -> str:
    """Fixed-width text rendering for the terminal."""
    def fmt(x):
        if isinstance(x, (float, np.floating)):
            return f"{x:{width}.4f}"
        return f"{str(x):>{width}s}"

    first = max([len(str(r[0])) for r in rows] + [len(header[0])])
    lines = [f"{header[0]:<{first}s} " + " ".join(f"{h:>{width}s}" for h in header[1:])]
    for r in rows:
        lines.append(f"{str(r[0]):<{first}s} " + " ".join(fmt(x) for x in r[1:]))
    return "\n".join(lines)


def estimation_rows(result):
    rows = []
    for name, est, se in zip(result.names, result.estimate, result.standard_errors):
        rows.append([name, float(est), float(se)])
    return rows
