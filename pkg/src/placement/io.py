"""CSV/JSON persistence for markets and parameters.

Floats are written with ``repr`` so every value survives a round trip.  The
latent draws live in ``oracle.json``, apart from the observed tables.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .market import (DEGREES, SECTORS, STAGE_FLAG_NAMES, Caste, CovariateLayout, JobTable,
                     Market, Oracle, ParameterSet, StudentTable)

STUDENT_FIELDS = ["id", "year", "caste", "degree", "major", "gpa", "entrance_score",
                  "grade10", "grade12"]
JOB_FIELDS = ["id", "firm", "designation", "year", "sector", "log_wage", "day", "cap",
              "client_facing"]
OFFER_FIELDS = ["student_id", "job_id", "applied", "offered", "chosen", *STAGE_FLAG_NAMES]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


class _Reader:
    """Typed field access with row/field-aware errors."""

    def __init__(self, path: Path, required):
        self.path = path
        try:
            with open(path, newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise ParseError(path, 0, "", f"cannot read file ({exc.strerror})") from None
        self.header = rows[0] if rows else []
        self.rows = rows[1:]
        if not self.rows:
            # an empty table is reported by the caller in domain terms
            required = ()
        for name in required:
            if name not in self.header:
                raise ParseError(path, 0, name, "missing column")
        self.col = {name: k for k, name in enumerate(self.header)}

    def prefixed(self, prefix: str) -> list[str]:
        names = [h for h in self.header if h.startswith(prefix)]
        return sorted(names, key=lambda h: int(h[len(prefix):]) if h[len(prefix):].isdigit() else h)

    def get(self, r: int, name: str, kind):
        row = self.rows[r]
        if len(row) != len(self.header):
            raise ParseError(self.path, r + 1, name, f"expected {len(self.header)} fields, got {len(row)}")
        text = row[self.col[name]]
        try:
            if kind is bool:
                if text not in ("0", "1"):
                    raise ValueError
                return text == "1"
            value = kind(text)
        except ValueError:
            raise ParseError(self.path, r + 1, name, f"cannot parse {text!r} as {kind.__name__}") from None
        if kind is float and not np.isfinite(value):
            raise ParseError(self.path, r + 1, name, "value must be finite")
        return value

    def column(self, name: str, kind):
        return [self.get(r, name, kind) for r in range(len(self.rows))]


def save_market(market: Market, path, with_oracle: bool = True) -> None:
    """Write students.csv, jobs.csv, offers.csv, market.json (and oracle.json)."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    s, t = market.students, market.jobs
    exp_cols = [f"experience_{e + 1}" for e in range(market.layout.n_experience)]
    am_cols = market.layout.amenity_names
    _write_csv(path / "students.csv", STUDENT_FIELDS + exp_cols, (
        [s.id[i], s.year[i],
         Caste.DISADVANTAGED.value if s.disadvantaged[i] else Caste.ADVANTAGED.value,
         DEGREES[s.degree[i]].value, s.major[i], s.gpa[i], s.entrance_score[i],
         s.grade10[i], s.grade12[i], *s.experience[i]]
        for i in range(market.n_students)))
    _write_csv(path / "jobs.csv", JOB_FIELDS + am_cols, (
        [t.id[j], t.firm[j], t.designation[j], t.year[j], SECTORS[t.sector[j]].value,
         t.wage[j], t.day[j], t.cap[j], bool(t.client_facing[j]), *t.amenities[j]]
        for j in range(market.n_jobs)))
    rows = []
    for i, j in zip(*np.nonzero(market.applied)):
        rows.append([s.id[i], t.id[j], True, bool(market.offered[i, j]),
                     bool(market.chosen[i] == j), *(bool(f) for f in market.stage_flags[i, j])])
    _write_csv(path / "offers.csv", OFFER_FIELDS, rows)
    meta = {"layout": {"n_amenities": market.layout.n_amenities,
                       "n_experience": market.layout.n_experience},
            "metadata": market.metadata}
    (path / "market.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    oracle_file = path / "oracle.json"
    if with_oracle and market.oracle is not None:
        o = market.oracle
        blob = {"q": [repr(float(x)) for x in o.q],
                "mu": [[repr(float(x)) for x in row] for row in o.mu],
                "epsilon": [[repr(float(x)) for x in row] for row in o.epsilon],
                "params": None if o.params is None else o.params.to_dict()}
        oracle_file.write_text(json.dumps(blob) + "\n")


def load_market(path, with_oracle: bool = False) -> Market:
    """Read a market directory written by :func:`save_market` and validate it."""
    path = Path(path)
    sr = _Reader(path / "students.csv", STUDENT_FIELDS)
    if not sr.rows:
        raise ValidationError("no students")
    jr = _Reader(path / "jobs.csv", JOB_FIELDS)
    if not jr.rows:
        raise ValidationError("no jobs")
    orr = _Reader(path / "offers.csv", OFFER_FIELDS)

    exp_cols = sr.prefixed("experience_")
    am_cols = jr.prefixed("amenity_")
    layout = CovariateLayout(len(am_cols), len(exp_cols))
    n, J = len(sr.rows), len(jr.rows)

    def enum_index(reader, name, values):
        labels = [v.value for v in values]
        out = []
        for r in range(len(reader.rows)):
            text = reader.get(r, name, str)
            if text not in labels:
                raise ParseError(reader.path, r + 1, name, f"unknown value {text!r}")
            out.append(labels.index(text))
        return np.array(out, dtype=int)

    caste = enum_index(sr, "caste", tuple(Caste))
    students = StudentTable(
        id=np.array(sr.column("id", int)),
        year=np.array(sr.column("year", int)),
        disadvantaged=caste == list(Caste).index(Caste.DISADVANTAGED),
        degree=enum_index(sr, "degree", DEGREES),
        major=np.array(sr.column("major", str), dtype=object),
        gpa=np.array(sr.column("gpa", float)),
        entrance_score=np.array(sr.column("entrance_score", float)),
        grade10=np.array(sr.column("grade10", float)),
        grade12=np.array(sr.column("grade12", float)),
        experience=np.array([sr.column(c, float) for c in exp_cols], dtype=float).T.reshape(n, len(exp_cols)),
    )
    jobs = JobTable(
        id=np.array(jr.column("id", int)),
        firm=np.array(jr.column("firm", str), dtype=object),
        designation=np.array(jr.column("designation", str), dtype=object),
        year=np.array(jr.column("year", int)),
        sector=enum_index(jr, "sector", SECTORS),
        wage=np.array(jr.column("log_wage", float)),
        amenities=np.array([jr.column(c, float) for c in am_cols], dtype=float).T.reshape(J, len(am_cols)),
        client_facing=np.array(jr.column("client_facing", bool)),
        day=np.array(jr.column("day", int)),
        cap=np.array(jr.column("cap", float)),
    )
    srow = {sid: i for i, sid in enumerate(students.id.tolist())}
    jcol = {jid: j for j, jid in enumerate(jobs.id.tolist())}
    applied = np.zeros((n, J), dtype=bool)
    offered = np.zeros((n, J), dtype=bool)
    flags = np.zeros((n, J, 3), dtype=bool)
    chosen = np.full(n, -1)
    for r in range(len(orr.rows)):
        sid = orr.get(r, "student_id", int)
        jid = orr.get(r, "job_id", int)
        if sid not in srow:
            raise ParseError(orr.path, r + 1, "student_id", f"unknown student {sid}")
        if jid not in jcol:
            raise ParseError(orr.path, r + 1, "job_id", f"unknown job {jid}")
        i, j = srow[sid], jcol[jid]
        applied[i, j] = orr.get(r, "applied", bool)
        offered[i, j] = orr.get(r, "offered", bool)
        flags[i, j] = [orr.get(r, f, bool) for f in STAGE_FLAG_NAMES]
        if orr.get(r, "chosen", bool):
            if chosen[i] >= 0:
                raise ValidationError(f"student {sid} chose more than one job")
            chosen[i] = j
    meta_file = path / "market.json"
    metadata = json.loads(meta_file.read_text())["metadata"] if meta_file.exists() else {}
    market = Market(students, jobs, applied, flags, offered, chosen, layout, metadata=metadata)
    if with_oracle:
        blob = json.loads((path / "oracle.json").read_text())
        market.oracle = Oracle(
            q=np.array([float(x) for x in blob["q"]]),
            mu=np.array([[float(x) for x in row] for row in blob["mu"]]).reshape(n, J),
            epsilon=np.array([[float(x) for x in row] for row in blob["epsilon"]]).reshape(n, J + 1),
            params=None if blob["params"] is None else ParameterSet.from_dict(blob["params"]),
        )
    market.validate()
    return market


def save_params(params: ParameterSet, path) -> None:
    Path(path).write_text(json.dumps(params.to_dict(), indent=2) + "\n")


def load_params(path) -> ParameterSet:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, "", exc.msg) from None
    return ParameterSet.from_dict(data)


def markets_equal(a: Market, b: Market, oracle: bool = True) -> bool:
    """Exact structural equality of two markets."""
    def same(x, y):
        x, y = np.asarray(x), np.asarray(y)
        return x.shape == y.shape and x.dtype.kind == y.dtype.kind and bool(np.all(x == y))

    for name in vars(a.students):
        if not same(getattr(a.students, name), getattr(b.students, name)):
            return False
    for name in vars(a.jobs):
        if not same(getattr(a.jobs, name), getattr(b.jobs, name)):
            return False
    for name in ("applied", "stage_flags", "offered", "chosen"):
        if not same(getattr(a, name), getattr(b, name)):
            return False
    if a.layout != b.layout or a.metadata != b.metadata:
        return False
    if oracle:
        if (a.oracle is None) != (b.oracle is None):
            return False
        if a.oracle is not None:
            for name in ("q", "mu", "epsilon"):
                if not same(getattr(a.oracle, name), getattr(b.oracle, name)):
                    return False
            pa, pb = a.oracle.params, b.oracle.params
            if (pa is None) != (pb is None) or (pa is not None and not pa.equals(pb)):
                return False
    return True
