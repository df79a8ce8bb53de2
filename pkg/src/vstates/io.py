"""CSV / JSON serialization with lossless float round-trips."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .contour import VStateCoeffs
from .continuation import Branch, BranchOrigin, BranchPoint, Termination

BRANCH_HEAD = ("arclength", "lambda", "omega", "a11", "a21", "residual")
DIAGRAM_HEAD = ("omega", "a11", "a21")


def fmt(x: Any) -> str:
    """Full-precision text for numbers, plain str otherwise; None becomes an empty cell."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def parse_cell(s: str) -> Any:
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        # json has no nan/inf; keep them as tagged strings
        return x if math.isfinite(x) else repr(x)
    return x


def write_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def read_csv(text: str) -> Tuple[List[str], List[List[Any]]]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, [[parse_cell(c) for c in r] for r in reader]


def write_json(meta: Dict[str, Any], header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    doc = {"meta": _jsonable(meta), "rows": [dict(zip(header, _jsonable(list(r)))) for r in rows]}
    return json.dumps(doc, indent=1, sort_keys=False, ensure_ascii=False) + "\n"


def read_json(text: str) -> Tuple[Dict[str, Any], List[str], List[List[Any]]]:
    doc = json.loads(text)
    rows = doc["rows"]
    header = list(rows[0].keys()) if rows else list(doc["meta"].get("columns", []))
    return doc["meta"], header, [[r[h] for h in header] for r in rows]


def branch_columns(N: int) -> List[str]:
    extra = [f"a1_{n}" for n in range(2, N + 1)] + [f"a2_{n}" for n in range(2, N + 1)]
    return list(BRANCH_HEAD) + extra


def branch_table(branch: Branch) -> Tuple[Dict[str, Any], List[str], List[List[Any]]]:
    N = branch.points[0].coeffs.N if branch.points else 0
    o = branch.origin
    meta = {
        "m": o.m,
        "b": o.b,
        "N": N,
        "onset_lambda": o.lam,
        "kind": o.kind,
        "sign": o.sign,
        "termination": branch.termination.value,
        "step_bound": branch.step_bound,
        "columns": branch_columns(N),
    }
    rows = []
    for p in branch.points:
        a1, a2 = p.coeffs.a1, p.coeffs.a2
        rows.append([p.arclength, p.lam, p.omega, a1[0], a2[0], p.residual, *a1[1:], *a2[1:]])
    return meta, branch_columns(N), rows


def branch_from_table(meta: Dict[str, Any], header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Branch:
    m, b, N = int(meta["m"]), float(meta["b"]), int(meta["N"])
    col = {h: i for i, h in enumerate(header)}
    points = []
    for r in rows:
        a1 = [r[col["a11"]]] + [r[col[f"a1_{n}"]] for n in range(2, N + 1)]
        a2 = [r[col["a21"]]] + [r[col[f"a2_{n}"]] for n in range(2, N + 1)]
        c = VStateCoeffs(m=m, b=b, a1=np.array(a1, dtype=float), a2=np.array(a2, dtype=float))
        points.append(
            BranchPoint(coeffs=c, lam=float(r[col["lambda"]]), arclength=float(r[col["arclength"]]), residual=float(r[col["residual"]]))
        )
    origin = BranchOrigin(m=m, b=b, lam=float(meta["onset_lambda"]), kind=str(meta["kind"]), sign=str(meta["sign"]))
    return Branch(points=points, origin=origin, termination=Termination(meta["termination"]), step_bound=float(meta["step_bound"]))


def _meta_csv_line(meta: Dict[str, Any]) -> str:
    return "# " + json.dumps(_jsonable(meta), ensure_ascii=False) + "\n"


def dump_branch(branch: Branch, fmt_name: str = "json") -> str:
    meta, header, rows = branch_table(branch)
    if fmt_name == "json":
        return write_json(meta, header, rows)
    if fmt_name == "csv":
        # metadata rides in a leading comment line so the table stays a plain CSV below it
        return _meta_csv_line(meta) + write_csv(header, rows)
    raise ValueError(f"unknown format {fmt_name!r}")


def load_branch(text: str) -> Branch:
    if text.lstrip().startswith("{"):
        meta, header, rows = read_json(text)
    else:
        first, _, body = text.partition("\n")
        if not first.startswith("# "):
            raise ValueError("branch CSV needs the metadata comment line")
        meta = json.loads(first[2:])
        header, rows = read_csv(body)
    return branch_from_table(meta, header, rows)


def dump_table(header: Sequence[str], rows: Sequence[Sequence[Any]], fmt_name: str = "csv", meta=None) -> str:
    if fmt_name == "csv":
        return write_csv(header, rows)
    if fmt_name == "json":
        return write_json(meta or {}, header, rows)
    raise ValueError(f"unknown format {fmt_name!r}")


def load_table(text: str) -> Tuple[Dict[str, Any], List[str], List[List[Any]]]:
    if text.lstrip().startswith("{"):
        return read_json(text)
    header, rows = read_csv(text)
    return {}, header, rows
