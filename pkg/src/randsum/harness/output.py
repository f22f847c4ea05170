"""Rendering of tables and bound reports as aligned text or CSV."""

from __future__ import annotations

import csv
import io
import json


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def table_text(table) -> str:
    cells = [[fmt(r.get(c, "")) for c in table.columns] for r in table.rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(table.columns)]
    lines = [f"# {table.title}"]
    lines += [f"# {n}" for n in table.notes]
    lines.append("  ".join(c.ljust(w) for c, w in zip(table.columns, widths)).rstrip())
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def table_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([fmt(r.get(c, "")) for c in table.columns])
    return buf.getvalue()


def render_table(table, fmt_name: str) -> str:
    return table_csv(table) if fmt_name == "csv" else table_text(table)


def render_report(report, fmt_name: str, echo: dict | None = None) -> str:
    if fmt_name == "csv":
        d = report.to_dict()
        row = dict(echo or {})
        row.update({f"const_{k}": v for k, v in d["constants"].items()})
        row.update(bound_kind=d["bound_kind"], bound=d["value"], bound_conservative=d["conservative_value"], notes=d["notes"])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = list(row)
        w.writerow(keys)
        w.writerow([fmt(row[k]) for k in keys])
        return buf.getvalue()
    d = report.to_dict()
    if echo:
        d = {"config": echo, **d}
    return json.dumps(d, indent=2, sort_keys=True) + "\n"
