"""Serialization of influence reports to JSON and long-format CSV."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

SCHEMA = "influence-report/1"
CSV_COLUMNS = ("section", "feature", "item", "key", "value")


def new_report(measure: str, config: dict) -> dict:
    return {"schema": SCHEMA, "measure": measure, "features": [], "items": [], "stats": {}, "config": config}


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _flatten(prefix: str, obj, out: list):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, (list, tuple)):
        for k, v in enumerate(obj):
            _flatten(f"{prefix}[{k}]", v, out)
    else:
        out.append((prefix, obj))


def csv_rows(report: dict) -> list[tuple]:
    rows = [("meta", "", "", "schema", report["schema"]), ("meta", "", "", "measure", report["measure"])]
    for f in report.get("features", []):
        for key, val in f.items():
            if key != "name":
                rows.append(("feature", f["name"], "", key, val))
    for it in report.get("items", []):
        for feat, val in it.get("influence", {}).items():
            rows.append(("item", feat, it["item"], "influence", val))
    for st in report.get("states", []):
        for key, val in st.items():
            if key not in ("feature", "state"):
                rows.append(("state", st["feature"], st["state"], key, val))
    for column, stats in report.get("stats", {}).items():
        for key, val in stats.items():
            rows.append(("stats", column, "", key, val))
    skip = {"schema", "measure", "features", "items", "states", "stats"}
    for section, body in report.items():
        if section in skip:
            continue
        flat = []
        _flatten("", body, flat)
        rows.extend((section, "", "", key, val) for key, val in flat)
    return rows


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in csv_rows(report):
        w.writerow(["" if x is None else (repr(x) if isinstance(x, float) else x) for x in row])
    return buf.getvalue()


def render(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "csv":
        return to_csv(report)
    raise ValueError(f"unknown format {fmt!r}")


def write_report(report: dict, path: str | Path | None, fmt: str = "json", stream=None) -> None:
    text = render(report, fmt)
    if path is None:
        (stream or __import__("sys").stdout).write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
