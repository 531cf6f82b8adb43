"""Report files: JSON bundles plus aligned text tables and CSV."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Sequence

from .features import feature_label
from .pipeline import SCHEMA_VERSION, EvaluationReport

NOT_APPLICABLE = "—"


def bundle(experiment: str, title: str, reports: Sequence[EvaluationReport], **header) -> dict:
    out = {"schema": SCHEMA_VERSION, "experiment": experiment, "title": title}
    out.update(header)
    out["reports"] = [r.to_dict() for r in reports]
    return out


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _pct(value) -> str:
    return NOT_APPLICABLE if value is None else f"{100.0 * value:.2f}%"


def _grid(doc: dict):
    """Yield (core_feature, row labels, column labels, cells) per table."""
    reports = doc["reports"]
    columns = [r["tag"] for r in reports]
    cores = list(dict.fromkeys(row["core_feature"] for r in reports for row in r["rows"]))
    for core in cores:
        labels = []
        cells = {}
        for j, r in enumerate(reports):
            for row in r["rows"]:
                if row["core_feature"] != core:
                    continue
                if row["label"] not in labels:
                    labels.append(row["label"])
                key = "cv_error" if doc["experiment"] == "weights" else "test_error"
                cells[row["label"], j] = _pct(row[key] if row["status"] == "ok" else None)
        yield core, labels, columns, cells


def render_table(doc: dict) -> str:
    out = [doc["title"]]
    for core, labels, columns, cells in _grid(doc):
        header = ["Model"] + columns
        body = [[label] + [cells.get((label, j), NOT_APPLICABLE) for j in range(len(columns))]
                for label in labels]
        out.append("")
        out.append(f"core feature: {core}")
        out.extend(_align([header] + body))
    return "\n".join(out) + "\n"


def render_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["report", "family", "core_feature", "status", "C", "epsilon",
                "cv_error", "test_error"])
    for r in doc["reports"]:
        for row in r["rows"]:
            w.writerow([r["tag"], row["family"], row["core_feature"], row["status"],
                        "" if row["C"] is None else repr(row["C"]),
                        "" if row["epsilon"] is None else repr(row["epsilon"]),
                        "" if row["cv_error"] is None else repr(row["cv_error"]),
                        "" if row["test_error"] is None else repr(row["test_error"])])
    return buf.getvalue()


def _align(rows) -> list[str]:
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) if k == 0 else c.rjust(w) for k, (c, w) in enumerate(zip(r, widths)))
             for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return lines


def render_weights(doc: dict) -> str:
    """Feature-by-model weight table; one column per (family, core feature).

    Rows are matched by position. A row whose feature differs between
    columns (the core term) is labelled generically.
    """
    columns = [(f"{row['label']} / {row['core_feature']}", row)
               for r in doc["reports"] for row in r["rows"]]
    n = max((len(row["weights"] or []) for _, row in columns), default=0)
    body = []
    for i in range(n):
        names = {row["weights"][i]["feature"] for _, row in columns if row["weights"]}
        label = feature_label(names.pop()) if len(names) == 1 else "Core feature"
        body.append([label] + [
            f"{row['weights'][i]['weight']:.6f}" if row["weights"] else NOT_APPLICABLE
            for _, row in columns
        ])
    header = ["Feature"] + [c for c, _ in columns]
    return "\n".join([doc["title"], ""] + _align([header] + body)) + "\n"


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the same directory and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_weights_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["report", "family", "core_feature", "status", "feature", "weight"])
    for r in doc["reports"]:
        for row in r["rows"]:
            for item in row["weights"] or [{"feature": "", "weight": None}]:
                w.writerow([r["tag"], row["family"], row["core_feature"], row["status"],
                            item["feature"], "" if item["weight"] is None else repr(item["weight"])])
    return buf.getvalue()


def render(doc: dict, fmt: str) -> str:
    weights = doc["experiment"] == "weights"
    if fmt == "json":
        return to_json(doc)
    if fmt == "csv":
        return render_weights_csv(doc) if weights else render_csv(doc)
    if fmt == "table":
        return render_weights(doc) if weights else render_table(doc)
    raise ValueError(f"unknown format {fmt!r}")
