"""Deterministic text outputs: report JSON, data CSV and log-log plot files."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .studies import StudyReport

BRANCH_NOTE = "phases theta reported in (-pi, pi], with -pi mapped to pi"
CHART_NOTE = "real chart vector v <-> complex (v[2j] + i v[2j+1])_j"


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0])
    w.writerow(cols)
    for r in rows:
        w.writerow([fmt(r[c]) for c in cols])
    return buf.getvalue()


def plot_key(report: StudyReport) -> str:
    return "abs" if report.study_id.startswith("decay") else "rel_err"


def plot_dat(report: StudyReport) -> str:
    key = plot_key(report)
    lines = [f"# log10(k) log10({key})"]
    for r in report.values:
        err = max(float(r[key]), 1e-300)
        lines.append(f"{math.log10(r['k']):.17g} {math.log10(err):.17g}")
    return "\n".join(lines) + "\n"


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def emit_outputs(report: StudyReport, out_dir, config_echo: dict, digest: str) -> list[Path]:
    """Write ``report-*.json``, ``data-*.csv`` and ``plot-*.dat``; returns the paths.

    Filenames embed the study id and the configuration digest.  Contents
    depend only on the report and the echoed configuration.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{report.study_id}-{digest}"
    payload = report.to_dict()
    payload["config"] = config_echo
    payload["config_hash"] = digest
    payload["conventions"] = {"phase_branch": BRANCH_NOTE, "chart_identification": CHART_NOTE}
    files = {
        out / f"report-{stem}.json": dumps(payload),
        out / f"data-{stem}.csv": rows_to_csv(report.values),
        out / f"plot-{stem}.dat": plot_dat(report),
    }
    for path, text in files.items():
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return list(files)
