"""CSV, JSON and SVG output.

Every writer is a pure function of the records, so reruns with the same seed
give byte-identical files.  ``wall_time_ms`` is kept in ``records.jsonl`` but
left out of the CSV and the summary for that reason.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import OrderedDict
from pathlib import Path

import numpy as np

from ..errors import DomainError
from .campaign import CRITERIA, ResultSet

FORMATS = ("csv", "json", "svg")
SIG_DIGITS = 12

CSV_COLUMNS = (
    ["trial_index", "mu", "n_settings", "pair", "excluded", "alice_axes", "bob_axes", "signalling", "t"]
    + ["asr_status", "asr_value", "sr_value", "raw_asr_status", "raw_asr_value"]
    + [f"{c}_{k}" for c in CRITERIA for k in ("value", "bound", "violated")]
)
VERDICT_THRESHOLD = 1e-6


def fmt(v) -> str:
    """Fixed textual form of a CSV cell."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{SIG_DIGITS}g}"
    if isinstance(v, (list, tuple)):
        return ";".join(" ".join(fmt(x) for x in row) if isinstance(row, (list, tuple)) else fmt(row) for row in v)
    return str(v)


def round_sig(obj):
    """Round every float in a JSON-like structure to 12 significant digits."""
    if isinstance(obj, dict):
        return {k: round_sig(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if not math.isfinite(v) else float(f"{v:.{SIG_DIGITS}g}")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def csv_text(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([fmt(rec.get(col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def _stats(values) -> dict | None:
    vals = np.asarray([v for v in values if v is not None], dtype=float)
    if not vals.size:
        return None
    return {"mean": vals.mean(), "std": vals.std(), "min": vals.min(), "max": vals.max(), "count": int(vals.size)}


def _fraction(flags) -> float | None:
    flags = [f for f in flags if f is not None]
    return float(np.mean(flags)) if flags else None


def asr_violated(rec) -> bool:
    return rec.get("asr_status") == "optimal" and rec.get("asr_value") is not None and rec["asr_value"] > VERDICT_THRESHOLD


def summarise(records) -> dict:
    """Statistics per (mu, settings count): mean, std, min, max and violation fraction.

    Records flagged ``excluded`` are counted but left out of every statistic.
    """
    groups: OrderedDict = OrderedDict()
    skipped: dict = {}
    for rec in records:
        if rec.get("excluded"):
            key = (rec.get("mu"), rec.get("n_settings"))
            skipped[key] = skipped.get(key, 0) + 1
            continue
        groups.setdefault((rec.get("mu"), rec.get("n_settings")), []).append(rec)
    out = []
    for (mu, n), recs in sorted(groups.items(), key=lambda kv: (kv[0][0] is None, kv[0][0] or 0, -(kv[0][1] or 0))):
        statuses: dict = {}
        for r in recs:
            statuses[r.get("asr_status")] = statuses.get(r.get("asr_status"), 0) + 1
        crit = {
            "ASR": {**(_stats(r.get("asr_value") for r in recs) or {}), "violation_fraction": _fraction([asr_violated(r) for r in recs])},
        }
        sr = _stats(r.get("sr_value") for r in recs)
        if sr:
            crit["SR"] = {**sr, "violation_fraction": _fraction([r["sr_value"] > VERDICT_THRESHOLD for r in recs if r.get("sr_value") is not None])}
        for c in CRITERIA:
            st = _stats(r.get(f"{c}_value") for r in recs)
            if st:
                crit[c] = {**st, "violation_fraction": _fraction([r.get(f"{c}_violated") for r in recs])}
        group = {"mu": mu, "n_settings": n, "records": len(recs), "excluded_records": skipped.get((mu, n), 0), "asr_status_counts": dict(sorted(statuses.items(), key=lambda kv: str(kv[0]))), "criteria": crit}
        t = _stats(r.get("t") for r in recs)
        if t:
            group["t"] = t
        raw = [r.get("raw_asr_status") for r in recs if r.get("raw_asr_status") is not None]
        if raw:
            group["raw_asr_unbounded_fraction"] = float(np.mean([s == "unbounded" for s in raw]))
        out.append(group)
    return {"groups": out}


def summary_text(result: ResultSet) -> str:
    doc = {"config": result.config.to_dict(), **summarise(result.records)}
    return json.dumps(round_sig(doc), indent=2, sort_keys=False, allow_nan=False, default=str) + "\n"


# --- SVG -------------------------------------------------------------------

W, H, PAD = 640, 400, 56


def _svg(body: list[str], title: str) -> str:
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD / 2}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{PAD}" y2="{PAD / 2}" stroke="black"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _sx(v, lo, hi):
    return PAD + (v - lo) / ((hi - lo) or 1.0) * (W - 1.5 * PAD)


def _sy(v, lo, hi):
    return H - PAD - (v - lo) / ((hi - lo) or 1.0) * (H - 1.5 * PAD)


def histogram_svg(values, title: str, xlabel: str, bins: int = 30) -> str:
    vals = np.asarray([v for v in values if v is not None], dtype=float)
    body = [f'<text x="{W / 2:.1f}" y="{H - 16}" text-anchor="middle">{xlabel}</text>']
    if vals.size:
        lo, hi = float(vals.min()), float(vals.max())
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5e-3, hi + 0.5e-3
        counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
        top = max(int(counts.max()), 1)
        for c, a, b in zip(counts, edges[:-1], edges[1:]):
            x0, x1 = _sx(a, lo, hi), _sx(b, lo, hi)
            y = _sy(c, 0, top)
            body.append(f'<rect x="{x0:.2f}" y="{y:.2f}" width="{x1 - x0:.2f}" height="{H - PAD - y:.2f}" fill="#4a7ab5" stroke="white"/>')
        for v in (lo, (lo + hi) / 2, hi):
            body.append(f'<text x="{_sx(v, lo, hi):.2f}" y="{H - PAD + 16}" text-anchor="middle">{v:.4g}</text>')
        body.append(f'<text x="{PAD - 6}" y="{_sy(top, 0, top) + 4:.2f}" text-anchor="end">{top}</text>')
    return _svg(body, title)


def bars_svg(summary: dict) -> str:
    """One bar per criterion per settings count (violation fraction in percent)."""
    names = ["ASR", "SR", *CRITERIA]
    groups = [g for g in summary["groups"]]
    present = [n for n in names if any(n in g["criteria"] for g in groups)]
    body = []
    slot = (W - 1.5 * PAD) / max(len(present), 1)
    width = slot * 0.8 / max(len(groups), 1)
    colours = ["#4a7ab5", "#d9822b", "#5a9e5a", "#a05195"]
    for i, name in enumerate(present):
        body.append(f'<text x="{PAD + slot * (i + 0.5):.2f}" y="{H - PAD + 16}" text-anchor="middle">{name}</text>')
        for j, g in enumerate(groups):
            frac = g["criteria"].get(name, {}).get("violation_fraction")
            if frac is None:
                continue
            x = PAD + slot * i + slot * 0.1 + width * j
            y = _sy(100 * frac, 0, 100)
            body.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{width:.2f}" height="{H - PAD - y:.2f}" fill="{colours[j % 4]}"/>')
            body.append(f'<text x="{x + width / 2:.2f}" y="{y - 4:.2f}" text-anchor="middle" font-size="10">{100 * frac:.1f}</text>')
    for j, g in enumerate(groups):
        body.append(f'<rect x="{W - 150}" y="{36 + 16 * j}" width="10" height="10" fill="{colours[j % 4]}"/>')
        body.append(f'<text x="{W - 134}" y="{45 + 16 * j}">{g["n_settings"]} settings, mu={g["mu"]}</text>')
    for v in (0, 50, 100):
        body.append(f'<text x="{PAD - 6}" y="{_sy(v, 0, 100) + 4:.2f}" text-anchor="end">{v}%</text>')
    return _svg(body, "Probability of violation")


def sweep_svg(summary: dict) -> str:
    """Mean ASR against mu, one polyline per settings count."""
    series: dict = {}
    for g in summary["groups"]:
        mean = g["criteria"]["ASR"].get("mean")
        if mean is not None:
            series.setdefault(g["n_settings"], []).append((g["mu"], mean))
    body = [f'<text x="{W / 2:.1f}" y="{H - 16}" text-anchor="middle">mu</text>']
    allv = [v for pts in series.values() for _, v in pts] or [0.0]
    top = max(max(allv), 1e-6)
    colours = ["#4a7ab5", "#d9822b"]
    for j, (n, pts) in enumerate(sorted(series.items(), reverse=True)):
        path = " ".join(f"{_sx(mu, 0, 1):.2f},{_sy(v, 0, top):.2f}" for mu, v in pts)
        body.append(f'<polyline points="{path}" fill="none" stroke="{colours[j % 2]}" stroke-width="2"/>')
        body.append(f'<text x="{W - 150}" y="{45 + 16 * j}" fill="{colours[j % 2]}">{n} settings</text>')
    for v in (0, 0.5, 1):
        body.append(f'<text x="{_sx(v, 0, 1):.2f}" y="{H - PAD + 16}" text-anchor="middle">{v}</text>')
    body.append(f'<text x="{PAD - 6}" y="{_sy(top, 0, top) + 4:.2f}" text-anchor="end">{top:.3g}</text>')
    return _svg(body, "Mean ASR against the Werner parameter")


def emit_reports(result: ResultSet, directory, formats=FORMATS) -> list[Path]:
    """Write the requested formats into ``directory`` and return the paths."""
    unknown = [f for f in formats if f not in FORMATS]
    if unknown:
        raise DomainError(f"unknown report format(s) {unknown}; choose from {list(FORMATS)}")
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        (out / "results.csv").write_text(csv_text(result.records))
        written.append(out / "results.csv")
    summary = summarise(result.records)
    if "json" in formats:
        (out / "summary.json").write_text(summary_text(result))
        written.append(out / "summary.json")
    if "svg" in formats:
        mode = result.config.mode
        kept = [r for r in result.records if not r.get("excluded")]
        charts = {}
        if mode == "violation-bars":
            charts["bars.svg"] = bars_svg(round_sig(summary))
        elif mode == "sweep-mu":
            charts["sweep.svg"] = sweep_svg(round_sig(summary))
        else:
            charts["histogram.svg"] = histogram_svg([r.get("asr_value") for r in kept], "Adapted steering robustness", "ASR")
        if any(r.get("t") is not None for r in kept):
            charts["t_histogram.svg"] = histogram_svg([r.get("t") for r in kept], "Signalling robustness", "t")
        for name, text in charts.items():
            (out / name).write_text(text)
            written.append(out / name)
    return written
