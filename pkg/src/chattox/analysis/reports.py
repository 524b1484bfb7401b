"""Structured (JSON) and aligned-text reports over a labeled corpus."""

from __future__ import annotations

import json
import math
from typing import Mapping

from ..errors import DegenerateSplit, GroupTooSmall, UnitTooSmall
from ..ingest import GENRE_DISPLAY, Genre
from ..taxonomy import CATEGORIES, subclasses_of
from .metrics import (
    cooccurrence,
    high_low_comparison,
    label_counts,
    pairwise_distribution_tests,
    toxicity_ratio,
)
from .view import LabeledCorpusView

NOTES = [
    "toxic ratio denominators include pre-labeled and bot messages; invalid outputs never count as toxic",
    "high/low split threshold: arithmetic mean of per-stream toxic ratios, ties go to high",
    "high/low comparison covers all eight subclasses",
]


def _pct(x: float) -> float:
    return round(x, 2)


def prevalence_table(view: LabeledCorpusView, level: str, group_by: str) -> dict:
    out = {}
    for slot in ("primary", "secondary", "combined"):
        counts, n_toxic = label_counts(view, level, slot, group_by)
        table: dict[str, dict] = {}
        for (g, lab), c in counts.items():
            table.setdefault(g, {"n_toxic": n_toxic[g], "counts": {}, "percent": {}})
            table[g]["counts"][str(lab)] = c
            table[g]["percent"][str(lab)] = _pct(100.0 * c / n_toxic[g]) if n_toxic[g] else 0.0
        out[slot] = table
    return out


def analysis_record(view: LabeledCorpusView, group_by: str) -> dict:
    ratios = toxicity_ratio(view, group_by)
    return {
        "group_by": group_by,
        "toxicity_ratio": {g: r.to_record() for g, r in sorted(ratios.items())},
        "prevalence": {
            "category": prevalence_table(view, "category", group_by),
            "subclass": prevalence_table(view, "subclass", group_by),
        },
    }


def cooccurrence_record(view: LabeledCorpusView) -> dict:
    out = {}
    for level in ("subclass", "category"):
        m = cooccurrence(view, level)
        out[level] = {
            **m.to_record(),
            "n_toxic": m.n_toxic,
            "containing_percent": {str(lab): _pct(100 * m.containing_share(lab)) for lab in m.labels},
        }
    return out


def full_report(view: LabeledCorpusView, *, n_perm: int | None, seed: int, metric: str = "bray_curtis",
                alpha: float = 0.05, manifest: Mapping | None = None) -> dict:
    report = {
        "manifest": dict(manifest or {}),
        "notes": NOTES,
        "overall": analysis_record(view, "all"),
        "games": analysis_record(view, "game"),
        "genres": analysis_record(view, "genre"),
        "cooccurrence": cooccurrence_record(view),
    }
    try:
        report["high_low"] = high_low_comparison(view, alpha).to_record()
    except DegenerateSplit as e:
        report["high_low"] = {"error": str(e)}
    for unit in ("game", "genre"):
        try:
            report[f"pairwise_{unit}s"] = pairwise_distribution_tests(
                view, unit, n_perm=n_perm, seed=seed, metric=metric, alpha=alpha, skip_small=True).to_record()
        except (UnitTooSmall, GroupTooSmall) as e:
            report[f"pairwise_{unit}s"] = {"error": str(e)}
    return report


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(record: Mapping) -> str:
    """Canonical JSON: sorted keys, no NaN/inf literals, trailing newline."""
    return json.dumps(_clean(record), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


# -- text rendering ------------------------------------------------------------

def render_ratio_table(record: dict, title: str = "Relative amount of toxic chat messages (%)") -> str:
    """Two side-by-side (name, value) columns sorted by value, like a per-game table."""
    rows = sorted(record["toxicity_ratio"].values(), key=lambda r: (-r["percent"], r["group"]))
    half = math.ceil(len(rows) / 2)
    left, right = rows[:half], rows[half:]
    w = max([len(r["group"]) for r in rows] + [4])
    lines = [title, f"{'Name':<{w}}  {'Value':>6}   {'Name':<{w}}  {'Value':>6}"]
    for i, a in enumerate(left):
        line = f"{a['group']:<{w}}  {a['percent']:>6.2f}"
        if i < len(right):
            b = right[i]
            line += f"   {b['group']:<{w}}  {b['percent']:>6.2f}"
        lines.append(line.rstrip())
    return "\n".join(lines)


def render_prevalence_table(genre_record: dict) -> str:
    """Categories with their subclasses as rows; primary then secondary columns per group."""
    cat_tab = genre_record["prevalence"]["category"]
    sub_tab = genre_record["prevalence"]["subclass"]
    groups = [g.value for g in Genre if g.value in cat_tab["primary"]] or sorted(cat_tab["primary"])
    names = [GENRE_DISPLAY.get(Genre(g), g) if g in {x.value for x in Genre} else g for g in groups]
    label_w = 34
    col_w = max([len(n) for n in names] + [6])
    header = f"{'':<{label_w}}" + "".join(f" {n:>{col_w}}" for n in names) * 2
    slots = f"{'':<{label_w}} {'Primary label (%)':<{(col_w + 1) * len(names) - 1}} Secondary label (%)"
    lines = [slots, header]

    def row(label, tab, key):
        cells = [tab[slot][g]["percent"][key] for slot in ("primary", "secondary") for g in groups]
        return f"{label:<{label_w}}" + "".join(f" {c:>{col_w}.2f}" for c in cells)

    for cat in CATEGORIES:
        subs = subclasses_of(cat)
        if len(subs) > 1:
            # the binary indicator: any subclass of the category in that slot
            lines.append(row(f"{cat.display_name} (overall)", cat_tab, cat.value))
            for s in subs:
                lines.append(row(f"  {s.display_name}", sub_tab, s.value))
        else:
            lines.append(row(cat.display_name, cat_tab, cat.value))
    return "\n".join(lines)


def render_report(report: dict) -> str:
    parts = []
    man = report.get("manifest") or {}
    if man:
        parts.append("manifest: " + ", ".join(f"{k}={v}" for k, v in sorted(man.items())))
    parts.extend(f"note: {n}" for n in report.get("notes", []))
    overall = report["overall"]["toxicity_ratio"].get("all")
    if overall:
        parts.append(f"\nOverall: {overall['percent']:.2f}% toxic ({overall['toxic']} of {overall['total']}), "
                     f"{overall['invalid']} invalid")
    parts.append("\n" + render_ratio_table(report["games"], "Relative amount of toxic chat messages per game (%)"))
    if report["genres"]["toxicity_ratio"]:
        parts.append("\n" + render_ratio_table(report["genres"], "Relative amount of toxic chat messages per genre (%)"))
        parts.append("\nPrevalence of toxicity labels among toxic messages by genre")
        parts.append(render_prevalence_table(report["genres"]))
    co = report["cooccurrence"]["category"]
    parts.append("\nToxic messages containing each category (%): " + ", ".join(
        f"{k} {v:.2f}" for k, v in co["containing_percent"].items()))
    hl = report.get("high_low", {})
    if "rows" in hl:
        parts.append(f"\nHigh vs low toxicity streams (threshold {100 * hl['threshold']:.2f}%, "
                     f"{hl['n_high']} high / {hl['n_low']} low)")
        for r in hl["rows"]:
            parts.append(f"  {r['subclass']:<24} {r['route']:<10} {r['formatted']}")
    for unit in ("games", "genres"):
        pw = report.get(f"pairwise_{unit}", {})
        if "rows" in pw:
            parts.append(f"\nPairwise PERMANOVA / PERMDISP between {unit} ({pw['metric']})")
            for r in pw["rows"]:
                flag = "  dispersion caveat" if r["dispersion_caveat"] else ""
                parts.append(f"  {r['unit_a']} vs {r['unit_b']}: pseudo-F={_fmt(r['permanova']['statistic'])} "
                             f"p={r['permanova']['p']:.4f}; dispersion F={_fmt(r['permdisp']['statistic'])} "
                             f"p={r['permdisp']['p']:.4f}{flag}")
    return "\n".join(parts) + "\n"


def _fmt(x) -> str:
    return f"{x:.2f}" if isinstance(x, (int, float)) else str(x)

