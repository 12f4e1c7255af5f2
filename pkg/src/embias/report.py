"""Serialize audit and comparison results to canonical JSON and Markdown.

The JSON form is the machine artifact: full float precision, stable key
order, one trailing newline, UTF-8. Rendering the same inputs twice gives
byte-identical output. The Markdown form mirrors the JSON document at two
decimal places for human review.
"""

from __future__ import annotations

import json
from typing import Mapping, Sequence

from ._data import read_data_text
from .debias import ComparisonRow
from .lexicon import ResolvedTest
from .weat import TestResult

REPORT_VERSION = 1


def report_schema() -> dict:
    """The bundled JSON Schema for report documents."""
    return json.loads(read_data_text("report_schema.json"))


def run_config(
    *,
    embeddings: str,
    suite: str,
    oov_policy: str,
    normalize: bool,
    seed: int,
    sample_count: int,
    exact_threshold: int,
    mode: str | None,
    stddev_convention: str,
    tie_policy: str,
    extra: Mapping | None = None,
) -> dict:
    """Echo of every setting that shapes the numbers, in fixed key order.

    Parallelism is excluded on purpose: job count must never change output.
    """
    config = {
        "embeddings": embeddings,
        "suite": suite,
        "oov_policy": oov_policy,
        "normalize": normalize,
        "seed": seed,
        "sample_count": sample_count,
        "exact_threshold": exact_threshold,
        "mode": mode,
        "stddev_convention": stddev_convention,
        "tie_policy": tie_policy,
    }
    if extra:
        config.update(extra)
    return config


def _effect(result: TestResult):
    return None if result.degenerate else result.effect_size


def _measurement(result: TestResult) -> dict:
    return {
        "statistic": result.statistic,
        "effect_size": _effect(result),
        "p_value": result.p_value,
        "degenerate": result.degenerate,
        "mode": result.mode,
        "permutations_used": result.permutations_used,
        "oov": [[label, word] for label, word in result.oov],
        "truncated": [[label, word] for label, word in result.truncated],
    }


def audit_doc(
    resolved: Sequence[ResolvedTest],
    results: Sequence[TestResult],
    config: Mapping,
) -> dict:
    """Build an audit report document from aligned resolutions and results."""
    if len(resolved) != len(results):
        raise ValueError("resolved tests and results must align")
    rows = []
    for res, out in zip(resolved, results):
        test = res.test
        row = {
            "name": test.name,
            "category": test.category,
            "variant": test.variant,
            "reconstructed": test.reconstructed,
            "notes": test.notes,
            "statistic": out.statistic,
            "effect_size": _effect(out),
            "p_value": out.p_value,
            "degenerate": out.degenerate,
            "mode": out.mode,
            "permutations_used": out.permutations_used,
            "oov": [[label, word] for label, word in out.oov],
            "truncated": [[label, word] for label, word in out.truncated],
            "composition_oov": list(out.composition_oov),
            "lists": {
                "x": {"label": test.x.label, "items": list(res.x_words)},
                "y": {"label": test.y.label, "items": list(res.y_words)},
                "a": {"label": test.a.label, "items": list(res.a_words)},
                "b": {"label": test.b.label, "items": list(res.b_words)},
            },
        }
        rows.append(row)
    return {
        "report_version": REPORT_VERSION,
        "kind": "audit",
        "config": dict(config),
        "results": rows,
    }


def comparison_doc(rows: Sequence[ComparisonRow], config: Mapping) -> dict:
    """Build a before/after comparison document."""
    out = []
    for row in rows:
        test = row.test
        out.append({
            "name": test.name,
            "category": test.category,
            "variant": test.variant,
            "reconstructed": test.reconstructed,
            "notes": test.notes,
            "before": _measurement(row.before),
            "after": _measurement(row.after),
        })
    return {
        "report_version": REPORT_VERSION,
        "kind": "comparison",
        "config": dict(config),
        "results": out,
    }


def canonical_json(doc: Mapping) -> bytes:
    """Stable JSON bytes: 2-space indent, unescaped UTF-8, trailing newline."""
    return (json.dumps(doc, ensure_ascii=False, indent=2, allow_nan=False) + "\n").encode("utf-8")


def _config_lines(config: Mapping) -> list[str]:
    lines = []
    for key, value in config.items():
        if value is None:
            value = "auto"
        lines.append(f"- {key}: {value}")
    return lines


def _fmt_effect(effect, p_value, degenerate: bool) -> str:
    if degenerate or effect is None:
        return "degenerate"
    return f"{effect:.2f} ({p_value:.2f})"


def _row_flags(row: Mapping) -> str:
    flags = []
    if row.get("reconstructed"):
        flags.append("reconstructed")
    oov = row.get("oov", [])
    if oov:
        flags.append(f"oov:{len(oov)}")
    if row.get("truncated"):
        flags.append(f"truncated:{len(row['truncated'])}")
    if row.get("composition_oov"):
        flags.append(f"composition-oov:{len(row['composition_oov'])}")
    return " ".join(flags)


def _name_cell(row: Mapping) -> str:
    # measured-effects rows are emphasized: their direction is the finding,
    # not a value judgement
    if row["category"] == "ME":
        return f"*{row['name']}*"
    return row["name"]


def audit_markdown(doc: Mapping) -> str:
    """Human-readable mirror of an audit document (2 decimal places)."""
    if doc.get("kind") != "audit":
        raise ValueError("not an audit document")
    lines = ["# Embedding association audit", ""]
    lines += _config_lines(doc["config"])
    lines += [
        "",
        "| test | category | variant | effect size (p) | statistic | splits | flags |",
        "| --- | --- | --- | --- | --- | --- | --- |",
    ]
    for row in doc["results"]:
        cells = [
            _name_cell(row),
            row["category"],
            row["variant"],
            _fmt_effect(row["effect_size"], row["p_value"], row["degenerate"]),
            f"{row['statistic']:.2f}",
            f"{row['permutations_used']} ({row['mode']})",
            _row_flags(row),
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def comparison_markdown(doc: Mapping) -> str:
    """Human-readable mirror of a comparison document (2 decimal places)."""
    if doc.get("kind") != "comparison":
        raise ValueError("not a comparison document")
    lines = ["# Debiasing comparison", ""]
    lines += _config_lines(doc["config"])
    lines += [
        "",
        "| test | category | variant | before d (p) | after d (p) | flags |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for row in doc["results"]:
        before, after = row["before"], row["after"]
        flags = []
        if row.get("reconstructed"):
            flags.append("reconstructed")
        if before.get("oov") or after.get("oov"):
            flags.append(f"oov:{max(len(before['oov']), len(after['oov']))}")
        cells = [
            _name_cell(row),
            row["category"],
            row["variant"],
            _fmt_effect(before["effect_size"], before["p_value"], before["degenerate"]),
            _fmt_effect(after["effect_size"], after["p_value"], after["degenerate"]),
            " ".join(flags),
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
