"""Whole-benchmark evaluation: joins pairs, votes, and metric scores into
the reported statistics (pairwise accuracies per subset, Top-k, model-level
correlation) and writes them as one JSON document plus CSV tables.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .foreground import ForegroundScore
from .harness import (
    AnnotationRecord,
    HarnessError,
    PairPredicate,
    RankingTable,
    VideoPair,
    background_verdicts,
    filter_full,
    filter_full_agreement,
    filter_motion_mix,
    filter_pair_type,
    foreground_verdicts,
    model_level_plcc,
    pairwise_accuracy,
    topk_accuracy,
    votes_by_key,
    win_ratios,
)
from .types import DatasetManifest

FILTER_BUILDERS = ("full", "agreement", "inter", "intra", "static", "dynamic")


@dataclass
class EvaluationInputs:
    manifest: DatasetManifest
    annotations: list[AnnotationRecord]
    background_scores: dict[str, float] = field(default_factory=dict)
    foreground_scores: dict[str, ForegroundScore] = field(default_factory=dict)
    motion_labels: dict[str, str] = field(default_factory=dict)


def _filters(names: list[str], motion_labels: dict[str, str]) -> dict[str, PairPredicate]:
    out: dict[str, PairPredicate] = {}
    for name in names:
        if name == "full":
            out[name] = filter_full()
        elif name == "agreement":
            out[name] = filter_full_agreement()
        elif name in ("inter", "intra"):
            out[name] = filter_pair_type(name)
        elif name == "static":
            out[name] = filter_motion_mix(motion_labels, "static-dynamic")
        elif name == "dynamic":
            out[name] = filter_motion_mix(motion_labels, "dynamic-dynamic")
        else:
            raise HarnessError(f"unknown filter {name!r}; known: {FILTER_BUILDERS}")
    return out


def _pairs_from_annotations(
    annotations: list[AnnotationRecord], video_to_model: dict[str, str]
) -> dict[tuple[str, str, str], VideoPair]:
    """The evaluated pair set is exactly the annotated one; the pair type
    falls out of the manifest (same model = intra)."""
    out: dict[tuple[str, str, str], VideoPair] = {}
    for rec in annotations:
        if rec.video_a not in video_to_model or rec.video_b not in video_to_model:
            raise HarnessError(
                f"annotated videos missing from manifest: {rec.video_a}, {rec.video_b}"
            )
        pair_type = (
            "intra"
            if video_to_model[rec.video_a] == video_to_model[rec.video_b]
            else "inter"
        )
        pair = VideoPair(rec.prompt_id, rec.video_a, rec.video_b, pair_type)
        out[pair.key] = pair
    return out


def evaluate(
    inputs: EvaluationInputs,
    dimensions: list[str] = ["background", "foreground"],
    filter_names: list[str] = ["full", "agreement", "inter", "intra"],
    topk: list[int] = [1, 2, 3, 4, 5],
) -> dict[str, Any]:
    video_to_model = {v.video_id: v.model_id for v in inputs.manifest.videos}
    pairs_by_key = _pairs_from_annotations(inputs.annotations, video_to_model)
    filters = _filters(filter_names, inputs.motion_labels)

    report: dict[str, Any] = {"dimensions": {}}
    for dimension in dimensions:
        votes = votes_by_key(inputs.annotations, dimension)
        if not votes:
            report["dimensions"][dimension] = {"error": "no annotations"}
            continue
        voted_pairs = [pairs_by_key[k] for k in votes]
        if dimension == "background":
            verdicts = background_verdicts(voted_pairs, inputs.background_scores)
            scores = dict(inputs.background_scores)
        else:
            verdicts = foreground_verdicts(voted_pairs, inputs.foreground_scores)
            scores = {v: s.combined for v, s in inputs.foreground_scores.items()}

        pairwise: dict[str, Any] = {}
        for name, predicate in filters.items():
            try:
                accuracy, n = pairwise_accuracy(verdicts, votes, predicate)
                pairwise[name] = {"accuracy": accuracy, "n": n}
            except HarnessError as exc:
                pairwise[name] = {"error": str(exc)}

        tables: list[RankingTable] = []
        for prompt in sorted({p.prompt_id for p in voted_pairs}):
            prompt_pairs = [p for p in voted_pairs if p.prompt_id == prompt]
            if not any(p.pair_type == "inter" for p in prompt_pairs):
                continue
            table = win_ratios(prompt, prompt_pairs, votes)
            if not table.partial:
                tables.append(table)

        topk_report: dict[str, float] = {}
        plcc: float | None = None
        if tables:
            scored_tables = [
                t
                for t in tables
                if all(e.video_id in scores for e in t.entries)
            ]
            if scored_tables:
                n_candidates = min(len(t.entries) for t in scored_tables)
                for k in topk:
                    if k > n_candidates:
                        continue
                    topk_report[str(k)] = topk_accuracy(scores, scored_tables, k)
                try:
                    plcc = model_level_plcc(scores, scored_tables, video_to_model)
                except HarnessError:
                    plcc = None

        report["dimensions"][dimension] = {
            "pairwise": pairwise,
            "topk": topk_report,
            "plcc": plcc,
            "ranking_tables": [
                {
                    "prompt_id": t.prompt_id,
                    "entries": [
                        {"video_id": e.video_id, "wins": e.wins, "win_ratio": e.win_ratio}
                        for e in t.entries
                    ],
                }
                for t in tables
            ],
        }
    return report


def write_report(report: dict[str, Any], out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")

    with open(out / "pairwise.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dimension", "filter", "accuracy", "n"])
        for dimension, block in report["dimensions"].items():
            for name, cell in block.get("pairwise", {}).items():
                if "accuracy" in cell:
                    writer.writerow([dimension, name, f"{cell['accuracy']:.4f}", cell["n"]])

    with open(out / "topk.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dimension", "k", "accuracy"])
        for dimension, block in report["dimensions"].items():
            for k, acc in block.get("topk", {}).items():
                writer.writerow([dimension, k, f"{acc:.4f}"])

    with open(out / "model_plcc.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dimension", "plcc"])
        for dimension, block in report["dimensions"].items():
            if block.get("plcc") is not None:
                writer.writerow([dimension, f"{block['plcc']:.4f}"])
