"""Pair construction and every preference statistic the benchmark reports.

Pairs are unordered and keyed canonically by (prompt, lexicographically
ordered video ids); vote lists loaded in the opposite order are flipped at
the boundary, which makes all statistics invariant to swapping the two
sides of any record.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .foreground import ForegroundScore, fg_pair_verdict
from .types import DatasetManifest

PairKey = tuple[str, str, str]  # (prompt_id, low video id, high video id)

DIMENSIONS = ("background", "foreground")


class HarnessError(ValueError):
    pass


@dataclass(frozen=True)
class VideoPair:
    prompt_id: str
    video_a: str
    video_b: str
    pair_type: str  # "inter" or "intra"

    def __post_init__(self) -> None:
        if self.video_a == self.video_b:
            raise HarnessError("a pair needs two distinct videos")
        if self.pair_type not in ("inter", "intra"):
            raise HarnessError(f"bad pair_type {self.pair_type!r}")
        if self.video_a > self.video_b:  # canonical unordered identity
            a, b = self.video_a, self.video_b
            object.__setattr__(self, "video_a", b)
            object.__setattr__(self, "video_b", a)

    @property
    def key(self) -> PairKey:
        return (self.prompt_id, self.video_a, self.video_b)


@dataclass
class HumanVotes:
    votes: list[str]

    def __post_init__(self) -> None:
        bad = [v for v in self.votes if v not in ("a", "b")]
        if bad:
            raise HarnessError(f"votes must be 'a' or 'b', got {bad}")

    @property
    def majority(self) -> str:
        a = self.votes.count("a")
        b = self.votes.count("b")
        if a > b:
            return "a"
        if b > a:
            return "b"
        return "tie"

    @property
    def full_agreement(self) -> bool:
        return len(set(self.votes)) == 1

    def flipped(self) -> "HumanVotes":
        return HumanVotes(["a" if v == "b" else "b" for v in self.votes])


@dataclass(frozen=True)
class MetricVerdict:
    pair: VideoPair
    chosen: str
    score_a: float
    score_b: float


@dataclass
class RankingEntry:
    video_id: str
    wins: int
    comparisons: int

    @property
    def win_ratio(self) -> float:
        return self.wins / self.comparisons if self.comparisons else 0.0


@dataclass
class RankingTable:
    prompt_id: str
    entries: list[RankingEntry]
    partial: bool = False

    @property
    def best_video(self) -> str:
        return self.entries[0].video_id

    @property
    def total_wins(self) -> int:
        return sum(e.wins for e in self.entries)


def _stable_int(*parts: object) -> int:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def build_pairs(
    manifest: DatasetManifest, seed: int = 0
) -> tuple[list[VideoPair], dict]:
    """All intra-model pairs plus inter-model pairs over seeded representatives.

    Per prompt: every model contributes its C(3,2) same-model pairs, then
    one seeded random generation per model forms all cross-model pairs.
    Prompts where some model lacks exactly 3 generations are skipped and
    reported.
    """
    pairs: list[VideoPair] = []
    skipped: list[dict] = []
    models = sorted(manifest.models)
    for prompt in sorted(manifest.prompts, key=lambda p: p.prompt_id):
        per_model = {m: manifest.videos_for(m, prompt.prompt_id) for m in models}
        bad = {m: len(v) for m, v in per_model.items() if len(v) != 3}
        if bad:
            skipped.append({"prompt_id": prompt.prompt_id, "generations": bad})
            continue
        for m in models:
            vids = [r.video_id for r in per_model[m]]
            for i in range(3):
                for j in range(i + 1, 3):
                    pairs.append(
                        VideoPair(prompt.prompt_id, vids[i], vids[j], "intra")
                    )
        rng = np.random.default_rng(_stable_int(seed, prompt.prompt_id))
        reps = [per_model[m][int(rng.integers(3))].video_id for m in models]
        for i in range(len(reps)):
            for j in range(i + 1, len(reps)):
                pairs.append(VideoPair(prompt.prompt_id, reps[i], reps[j], "inter"))
    return pairs, {"skipped_prompts": skipped}


def verdict_from_scores(
    score_a: float, score_b: float, video_a: str, video_b: str
) -> str:
    """Higher score wins; exact ties go to the lexicographically smaller id."""
    if not (np.isfinite(score_a) and np.isfinite(score_b)):
        raise HarnessError("scores must be finite")
    if score_a > score_b:
        return "a"
    if score_b > score_a:
        return "b"
    return "a" if video_a <= video_b else "b"


def background_verdicts(
    pairs: Iterable[VideoPair], scores: dict[str, float]
) -> dict[PairKey, MetricVerdict]:
    out = {}
    for pair in pairs:
        sa, sb = scores[pair.video_a], scores[pair.video_b]
        out[pair.key] = MetricVerdict(
            pair, verdict_from_scores(sa, sb, pair.video_a, pair.video_b), sa, sb
        )
    return out


def foreground_verdicts(
    pairs: Iterable[VideoPair], scores: dict[str, ForegroundScore]
) -> dict[PairKey, MetricVerdict]:
    """Foreground pairs route through the no-object fallback rules."""
    out = {}
    for pair in pairs:
        sa, sb = scores[pair.video_a], scores[pair.video_b]
        chosen = fg_pair_verdict(sa, sb, pair.video_a, pair.video_b)
        out[pair.key] = MetricVerdict(pair, chosen, sa.combined, sb.combined)
    return out


PairPredicate = Callable[[VideoPair, HumanVotes], bool]


def filter_full() -> PairPredicate:
    return lambda pair, votes: True


def filter_full_agreement() -> PairPredicate:
    return lambda pair, votes: votes.full_agreement


def filter_pair_type(pair_type: str) -> PairPredicate:
    return lambda pair, votes: pair.pair_type == pair_type


def filter_motion_mix(labels: dict[str, str], kind: str) -> PairPredicate:
    """kind: "static-dynamic" (exactly one static) or "dynamic-dynamic"."""

    def predicate(pair: VideoPair, votes: HumanVotes) -> bool:
        statics = sum(
            1 for v in (pair.video_a, pair.video_b) if labels.get(v) == "static"
        )
        return statics == 1 if kind == "static-dynamic" else statics == 0

    return predicate


def filter_camera_tag(prompt_tags: dict[str, str], tag: str) -> PairPredicate:
    return lambda pair, votes: prompt_tags.get(pair.prompt_id) == tag


def pairwise_accuracy(
    verdicts: dict[PairKey, MetricVerdict],
    votes: dict[PairKey, HumanVotes],
    predicate: PairPredicate | None = None,
) -> tuple[float, int]:
    """Fraction of filtered pairs where the metric picks the human majority.

    Majority ties are excluded from the denominator. Returns (accuracy,
    denominator).
    """
    predicate = predicate or filter_full()
    missing = [k for k in votes if k not in verdicts]
    if missing:
        raise HarnessError(f"votes without verdicts for {len(missing)} pairs: {missing[:3]}")
    matches = 0
    counted = 0
    for key, vote in votes.items():
        verdict = verdicts[key]
        if not predicate(verdict.pair, vote):
            continue
        majority = vote.majority
        if majority == "tie":
            continue
        counted += 1
        if verdict.chosen == majority:
            matches += 1
    if counted == 0:
        raise HarnessError("no pairs survive the filter")
    return matches / counted, counted


def win_ratios(
    prompt_id: str,
    pairs: Iterable[VideoPair],
    votes: dict[PairKey, HumanVotes],
) -> RankingTable:
    """Per-video win counts over the prompt's inter-model pairs.

    Each video of a complete table appears in 9 pairs; missing majorities
    flag the table partial. Ranking ties break by video id.
    """
    inter = [p for p in pairs if p.prompt_id == prompt_id and p.pair_type == "inter"]
    if not inter:
        raise HarnessError(f"no inter-model pairs for prompt {prompt_id!r}")
    wins: dict[str, int] = {}
    comparisons: dict[str, int] = {}
    partial = False
    for pair in inter:
        for vid in (pair.video_a, pair.video_b):
            wins.setdefault(vid, 0)
            comparisons.setdefault(vid, 0)
        vote = votes.get(pair.key)
        majority = vote.majority if vote is not None else "tie"
        if vote is None or majority == "tie":
            partial = True
            continue
        comparisons[pair.video_a] += 1
        comparisons[pair.video_b] += 1
        winner = pair.video_a if majority == "a" else pair.video_b
        wins[winner] += 1
    entries = [
        RankingEntry(vid, wins[vid], comparisons[vid]) for vid in sorted(wins)
    ]
    entries.sort(key=lambda e: (-e.win_ratio, e.video_id))
    return RankingTable(prompt_id=prompt_id, entries=entries, partial=partial)


def topk_accuracy(
    scores: dict[str, float], tables: Iterable[RankingTable], k: int
) -> float:
    """Fraction of prompts whose human-best video lands in the metric's top k."""
    tables = list(tables)
    if not tables:
        raise HarnessError("no ranking tables")
    n_videos = len(tables[0].entries)
    if not 1 <= k <= n_videos:
        raise HarnessError(f"k must be in [1, {n_videos}], got {k}")
    hits = 0
    for table in tables:
        candidates = [e.video_id for e in table.entries]
        ranked = sorted(candidates, key=lambda v: (-scores[v], v))
        if table.best_video in ranked[:k]:
            hits += 1
    return hits / len(tables)


def model_level_plcc(
    scores: dict[str, float],
    tables: Iterable[RankingTable],
    video_to_model: dict[str, str],
) -> float:
    """Pearson correlation of per-model mean metric score vs mean win ratio."""
    ratio_acc: dict[str, list[float]] = {}
    score_acc: dict[str, list[float]] = {}
    for table in tables:
        for entry in table.entries:
            model = video_to_model[entry.video_id]
            ratio_acc.setdefault(model, []).append(entry.win_ratio)
            score_acc.setdefault(model, []).append(scores[entry.video_id])
    if len(ratio_acc) < 3:
        raise HarnessError("model-level correlation needs at least 3 models")
    models = sorted(ratio_acc)
    human = np.array([np.mean(ratio_acc[m]) for m in models])
    metric = np.array([np.mean(score_acc[m]) for m in models])
    if np.ptp(human) == 0 or np.ptp(metric) == 0:
        raise HarnessError("zero variance on one side of the correlation")
    return float(np.corrcoef(metric, human)[0, 1])


# ---------------------------------------------------------------------------
# Annotation file IO (the wire format the study server exports)
# ---------------------------------------------------------------------------

@dataclass
class AnnotationRecord:
    prompt_id: str
    video_a: str
    video_b: str
    dimension: str
    votes: HumanVotes


def load_annotations(path: str | Path) -> list[AnnotationRecord]:
    """Load annotation records, canonicalizing pair order (votes flip too)."""
    doc = json.loads(Path(path).read_text())
    out = []
    for rec in doc:
        pair = rec["pair"]
        a, b = pair["video_a"], pair["video_b"]
        votes = HumanVotes(list(rec["votes"]))
        if a > b:
            a, b = b, a
            votes = votes.flipped()
        if rec["dimension"] not in DIMENSIONS:
            raise HarnessError(f"unknown dimension {rec['dimension']!r}")
        out.append(
            AnnotationRecord(
                prompt_id=pair["prompt_id"],
                video_a=a,
                video_b=b,
                dimension=rec["dimension"],
                votes=votes,
            )
        )
    return out


def save_annotations(records: list[AnnotationRecord], path: str | Path) -> None:
    doc = [
        {
            "pair": {
                "prompt_id": r.prompt_id,
                "video_a": r.video_a,
                "video_b": r.video_b,
            },
            "dimension": r.dimension,
            "votes": r.votes.votes,
        }
        for r in records
    ]
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def votes_by_key(
    records: Iterable[AnnotationRecord], dimension: str
) -> dict[PairKey, HumanVotes]:
    out: dict[PairKey, HumanVotes] = {}
    for r in records:
        if r.dimension != dimension:
            continue
        key = (r.prompt_id, r.video_a, r.video_b)
        if key in out:
            out[key] = HumanVotes(out[key].votes + r.votes.votes)
        else:
            out[key] = r.votes
    return out
