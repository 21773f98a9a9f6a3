"""Seedable demo pools and simulated workers for the study service.

Used by the test suite, the UI contract fixtures, and `dyneval study demo`
smoke runs. The simulated answer builders read the server-side page
records, so they can answer reliability questions correctly (or miss a
controlled number of them).
"""

from __future__ import annotations

import json
from typing import Any

from .store import DIMENSIONS, StudyStore


def demo_payload_pairs(n_prompts: int = 3, models: int = 10) -> list[dict[str, Any]]:
    """45 inter-model style pairs per prompt over one video per model."""
    pairs = []
    for p in range(n_prompts):
        vids = [f"p{p:03d}_m{m}" for m in range(models)]
        for i in range(models):
            for j in range(i + 1, models):
                pairs.append(
                    {
                        "prompt_id": f"p{p:03d}",
                        "video_a": vids[i],
                        "video_b": vids[j],
                        "url_a": f"/videos/{vids[i]}.mp4",
                        "url_b": f"/videos/{vids[j]}.mp4",
                    }
                )
    return pairs


def _opaque_url(*parts: object) -> str:
    # served video names must not hint at a page's role
    import hashlib

    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).hexdigest()
    return f"/videos/clip-{digest[:10]}.mp4"


def demo_gold_pairs(n: int = 3) -> list[dict[str, Any]]:
    return [
        {
            "gold_id": f"gold-{i}",
            "url_a": _opaque_url("curated", i, "a"),
            "url_b": _opaque_url("curated", i, "b"),
            "answers": {"background": "a", "foreground": "a"},
            "mcq": {
                "text": "Which animal appears in both videos?",
                "options": ["dog", "horse", "turtle"],
                "answer": "dog",
            },
        }
        for i in range(n)
    ]


def demo_sanity_items(n: int = 2) -> list[dict[str, Any]]:
    return [
        {
            "sanity_id": f"sanity-{i}",
            "url_a": _opaque_url("content", i, "a"),
            "url_b": _opaque_url("content", i, "b"),
            "mcqs": [
                {
                    "text": "What is the scene setting?",
                    "options": ["indoor", "outdoor-land", "outdoor-water"],
                    "answer": "indoor",
                },
                {
                    "text": "How many subjects are present?",
                    "options": ["one", "two", "many"],
                    "answer": "one",
                },
            ],
        }
        for i in range(n)
    ]


def demo_qualification_battery() -> dict[str, Any]:
    return {
        "mcqs": [
            {
                "question_id": f"mcq-{i}",
                "text": f"Instruction check {i}: pick option A.",
                "options": ["A", "B", "C"],
                "answer": "A",
            }
            for i in range(10)
        ],
        "gold_pairs": [
            {
                "pair_id": f"qual-gold-{i}",
                "url_a": _opaque_url("qualification", i, "a"),
                "url_b": _opaque_url("qualification", i, "b"),
                "dimension": DIMENSIONS[i % 2],
                "answer": "1",
            }
            for i in range(3)
        ],
    }


def seed_demo_store(store: StudyStore, n_prompts: int = 3) -> None:
    store.add_payload_pairs(demo_payload_pairs(n_prompts=n_prompts))
    store.add_gold_pairs(demo_gold_pairs())
    store.add_sanity_items(demo_sanity_items())
    store.set_qualification_battery(demo_qualification_battery())


def qualification_answers(correct_mcqs: int = 10, correct_golds: int = 3) -> dict[str, Any]:
    battery = demo_qualification_battery()
    mcq_answers = {}
    for i, q in enumerate(battery["mcqs"]):
        right = q["answer"]
        wrong = next(o for o in q["options"] if o != right)
        mcq_answers[q["question_id"]] = right if i < correct_mcqs else wrong
    gold_answers = {}
    for i, g in enumerate(battery["gold_pairs"]):
        right = g["answer"]
        gold_answers[g["pair_id"]] = right if i < correct_golds else ("2" if right == "1" else "1")
    return {"mcq_answers": mcq_answers, "gold_answers": gold_answers}


def _server_pages(store: StudyStore, hit_id: str) -> list[dict[str, Any]]:
    row = store._conn.execute(
        "SELECT pages FROM hits WHERE hit_id = ?", (hit_id,)
    ).fetchone()
    if row is None:
        raise KeyError(hit_id)
    return json.loads(row["pages"])


def simulated_answers(
    store: StudyStore, hit_id: str, wrong_reliability: int = 0
) -> dict[str, str]:
    """Answers for every question of a HIT, correct on reliability checks
    except for ``wrong_reliability`` of them.

    Payload answers always pick the canonical 'a' video (mapped through the
    page's display order), so repeats agree with their originals unless
    deliberately broken.
    """
    pages = _server_pages(store, hit_id)
    answers: dict[str, str] = {}
    remaining_wrong = wrong_reliability

    def display_for(canonical: str, swapped: bool) -> str:
        if canonical == "a":
            return "1" if not swapped else "2"
        return "2" if not swapped else "1"

    for page in pages:
        for q in page["questions"]:
            qid = q["question_id"]
            if q["kind"] == "mcq":
                correct = q.get("answer")
                if correct is None:
                    answers[qid] = q["options"][0]
                elif remaining_wrong > 0:
                    answers[qid] = next(o for o in q["options"] if o != correct)
                    remaining_wrong -= 1
                else:
                    answers[qid] = correct
                continue
            if page["role"] == "gold":
                canonical = q["answer"]
                if remaining_wrong > 0:
                    canonical = "b" if canonical == "a" else "a"
                    remaining_wrong -= 1
            elif page["role"] == "repeat":
                canonical = "a"
                if remaining_wrong > 0:
                    canonical = "b"  # disagree with the original payload answer
                    remaining_wrong -= 1
            else:
                canonical = "a"
            answers[qid] = display_for(canonical, page["swapped"])
    if remaining_wrong > 0:
        raise ValueError("not enough reliability questions to spoil")
    return answers
