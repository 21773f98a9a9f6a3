#!/usr/bin/env python3
"""Regenerate the frontend wire-format fixtures from a seeded study store.

The store construction is fully deterministic, so the server-side contract
test (tests/test_contract_ui.py) can rebuild the identical store and accept
the committed UI-built response payload. Run from the repo root:

    python3 scripts/gen_ui_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from dyneval.study import StudyStore
from dyneval.study.demo import (
    qualification_answers,
    seed_demo_store,
    simulated_answers,
)

FIXTURE_SEED = 42
WORKER_ID = "ui-worker"


def build_fixture_store() -> tuple[StudyStore, dict]:
    store = StudyStore()
    seed_demo_store(store, n_prompts=1)
    store.grade_qualification(WORKER_ID, **qualification_answers(10, 3))
    hit = store.assemble_hit(WORKER_ID, seed=FIXTURE_SEED)
    return store, hit


def main() -> None:
    out = Path(__file__).resolve().parent.parent / "frontend" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    store, hit = build_fixture_store()

    (out / "config.json").write_text(
        json.dumps(
            {"dimensions": ["background", "foreground"], "videos_base": "/videos", "pages_per_hit": 20},
            indent=2,
        )
        + "\n"
    )
    (out / "qualification_form.json").write_text(
        json.dumps(store.qualification_form(), indent=2, sort_keys=True) + "\n"
    )
    (out / "hit_payload.json").write_text(json.dumps(hit, indent=2, sort_keys=True) + "\n")
    # Display-space answers a careful worker would give (the UI never sees
    # roles or keys; this stands in for the worker's judgment).
    key = simulated_answers(store, hit["hit_id"])
    (out / "answer_key.json").write_text(json.dumps(key, indent=2, sort_keys=True) + "\n")
    print(f"wrote fixtures for hit {hit['hit_id']} to {out}")


if __name__ == "__main__":
    main()
