"""Server side of the UI wire-format contract.

The frontend fixtures were generated deterministically (scripts/
gen_ui_fixtures.py builds the store; frontend/scripts/
build-fixture-response.ts drives the real session code over the committed
HIT payload). This suite rebuilds the identical store, replays the
UI-built submission against the live app, and checks acceptance plus the
exported vote count.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from dyneval.study import create_app

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))
from gen_ui_fixtures import FIXTURE_SEED, WORKER_ID, build_fixture_store  # noqa: E402

FIXTURES = Path(__file__).resolve().parent.parent / "frontend" / "fixtures"

pytestmark = pytest.mark.acceptance


def fixture(name: str):
    path = FIXTURES / name
    assert path.exists(), (
        f"missing {path}; regenerate with scripts/gen_ui_fixtures.py and "
        "`npm run fixtures` in frontend/"
    )
    return json.loads(path.read_text())


def test_ui_response_round_trips_through_live_server():
    store, hit = build_fixture_store()
    committed_hit = fixture("hit_payload.json")
    assert hit == committed_hit, (
        "fixture HIT diverged from the deterministic store; regenerate the "
        "frontend fixtures"
    )

    client = TestClient(create_app(store, admin_token="contract"))
    response_payload = fixture("response_payload.json")
    assert response_payload["worker_id"] == WORKER_ID

    receipt = client.post(
        f"/hit/{hit['hit_id']}/response", json=response_payload
    )
    assert receipt.status_code == 200, receipt.text
    body = receipt.json()
    assert body["accepted"] is True
    assert body["reliability_score"] == 1.0

    export = client.get(
        "/export/annotations", headers={"Authorization": "Bearer contract"}
    ).json()
    assert len(export) == 30  # 15 payload pairs x 2 dimensions
    assert all(len(entry["votes"]) == 1 for entry in export)
    assert {e["dimension"] for e in export} == {"background", "foreground"}


def test_ui_fixture_answers_cover_exactly_the_served_questions():
    committed_hit = fixture("hit_payload.json")
    response_payload = fixture("response_payload.json")
    served = sorted(
        q["question_id"] for page in committed_hit["pages"] for q in page["questions"]
    )
    assert sorted(response_payload["answers"]) == served


def test_fixture_seed_is_stable():
    _, hit = build_fixture_store()
    _, again = build_fixture_store()
    assert hit == again
    assert FIXTURE_SEED == 42
