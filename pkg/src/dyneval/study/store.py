"""Annotation-study state: pools, workers, HIT assembly, scoring, export.

One HIT is 20 pages: 15 payload pairs, 2 repeats of payload pages (video
order swapped, question order reshuffled), 2 gold pages, and 1 sanity
page, interleaved at seeded random positions. Keyed reliability questions
(gold answers, sanity MCQs, repeat self-consistency) gate acceptance at
80%; only accepted responses contribute votes, and only payload pages are
exported.

Everything lives in one embedded sqlite database; assembly and submission
run under a single lock so pairs are never over-served by racing fetches.
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
import threading
from pathlib import Path
from typing import Any

import numpy as np

DIMENSIONS = ("background", "foreground")
DIMENSION_QUESTIONS = {
    "background": "Which video has a more consistent background scene?",
    "foreground": "Which video keeps its foreground subjects/objects more consistent?",
}
PAYLOAD_PAGES = 15
REPEAT_PAGES = 2
GOLD_PAGES = 2
SANITY_PAGES = 1
TOTAL_PAGES = PAYLOAD_PAGES + REPEAT_PAGES + GOLD_PAGES + SANITY_PAGES
VOTES_PER_PAIR = 3
RELIABILITY_MIN, RELIABILITY_MAX = 12, 14
ACCEPT_THRESHOLD = 0.8
HIT_COMPENSATION_USD = 5.0
QUALIFICATION_COMPENSATION_USD = 1.0


class StudyError(RuntimeError):
    pass


class PoolExhausted(StudyError):
    pass


class UnknownWorker(StudyError):
    pass


class NotQualified(StudyError):
    pass


class IncompleteResponse(StudyError):
    """A response with unanswered questions: rejected without scoring."""


_SCHEMA = """
CREATE TABLE IF NOT EXISTS payload_pairs (
    pair_key TEXT PRIMARY KEY,
    prompt_id TEXT NOT NULL,
    video_a TEXT NOT NULL,
    video_b TEXT NOT NULL,
    url_a TEXT NOT NULL,
    url_b TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS gold_pairs (
    gold_id TEXT PRIMARY KEY,
    url_a TEXT NOT NULL,
    url_b TEXT NOT NULL,
    answers TEXT NOT NULL,
    mcq TEXT
);
CREATE TABLE IF NOT EXISTS sanity_items (
    sanity_id TEXT PRIMARY KEY,
    url_a TEXT NOT NULL,
    url_b TEXT NOT NULL,
    mcqs TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS qualification_battery (
    id INTEGER PRIMARY KEY CHECK (id = 1),
    battery TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS workers (
    worker_id TEXT PRIMARY KEY,
    mcq_score INTEGER NOT NULL,
    gold_correct INTEGER NOT NULL,
    passed INTEGER NOT NULL,
    approved_hits INTEGER NOT NULL DEFAULT 0,
    rejected_hits INTEGER NOT NULL DEFAULT 0,
    client_hints TEXT,
    compensation_usd REAL NOT NULL DEFAULT 0.0
);
CREATE TABLE IF NOT EXISTS hits (
    hit_id TEXT PRIMARY KEY,
    worker_id TEXT NOT NULL,
    seed INTEGER NOT NULL,
    state TEXT NOT NULL,
    pages TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS responses (
    hit_id TEXT PRIMARY KEY,
    worker_id TEXT NOT NULL,
    answers TEXT NOT NULL,
    reliability REAL NOT NULL,
    accepted INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS votes (
    vote_id INTEGER PRIMARY KEY AUTOINCREMENT,
    pair_key TEXT NOT NULL,
    dimension TEXT NOT NULL,
    worker_id TEXT NOT NULL,
    hit_id TEXT NOT NULL,
    choice TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS served (
    worker_id TEXT NOT NULL,
    pair_key TEXT NOT NULL,
    PRIMARY KEY (worker_id, pair_key)
);
"""


def _stable_rng(*parts: object) -> np.random.Generator:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _stable_id(prefix: str, *parts: object) -> str:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).hexdigest()
    return f"{prefix}-{digest[:12]}"


class StudyStore:
    def __init__(self, path: str | Path = ":memory:"):
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.executescript(_SCHEMA)
        self._lock = threading.RLock()

    # -- pools -----------------------------------------------------------

    def add_payload_pairs(self, pairs: list[dict[str, Any]]) -> int:
        with self._lock, self._conn:
            for p in pairs:
                a, b = sorted((p["video_a"], p["video_b"]))
                urls = {p["video_a"]: p["url_a"], p["video_b"]: p["url_b"]}
                key = f"{p['prompt_id']}|{a}|{b}"
                self._conn.execute(
                    "INSERT OR REPLACE INTO payload_pairs VALUES (?,?,?,?,?,?)",
                    (key, p["prompt_id"], a, b, urls[a], urls[b]),
                )
        return len(pairs)

    def add_gold_pairs(self, golds: list[dict[str, Any]]) -> int:
        with self._lock, self._conn:
            for g in golds:
                answers = g["answers"]
                if set(answers) != set(DIMENSIONS) or not set(answers.values()) <= {"a", "b"}:
                    raise StudyError(f"gold {g['gold_id']!r}: answers must cover both dimensions")
                self._conn.execute(
                    "INSERT OR REPLACE INTO gold_pairs VALUES (?,?,?,?,?)",
                    (
                        g["gold_id"],
                        g["url_a"],
                        g["url_b"],
                        json.dumps(answers),
                        json.dumps(g["mcq"]) if g.get("mcq") else None,
                    ),
                )
        return len(golds)

    def add_sanity_items(self, items: list[dict[str, Any]]) -> int:
        with self._lock, self._conn:
            for s in items:
                if not 2 <= len(s["mcqs"]) <= 4:
                    raise StudyError(f"sanity {s['sanity_id']!r}: needs 2-4 keyed MCQs")
                self._conn.execute(
                    "INSERT OR REPLACE INTO sanity_items VALUES (?,?,?,?)",
                    (s["sanity_id"], s["url_a"], s["url_b"], json.dumps(s["mcqs"])),
                )
        return len(items)

    def set_qualification_battery(self, battery: dict[str, Any]) -> None:
        if len(battery.get("mcqs", [])) != 10 or len(battery.get("gold_pairs", [])) != 3:
            raise StudyError("qualification battery needs 10 MCQs and 3 gold pairs")
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO qualification_battery VALUES (1, ?)",
                (json.dumps(battery),),
            )

    # -- qualification ---------------------------------------------------

    def qualification_form(self) -> dict[str, Any]:
        row = self._conn.execute(
            "SELECT battery FROM qualification_battery WHERE id = 1"
        ).fetchone()
        if row is None:
            raise StudyError("no qualification battery configured")
        battery = json.loads(row["battery"])
        return {
            "mcqs": [
                {"question_id": q["question_id"], "text": q["text"], "options": q["options"]}
                for q in battery["mcqs"]
            ],
            "gold_pairs": [
                {
                    "pair_id": g["pair_id"],
                    "url_a": g["url_a"],
                    "url_b": g["url_b"],
                    "dimension": g["dimension"],
                    "question": DIMENSION_QUESTIONS[g["dimension"]],
                }
                for g in battery["gold_pairs"]
            ],
        }

    def grade_qualification(
        self,
        worker_id: str,
        mcq_answers: dict[str, str],
        gold_answers: dict[str, str],
        client_hints: dict[str, Any] | None = None,
    ) -> dict[str, Any]:
        """Grade a submission: pass needs MCQ score > 8 and all 3 golds right."""
        row = self._conn.execute(
            "SELECT battery FROM qualification_battery WHERE id = 1"
        ).fetchone()
        if row is None:
            raise StudyError("no qualification battery configured")
        battery = json.loads(row["battery"])
        missing = [q["question_id"] for q in battery["mcqs"] if q["question_id"] not in mcq_answers]
        missing += [g["pair_id"] for g in battery["gold_pairs"] if g["pair_id"] not in gold_answers]
        if missing:
            raise IncompleteResponse(f"unanswered qualification items: {missing}")
        mcq_score = sum(
            1 for q in battery["mcqs"] if mcq_answers[q["question_id"]] == q["answer"]
        )
        gold_correct = sum(
            1 for g in battery["gold_pairs"] if gold_answers[g["pair_id"]] == g["answer"]
        )
        passed = mcq_score > 8 and gold_correct == 3
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO workers "
                "(worker_id, mcq_score, gold_correct, passed, approved_hits, rejected_hits,"
                " client_hints, compensation_usd) VALUES (?,?,?,?,"
                " COALESCE((SELECT approved_hits FROM workers WHERE worker_id=?),0),"
                " COALESCE((SELECT rejected_hits FROM workers WHERE worker_id=?),0), ?, ?)",
                (
                    worker_id,
                    mcq_score,
                    gold_correct,
                    int(passed),
                    worker_id,
                    worker_id,
                    json.dumps(client_hints or {}),
                    QUALIFICATION_COMPENSATION_USD if passed else 0.0,
                ),
            )
        return {
            "worker_id": worker_id,
            "mcq_score": mcq_score,
            "gold_correct": gold_correct,
            "passed": passed,
        }

    def worker(self, worker_id: str) -> dict[str, Any]:
        row = self._conn.execute(
            "SELECT * FROM workers WHERE worker_id = ?", (worker_id,)
        ).fetchone()
        if row is None:
            raise UnknownWorker(worker_id)
        return dict(row)

    # -- HIT assembly ----------------------------------------------------

    def _eligible_pairs(self, worker_id: str) -> list[sqlite3.Row]:
        """Pairs the worker has not seen that still need accepted votes."""
        return self._conn.execute(
            """
            SELECT p.*,
                   (SELECT COUNT(*) FROM served s WHERE s.pair_key = p.pair_key) AS serve_count,
                   (SELECT COUNT(*) FROM votes v
                     WHERE v.pair_key = p.pair_key AND v.dimension = 'background') AS accepted_votes,
                   (SELECT COUNT(*) FROM hits h
                     WHERE h.state = 'open' AND instr(h.pages, '"' || p.pair_key || '"') > 0) AS in_flight
            FROM payload_pairs p
            WHERE p.pair_key NOT IN (SELECT pair_key FROM served WHERE worker_id = ?)
              AND (SELECT COUNT(*) FROM votes v
                    WHERE v.pair_key = p.pair_key AND v.dimension = 'background')
                  + (SELECT COUNT(*) FROM hits h
                      WHERE h.state = 'open' AND instr(h.pages, '"' || p.pair_key || '"') > 0)
                  < ?
            ORDER BY serve_count ASC, pair_key ASC
            """,
            (worker_id, VOTES_PER_PAIR),
        ).fetchall()

    def open_hit_for(self, worker_id: str) -> dict[str, Any] | None:
        row = self._conn.execute(
            "SELECT * FROM hits WHERE worker_id = ? AND state = 'open'", (worker_id,)
        ).fetchone()
        if row is None:
            return None
        return self._wire_hit(row["hit_id"], json.loads(row["pages"]))

    def assemble_hit(self, worker_id: str, seed: int) -> dict[str, Any]:
        """Build and persist one HIT for a qualified worker.

        Deterministic per (seed, worker, store state). Raises PoolExhausted
        when fewer than 15 unseen pairs still need votes or the reliability
        pools are too small.
        """
        with self._lock, self._conn:
            if not self.worker(worker_id)["passed"]:
                raise NotQualified(worker_id)
            existing = self._conn.execute(
                "SELECT hit_id FROM hits WHERE worker_id = ? AND state = 'open'",
                (worker_id,),
            ).fetchone()
            if existing is not None:
                raise StudyError(f"worker {worker_id} already has an open HIT")

            eligible = self._eligible_pairs(worker_id)
            if len(eligible) < PAYLOAD_PAGES:
                raise PoolExhausted(
                    f"only {len(eligible)} eligible pairs for worker {worker_id}"
                )
            golds = self._conn.execute("SELECT * FROM gold_pairs ORDER BY gold_id").fetchall()
            sanities = self._conn.execute("SELECT * FROM sanity_items ORDER BY sanity_id").fetchall()
            if len(golds) < GOLD_PAGES or len(sanities) < SANITY_PAGES:
                raise PoolExhausted("gold or sanity pool too small")

            rng = _stable_rng("hit", seed, worker_id)
            chosen_pairs = eligible[:PAYLOAD_PAGES]
            hit_id = _stable_id("hit", seed, worker_id, self._conn.execute(
                "SELECT COUNT(*) AS n FROM hits").fetchone()["n"])

            pages: list[dict[str, Any]] = []
            for pair in chosen_pairs:
                pages.append(self._payload_page(pair, bool(rng.integers(2)), rng))
            order = rng.permutation(PAYLOAD_PAGES)
            pages = [pages[i] for i in order]

            gold_rows = [golds[i] for i in rng.choice(len(golds), GOLD_PAGES, replace=False)]
            sanity_row = sanities[int(rng.integers(len(sanities)))]
            for g in gold_rows:
                pos = int(rng.integers(len(pages) + 1))
                pages.insert(pos, self._gold_page(g, bool(rng.integers(2)), rng))
            pos = int(rng.integers(len(pages) + 1))
            pages.insert(pos, self._sanity_page(sanity_row, bool(rng.integers(2)), rng))

            payload_positions = [
                i for i, page in enumerate(pages) if page["role"] == "payload"
            ]
            repeat_sources = sorted(
                rng.choice(len(payload_positions), REPEAT_PAGES, replace=False).tolist()
            )
            for source_index in repeat_sources:
                original_pos = payload_positions[source_index]
                original = pages[original_pos]
                pos = int(rng.integers(original_pos + 1, len(pages) + 1))
                pages.insert(pos, self._repeat_page(original, rng))
                payload_positions = [
                    i for i, page in enumerate(pages) if page["role"] == "payload"
                ]

            assert len(pages) == TOTAL_PAGES
            for index, page in enumerate(pages):
                page["page_index"] = index
                for q_index, q in enumerate(page["questions"]):
                    q["question_id"] = f"{hit_id}:{index}:{q_index}"

            keyed = self._reliability_questions(pages)
            if not RELIABILITY_MIN <= len(keyed) <= RELIABILITY_MAX:
                raise StudyError(
                    f"assembly produced {len(keyed)} reliability questions; "
                    f"pools must yield {RELIABILITY_MIN}-{RELIABILITY_MAX}"
                )

            self._conn.execute(
                "INSERT INTO hits VALUES (?,?,?,?,?)",
                (hit_id, worker_id, seed, "open", json.dumps(pages)),
            )
            for pair in chosen_pairs:
                self._conn.execute(
                    "INSERT INTO served VALUES (?,?)", (worker_id, pair["pair_key"])
                )
            return self._wire_hit(hit_id, pages)

    def _payload_page(self, pair: sqlite3.Row, swapped: bool, rng) -> dict[str, Any]:
        dims = list(DIMENSIONS)
        if rng.integers(2):
            dims.reverse()
        return {
            "role": "payload",
            "ref": pair["pair_key"],
            "swapped": swapped,
            "urls": [pair["url_a"], pair["url_b"]],
            "questions": [
                {"kind": "pair_choice", "dimension": d, "text": DIMENSION_QUESTIONS[d]}
                for d in dims
            ],
        }

    def _gold_page(self, gold: sqlite3.Row, swapped: bool, rng) -> dict[str, Any]:
        answers = json.loads(gold["answers"])
        dims = list(DIMENSIONS)
        if rng.integers(2):
            dims.reverse()
        questions = [
            {
                "kind": "pair_choice",
                "dimension": d,
                "text": DIMENSION_QUESTIONS[d],
                "answer": answers[d],
            }
            for d in dims
        ]
        if gold["mcq"]:
            mcq = json.loads(gold["mcq"])
            questions.append(
                {
                    "kind": "mcq",
                    "text": mcq["text"],
                    "options": mcq["options"],
                    "answer": mcq["answer"],
                }
            )
        return {
            "role": "gold",
            "ref": gold["gold_id"],
            "swapped": swapped,
            "urls": [gold["url_a"], gold["url_b"]],
            "questions": questions,
        }

    def _sanity_page(self, sanity: sqlite3.Row, swapped: bool, rng) -> dict[str, Any]:
        dims = list(DIMENSIONS)
        if rng.integers(2):
            dims.reverse()
        questions = [
            {"kind": "pair_choice", "dimension": d, "text": DIMENSION_QUESTIONS[d]}
            for d in dims
        ]
        for mcq in json.loads(sanity["mcqs"]):
            questions.append(
                {
                    "kind": "mcq",
                    "text": mcq["text"],
                    "options": mcq["options"],
                    "answer": mcq["answer"],
                }
            )
        return {
            "role": "sanity",
            "ref": sanity["sanity_id"],
            "swapped": swapped,
            "urls": [sanity["url_a"], sanity["url_b"]],
            "questions": questions,
        }

    def _repeat_page(self, original: dict[str, Any], rng) -> dict[str, Any]:
        dims = [q["dimension"] for q in original["questions"] if q["kind"] == "pair_choice"]
        shuffled = [dims[i] for i in rng.permutation(len(dims))]
        return {
            "role": "repeat",
            "ref": original["ref"],
            "swapped": not original["swapped"],  # video order swapped vs original
            "urls": original["urls"],
            "questions": [
                {"kind": "pair_choice", "dimension": d, "text": DIMENSION_QUESTIONS[d]}
                for d in shuffled
            ],
        }

    @staticmethod
    def _reliability_questions(pages: list[dict[str, Any]]) -> list[tuple]:
        """(page, question) pairs that are scored for reliability."""
        keyed = []
        for page in pages:
            if page["role"] == "gold":
                keyed.extend((page, q) for q in page["questions"] if "answer" in q)
            elif page["role"] == "sanity":
                keyed.extend((page, q) for q in page["questions"] if q["kind"] == "mcq")
            elif page["role"] == "repeat":
                keyed.extend((page, q) for q in page["questions"] if q["kind"] == "pair_choice")
        return keyed

    def _wire_hit(self, hit_id: str, pages: list[dict[str, Any]]) -> dict[str, Any]:
        """Served form of a HIT: roles, keys, and mappings stay server-side."""
        wire_pages = []
        for page in pages:
            urls = page["urls"] if not page["swapped"] else page["urls"][::-1]
            wire_pages.append(
                {
                    "page_index": page["page_index"],
                    "videos": [{"url": urls[0]}, {"url": urls[1]}],
                    "questions": [
                        {
                            "question_id": q["question_id"],
                            "kind": q["kind"],
                            "text": q["text"],
                            **({"options": q["options"]} if q["kind"] == "mcq" else {}),
                        }
                        for q in page["questions"]
                    ],
                }
            )
        return {"hit_id": hit_id, "pages": wire_pages}

    # -- scoring ---------------------------------------------------------

    @staticmethod
    def _canonical_choice(display_choice: str, swapped: bool) -> str:
        """Map a displayed '1'/'2' selection to canonical video 'a'/'b'."""
        if display_choice not in ("1", "2"):
            raise StudyError(f"pair choices must be '1' or '2', got {display_choice!r}")
        first_is_a = not swapped
        if display_choice == "1":
            return "a" if first_is_a else "b"
        return "b" if first_is_a else "a"

    def score_response(
        self, hit_id: str, worker_id: str, answers: dict[str, str]
    ) -> dict[str, Any]:
        """Validate, grade reliability, persist, and bank accepted votes."""
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT * FROM hits WHERE hit_id = ?", (hit_id,)
            ).fetchone()
            if row is None:
                raise StudyError(f"unknown hit {hit_id!r}")
            if row["worker_id"] != worker_id:
                raise StudyError("response worker does not match assignment")
            if row["state"] != "open":
                existing = self._conn.execute(
                    "SELECT reliability, accepted FROM responses WHERE hit_id = ?",
                    (hit_id,),
                ).fetchone()
                return {  # idempotent re-submission
                    "hit_id": hit_id,
                    "accepted": bool(existing["accepted"]),
                    "reliability_score": existing["reliability"],
                    "duplicate": True,
                }
            pages = json.loads(row["pages"])

            all_qids = [q["question_id"] for page in pages for q in page["questions"]]
            unanswered = [qid for qid in all_qids if qid not in answers or answers[qid] == ""]
            if unanswered:
                raise IncompleteResponse(
                    f"{len(unanswered)} unanswered questions, e.g. {unanswered[:3]}"
                )

            by_ref_dim: dict[tuple[str, str], str] = {}
            for page in pages:
                if page["role"] != "payload":
                    continue
                for q in page["questions"]:
                    choice = self._canonical_choice(answers[q["question_id"]], page["swapped"])
                    by_ref_dim[(page["ref"], q["dimension"])] = choice

            correct, total = 0, 0
            for page, q in self._reliability_questions(pages):
                total += 1
                given = answers[q["question_id"]]
                if q["kind"] == "mcq":
                    correct += int(given == q["answer"])
                elif page["role"] == "gold":
                    correct += int(self._canonical_choice(given, page["swapped"]) == q["answer"])
                else:  # repeat: self-consistency with the original payload page
                    canonical = self._canonical_choice(given, page["swapped"])
                    correct += int(canonical == by_ref_dim[(page["ref"], q["dimension"])])
            reliability = correct / total
            accepted = reliability >= ACCEPT_THRESHOLD

            self._conn.execute(
                "INSERT INTO responses VALUES (?,?,?,?,?)",
                (hit_id, worker_id, json.dumps(answers), reliability, int(accepted)),
            )
            self._conn.execute(
                "UPDATE hits SET state = 'scored' WHERE hit_id = ?", (hit_id,)
            )
            if accepted:
                for (pair_key, dimension), choice in sorted(by_ref_dim.items()):
                    self._conn.execute(
                        "INSERT INTO votes (pair_key, dimension, worker_id, hit_id, choice) "
                        "VALUES (?,?,?,?,?)",
                        (pair_key, dimension, worker_id, hit_id, choice),
                    )
                self._conn.execute(
                    "UPDATE workers SET approved_hits = approved_hits + 1, "
                    "compensation_usd = compensation_usd + ? WHERE worker_id = ?",
                    (HIT_COMPENSATION_USD, worker_id),
                )
            else:
                self._conn.execute(
                    "UPDATE workers SET rejected_hits = rejected_hits + 1 "
                    "WHERE worker_id = ?",
                    (worker_id,),
                )
            return {
                "hit_id": hit_id,
                "accepted": accepted,
                "reliability_score": reliability,
            }

    # -- export ----------------------------------------------------------

    def export_annotations(self) -> list[dict[str, Any]]:
        """Accepted payload votes in the harness annotation schema."""
        rows = self._conn.execute(
            """
            SELECT v.pair_key, v.dimension, v.choice, p.prompt_id, p.video_a, p.video_b
            FROM votes v JOIN payload_pairs p ON p.pair_key = v.pair_key
            ORDER BY v.pair_key, v.dimension, v.vote_id
            """
        ).fetchall()
        grouped: dict[tuple[str, str], dict[str, Any]] = {}
        for r in rows:
            key = (r["pair_key"], r["dimension"])
            if key not in grouped:
                grouped[key] = {
                    "pair": {
                        "prompt_id": r["prompt_id"],
                        "video_a": r["video_a"],
                        "video_b": r["video_b"],
                    },
                    "dimension": r["dimension"],
                    "votes": [],
                }
            grouped[key]["votes"].append(r["choice"])
        return [grouped[k] for k in sorted(grouped)]

    # -- introspection (tests and ops) ------------------------------------

    def serve_counts(self) -> dict[str, int]:
        rows = self._conn.execute(
            "SELECT pair_key, COUNT(*) AS n FROM served GROUP BY pair_key"
        ).fetchall()
        return {r["pair_key"]: r["n"] for r in rows}

    def accepted_vote_counts(self, dimension: str = "background") -> dict[str, int]:
        rows = self._conn.execute(
            "SELECT pair_key, COUNT(*) AS n FROM votes WHERE dimension = ? GROUP BY pair_key",
            (dimension,),
        ).fetchall()
        return {r["pair_key"]: r["n"] for r in rows}

    def pair_count(self) -> int:
        return self._conn.execute("SELECT COUNT(*) AS n FROM payload_pairs").fetchone()["n"]

    def close(self) -> None:
        self._conn.close()
