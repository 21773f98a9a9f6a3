"""Procedural prompt generation: lexicon sampling plus LLM rendering.

Scene metadata (setting, scene, subject, action, subject count, camera
type and movement) is sampled uniformly under the lexicon's compatibility
constraints, serialized into a fixed JSON shape, and rendered into a
descriptive prompt by a chat-completion client. A deterministic stub
client keeps the whole path testable offline.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Protocol

import numpy as np

log = logging.getLogger(__name__)

SETTINGS = ("indoor", "outdoor-land", "outdoor-water")
SUBJECT_CATEGORIES = ("human", "animal", "vehicle", "object")
SUBJECT_COUNTS = ("one", "two", "three", "many")

PROMPT_TEMPLATE_VERSION = "v1"

# One-shot exemplar shipped with the rendering template.
EXAMPLE_METADATA = {
    "setting": "indoor",
    "action_dataset": "comclip",
    "metadata": {
        "scene": "auto factory",
        "subject": {
            "name": "dog",
            "number_of_subjects": "one",
            "action": "drinking the water",
        },
        "camera": {"type": "ground shot", "movement": "dolly shot"},
        "extra attibutes": "",
    },
}
EXAMPLE_NARRATIVE = (
    "In an auto factory, a lone dog drinks water from a puddle amidst "
    "hulking machinery and assembly lines. The ground shot dolly camera "
    "moves forward, revealing industrial surroundings with the dog in "
    "sharp focus."
)

SYSTEM_TEMPLATE = (
    "You write short, vivid video-generation prompts. Given scene metadata "
    "in JSON, produce one fluent paragraph (2-3 sentences) that names the "
    "scene, the subject with its count and action, and explicitly describes "
    "the camera type and movement. Mention the camera movement phrase "
    "verbatim. Respond with the paragraph only.\n\n"
    "Example metadata:\n{example_metadata}\n\nExample prompt:\n{example_narrative}"
)


class LexiconError(ValueError):
    pass


class PromptRenderError(RuntimeError):
    """Retriable failure while rendering a prompt; no partial record is kept."""


@dataclass(frozen=True)
class SubjectEntry:
    name: str
    category: str
    settings: tuple[str, ...]
    actions: tuple[str, ...]
    action_source: str = "custom"


@dataclass
class Lexicon:
    scenes: list[dict[str, str]]
    subjects: list[SubjectEntry]
    camera_types: list[str]
    camera_movements: list[str]
    subject_counts: tuple[str, ...] = SUBJECT_COUNTS

    def validate(self) -> None:
        if not self.scenes or not self.subjects:
            raise LexiconError("lexicon needs at least one scene and one subject")
        for scene in self.scenes:
            if scene.get("setting") not in SETTINGS:
                raise LexiconError(f"scene {scene.get('name')!r}: bad setting tag")
        settings_present = {s["setting"] for s in self.scenes}
        for subject in self.subjects:
            if subject.category not in SUBJECT_CATEGORIES:
                raise LexiconError(f"subject {subject.name!r}: bad category")
            if not subject.actions:
                raise LexiconError(
                    f"subject {subject.name!r}: needs at least one action "
                    "(the empty action counts)"
                )
            for tag in subject.settings:
                if tag not in SETTINGS:
                    raise LexiconError(f"subject {subject.name!r}: bad setting tag {tag!r}")
        for setting in settings_present:
            if not self.compatible_subjects(setting):
                raise LexiconError(f"no subject compatible with setting {setting!r}")
        if not self.camera_types or not self.camera_movements:
            raise LexiconError("lexicon needs camera types and movements")

    def compatible_subjects(self, setting: str) -> list[SubjectEntry]:
        return [s for s in self.subjects if setting in s.settings]

    def metadata_capacity(self) -> int:
        """Number of distinct samplable metadata tuples."""
        per_scene = 0
        for scene in self.scenes:
            for subject in self.compatible_subjects(scene["setting"]):
                per_scene += len(set(subject.actions))
        return (
            per_scene
            * len(self.subject_counts)
            * len(self.camera_types)
            * len(self.camera_movements)
        )


def load_lexicon(path: str | Path) -> Lexicon:
    doc = json.loads(Path(path).read_text())
    lexicon = Lexicon(
        scenes=doc["scenes"],
        subjects=[
            SubjectEntry(
                name=s["name"],
                category=s["category"],
                settings=tuple(s["settings"]),
                actions=tuple(s["actions"]),
                action_source=s.get("action_source", "custom"),
            )
            for s in doc["subjects"]
        ],
        camera_types=doc["camera_types"],
        camera_movements=doc["camera_movements"],
        subject_counts=tuple(doc.get("subject_counts", SUBJECT_COUNTS)),
    )
    lexicon.validate()
    return lexicon


def bundled_lexicon() -> Lexicon:
    return load_lexicon(Path(__file__).parent / "data" / "lexicon.json")


@dataclass(frozen=True)
class SceneMetadata:
    setting: str
    scene: str
    subject_name: str
    number_of_subjects: str
    action: str
    action_source: str
    camera_type: str
    camera_movement: str
    extra_attributes: str = ""

    def to_json_dict(self) -> dict[str, Any]:
        # Fixed wire shape; "extra attibutes" spelling is part of the format.
        return {
            "setting": self.setting,
            "action_dataset": self.action_source,
            "metadata": {
                "scene": self.scene,
                "subject": {
                    "name": self.subject_name,
                    "number_of_subjects": self.number_of_subjects,
                    "action": self.action,
                },
                "camera": {
                    "type": self.camera_type,
                    "movement": self.camera_movement,
                },
                "extra attibutes": self.extra_attributes,
            },
        }

    @classmethod
    def from_json_dict(cls, doc: dict[str, Any]) -> "SceneMetadata":
        meta = doc["metadata"]
        return cls(
            setting=doc["setting"],
            scene=meta["scene"],
            subject_name=meta["subject"]["name"],
            number_of_subjects=meta["subject"]["number_of_subjects"],
            action=meta["subject"]["action"],
            action_source=doc.get("action_dataset", "custom"),
            camera_type=meta["camera"]["type"],
            camera_movement=meta["camera"]["movement"],
            extra_attributes=meta.get("extra attibutes", ""),
        )

    def tuple_key(self) -> tuple[str, ...]:
        return (
            self.scene,
            self.subject_name,
            self.action,
            self.number_of_subjects,
            self.camera_type,
            self.camera_movement,
        )

    def canonical_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class RenderedPrompt:
    prompt_id: str
    text: str
    metadata: SceneMetadata
    llm_model_id: str
    created_at: str
    camera_phrase_validated: bool = True

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "prompt_id": self.prompt_id,
            "text": self.text,
            "metadata": self.metadata.to_json_dict(),
            "llm_model_id": self.llm_model_id,
            "created_at": self.created_at,
            "camera_phrase_validated": self.camera_phrase_validated,
        }


def sample_scene_metadata(lexicon: Lexicon, rng_seed: int) -> SceneMetadata:
    """Uniform sample within the lexicon's compatibility constraints."""
    rng = np.random.default_rng(rng_seed)
    scene = lexicon.scenes[rng.integers(len(lexicon.scenes))]
    compatible = lexicon.compatible_subjects(scene["setting"])
    if not compatible:
        raise LexiconError(f"no subject compatible with setting {scene['setting']!r}")
    subject = compatible[rng.integers(len(compatible))]
    if not subject.actions:
        raise LexiconError(f"subject {subject.name!r} has an empty action set")
    action = subject.actions[rng.integers(len(subject.actions))]
    return SceneMetadata(
        setting=scene["setting"],
        scene=scene["name"],
        subject_name=subject.name,
        number_of_subjects=lexicon.subject_counts[rng.integers(len(lexicon.subject_counts))],
        action=action,
        action_source=subject.action_source,
        camera_type=lexicon.camera_types[rng.integers(len(lexicon.camera_types))],
        camera_movement=lexicon.camera_movements[rng.integers(len(lexicon.camera_movements))],
    )


class LLMClient(Protocol):
    model_id: str

    def complete(self, system: str, user: str) -> str:
        ...


class StubLLMClient:
    """Deterministic offline renderer used by tests and dry runs."""

    model_id = "stub"

    def complete(self, system: str, user: str) -> str:
        meta = SceneMetadata.from_json_dict(json.loads(user))
        action = f" {meta.action}" if meta.action else ""
        count = meta.number_of_subjects
        return (
            f"In {meta.scene} ({meta.setting}), {count} {meta.subject_name}"
            f"{action}. Captured as a {meta.camera_type}; the camera performs "
            f"a {meta.camera_movement} through the scene."
        )


class HttpChatClient:
    """Chat-completion endpoint client with bounded retries.

    Safe for concurrent calls; each request carries an Idempotency-Key
    header derived from the user message so retried requests dedupe on
    servers that honor it.
    """

    def __init__(
        self,
        base_url: str,
        model_id: str,
        temperature: float = 0.7,
        retries: int = 3,
        backoff: float = 1.0,
        api_key_env: str = "DYNEVAL_LLM_API_KEY",
        timeout: float = 60.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.temperature = temperature
        self.retries = retries
        self.backoff = backoff
        self.api_key = os.environ.get(api_key_env, "")
        self.timeout = timeout

    def complete(self, system: str, user: str) -> str:
        import httpx

        payload = {
            "model": self.model_id,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        headers = {
            "Idempotency-Key": hashlib.sha256(user.encode()).hexdigest()[:32]
        }
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = httpx.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout,
                )
                if resp.status_code >= 500:
                    raise PromptRenderError(f"server error {resp.status_code}")
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except Exception as exc:  # noqa: BLE001 - retried, then surfaced
                last_error = exc
                time.sleep(self.backoff * 2**attempt)
        raise PromptRenderError(f"prompt rendering failed after retries: {last_error}")


def system_prompt() -> str:
    return SYSTEM_TEMPLATE.format(
        example_metadata=json.dumps(EXAMPLE_METADATA, indent=2),
        example_narrative=EXAMPLE_NARRATIVE,
    )


def prompt_id_for(metadata: SceneMetadata) -> str:
    digest = hashlib.sha256(metadata.canonical_json().encode()).hexdigest()
    return f"prompt-{digest[:10]}"


def render_prompt(metadata: SceneMetadata, client: LLMClient) -> RenderedPrompt:
    """Render one metadata record; raises PromptRenderError on failure.

    The metadata-derived prompt id doubles as the idempotency key: clients
    that accept one can dedupe retried requests server-side.
    """
    text = client.complete(
        system_prompt(), json.dumps(metadata.to_json_dict(), indent=2)
    ).strip()
    if not text:
        raise PromptRenderError("client returned empty prompt text")
    validated = metadata.camera_movement.lower() in text.lower()
    if not validated:
        log.warning(
            "rendered prompt does not mention camera movement %r",
            metadata.camera_movement,
        )
    return RenderedPrompt(
        prompt_id=prompt_id_for(metadata),
        text=text,
        metadata=metadata,
        llm_model_id=client.model_id,
        created_at=datetime.now(timezone.utc).isoformat(),
        camera_phrase_validated=validated,
    )


def _enumerate_metadata(lexicon: Lexicon) -> list[SceneMetadata]:
    out = []
    for scene in lexicon.scenes:
        for subject in lexicon.compatible_subjects(scene["setting"]):
            for action in dict.fromkeys(subject.actions):
                for count, ctype, move in itertools.product(
                    lexicon.subject_counts, lexicon.camera_types, lexicon.camera_movements
                ):
                    out.append(
                        SceneMetadata(
                            setting=scene["setting"],
                            scene=scene["name"],
                            subject_name=subject.name,
                            number_of_subjects=count,
                            action=action,
                            action_source=subject.action_source,
                            camera_type=ctype,
                            camera_movement=move,
                        )
                    )
    return out


def category_mix(prompts: list[RenderedPrompt]) -> dict[str, dict[str, float]]:
    """Percentage breakdown of the suite per metadata field."""
    def pct(counter: dict[str, int]) -> dict[str, float]:
        total = sum(counter.values())
        return {k: 100.0 * v / total for k, v in sorted(counter.items())}

    fields: dict[str, dict[str, int]] = {
        "setting": {},
        "number_of_subjects": {},
        "camera_type": {},
        "camera_movement": {},
    }
    for p in prompts:
        m = p.metadata
        for key, value in (
            ("setting", m.setting),
            ("number_of_subjects", m.number_of_subjects),
            ("camera_type", m.camera_type),
            ("camera_movement", m.camera_movement),
        ):
            fields[key][value] = fields[key].get(value, 0) + 1
    return {k: pct(v) for k, v in fields.items()}


def build_suite(
    lexicon: Lexicon,
    client: LLMClient,
    n: int = 100,
    seed: int = 0,
    max_in_flight: int = 4,
) -> tuple[list[RenderedPrompt], dict[str, dict[str, float]]]:
    """Sample ``n`` distinct metadata tuples and render them all.

    Sampling is deterministic per seed; rendering fans out with at most
    ``max_in_flight`` concurrent client calls, output order preserved.
    Raises when the lexicon cannot yield ``n`` distinct tuples.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    capacity = lexicon.metadata_capacity()
    if n > capacity:
        raise LexiconError(
            f"lexicon supports only {capacity} distinct metadata tuples, need {n}"
        )
    chosen: list[SceneMetadata] = []
    seen: set[tuple[str, ...]] = set()
    if capacity <= 4 * n:
        pool = _enumerate_metadata(lexicon)
        rng = np.random.default_rng(seed)
        rng.shuffle(pool)
        for meta in pool:
            if meta.tuple_key() not in seen:
                seen.add(meta.tuple_key())
                chosen.append(meta)
            if len(chosen) == n:
                break
    else:
        sub_seed = 0
        while len(chosen) < n:
            meta = sample_scene_metadata(lexicon, rng_seed=seed * 1_000_003 + sub_seed)
            sub_seed += 1
            if meta.tuple_key() in seen:
                continue
            seen.add(meta.tuple_key())
            chosen.append(meta)
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        prompts = list(pool.map(lambda meta: render_prompt(meta, client), chosen))
    return prompts, category_mix(prompts)


def save_suite(
    prompts: list[RenderedPrompt],
    mix: dict[str, dict[str, float]],
    path: str | Path,
) -> None:
    doc = {
        "prompts": [p.to_json_dict() for p in prompts],
        "category_mix": mix,
        "template_version": PROMPT_TEMPLATE_VERSION,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
