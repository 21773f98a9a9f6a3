"""Manifest JSON loading, validation, and canonical serialization."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .types import DataModelError, DatasetManifest, PromptEntry, VideoRecord


class ManifestError(ValueError):
    """Raised for unparseable or invariant-violating manifest files."""


def _require(obj: dict[str, Any], key: str, context: str) -> Any:
    if key not in obj:
        raise ManifestError(f"{context}: missing required key {key!r}")
    return obj[key]


def manifest_from_dict(doc: dict[str, Any]) -> DatasetManifest:
    if not isinstance(doc, dict):
        raise ManifestError("manifest root must be a JSON object")
    models = _require(doc, "models", "manifest")
    prompts_raw = _require(doc, "prompts", "manifest")
    videos_raw = _require(doc, "videos", "manifest")

    prompts = [
        PromptEntry(
            prompt_id=str(_require(p, "id", "prompt")),
            text=str(_require(p, "text", "prompt")),
            metadata=p.get("metadata", {}),
        )
        for p in prompts_raw
    ]
    videos = []
    for v in videos_raw:
        ctx = f"video {v.get('video_id', '?')!r}"
        try:
            videos.append(
                VideoRecord(
                    video_id=str(_require(v, "video_id", ctx)),
                    model_id=str(_require(v, "model_id", ctx)),
                    prompt_id=str(_require(v, "prompt_id", ctx)),
                    generation_index=int(_require(v, "generation_index", ctx)),
                    frame_count=int(_require(v, "frame_count", ctx)),
                    width=int(_require(v, "width", ctx)),
                    height=int(_require(v, "height", ctx)),
                    fps=float(_require(v, "fps", ctx)),
                    source_uri=str(_require(v, "uri", ctx)),
                )
            )
        except DataModelError as exc:
            raise ManifestError(f"{ctx}: {exc}") from exc
    try:
        return DatasetManifest(models=list(models), prompts=prompts, videos=videos)
    except DataModelError as exc:
        raise ManifestError(str(exc)) from exc


def manifest_to_dict(manifest: DatasetManifest) -> dict[str, Any]:
    return {
        "models": sorted(manifest.models),
        "prompts": [
            {"id": p.prompt_id, "text": p.text, "metadata": p.metadata}
            for p in sorted(manifest.prompts, key=lambda p: p.prompt_id)
        ],
        "videos": [
            {
                "video_id": v.video_id,
                "model_id": v.model_id,
                "prompt_id": v.prompt_id,
                "generation_index": v.generation_index,
                "uri": v.source_uri,
                "fps": v.fps,
                "width": v.width,
                "height": v.height,
                "frame_count": v.frame_count,
            }
            for v in sorted(manifest.videos, key=lambda v: v.video_id)
        ],
    }


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a manifest JSON document."""
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})") from exc
    return manifest_from_dict(doc)


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Write a manifest in canonical form (sorted keys and records)."""
    Path(path).write_text(canonical_json(manifest_to_dict(manifest)))


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
