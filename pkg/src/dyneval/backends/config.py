"""Backend construction from a JSON config document.

Two kinds are supported:

* ``synthetic`` — per-video scene descriptions drive the oracle backends;
  this is the fully offline path used by demos and CI.
* ``adapter`` — each component names an executable path or HTTP URL that
  fulfils the file-based adapter contract.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from ..types import DatasetManifest, VideoRecord
from . import adapters
from .base import PhraseExtractorBackend
from .synthetic import (
    DownsampleEmbedder,
    OracleAutoMasker,
    OracleGrounder,
    OracleInterpolator,
    OracleMaskPropagator,
    OracleTracker,
    ShiftBlendInterpolator,
    Sprite,
    SyntheticScene,
    TablePhraseExtractor,
    square_sprite,
)


def sprite_to_dict(sprite: Sprite) -> dict[str, Any]:
    color = [int(c) for c in sprite.texture.reshape(-1, 3)[0]]
    return {
        "side": int(sprite.mask.shape[0]),
        "color": color,
        "start": list(sprite.start),
        "velocity": list(sprite.velocity),
        "z": sprite.z,
        "rotation_per_frame": sprite.rotation_per_frame,
        "deform_amplitude": sprite.deform_amplitude,
        "deform_period": sprite.deform_period,
    }


def sprite_from_dict(doc: dict[str, Any]) -> Sprite:
    mask, texture = square_sprite(doc["side"], tuple(doc["color"]))
    return Sprite(
        mask=mask,
        texture=texture,
        start=tuple(doc["start"]),
        velocity=tuple(doc.get("velocity", (0.0, 0.0))),
        z=doc.get("z", 1),
        rotation_per_frame=doc.get("rotation_per_frame", 0.0),
        deform_amplitude=doc.get("deform_amplitude", 0.0),
        deform_period=doc.get("deform_period", 8.0),
    )


def scene_to_dict(scene: SyntheticScene) -> dict[str, Any]:
    return {
        "seed": scene.seed,
        "camera_velocity": list(scene.camera_velocity),
        "texture_period": scene.texture_period,
        "sprites": [sprite_to_dict(s) for s in scene.sprites],
    }


def scene_from_dict(doc: dict[str, Any]) -> SyntheticScene:
    return SyntheticScene(
        seed=doc["seed"],
        camera_velocity=tuple(doc.get("camera_velocity", (0, 0))),
        sprites=tuple(sprite_from_dict(s) for s in doc.get("sprites", [])),
        texture_period=doc.get("texture_period", 32),
    )


class BackendConfigError(ValueError):
    pass


def load_backend_config(path: str | Path) -> dict[str, Any]:
    doc = json.loads(Path(path).read_text())
    if doc.get("kind") not in ("synthetic", "adapter"):
        raise BackendConfigError("backend config kind must be 'synthetic' or 'adapter'")
    return doc


def _manifest_phrase_table(manifest: DatasetManifest) -> dict[str, list[tuple[str, str]]]:
    """Dynamic-object phrases derived from prompt metadata (subject field)."""
    table: dict[str, list[tuple[str, str]]] = {}
    for prompt in manifest.prompts:
        subject = prompt.metadata.get("metadata", {}).get("subject", {})
        name = subject.get("name") if isinstance(subject, dict) else None
        table[prompt.text] = [(name, "dynamic")] if name else []
    return table


class BackendSet:
    """All backends for one video, built lazily from the config."""

    def __init__(self, doc: dict[str, Any], record: VideoRecord, manifest: DatasetManifest):
        self.doc = doc
        self.record = record
        self.manifest = manifest

    def _scene(self) -> SyntheticScene:
        scenes = self.doc.get("scenes", {})
        if self.record.video_id not in scenes:
            raise BackendConfigError(f"no scene for video {self.record.video_id!r}")
        return scene_from_dict(scenes[self.record.video_id])

    def _target(self, component: str) -> adapters.AdapterTarget:
        address = self.doc.get(component)
        if not address:
            raise BackendConfigError(f"adapter config missing {component!r}")
        return adapters.AdapterTarget(address)

    def _dims(self) -> tuple[int, int, int]:
        return self.record.frame_count, self.record.height, self.record.width

    def interpolator(self):
        if self.doc["kind"] == "synthetic":
            # A memorizing oracle would score any video as perfect, its own
            # distortions included; the default stand-in models smooth
            # motion instead so injected distortions register as error.
            if self.doc.get("interpolator", "shift_blend") == "oracle":
                return OracleInterpolator()
            return ShiftBlendInterpolator()
        return adapters.AdapterInterpolator(self._target("interpolator"), self.record.video_id)

    def scene_embedder(self):
        if self.doc["kind"] == "synthetic":
            return DownsampleEmbedder()
        return adapters.AdapterEmbedder(
            self._target("scene_embedder"), self.record.video_id
        )

    def object_embedder(self):
        if self.doc["kind"] == "synthetic":
            return DownsampleEmbedder(grid=4)
        return adapters.AdapterEmbedder(
            self._target("object_embedder"), self.record.video_id
        )

    def auto_masker(self):
        if self.doc["kind"] == "synthetic":
            return OracleAutoMasker(self._scene(), *self._dims())
        return adapters.AdapterAutoMasker(self._target("auto_masker"), self.record.video_id)

    def grounder(self):
        if self.doc["kind"] == "synthetic":
            f, h, w = self._dims()
            return OracleGrounder(self._scene(), h, w)
        return adapters.AdapterGrounder(self._target("grounder"), self.record.video_id)

    def propagator(self):
        if self.doc["kind"] == "synthetic":
            return OracleMaskPropagator(self._scene(), *self._dims())
        return adapters.AdapterMaskPropagator(self._target("propagator"), self.record.video_id)

    def tracker(self):
        if self.doc["kind"] == "synthetic":
            return OracleTracker(self._scene(), *self._dims())
        return adapters.AdapterTracker(self._target("tracker"), self.record.video_id)

    def phrase_extractor(self) -> PhraseExtractorBackend:
        if self.doc["kind"] == "synthetic":
            return TablePhraseExtractor(_manifest_phrase_table(self.manifest))
        return adapters.AdapterPhraseExtractor(self._target("phrase_extractor"))

    @property
    def tag(self) -> str:
        return self.doc.get("tag", self.doc["kind"])
