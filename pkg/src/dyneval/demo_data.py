"""Fully offline demo benchmark: rendered videos, manifest, backend config,
and simulated annotations, so every CLI surface can be exercised without
model runtimes or collected data.

Model and generation indices control two planted distortions: sinusoidal
object deformation (foreground signal, carried by the scene config so the
analytic tracks reflect it) and background patch flicker (background
signal, baked into the rendered frames). Simulated annotators prefer the
less-distorted video with 80% probability per vote.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .backends.config import scene_to_dict
from .backends.synthetic import (
    Sprite,
    SyntheticScene,
    inject_patch_flicker,
    render_synthetic_scene,
    square_sprite,
)
from .harness import AnnotationRecord, HumanVotes, build_pairs, save_annotations
from .manifest import canonical_json, manifest_to_dict
from .types import DatasetManifest, PromptEntry, VideoRecord

FRAMES, HEIGHT, WIDTH = 12, 64, 64
FLICKER_PATCH = (46, 46, 10)  # x, y, size; clear of every sprite trajectory


def _quality(model_idx: int, gen_idx: int) -> dict[str, float]:
    return {
        "deform_amplitude": 0.5 * model_idx + 0.2 * gen_idx,
        "flicker_amplitude": 10.0 * model_idx + 4.0 * gen_idx,
    }


def _scene(seed: int, model_idx: int, gen_idx: int, static: bool) -> SyntheticScene:
    mask, texture = square_sprite(11, (225, 60, 60))
    quality = _quality(model_idx, gen_idx)
    return SyntheticScene(
        seed=seed,
        camera_velocity=(0, 0) if static else (1, 0),
        sprites=(
            Sprite(
                mask=mask,
                texture=texture,
                start=(14.0, 22.0),
                velocity=(1.0, 0.0),
                deform_amplitude=quality["deform_amplitude"],
                deform_period=6.0,
            ),
        ),
        texture_period=32,
    )


def generate_demo_dataset(
    out_dir: str | Path,
    models: int = 4,
    prompts: int = 3,
    generations: int = 3,
    seed: int = 0,
) -> dict[str, Any]:
    """Write videos, manifest.json, backends.json, annotations.json."""
    out = Path(out_dir)
    (out / "videos").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    model_ids = [f"model-{m}" for m in range(models)]
    prompt_entries = [
        PromptEntry(
            prompt_id=f"p{p:03d}",
            text=f"A red block slides through scene {p} as the camera tracks sideways.",
            metadata={"metadata": {"subject": {"name": "red block"}}},
        )
        for p in range(prompts)
    ]

    records: list[VideoRecord] = []
    scenes: dict[str, Any] = {}
    truth: dict[str, Any] = {}
    counter = 0
    for m, model_id in enumerate(model_ids):
        for p in range(prompts):
            for g in range(generations):
                video_id = f"{model_id}_p{p:03d}_g{g}"
                static = counter % 10 == 0  # ~10% ignore the camera instruction
                scene = _scene(seed * 7919 + counter, m, g, static)
                frames = render_synthetic_scene(scene, FRAMES, HEIGHT, WIDTH)
                quality = _quality(m, g)
                if quality["flicker_amplitude"] > 0:
                    x, y, size = FLICKER_PATCH
                    frames = inject_patch_flicker(
                        frames, x, y, size, int(quality["flicker_amplitude"])
                    )
                uri = out / "videos" / f"{video_id}.npy"
                np.save(uri, frames.frames)
                records.append(
                    VideoRecord(
                        video_id=video_id,
                        model_id=model_id,
                        prompt_id=f"p{p:03d}",
                        generation_index=g,
                        frame_count=FRAMES,
                        width=WIDTH,
                        height=HEIGHT,
                        fps=8.0,
                        source_uri=str(uri),
                    )
                )
                scenes[video_id] = scene_to_dict(scene)
                truth[video_id] = {**quality, "static": static}
                counter += 1

    manifest = DatasetManifest(models=model_ids, prompts=prompt_entries, videos=records)
    (out / "manifest.json").write_text(canonical_json(manifest_to_dict(manifest)))
    (out / "backends.json").write_text(
        json.dumps(
            {"kind": "synthetic", "interpolator": "shift_blend", "scenes": scenes},
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    (out / "ground_truth.json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n")

    pairs, _ = build_pairs(manifest, seed=seed)
    annotations: list[AnnotationRecord] = []
    for pair in pairs:
        for dimension, key in (
            ("background", "flicker_amplitude"),
            ("foreground", "deform_amplitude"),
        ):
            qa, qb = truth[pair.video_a][key], truth[pair.video_b][key]
            if qa == qb:
                better = None
            else:
                better = "a" if qa < qb else "b"
            votes = []
            for _ in range(3):
                if better is None:
                    votes.append("a" if rng.random() < 0.5 else "b")
                elif rng.random() < 0.8:
                    votes.append(better)
                else:
                    votes.append("b" if better == "a" else "a")
            annotations.append(
                AnnotationRecord(
                    prompt_id=pair.prompt_id,
                    video_a=pair.video_a,
                    video_b=pair.video_b,
                    dimension=dimension,
                    votes=HumanVotes(votes),
                )
            )
    save_annotations(annotations, out / "annotations.json")
    return {
        "manifest": str(out / "manifest.json"),
        "backends": str(out / "backends.json"),
        "annotations": str(out / "annotations.json"),
        "videos": counter,
        "pairs": len(pairs),
    }
