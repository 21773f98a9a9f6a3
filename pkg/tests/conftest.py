from __future__ import annotations

import time

import numpy as np
import pytest

_ACCEPTANCE_RESULTS: list[tuple[str, str, float]] = []
_ACCEPTANCE_STARTS: dict[str, float] = {}


def pytest_runtest_logstart(nodeid, location):
    _ACCEPTANCE_STARTS[nodeid] = time.monotonic()


def pytest_runtest_logreport(report):
    if "acceptance" not in report.keywords:
        return
    if report.when == "setup" and report.skipped:
        _ACCEPTANCE_RESULTS.append((report.nodeid, "skipped", 0.0))
    if report.when == "call":
        elapsed = time.monotonic() - _ACCEPTANCE_STARTS.get(report.nodeid, time.monotonic())
        _ACCEPTANCE_RESULTS.append((report.nodeid, report.outcome, elapsed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome, elapsed in _ACCEPTANCE_RESULTS:
        name = nodeid.split("::")[-1]
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome)
        terminalreporter.write_line(f"[{label}] {name} ({elapsed:.1f}s)")

from dyneval.backends.synthetic import (
    Sprite,
    SyntheticScene,
    disc_sprite,
    render_synthetic_scene,
    square_sprite,
)
from dyneval.types import DatasetManifest, PromptEntry, VideoRecord


def make_manifest(models: int, prompts: int, generations: int) -> DatasetManifest:
    model_ids = [f"model-{m}" for m in range(models)]
    prompt_entries = [
        PromptEntry(prompt_id=f"p{p:03d}", text=f"prompt {p}") for p in range(prompts)
    ]
    videos = [
        VideoRecord(
            video_id=f"{mid}_p{p:03d}_g{g}",
            model_id=mid,
            prompt_id=f"p{p:03d}",
            generation_index=g,
            frame_count=16,
            width=64,
            height=64,
            fps=8.0,
            source_uri=f"/videos/{mid}_p{p:03d}_g{g}.avi",
        )
        for mid in model_ids
        for p in range(prompts)
        for g in range(generations)
    ]
    return DatasetManifest(models=model_ids, prompts=prompt_entries, videos=videos)


def pan_scene(seed: int = 7, dx: int = 1, dy: int = 0) -> SyntheticScene:
    return SyntheticScene(seed=seed, camera_velocity=(dx, dy), texture_period=32)


def moving_sprite_scene(
    seed: int = 7,
    dx: int = 1,
    sprite_velocity: tuple[float, float] = (1.0, 0.0),
    side: int = 9,
    start: tuple[float, float] = (20.0, 26.0),
    deform: float = 0.0,
) -> SyntheticScene:
    mask, texture = square_sprite(side, (230, 40, 40))
    return SyntheticScene(
        seed=seed,
        camera_velocity=(dx, 0),
        sprites=(
            Sprite(
                mask=mask,
                texture=texture,
                start=start,
                velocity=sprite_velocity,
                deform_amplitude=deform,
            ),
        ),
        texture_period=32,
    )


@pytest.fixture
def pan_frames():
    scene = pan_scene()
    return scene, render_synthetic_scene(scene, 16, 64, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
