"""Command-line interface.

Top-level groups: ``bg`` and ``fg`` (single-video scores), ``motion``
(camera-motion CSV), ``prompts`` (suite generation), ``pairs`` (benchmark
pair structure), ``evaluate`` (full report), ``demo`` (offline synthetic
dataset), and ``study`` (annotation service).
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click
import numpy as np

from .background import (
    BackgroundBackends,
    EdgeMapConfig,
    PyramidConfig,
    compute_edge_map,
    compute_ms_error_maps,
    compute_object_masks,
    debias_error_map,
    extract_moving_objects,
    score_background,
)
from .backends.config import BackendSet, load_backend_config
from .cache import ArtifactCache, CacheEntry, config_hash
from .camera_motion import CameraMotionResult, classify_static, video_camera_motion
from .demo_data import generate_demo_dataset
from .foreground import (
    ForegroundBackends,
    TrackerFGConfig,
    deviation_time_series,
    sample_points_in_mask,
    score_foreground,
)
from .manifest import load_manifest
from .report import EvaluationInputs, evaluate as run_evaluation, write_report
from .types import DatasetManifest, VideoRecord
from .video_io import decode_video


def _configs(config_path: str | None) -> tuple[EdgeMapConfig, PyramidConfig, TrackerFGConfig]:
    doc = json.loads(Path(config_path).read_text()) if config_path else {}
    return (
        EdgeMapConfig(**doc.get("edge", {})),
        PyramidConfig(**{k: tuple(v) if k == "raw_weights" else v for k, v in doc.get("pyramid", {}).items()}),
        TrackerFGConfig(**doc.get("tracker_fg", {})),
    )


def _background_backends(bset: BackendSet) -> BackgroundBackends:
    return BackgroundBackends(
        interpolator=bset.interpolator(),
        scene_embedder=bset.scene_embedder(),
        auto_masker=bset.auto_masker(),
        grounder=bset.grounder(),
        propagator=bset.propagator(),
        phrase_extractor=bset.phrase_extractor(),
    )


def _foreground_backends(bset: BackendSet) -> ForegroundBackends:
    return ForegroundBackends(
        tracker=bset.tracker(),
        object_embedder=bset.object_embedder(),
        grounder=bset.grounder(),
        propagator=bset.propagator(),
        phrase_extractor=bset.phrase_extractor(),
    )


@click.group()
def main() -> None:
    """Video-consistency metrics and preference benchmark tooling."""


# ---------------------------------------------------------------------------
# Background
# ---------------------------------------------------------------------------

@main.group()
def bg() -> None:
    """Background scene consistency."""


@bg.command("score")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--video-id", required=True)
@click.option("--cache", "cache_dir", required=True, type=click.Path())
@click.option("--backends", "backends_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--emit-error-maps", "emit_dir", type=click.Path())
def bg_score(manifest_path, video_id, cache_dir, backends_path, config_path, emit_dir):
    """Score one video; prints the score JSON."""
    manifest = load_manifest(manifest_path)
    record = manifest.video(video_id)
    frames = decode_video(record)
    edge_cfg, pyr_cfg, _ = _configs(config_path)
    bset = BackendSet(load_backend_config(backends_path), record, manifest)
    backends = _background_backends(bset)
    prompt_text = manifest.prompt(record.prompt_id).text
    score = score_background(
        frames,
        prompt_text,
        backends,
        edge_cfg,
        pyr_cfg,
        video_id=video_id,
        cache=ArtifactCache(cache_dir),
        backend_tag=bset.tag,
    )
    if emit_dir:
        _emit_error_maps(
            Path(emit_dir), record, frames, prompt_text, backends, edge_cfg
        )
    click.echo(json.dumps(score.to_dict(), indent=2, sort_keys=True))


def _emit_error_maps(out_dir, record, frames, prompt_text, backends, edge_cfg):
    import cv2

    out_dir.mkdir(parents=True, exist_ok=True)
    stack = compute_ms_error_maps(frames, backends.interpolator)
    auto = backends.auto_masker.auto_masks(frames)
    phrases = extract_moving_objects(prompt_text, backends.phrase_extractor)
    _, unions = compute_object_masks(
        frames, phrases, backends.grounder, backends.propagator
    )
    debiased = []
    for m, i in enumerate(stack.frame_indices):
        edge = compute_edge_map(
            [obj[i] for obj in auto], edge_cfg, shape=stack.maps[m].shape
        )
        union = unions[i] if unions else np.zeros_like(edge)
        grid, _ = debias_error_map(stack.maps[m], edge, union)
        debiased.append(grid)
    debiased = np.stack(debiased)
    blob_path = out_dir / f"{record.video_id}_debias.bin"
    from .cache import encode_payload

    blob_path.write_bytes(encode_payload("error_maps", debiased))
    peak = max(debiased.max(), 1e-6)
    for m, i in enumerate(stack.frame_indices):
        heat = (255 * debiased[m] / peak).astype(np.uint8)
        colored = cv2.applyColorMap(heat, cv2.COLORMAP_JET)
        cv2.imwrite(str(out_dir / f"{record.video_id}_f{i:03d}.png"), colored)
    click.echo(f"wrote {blob_path} and {len(stack)} heatmaps", err=True)


# ---------------------------------------------------------------------------
# Foreground
# ---------------------------------------------------------------------------

@main.group()
def fg() -> None:
    """Foreground object consistency."""


@fg.command("score")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--video-id", required=True)
@click.option("--cache", "cache_dir", required=True, type=click.Path())
@click.option("--backends", "backends_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--emit-track-plot", "emit_path", type=click.Path())
def fg_score(manifest_path, video_id, cache_dir, backends_path, config_path, emit_path):
    """Score one video; prints the score JSON."""
    manifest = load_manifest(manifest_path)
    record = manifest.video(video_id)
    frames = decode_video(record)
    _, _, cfg = _configs(config_path)
    bset = BackendSet(load_backend_config(backends_path), record, manifest)
    backends = _foreground_backends(bset)
    prompt_text = manifest.prompt(record.prompt_id).text
    score = score_foreground(
        frames,
        prompt_text,
        backends,
        cfg,
        video_id=video_id,
        cache=ArtifactCache(cache_dir),
        backend_tag=bset.tag,
    )
    if emit_path:
        _emit_track_plot(Path(emit_path), frames, prompt_text, backends, cfg)
    click.echo(json.dumps(score.to_dict(), indent=2, sort_keys=True))


def _emit_track_plot(path, frames, prompt_text, backends, cfg):
    phrases = extract_moving_objects(prompt_text, backends.phrase_extractor)
    per_object, _ = compute_object_masks(
        frames, phrases, backends.grounder, backends.propagator
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["object", "frame", "mean_deviation"])
        for n, masks in enumerate(per_object):
            queries = sample_points_in_mask(masks[0], cfg.points_per_object, n)
            if queries.shape[0] < cfg.neighbors + 1:
                continue
            tracks = backends.tracker.track(frames, queries, start_frame=0)
            series = deviation_time_series(tracks, cfg)
            for t, value in enumerate(series):
                if np.isfinite(value):
                    writer.writerow([n, t, f"{value:.6f}"])
    click.echo(f"wrote {path}", err=True)


# ---------------------------------------------------------------------------
# Camera motion
# ---------------------------------------------------------------------------

@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--cache", "cache_dir", required=True, type=click.Path())
@click.option("--backends", "backends_path", required=True, type=click.Path(exists=True))
@click.option("--grid", default=16, show_default=True)
@click.option("--out", "out_path", type=click.Path())
def motion(manifest_path, cache_dir, backends_path, grid, out_path):
    """Camera-motion values and static/dynamic labels as CSV."""
    manifest = load_manifest(manifest_path)
    doc = load_backend_config(backends_path)
    cache = ArtifactCache(cache_dir)
    cfg_hash = config_hash({"grid": grid, "metric": "camera_motion"})
    results = []
    for record in manifest.videos:
        cached = cache.get("scores", f"motion-{record.video_id}", cfg_hash)
        if cached is not None:
            results.append(CameraMotionResult(record.video_id, cached["c_cam"]))
            continue
        frames = decode_video(record)
        tracker = BackendSet(doc, record, manifest).tracker()
        result = video_camera_motion(record.video_id, frames, tracker, grid)
        cache.put(
            CacheEntry(
                "scores", f"motion-{record.video_id}", cfg_hash, {"c_cam": result.c_cam}
            )
        )
        results.append(result)
    tau, labels = classify_static(results)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["video_id", "c_cam", "label"])
    for r in sorted(results, key=lambda r: r.video_id):
        writer.writerow([r.video_id, f"{r.c_cam:.6f}", labels[r.video_id]])
    text = buf.getvalue()
    if out_path:
        Path(out_path).write_text(text)
    else:
        click.echo(text, nl=False)
    click.echo(f"threshold: {tau:.6f}", err=True)


# ---------------------------------------------------------------------------
# Prompts
# ---------------------------------------------------------------------------

@main.group()
def prompts() -> None:
    """Prompt-suite generation."""


@prompts.command("build")
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True))
@click.option("--n", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--llm-endpoint", help="chat-completions base URL; omit to use the stub renderer")
@click.option("--llm-model", default="gpt-4o")
def prompts_build(lexicon_path, n, seed, out_path, llm_endpoint, llm_model):
    """Sample metadata and render a prompt suite to JSON."""
    from .prompts import (
        HttpChatClient,
        StubLLMClient,
        build_suite,
        bundled_lexicon,
        load_lexicon,
        save_suite,
    )

    lexicon = load_lexicon(lexicon_path) if lexicon_path else bundled_lexicon()
    client = (
        HttpChatClient(llm_endpoint, llm_model) if llm_endpoint else StubLLMClient()
    )
    suite, mix = build_suite(lexicon, client, n=n, seed=seed)
    save_suite(suite, mix, out_path)
    click.echo(f"wrote {n} prompts to {out_path}", err=True)


# ---------------------------------------------------------------------------
# Pairs and evaluation
# ---------------------------------------------------------------------------

@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path())
def pairs(manifest_path, seed, out_path):
    """Emit the benchmark pair structure as JSON."""
    from .harness import build_pairs

    manifest = load_manifest(manifest_path)
    built, pair_report = build_pairs(manifest, seed)
    doc = {
        "pairs": [
            {
                "prompt_id": p.prompt_id,
                "video_a": p.video_a,
                "video_b": p.video_b,
                "pair_type": p.pair_type,
            }
            for p in built
        ],
        "report": pair_report,
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out_path:
        Path(out_path).write_text(text)
        click.echo(f"wrote {len(built)} pairs to {out_path}", err=True)
    else:
        click.echo(text, nl=False)


def _score_all_videos(
    manifest: DatasetManifest,
    backends_doc: dict,
    cache: ArtifactCache,
    edge_cfg: EdgeMapConfig,
    pyr_cfg: PyramidConfig,
    fg_cfg: TrackerFGConfig,
    dimensions: list[str],
    grid: int = 16,
):
    bg_scores: dict[str, float] = {}
    fg_scores = {}
    motion_results = []
    for record in manifest.videos:
        frames = decode_video(record)
        bset = BackendSet(backends_doc, record, manifest)
        prompt_text = manifest.prompt(record.prompt_id).text
        if "background" in dimensions:
            score = score_background(
                frames,
                prompt_text,
                _background_backends(bset),
                edge_cfg,
                pyr_cfg,
                video_id=record.video_id,
                cache=cache,
                backend_tag=bset.tag,
            )
            bg_scores[record.video_id] = score.combined
        if "foreground" in dimensions:
            fg_scores[record.video_id] = score_foreground(
                frames,
                prompt_text,
                _foreground_backends(bset),
                fg_cfg,
                video_id=record.video_id,
                cache=cache,
                backend_tag=bset.tag,
            )
        motion_results.append(
            video_camera_motion(record.video_id, frames, bset.tracker(), grid)
        )
    _, labels = classify_static(motion_results)
    return bg_scores, fg_scores, labels


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--annotations", "annotations_path", required=True, type=click.Path(exists=True))
@click.option("--cache", "cache_dir", required=True, type=click.Path())
@click.option("--backends", "backends_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--dims", default="bg,fg", show_default=True)
@click.option("--filters", default="full,agreement,inter,intra", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def evaluate(
    manifest_path,
    annotations_path,
    cache_dir,
    backends_path,
    config_path,
    dims,
    filters,
    out_dir,
):
    """Score every video, join with annotations, and write the report."""
    from .harness import load_annotations

    manifest = load_manifest(manifest_path)
    annotations = load_annotations(annotations_path)
    edge_cfg, pyr_cfg, fg_cfg = _configs(config_path)
    dimensions = [
        {"bg": "background", "fg": "foreground"}[d.strip()] for d in dims.split(",")
    ]
    bg_scores, fg_scores, labels = _score_all_videos(
        manifest,
        load_backend_config(backends_path),
        ArtifactCache(cache_dir),
        edge_cfg,
        pyr_cfg,
        fg_cfg,
        dimensions,
    )
    inputs = EvaluationInputs(
        manifest=manifest,
        annotations=annotations,
        background_scores=bg_scores,
        foreground_scores=fg_scores,
        motion_labels=labels,
    )
    report = run_evaluation(
        inputs,
        dimensions=dimensions,
        filter_names=[f.strip() for f in filters.split(",")],
    )
    write_report(report, out_dir)
    click.echo(f"wrote report to {out_dir}", err=True)


# ---------------------------------------------------------------------------
# Demo dataset
# ---------------------------------------------------------------------------

@main.group()
def demo() -> None:
    """Offline synthetic benchmark."""


@demo.command("generate")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--models", default=4, show_default=True)
@click.option("--prompts", "n_prompts", default=3, show_default=True)
@click.option("--generations", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
def demo_generate(out_dir, models, n_prompts, generations, seed):
    """Render a synthetic dataset with manifest, backends, annotations."""
    info = generate_demo_dataset(out_dir, models, n_prompts, generations, seed)
    click.echo(json.dumps(info, indent=2))


# ---------------------------------------------------------------------------
# Study service
# ---------------------------------------------------------------------------

@main.group()
def study() -> None:
    """Human annotation study service."""


@study.command("serve")
@click.option("--db", "db_path", required=True, type=click.Path())
@click.option("--videos", "videos_dir", type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8500, show_default=True)
@click.option("--admin-token", required=True)
def study_serve(db_path, videos_dir, host, port, admin_token):
    """Run the annotation-study HTTP service."""
    import uvicorn

    from .study import StudyStore, create_app

    app = create_app(StudyStore(db_path), videos_dir, admin_token)
    uvicorn.run(app, host=host, port=port)


@study.command("seed-demo")
@click.option("--db", "db_path", required=True, type=click.Path())
def study_seed_demo(db_path):
    """Load the demo pools and qualification battery into a study database."""
    from .study import StudyStore
    from .study.demo import seed_demo_store

    store = StudyStore(db_path)
    seed_demo_store(store)
    click.echo(f"seeded demo pools into {db_path}")


if __name__ == "__main__":
    main()
