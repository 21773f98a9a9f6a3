"""Acceptance gate: every release criterion at its stated tolerance.

Each test prints one PASS/FAIL line in the terminal summary (see
conftest). The whole module runs offline with the synthetic oracle and
recorded-replay backends only.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from dyneval.background import (
    EdgeMapConfig,
    PyramidConfig,
    compute_edge_map,
    compute_ms_error_maps,
    debias_error_map,
    ms_debias_score,
)
from dyneval.backends.synthetic import (
    OracleInterpolator,
    OracleTracker,
    ShiftBlendInterpolator,
    Sprite,
    SyntheticScene,
    disc_sprite,
    inject_patch_flicker,
    oracle_masks,
    oracle_tracks,
    render_synthetic_scene,
    square_sprite,
)
from dyneval.camera_motion import CameraMotionResult, camera_motion_metric, classify_static
from dyneval.foreground import (
    TrackerFGConfig,
    knn_neighbors,
    moving_average,
    neighbor_distance_series,
    track_deviation,
    tracker_fg_score,
)
from dyneval.harness import (
    HumanVotes,
    RankingEntry,
    RankingTable,
    VideoPair,
    build_pairs,
    model_level_plcc,
    topk_accuracy,
    win_ratios,
)
from dyneval.pyramid import downscale_frames
from dyneval.types import FrameSequence, TrackSet

from conftest import make_manifest, moving_sprite_scene

pytestmark = pytest.mark.acceptance


# ---------------------------------------------------------------------------
# Background consistency
# ---------------------------------------------------------------------------

def test_debias_matches_reference_on_1000_instances():
    """Vectorized debiasing equals a per-pixel loop exactly, 1000 x 16x16."""
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        error = (rng.random((16, 16)) * 255).astype(np.float32)
        edge = (rng.random((16, 16)) > 0.7).astype(np.uint8)
        obj = (rng.random((16, 16)) > 0.7).astype(np.uint8)
        got, got_valid = debias_error_map(error, edge, obj)
        expected = np.empty_like(error)
        valid = 0
        for y in range(16):
            for x in range(16):
                masked = edge[y, x] or obj[y, x]
                expected[y, x] = 0.0 if masked else error[y, x]
                valid += 0 if masked else 1
        assert np.array_equal(got, expected)
        assert got_valid == valid / 256


def _acceptance_scene(i: int) -> SyntheticScene:
    mask, texture = (square_sprite, disc_sprite)[i % 2](
        7 + (i % 3) * 2, (200 - 10 * i, 40 + 12 * i, 60 + 9 * i)
    )
    return SyntheticScene(
        seed=100 + i,
        camera_velocity=((i % 3) - 1, (i % 2)),
        sprites=(
            Sprite(
                mask=mask,
                texture=texture,
                start=(18.0 + i, 22.0 + (i % 4)),
                velocity=(0.5 + 0.25 * (i % 3), 0.25 * (i % 2)),
            ),
        ),
        texture_period=32,
    )


def test_perfect_interpolator_scores_exactly_one():
    """Oracle middles at every level: ms_debias score 1.0 within 1e-6."""
    for i in range(10):
        scene = _acceptance_scene(i)
        frames = render_synthetic_scene(scene, 16, 64, 64)
        auto = oracle_masks(scene, 16, 64, 64)
        unions = [m.copy() for m in auto[0]]
        score, per_level, _ = ms_debias_score(frames, OracleInterpolator(), auto, unions)
        assert abs(score - 1.0) <= 1e-6, f"scene {i}: score {score}"


def test_occlusion_band_errors_dominate_and_debias_to_zero():
    """Shift-and-blend errors concentrate in the edge band; the band zeroes out."""
    scene = moving_sprite_scene(seed=77, dx=1, sprite_velocity=(1.0, 0.0))
    frames = render_synthetic_scene(scene, 16, 64, 64)
    stack = compute_ms_error_maps(frames, ShiftBlendInterpolator(max_shift=6))
    masks = oracle_masks(scene, 16, 64, 64)
    cfg = EdgeMapConfig()
    checked = 0
    for m, i in enumerate(stack.frame_indices):
        band = compute_edge_map([masks[0][i]], cfg).astype(bool)
        inside = stack.maps[m][band]
        outside = stack.maps[m][~band]
        assert inside.mean() >= 3.0 * outside.mean()
        assert inside.mean() > 0
        debiased, _ = debias_error_map(stack.maps[m], band.astype(np.uint8), masks[0][i])
        assert debiased[band].max() == 0.0
        checked += 1
    assert checked == 7


def test_injected_flicker_lowers_score_for_20_of_20_seeds():
    lowered = 0
    for seed in range(20):
        scene = moving_sprite_scene(seed=1000 + seed)
        clean = render_synthetic_scene(scene, 16, 64, 64)
        oracle = OracleInterpolator(frozen=True)
        level = clean.frames
        for _ in range(4):
            oracle.memorize(level)
            level = downscale_frames(level)
        auto = oracle_masks(scene, 16, 64, 64)
        unions = [m.copy() for m in auto[0]]
        clean_score, _, _ = ms_debias_score(clean, oracle, auto, unions)
        distorted = inject_patch_flicker(clean, x=48, y=48, size=8, amplitude=30)
        distorted_score, _, _ = ms_debias_score(distorted, oracle, auto, unions)
        if distorted_score < clean_score:
            lowered += 1
    assert lowered == 20


def test_multiscale_weights_and_convexity():
    cfg = PyramidConfig()
    weights = cfg.normalized_weights
    expected = (1 / 15, 2 / 15, 4 / 15, 8 / 15)
    assert all(abs(w - e) <= 1e-12 for w, e in zip(weights, expected))
    assert abs(sum(weights) - 1.0) <= 1e-12
    # constant per-level error aggregates to exactly that error
    for e in (0.0, 9.0, 100.0):
        assert abs(sum(w * e for w in weights) - e) <= 1e-9


# ---------------------------------------------------------------------------
# Foreground consistency
# ---------------------------------------------------------------------------

def _deforming_scene(seed: int, amplitude: float, rotation: float = 0.0) -> SyntheticScene:
    mask, texture = square_sprite(13, (220, 50, 50))
    return SyntheticScene(
        seed=seed,
        camera_velocity=(1, 0),
        sprites=(
            Sprite(
                mask=mask,
                texture=texture,
                start=(18.0, 24.0),
                velocity=(1.0, 0.25) if rotation == 0.0 else (0.0, 0.0),
                rotation_per_frame=rotation,
                deform_amplitude=amplitude,
                deform_period=7.0,
            ),
        ),
    )


def test_tracker_fg_rigidity_zero_and_monotone_in_deformation():
    cfg = TrackerFGConfig(points_per_object=32, neighbors=6)
    # rigid translation
    scene = _deforming_scene(seed=5, amplitude=0.0)
    frames = render_synthetic_scene(scene, 16, 64, 64)
    inconsistency, normalized, n = tracker_fg_score(
        frames, oracle_masks(scene, 16, 64, 64), OracleTracker(scene, 16, 64, 64), cfg
    )
    assert n == 1
    assert abs(inconsistency) <= 1e-9
    # rigid rotation about the sprite center
    rot = _deforming_scene(seed=6, amplitude=0.0, rotation=np.pi / 48)
    rot_scene = SyntheticScene(
        seed=6,
        sprites=(
            Sprite(
                mask=rot.sprites[0].mask,
                texture=rot.sprites[0].texture,
                start=(24.0, 24.0),
                rotation_per_frame=np.pi / 48,
            ),
        ),
    )
    rot_frames = render_synthetic_scene(rot_scene, 16, 64, 64)
    rot_inc, _, rot_n = tracker_fg_score(
        rot_frames,
        oracle_masks(rot_scene, 16, 64, 64),
        OracleTracker(rot_scene, 16, 64, 64),
        cfg,
    )
    assert rot_n == 1
    assert abs(rot_inc) <= 1e-9
    # strictly increasing inconsistency across deformation amplitudes
    values = []
    for amplitude in (0.5, 1.0, 2.0, 4.0):
        scene = _deforming_scene(seed=7, amplitude=amplitude)
        frames = render_synthetic_scene(scene, 16, 64, 64)
        inc, _, _ = tracker_fg_score(
            frames, oracle_masks(scene, 16, 64, 64), OracleTracker(scene, 16, 64, 64), cfg
        )
        values.append(inc)
    assert all(b > a for a, b in zip(values, values[1:])), values


def test_motion_invariance_is_exact():
    """Per-frame global shifts change every neighbor-distance deviation by 0."""
    rng = np.random.default_rng(99)
    pts = rng.integers(0, 512, size=(12, 16, 2)).astype(np.float64) / 8.0
    shifts = rng.integers(-2048, 2048, size=(1, 16, 2)).astype(np.float64) / 8.0
    base = TrackSet(0, pts, np.ones((12, 16), np.uint8))
    moved = TrackSet(0, pts + shifts, np.ones((12, 16), np.uint8))
    for p in range(12):
        for q in range(p + 1, 12):
            a = neighbor_distance_series(base, p, q)
            b = neighbor_distance_series(moved, p, q)
            assert np.array_equal(a, b)
            da = track_deviation(a, moving_average(a, 5))
            db = track_deviation(b, moving_average(b, 5))
            assert da == db  # exactly


# ---------------------------------------------------------------------------
# Statistics against brute-force references
# ---------------------------------------------------------------------------

def _ref_knn(points, k):
    n = len(points)
    out = []
    for p in range(n):
        chosen = []
        while len(chosen) < k:
            best, best_d = None, None
            for q in range(n):
                if q == p or q in chosen:
                    continue
                d = math.hypot(points[q][0] - points[p][0], points[q][1] - points[p][1])
                if best is None or d < best_d or (d == best_d and q < best):
                    best, best_d = q, d
            chosen.append(best)
        out.append(chosen)
    return out


def test_statistics_match_brute_force_references():
    rng = np.random.default_rng(314)
    tol = 1e-12

    for _ in range(100):  # kNN
        pts = rng.integers(0, 25, size=(20, 2)).astype(float)
        tracks = TrackSet(0, pts[:, None, :], np.ones((20, 1), np.uint8))
        assert knn_neighbors(tracks, 0, 4) == _ref_knn(pts, 4)

    for _ in range(100):  # moving average
        series = rng.random(rng.integers(1, 30))
        w = int(rng.choice([3, 5, 7]))
        got = moving_average(series, w)
        for t in range(len(series)):
            lo, hi = max(0, t - w // 2), min(len(series), t + w // 2 + 1)
            want = sum(series[lo:hi]) / (hi - lo)
            assert abs(got[t] - want) <= tol

    for _ in range(100):  # deviation
        d = rng.random(15)
        m = rng.random(15)
        want = sum(abs(a - b) for a, b in zip(d, m)) / 15
        assert abs(track_deviation(d, m) - want) <= tol

    for _ in range(100):  # camera motion
        pts = rng.random((8, 12, 2)) * 200
        tracks = TrackSet(0, pts, np.ones((8, 12), np.uint8))
        got = camera_motion_metric(tracks)
        total = 0.0
        for p in range(8):
            for c in range(2):
                series = pts[p, :, c]
                mean = sum(series) / len(series)
                total += sum((v - mean) ** 2 for v in series) / len(series)
        want = total / 8
        assert math.isclose(got, want, rel_tol=tol, abs_tol=tol)

    for _ in range(100):  # win ratios
        videos = [f"v{i}" for i in range(10)]
        pairs = [
            VideoPair("p", videos[i], videos[j], "inter")
            for i in range(10)
            for j in range(i + 1, 10)
        ]
        votes = {
            p.key: HumanVotes([("a" if rng.random() < 0.5 else "b") for _ in range(3)])
            for p in pairs
        }
        table = win_ratios("p", pairs, votes)
        recount = {v: 0 for v in videos}
        for p in pairs:
            winner = p.video_a if votes[p.key].majority == "a" else p.video_b
            recount[winner] += 1
        assert {e.video_id: e.wins for e in table.entries} == recount
        assert table.total_wins == 45

    for _ in range(100):  # top-k and PLCC on one fixture family
        tables, scores, video_to_model = [], {}, {}
        for t in range(5):
            entries = []
            for m in range(10):
                vid = f"r{t}m{m}"
                video_to_model[vid] = f"model-{m}"
                entries.append(RankingEntry(vid, int(rng.integers(0, 10)), 9))
                scores[vid] = float(rng.random())
            entries.sort(key=lambda e: (-e.win_ratio, e.video_id))
            tables.append(RankingTable(f"r{t}", entries))
        k = int(rng.integers(1, 11))
        got = topk_accuracy(scores, tables, k)
        hits = 0
        for table in tables:
            best = table.entries[0].video_id
            ranked = sorted(
                (e.video_id for e in table.entries), key=lambda v: (-scores[v], v)
            )
            hits += int(best in ranked[:k])
        assert abs(got - hits / 5) <= tol

        got_plcc = model_level_plcc(scores, tables, video_to_model)
        models = sorted(set(video_to_model.values()))
        xs, ys = [], []
        for model in models:
            vids = [v for v in video_to_model if video_to_model[v] == model]
            ratio = {}
            for table in tables:
                for e in table.entries:
                    ratio[e.video_id] = e.win_ratio
            xs.append(sum(scores[v] for v in vids) / len(vids))
            ys.append(sum(ratio[v] for v in vids) / len(vids))
        n = len(xs)
        mx, my = sum(xs) / n, sum(ys) / n
        cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / n
        sx = math.sqrt(sum((x - mx) ** 2 for x in xs) / n)
        sy = math.sqrt(sum((y - my) ** 2 for y in ys) / n)
        assert math.isclose(got_plcc, cov / (sx * sy), rel_tol=1e-9, abs_tol=1e-9)


# ---------------------------------------------------------------------------
# Harness structure
# ---------------------------------------------------------------------------

def test_harness_structure_at_benchmark_scale():
    manifest = make_manifest(models=10, prompts=100, generations=3)
    pairs, report = build_pairs(manifest, seed=0)
    inter = [p for p in pairs if p.pair_type == "inter"]
    intra = [p for p in pairs if p.pair_type == "intra"]
    assert len(inter) == 4500
    assert len(intra) == 3000
    assert report["skipped_prompts"] == []

    rng = np.random.default_rng(0)
    prompt = "p000"
    prompt_inter = [p for p in inter if p.prompt_id == prompt]
    votes = {
        p.key: HumanVotes([("a" if rng.random() < 0.5 else "b") for _ in range(3)])
        for p in prompt_inter
    }
    table = win_ratios(prompt, prompt_inter, votes)
    assert table.total_wins == 45


def test_random_metric_top1_near_chance():
    rng = np.random.default_rng(555)
    tables, scores = [], {}
    for t in range(5000):
        entries = []
        for m in range(10):
            vid = f"s{t}m{m}"
            entries.append(RankingEntry(vid, int(rng.integers(0, 10)), 9))
            scores[vid] = float(rng.random())
        entries.sort(key=lambda e: (-e.win_ratio, e.video_id))
        tables.append(RankingTable(f"s{t}", entries))
    acc = topk_accuracy(scores, tables, 1)
    assert abs(acc - 0.10) <= 0.03


# ---------------------------------------------------------------------------
# Static classification
# ---------------------------------------------------------------------------

def test_static_classification_finds_zero_motion_videos():
    rng = np.random.default_rng(8)
    results = [CameraMotionResult(f"static-{i}", 0.0) for i in range(6)]
    results += [
        CameraMotionResult(f"dynamic-{i}", float(v))
        for i, v in enumerate(rng.uniform(3.0, 80.0, size=54))
    ]
    tau, labels = classify_static(results, percentile=10)
    static = {vid for vid, label in labels.items() if label == "static"}
    assert static == {f"static-{i}" for i in range(6)}


# ---------------------------------------------------------------------------
# Conditional full-scale reproduction
# ---------------------------------------------------------------------------

@pytest.mark.skip(
    reason="conditional: needs the released 3k-video dataset, its 45k "
    "annotations, and production model backends on GPU; see README for the "
    "reproduction recipe"
)
def test_conditional_full_scale_reproduction():
    raise NotImplementedError


# ---------------------------------------------------------------------------
# Study service (secondary-facing criteria that run on the primary alone)
# ---------------------------------------------------------------------------

def test_hit_structure_and_reliability_thresholds():
    from dyneval.study import StudyStore
    from dyneval.study.demo import (
        qualification_answers,
        seed_demo_store,
        simulated_answers,
    )

    store = StudyStore()
    seed_demo_store(store, n_prompts=1)

    boundary = store.grade_qualification("w-8-3", **qualification_answers(8, 3))
    assert boundary["passed"] is False
    passing = store.grade_qualification("w-9-3", **qualification_answers(9, 3))
    assert passing["passed"] is True

    hit = store.assemble_hit("w-9-3", seed=1)
    assert len(hit["pages"]) == 20
    import json as _json

    pages = _json.loads(
        store._conn.execute(
            "SELECT pages FROM hits WHERE hit_id=?", (hit["hit_id"],)
        ).fetchone()["pages"]
    )
    roles = [p["role"] for p in pages]
    assert roles.count("payload") == 15
    assert roles.count("repeat") == 2
    assert roles.count("gold") == 2
    assert roles.count("sanity") == 1

    receipt = store.score_response(
        hit["hit_id"], "w-9-3", simulated_answers(store, hit["hit_id"])
    )
    assert receipt["accepted"] is True
    assert len(store.export_annotations()) == 30

    store2 = StudyStore()
    seed_demo_store(store2, n_prompts=1)
    store2.grade_qualification("w2", **qualification_answers(10, 3))
    hit2 = store2.assemble_hit("w2", seed=2)
    pages2 = _json.loads(
        store2._conn.execute(
            "SELECT pages FROM hits WHERE hit_id=?", (hit2["hit_id"],)
        ).fetchone()["pages"]
    )
    total = len(StudyStore._reliability_questions(pages2))
    wrong = total - int(round(0.75 * total))
    receipt2 = store2.score_response(
        hit2["hit_id"], "w2", simulated_answers(store2, hit2["hit_id"], wrong_reliability=wrong)
    )
    assert receipt2["reliability_score"] == pytest.approx(0.75)
    assert receipt2["accepted"] is False
