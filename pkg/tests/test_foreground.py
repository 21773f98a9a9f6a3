from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dyneval.backends.synthetic import (
    DownsampleEmbedder,
    OracleTracker,
    Sprite,
    SyntheticScene,
    oracle_masks,
    render_synthetic_scene,
    square_sprite,
)
from dyneval.foreground import (
    ForegroundScore,
    TrackerFGConfig,
    fg_pair_verdict,
    knn_neighbors,
    moving_average,
    neighbor_distance_series,
    normalize_inconsistency,
    object_inconsistency,
    sample_points_in_mask,
    track_deviation,
    tracker_fg_score,
    vb_sc_score,
)
from dyneval.types import FrameSequence, TrackSet


def tracks_from_points(points: np.ndarray, visible: np.ndarray | None = None) -> TrackSet:
    points = np.asarray(points, dtype=np.float64)
    if visible is None:
        visible = np.ones(points.shape[:2], dtype=np.uint8)
    return TrackSet(object_index=0, points=points, visible=visible)


def deform_scene(seed: int, amplitude: float) -> SyntheticScene:
    mask, texture = square_sprite(13, (220, 50, 50))
    return SyntheticScene(
        seed=seed,
        camera_velocity=(1, 0),
        sprites=(
            Sprite(
                mask=mask,
                texture=texture,
                start=(18.0, 24.0),
                velocity=(1.0, 0.25),
                deform_amplitude=amplitude,
                deform_period=7.0,
            ),
        ),
    )


# ---------------------------------------------------------------------------
# Point sampling
# ---------------------------------------------------------------------------

def test_single_pixel_mask():
    mask = np.zeros((8, 8), np.uint8)
    mask[3, 5] = 1
    pts = sample_points_in_mask(mask, 1, rng_seed=0)
    assert pts.shape == (1, 2)
    assert tuple(pts[0]) == (5.0, 3.0)


def test_empty_mask_yields_no_points():
    assert sample_points_in_mask(np.zeros((8, 8), np.uint8), 10, 0).shape == (0, 2)


def test_small_mask_takes_all_pixels(caplog):
    mask = np.zeros((8, 8), np.uint8)
    mask[2:4, 2:4] = 1
    with caplog.at_level("WARNING"):
        pts = sample_points_in_mask(mask, 16, 0)
    assert pts.shape == (4, 2)


def test_sampling_is_deterministic_and_distinct():
    mask = np.ones((40, 40), np.uint8)
    a = sample_points_in_mask(mask, 64, 7)
    b = sample_points_in_mask(mask, 64, 7)
    assert np.array_equal(a, b)
    assert len({tuple(p) for p in a}) == 64


def test_sampling_uniform_over_quadrants():
    # 50x20 = 1000-pixel mask; aggregate 100 seeds, chi^2 over quadrants
    mask = np.zeros((32, 64), np.uint8)
    mask[6 : 6 + 20, 7 : 7 + 50] = 1
    counts = np.zeros(4)
    for seed in range(100):
        pts = sample_points_in_mask(mask, 64, seed)
        qx = (pts[:, 0] - 7 >= 25).astype(int)
        qy = (pts[:, 1] - 6 >= 10).astype(int)
        for q in qy * 2 + qx:
            counts[q] += 1
    result = stats.chisquare(counts)
    assert result.pvalue > 0.01


# ---------------------------------------------------------------------------
# kNN selection
# ---------------------------------------------------------------------------

def test_knn_collinear_points():
    pts = np.array([[[0.0, 0.0]], [[1.0, 0.0]], [[3.0, 0.0]]])
    tracks = tracks_from_points(pts)
    assert knn_neighbors(tracks, 0, 1) == [[1], [0], [1]]


def test_knn_tie_prefers_lower_index():
    pts = np.array([[[0.0, 0.0]], [[2.0, 0.0]], [[1.0, 0.0]]])
    tracks = tracks_from_points(pts)
    # point 2 sits exactly 1 away from both 0 and 1
    assert knn_neighbors(tracks, 0, 1)[2] == [0]


def test_knn_requires_enough_visible_tracks():
    pts = np.zeros((3, 2, 2))
    vis = np.ones((3, 2), np.uint8)
    vis[2, 0] = 0
    tracks = tracks_from_points(pts, vis)
    with pytest.raises(ValueError, match="visible tracks"):
        knn_neighbors(tracks, 0, 2)


def ref_knn(points: np.ndarray, vis: np.ndarray, k: int) -> list[list[int]]:
    n = len(points)
    out = []
    for p in range(n):
        if not vis[p]:
            out.append([])
            continue
        chosen: list[int] = []
        remaining = [q for q in range(n) if q != p and vis[q]]
        while len(chosen) < k:
            best, best_d = None, None
            for q in remaining:
                if q in chosen:
                    continue
                d = float(np.hypot(*(points[q] - points[p])))
                if best is None or d < best_d or (d == best_d and q < best):
                    best, best_d = q, d
            chosen.append(best)
        out.append(chosen)
    return out


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_knn_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 30, size=(50, 2)).astype(float)  # integer coords force ties
    tracks = tracks_from_points(pts[:, None, :])
    got = knn_neighbors(tracks, 0, 5)
    want = ref_knn(pts, np.ones(50, bool), 5)
    assert got == want


# ---------------------------------------------------------------------------
# Distance series, moving average, deviation
# ---------------------------------------------------------------------------

def test_static_tracks_constant_series():
    pts = np.zeros((2, 6, 2))
    pts[1, :, 0] = 5.0
    series = neighbor_distance_series(tracks_from_points(pts), 0, 1)
    assert np.allclose(series, 5.0)


def test_rigid_translation_constant_series():
    rng = np.random.default_rng(0)
    base = rng.random((2, 1, 2)) * 10
    shifts = rng.random((1, 8, 2)) * 50
    pts = base + shifts  # both tracks share per-frame shifts
    series = neighbor_distance_series(tracks_from_points(pts), 0, 1)
    assert np.allclose(series, series[0])


def test_scripted_series_matches_hand_norms():
    pts = np.zeros((2, 3, 2))
    pts[1] = [[3.0, 4.0], [6.0, 8.0], [0.0, 1.0]]
    series = neighbor_distance_series(tracks_from_points(pts), 0, 1)
    assert series == pytest.approx([5.0, 10.0, 1.0])


def test_series_skips_non_covisible_frames():
    pts = np.zeros((2, 6, 2))
    pts[1, :, 0] = np.arange(6)
    vis = np.ones((2, 6), np.uint8)
    vis[0, 2] = 0
    series = neighbor_distance_series(tracks_from_points(pts, vis), 0, 1)
    assert series == pytest.approx([0.0, 1.0, 3.0, 4.0, 5.0])


def test_series_respects_min_covisible():
    pts = np.zeros((2, 6, 2))
    vis = np.ones((2, 6), np.uint8)
    vis[0, :3] = 0
    assert neighbor_distance_series(tracks_from_points(pts, vis), 0, 1, min_covisible=4) is None


def test_moving_average_constant():
    assert np.allclose(moving_average(np.full(7, 3.25), 5), 3.25)


def test_moving_average_boundary_windows():
    got = moving_average(np.array([0.0, 3.0, 0.0]), 3)
    assert got == pytest.approx([1.5, 1.0, 1.5])


def test_moving_average_impulse_plateau():
    series = np.zeros(21)
    series[10] = 1.0
    got = moving_average(series, 5)
    assert got[8:13] == pytest.approx(np.full(5, 1 / 5))
    assert got[:8] == pytest.approx(np.zeros(8))


def test_track_deviation_values():
    assert track_deviation(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    assert track_deviation(np.array([0.0, 2.0]), np.array([1.0, 1.0])) == 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_track_deviation_matches_loop(seed):
    rng = np.random.default_rng(seed)
    d = rng.random(12)
    m = rng.random(12)
    want = sum(abs(a - b) for a, b in zip(d, m)) / 12
    assert track_deviation(d, m) == pytest.approx(want, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([3, 5]))
def test_deviation_zero_iff_constant(seed, w):
    rng = np.random.default_rng(seed)
    constant = np.full(10, float(rng.integers(1, 9)))
    assert track_deviation(constant, moving_average(constant, w)) == 0.0
    wiggly = constant.copy()
    wiggly[4] += 1.0
    assert track_deviation(wiggly, moving_average(wiggly, w)) > 0.0


# ---------------------------------------------------------------------------
# Motion invariance
# ---------------------------------------------------------------------------

def _dyadic(rng, shape, scale=64):
    return rng.integers(0, 8 * scale, size=shape).astype(np.float64) / 8.0


def test_global_shift_leaves_deviation_exactly_unchanged():
    rng = np.random.default_rng(11)
    pts = _dyadic(rng, (10, 16, 2))
    shifts = _dyadic(rng, (1, 16, 2), scale=256)
    tracks = tracks_from_points(pts)
    shifted = tracks_from_points(pts + shifts)
    for p in range(10):
        for q in range(p + 1, 10):
            a = neighbor_distance_series(tracks, p, q)
            b = neighbor_distance_series(shifted, p, q)
            assert np.array_equal(a, b)  # bitwise identical
            ma = moving_average(a, 5)
            assert track_deviation(a, ma) == track_deviation(b, moving_average(b, 5))


def test_global_rotation_preserves_score():
    rng = np.random.default_rng(12)
    pts = rng.random((12, 16, 2)) * 40 + 10
    theta = rng.random(16) * 2 * np.pi
    rotated = np.empty_like(pts)
    for t in range(16):
        c, s = np.cos(theta[t]), np.sin(theta[t])
        rot = np.array([[c, -s], [s, c]])
        rotated[:, t, :] = pts[:, t, :] @ rot.T
    cfg = TrackerFGConfig(points_per_object=12, neighbors=4, min_covisible_frames=4)
    a = object_inconsistency(tracks_from_points(pts), cfg)
    b = object_inconsistency(tracks_from_points(rotated), cfg)
    assert abs(a - b) < 1e-9


# ---------------------------------------------------------------------------
# Object scores
# ---------------------------------------------------------------------------

def test_rigid_translating_sprite_scores_zero():
    scene = deform_scene(seed=3, amplitude=0.0)
    frames = render_synthetic_scene(scene, 16, 64, 64)
    masks = oracle_masks(scene, 16, 64, 64)
    tracker = OracleTracker(scene, 16, 64, 64)
    cfg = TrackerFGConfig(points_per_object=32, neighbors=6)
    inconsistency, normalized, n_objects = tracker_fg_score(frames, masks, tracker, cfg)
    assert n_objects == 1
    assert inconsistency == pytest.approx(0.0, abs=1e-9)
    assert normalized == pytest.approx(1.0, abs=1e-9)


def test_rotating_sprite_scores_zero():
    mask, texture = square_sprite(11, (220, 50, 50))
    scene = SyntheticScene(
        seed=4,
        sprites=(
            Sprite(
                mask=mask,
                texture=texture,
                start=(26.0, 26.0),
                rotation_per_frame=np.pi / 40,
            ),
        ),
    )
    frames = render_synthetic_scene(scene, 16, 64, 64)
    tracker = OracleTracker(scene, 16, 64, 64)
    queries = np.array(
        [[28.0, 28.0], [30.0, 29.0], [32.0, 31.0], [29.0, 33.0], [31.0, 27.0]]
    )
    tracks = tracker.track(frames, queries)
    cfg = TrackerFGConfig(points_per_object=5, neighbors=2, min_covisible_frames=4)
    assert object_inconsistency(tracks, cfg) == pytest.approx(0.0, abs=1e-9)


def test_deformation_monotonically_increases_inconsistency():
    values = []
    cfg = TrackerFGConfig(points_per_object=32, neighbors=6)
    for amplitude in (0.5, 1.0, 2.0, 4.0):
        scene = deform_scene(seed=5, amplitude=amplitude)
        frames = render_synthetic_scene(scene, 16, 64, 64)
        masks = oracle_masks(scene, 16, 64, 64)
        tracker = OracleTracker(scene, 16, 64, 64)
        inconsistency, _, _ = tracker_fg_score(frames, masks, tracker, cfg)
        values.append(inconsistency)
    assert all(b > a for a, b in zip(values, values[1:]))


def test_two_object_mean():
    # engineered per-object inconsistencies 0 and 2 average to 1
    cfg = TrackerFGConfig(points_per_object=2, neighbors=1, min_covisible_frames=4, moving_average_window=3)
    flat = np.zeros((2, 8, 2))
    flat[1, :, 0] = 4.0
    zig = np.zeros((2, 8, 2))
    zig[1, :, 0] = 4.0
    zig[1, 1::2, 0] += 8.0  # alternation with |d - ma(d)| = 2 in the interior
    a = object_inconsistency(tracks_from_points(flat), cfg)
    b = object_inconsistency(tracks_from_points(zig), cfg)
    assert a == pytest.approx(0.0)
    assert b > 0
    assert np.mean([a, b]) == pytest.approx((a + b) / 2)


def test_tracker_fg_determinism():
    scene = deform_scene(seed=6, amplitude=1.0)
    frames = render_synthetic_scene(scene, 16, 64, 64)
    masks = oracle_masks(scene, 16, 64, 64)
    tracker = OracleTracker(scene, 16, 64, 64)
    a = tracker_fg_score(frames, masks, tracker, rng_seed=9)
    b = tracker_fg_score(frames, masks, tracker, rng_seed=9)
    assert a == b


def test_vb_sc_identical_frames():
    frames = FrameSequence(np.full((4, 16, 16, 3), 50, np.uint8))
    assert vb_sc_score(frames, DownsampleEmbedder()) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# Pair verdicts
# ---------------------------------------------------------------------------

def fg(n, tracker_fg=None, vb_sc=0.5):
    combined = vb_sc if n == 0 else (vb_sc + tracker_fg) / 2
    return ForegroundScore(
        tracker_fg_inconsistency=None if n == 0 else 0.1,
        tracker_fg=tracker_fg,
        vb_sc=vb_sc,
        combined=combined,
        objects_found=n,
    )


def test_verdict_one_sided_objects():
    assert fg_pair_verdict(fg(2, tracker_fg=0.4), fg(0)) == "a"
    assert fg_pair_verdict(fg(0), fg(1, tracker_fg=0.4)) == "b"


def test_verdict_both_missing_uses_baseline():
    assert fg_pair_verdict(fg(0, vb_sc=0.9), fg(0, vb_sc=0.8)) == "a"
    assert fg_pair_verdict(fg(0, vb_sc=0.7), fg(0, vb_sc=0.8)) == "b"


def test_verdict_combined_comparison():
    a = fg(1, tracker_fg=0.7, vb_sc=0.7)   # combined 0.70
    b = fg(1, tracker_fg=0.8, vb_sc=0.7)   # combined 0.75
    assert fg_pair_verdict(a, b) == "b"


def test_verdict_tie_breaks_by_id():
    a = fg(1, tracker_fg=0.5, vb_sc=0.5)
    b = fg(1, tracker_fg=0.5, vb_sc=0.5)
    assert fg_pair_verdict(a, b, "v1", "v2") == "a"
    assert fg_pair_verdict(a, b, "v2", "v1") == "b"


def test_normalization_maps_zero_to_one():
    assert normalize_inconsistency(0.0, 2.0) == 1.0
    assert normalize_inconsistency(2.0, 2.0) == pytest.approx(np.exp(-1))
    assert normalize_inconsistency(5.0, 2.0) < normalize_inconsistency(1.0, 2.0)
