"""Data pipeline: normalization, orientation removal, augmentation, windows, IO."""

import numpy as np
import pytest
from scipy import stats

from choreo import data, synth
from choreo.data import (
    DataError,
    MotionDataset,
    center_and_scale,
    denormalize,
    export_animation,
    load_animation,
    make_sequence_windows,
    make_windows,
    offset_augment,
    remove_orientation,
    restore_orientation,
    rotate_augment,
)
from choreo.synth import HEADING_PAIR, SynthConfig, generate_synthetic


@pytest.fixture(scope="module")
def raw_ds():
    return generate_synthetic(SynthConfig(frames=100, fps=35.0), 7)


def pairwise_distances(frame):
    diff = frame[:, None, :] - frame[None, :, :]
    return np.linalg.norm(diff, axis=2)


class TestCenterAndScale:
    def test_random_dataset_fills_unit_cube(self, raw_ds):
        norm, params = center_and_scale(raw_ds)
        lo = norm.frames.min()
        hi = norm.frames.max()
        assert abs(lo - 0.0) < 1e-12
        assert abs(hi - 1.0) < 1e-12
        # per-axis minima sit at zero by construction
        np.testing.assert_allclose(norm.frames.reshape(-1, 3).min(axis=0), 0.0, atol=1e-12)

    def test_already_normalized_is_identity(self, raw_ds):
        norm, _ = center_and_scale(raw_ds)
        again, params = center_and_scale(MotionDataset(norm.frames, fps=norm.fps))
        np.testing.assert_allclose(again.frames, norm.frames, atol=1e-12)
        assert abs(params.scale - 1.0) < 1e-9
        # net translation is zero: centering offset cancels the cube shift
        net = params.cube_min.copy()
        net[:2] += params.center_offset
        np.testing.assert_allclose(net, 0.0, atol=1e-9)

    def test_translation_invariance_in_xy(self, raw_ds):
        shifted = raw_ds.frames.copy()
        shifted[:, :, 0] += 5.0
        shifted[:, :, 1] -= 3.0
        a, _ = center_and_scale(raw_ds)
        b, _ = center_and_scale(MotionDataset(shifted, fps=raw_ds.fps))
        np.testing.assert_allclose(a.frames, b.frames, atol=1e-9)

    def test_round_trip_identity(self, raw_ds):
        norm, _ = center_and_scale(raw_ds)
        back = denormalize(norm)
        np.testing.assert_allclose(back.frames, raw_ds.frames, atol=1e-9)

    def test_per_frame_mode_pins_centroids(self, raw_ds):
        norm, params = center_and_scale(raw_ds, per_frame=True)
        centroids = norm.frames[:, :, :2].mean(axis=1)
        # every frame's (x, y) centroid lands on one common point
        assert np.abs(centroids - centroids[0]).max() < 1e-9
        back = denormalize(norm)
        np.testing.assert_allclose(back.frames, raw_ds.frames, atol=1e-9)

    def test_degenerate_dataset_rejected(self):
        frames = np.zeros((4, 53, 3))
        with pytest.raises(DataError):
            center_and_scale(MotionDataset(frames))


class TestRemoveOrientation:
    def test_canonical_frame_unchanged(self):
        ds = generate_synthetic(SynthConfig(frames=1, fps=35.0), 3)
        canon = remove_orientation(ds, HEADING_PAIR)
        twice = remove_orientation(canon, HEADING_PAIR)
        np.testing.assert_allclose(twice.frames, canon.frames, atol=1e-9)

    def test_rotation_invariance(self, raw_ds):
        canon = remove_orientation(raw_ds, HEADING_PAIR)
        for theta in (0.3, 1.7, -2.4):
            c, s = np.cos(theta), np.sin(theta)
            rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
            rotated = raw_ds.frames @ rot.T
            canon2 = remove_orientation(MotionDataset(rotated, fps=raw_ds.fps), HEADING_PAIR)
            np.testing.assert_allclose(canon2.frames, canon.frames, atol=1e-9)

    def test_round_trip(self, raw_ds):
        canon = remove_orientation(raw_ds, HEADING_PAIR)
        back = restore_orientation(canon)
        np.testing.assert_allclose(back.frames, raw_ds.frames, atol=1e-9)

    def test_idempotent(self, raw_ds):
        once = remove_orientation(raw_ds, HEADING_PAIR)
        twice = remove_orientation(MotionDataset(once.frames, fps=raw_ds.fps), HEADING_PAIR)
        np.testing.assert_allclose(twice.frames, once.frames, atol=1e-9)

    def test_coincident_heading_carries_previous(self):
        ds = generate_synthetic(SynthConfig(frames=3, fps=35.0), 5)
        frames = ds.frames.copy()
        # collapse the heading pair in the horizontal plane on the last frame
        a, b = HEADING_PAIR
        frames[2, b, :2] = frames[2, a, :2]
        canon = remove_orientation(MotionDataset(frames), HEADING_PAIR)
        assert canon.norm.per_frame_heading[2] == canon.norm.per_frame_heading[1]


class TestAugmentations:
    def test_rotate_preserves_distances(self, raw_ds):
        batch = raw_ds.frames[None, :20]
        rotated = rotate_augment(batch, np.random.default_rng(0))
        for t in range(20):
            np.testing.assert_allclose(
                pairwise_distances(rotated[0, t]),
                pairwise_distances(batch[0, t]),
                atol=1e-9,
            )

    def test_rotate_theta_distribution_uniform(self, raw_ds):
        """Kolmogorov-Smirnov on recovered angles over 10^4 draws."""
        rng = np.random.default_rng(123)
        single = raw_ds.frames[:1]  # one-frame sequence
        a, b = HEADING_PAIR
        base_vec = single[0, b, :2] - single[0, a, :2]
        base_angle = np.arctan2(base_vec[1], base_vec[0])
        thetas = np.empty(10_000)
        for i in range(thetas.size):
            rot = rotate_augment(single[None], rng)[0]
            vec = rot[0, b, :2] - rot[0, a, :2]
            thetas[i] = (np.arctan2(vec[1], vec[0]) - base_angle) % (2 * np.pi)
        result = stats.kstest(thetas, "uniform", args=(0.0, 2.0 * np.pi))
        assert result.pvalue > 0.01

    def test_offset_translates_xy_only(self, raw_ds):
        frames = raw_ds.frames[:10]
        out = offset_augment(frames, np.random.default_rng(1))
        np.testing.assert_array_equal(out[:, :, 2], frames[:, :, 2])
        for t in range(10):
            np.testing.assert_allclose(
                pairwise_distances(out[t]), pairwise_distances(frames[t]), atol=1e-12
            )
            shift = out[t, :, :2] - frames[t, :, :2]
            assert np.abs(shift - shift[0]).max() < 1e-12
            assert np.all(shift[0] >= 0.0) and np.all(shift[0] <= 1.0)


class TestWindows:
    def test_count_formula(self, raw_ds):
        ds = MotionDataset(raw_ds.frames[:10], fps=raw_ds.fps)
        pairs = make_windows(ds, 4, 1, stride=1)
        # enumeration: offsets 0..5 admit a 5-frame window in 10 frames
        assert len(pairs) == 6

    def test_too_short_yields_empty_with_warning(self, raw_ds):
        ds = MotionDataset(raw_ds.frames[:10], fps=raw_ds.fps)
        with pytest.warns(UserWarning):
            assert make_windows(ds, 10, 1) == []

    def test_disjoint_tiling_reassembles_prefix(self, raw_ds):
        m, n = 3, 2
        pairs = make_windows(raw_ds, m, n, stride=m + n)
        glued = np.concatenate([np.concatenate([p.prompt, p.target]) for p in pairs])
        np.testing.assert_array_equal(glued, raw_ds.frames[: len(glued)])

    def test_sequence_windows(self, raw_ds):
        seqs = make_sequence_windows(raw_ds, 16, 16)
        assert seqs.shape == (6, 16, 53, 3)
        np.testing.assert_array_equal(seqs[0], raw_ds.frames[:16])


class TestSynth:
    def test_seed_determinism(self):
        cfg = SynthConfig(frames=50)
        a = generate_synthetic(cfg, 11)
        b = generate_synthetic(cfg, 11)
        np.testing.assert_array_equal(a.frames, b.frames)

    def test_bone_lengths_constant(self, raw_ds):
        edges = synth.skeleton_edges()
        lengths = np.stack([
            np.linalg.norm(raw_ds.frames[:, j] - raw_ds.frames[:, i], axis=1)
            for i, j in edges
        ])
        assert np.ptp(lengths, axis=1).max() < 1e-9

    def test_velocity_bound(self):
        cfg = SynthConfig(frames=120, max_step=0.05)
        ds = generate_synthetic(cfg, 9)
        step = np.linalg.norm(np.diff(ds.frames, axis=0), axis=2).max()
        assert step <= cfg.max_step

    def test_vertex_count_and_edges(self):
        assert len(synth.vertex_names()) == 53
        assert len(synth.skeleton_edges()) == 52


class TestAnimationIO:
    def test_round_trip(self, tmp_path, raw_ds):
        path = tmp_path / "clip.json"
        export_animation(raw_ds.frames[:3], path, fps=35.0)
        loaded = load_animation(path)
        np.testing.assert_allclose(loaded.frames, raw_ds.frames[:3], atol=1e-6)
        assert loaded.fps == 35.0

    def test_empty_sequence(self, tmp_path):
        path = tmp_path / "empty.json"
        export_animation(np.empty((0, 53, 3)), path, fps=24.0)
        loaded = load_animation(path)
        assert len(loaded) == 0
        assert loaded.fps == 24.0

    def test_fps_preserved_exactly(self, tmp_path, raw_ds):
        path = tmp_path / "clip.json"
        export_animation(raw_ds.frames[:2], path, fps=33.75)
        assert load_animation(path).fps == 33.75

    def test_csv_load(self, tmp_path, raw_ds):
        path = tmp_path / "clip.csv"
        flat = raw_ds.frames[:4].reshape(4, 159)
        np.savetxt(path, flat, delimiter=",", fmt="%.10g")
        loaded = load_animation(path)
        np.testing.assert_allclose(loaded.frames, raw_ds.frames[:4], rtol=1e-9)

    def test_malformed_doc_rejected(self, tmp_path):
        bad = {"version": 2, "fps": 30, "vertex_count": 53, "frames": []}
        with pytest.raises(DataError):
            data.parse_animation_doc(bad)
        with pytest.raises(DataError):
            data.parse_animation_doc({"version": 1, "fps": 30, "vertex_count": 10, "frames": []})
