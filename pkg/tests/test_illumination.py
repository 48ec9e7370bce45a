import numpy as np
import pytest

from detection.illumination import (
    IlluminationParams,
    hellinger_distance,
    is_illumination_change,
    select_stable_subsequence,
    value_histograms,
)
from errors import DimensionMismatchError, InvalidInputError
from imaging.core import FrameSequence, to_hsv_value_channel
from ingestion.synthetic import IlluminationChange, generate_synthetic
from tests.conftest import load_scene


def _bands_frame(levels, width=100, height=20):
    frame = np.empty((height, width, 3), dtype=np.uint8)
    edges = np.linspace(0, width, len(levels) + 1).astype(int)
    for level, x0, x1 in zip(levels, edges[:-1], edges[1:]):
        frame[:, x0:x1] = level
    return frame


class TestHellinger:
    def test_identical(self):
        h = np.arange(256, dtype=np.int64)
        assert hellinger_distance(h, h) == pytest.approx(0.0, abs=1e-7)

    def test_disjoint_supports(self):
        a = np.zeros(256, np.int64)
        b = np.zeros(256, np.int64)
        a[10], b[200] = 50, 70
        assert hellinger_distance(a, b) == pytest.approx(1.0)

    def test_scale_invariant(self):
        a = np.zeros(256, np.int64)
        a[[3, 40, 90]] = [5, 10, 20]
        b = a.copy()
        b[40] = 30
        assert hellinger_distance(a, b) == pytest.approx(hellinger_distance(a * 4, b * 4))

    def test_two_bins_against_one(self):
        a = np.zeros(256, np.int64)
        b = np.zeros(256, np.int64)
        a[[0, 1]] = 1
        b[0] = 1
        assert hellinger_distance(a, b) == pytest.approx(0.54120, abs=1e-4)

    def test_symmetric_and_bounded(self, rng):
        for _ in range(50):
            a = rng.integers(0, 20, size=256) * (rng.random(256) < 0.3)
            b = rng.integers(0, 20, size=256) * (rng.random(256) < 0.3)
            a[0] += 1
            b[255] += 1
            d = hellinger_distance(a, b)
            assert 0.0 <= d <= 1.0
            assert d == pytest.approx(hellinger_distance(b, a))

    def test_zero_histogram(self):
        with pytest.raises(InvalidInputError):
            hellinger_distance(np.zeros(256), np.ones(256))

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            hellinger_distance(np.ones(256), np.ones(128))


class TestChangeDetection:
    def test_brightness_shift_is_a_change(self):
        before = _bands_frame([40, 70, 100, 130])
        after = _bands_frame([100, 130, 160, 190])
        assert is_illumination_change(before, after)

    def test_brightened_texture_is_a_change(self, textured_frame):
        # channel values stay within [40, 180], so +60 never clips
        brighter = (textured_frame.astype(np.int32) + 60).astype(np.uint8)
        np.testing.assert_array_equal(
            to_hsv_value_channel(brighter).astype(np.int32),
            to_hsv_value_channel(textured_frame).astype(np.int32) + 60,
        )
        raw_before, eq_before = value_histograms(textured_frame)
        raw_after, eq_after = value_histograms(brighter)
        assert hellinger_distance(raw_before, raw_after) > 0.2
        assert hellinger_distance(eq_before, eq_after) < 0.1
        assert is_illumination_change(textured_frame, brighter)
        assert is_illumination_change(brighter, textured_frame)

    def test_same_frame_is_not_a_change(self):
        frame = _bands_frame([40, 70, 100, 130])
        assert not is_illumination_change(frame, frame)

    def test_content_change_is_not_a_change(self):
        before = _bands_frame([40, 70, 100, 130])
        after = _bands_frame([200, 200, 200, 30])
        assert not is_illumination_change(before, after)

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            is_illumination_change(_bands_frame([40], 10, 10), _bands_frame([40], 12, 10))

    @pytest.mark.parametrize("tau_h,tau_eh", [(0.0, 0.1), (0.2, 1.0), (1.5, 0.1)])
    def test_invalid_thresholds(self, tau_h, tau_eh):
        with pytest.raises(InvalidInputError):
            IlluminationParams(tau_h, tau_eh)


class TestSubsequenceSelection:
    def test_constant_illumination_keeps_everything(self, static_sequence):
        selection = select_stable_subsequence(static_sequence)
        assert (selection.start_index, selection.end_index) == (0, len(static_sequence) - 1)
        assert selection.boundaries == ()

    def test_single_frame(self, textured_frame):
        selection = select_stable_subsequence(FrameSequence(textured_frame[None]))
        assert (selection.start_index, selection.end_index, selection.length) == (0, 0, 1)

    def test_step_change_selects_later_run(self):
        frames, _ = generate_synthetic(load_scene("illumination"))
        selection = select_stable_subsequence(frames)
        assert selection.boundaries == (40,)
        assert (selection.start_index, selection.end_index) == (40, 99)

    def test_light_switch(self):
        scene = load_scene("illumination")
        scene = scene.model_copy(update={"illumination": [IlluminationChange(frame=30, offset=60)]})
        frames, _ = generate_synthetic(scene)
        selection = select_stable_subsequence(frames)
        assert (selection.start_index, selection.end_index) == (30, 99)

    def test_early_longer_run_wins(self):
        scene = load_scene("illumination")
        scene = scene.model_copy(update={"illumination": [IlluminationChange(frame=70, offset=60)]})
        frames, _ = generate_synthetic(scene)
        selection = select_stable_subsequence(frames)
        assert (selection.start_index, selection.end_index) == (0, 69)

    def test_equal_runs_prefer_later(self):
        low = _bands_frame([40, 70, 100, 130])
        high = _bands_frame([100, 130, 160, 190])
        frames = FrameSequence(np.stack([low] * 4 + [high] * 4))
        selection = select_stable_subsequence(frames)
        assert (selection.start_index, selection.end_index) == (4, 7)
