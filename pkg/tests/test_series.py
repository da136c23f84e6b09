import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raf import (
    EmbeddedToken,
    EmptyInput,
    NonFiniteInput,
    NormStats,
    Patch,
    TimeSeries,
    WindowTooLong,
    decode_embedding,
    denormalize,
    embed_patch,
    extract_patches,
    instance_normalize,
)
from reference_impls import ref_instance_normalize

finite_floats = st.floats(
    allow_nan=False, allow_infinity=False, min_value=-1e9, max_value=1e9
)


class TestTimeSeries:
    def test_basic_fields(self):
        ts = TimeSeries(id="a", freq="hourly", values=[1.0, 2.0])
        assert ts.id == "a"
        assert len(ts) == 2
        assert ts.values.dtype == np.float64

    def test_values_not_writeable(self):
        ts = TimeSeries(id="a", freq="hourly", values=[1.0, 2.0])
        with pytest.raises(ValueError):
            ts.values[0] = 9.0

    def test_empty_values_rejected(self):
        with pytest.raises(EmptyInput):
            TimeSeries(id="a", freq="hourly", values=[])

    def test_empty_id_rejected(self):
        with pytest.raises(EmptyInput):
            TimeSeries(id="", freq="hourly", values=[1.0])

    def test_nan_values_are_legal(self):
        ts = TimeSeries(id="a", freq="hourly", values=[1.0, math.nan, 3.0])
        assert math.isnan(ts.values[1])


class TestInstanceNormalize:
    def test_hand_example(self):
        normalized, stats = instance_normalize([1.0, 2.0, 3.0])
        assert normalized.tolist() == [-1.224744871391589, 0.0, 1.224744871391589]
        assert stats.mean == 2.0
        assert stats.std == 0.816496580927726
        assert not stats.degenerate

    def test_constant_series_degenerate(self):
        normalized, stats = instance_normalize([5.0, 5.0, 5.0])
        assert normalized.tolist() == [0.0, 0.0, 0.0]
        assert stats == NormStats(mean=5.0, std=1.0, degenerate=True)

    def test_already_normalized_unchanged(self):
        x = np.array([-1.0, 1.0])  # mean 0, population std 1
        normalized, stats = instance_normalize(x)
        assert normalized.tolist() == [-1.0, 1.0]
        assert stats.mean == 0.0
        assert stats.std == 1.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            instance_normalize([])

    def test_nan_rejected(self):
        with pytest.raises(NonFiniteInput):
            instance_normalize([1.0, math.nan])

    @given(st.lists(finite_floats, min_size=1, max_size=64))
    def test_matches_reference(self, values):
        normalized, stats = instance_normalize(values)
        ref_norm, ref_mean, ref_std, ref_degen = ref_instance_normalize(values)
        assert stats.degenerate == ref_degen
        assert stats.mean == pytest.approx(ref_mean, rel=1e-12, abs=1e-12)
        assert stats.std == pytest.approx(ref_std, rel=1e-12, abs=1e-12)
        np.testing.assert_allclose(normalized, ref_norm, rtol=1e-9, atol=1e-9)

    @given(st.lists(finite_floats, min_size=1, max_size=64))
    def test_round_trip(self, values):
        normalized, stats = instance_normalize(values)
        if stats.degenerate:
            return
        restored = denormalize(normalized, stats)
        # cancellation error scales with the series magnitude, not each entry
        scale = max(1.0, float(np.max(np.abs(values))))
        np.testing.assert_allclose(restored, values, rtol=1e-12, atol=1e-12 * scale)

    @given(
        st.lists(finite_floats, min_size=2, max_size=32),
        st.floats(min_value=0.5, max_value=100.0),
        st.floats(min_value=-100.0, max_value=100.0),
    )
    def test_scale_shift_equivariance(self, values, a, b):
        base, base_stats = instance_normalize(values)
        if base_stats.degenerate:
            return
        shifted, _ = instance_normalize(a * np.asarray(values) + b)
        np.testing.assert_allclose(shifted, base, rtol=1e-9, atol=1e-9)

    def test_output_moments(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.normal(5.0, 3.0, int(rng.integers(2, 100)))
            normalized, _ = instance_normalize(x)
            assert abs(float(np.mean(normalized))) < 1e-12
            assert abs(float(np.std(normalized)) - 1.0) < 1e-9


class TestDenormalize:
    def test_inverse_of_hand_example(self):
        stats = NormStats(mean=2.0, std=0.816496580927726, degenerate=False)
        restored = denormalize(
            [-1.224744871391589, 0.0, 1.224744871391589], stats
        )
        np.testing.assert_allclose(restored, [1.0, 2.0, 3.0], rtol=1e-12)

    def test_identity_stats(self):
        stats = NormStats(mean=0.0, std=1.0, degenerate=False)
        assert denormalize([4.0, -2.0], stats).tolist() == [4.0, -2.0]

    def test_degenerate_round_trip(self):
        stats = NormStats(mean=7.0, std=1.0, degenerate=True)
        assert denormalize([0.0, 0.0], stats).tolist() == [7.0, 7.0]

    def test_matrix_input(self):
        stats = NormStats(mean=1.0, std=2.0, degenerate=False)
        out = denormalize([[0.0, 1.0], [2.0, 3.0]], stats)
        assert out.tolist() == [[1.0, 3.0], [5.0, 7.0]]


class TestExtractPatches:
    def test_hand_enumeration(self):
        patches = extract_patches([1.0, 2.0, 3.0, 4.0], 2)
        assert [p.values.tolist() for p in patches] == [[1, 2], [2, 3], [3, 4]]
        assert [p.start for p in patches] == [0, 1, 2]
        assert all(p.valid for p in patches)

    def test_single_window(self):
        patches = extract_patches([1.0, 2.0, 3.0, 4.0], 4)
        assert len(patches) == 1
        assert patches[0].values.tolist() == [1, 2, 3, 4]

    def test_count_matches_brute_force(self):
        rng = np.random.default_rng(1)
        series = rng.normal(size=50)
        patches = extract_patches(series, 8)
        brute = [series[k : k + 8] for k in range(len(series) - 8 + 1)]
        assert len(patches) == len(brute) == 43
        for patch, window in zip(patches, brute):
            assert patch.values.tolist() == window.tolist()

    def test_window_too_long(self):
        with pytest.raises(WindowTooLong):
            extract_patches([1.0, 2.0], 3)
        with pytest.raises(WindowTooLong):
            extract_patches([1.0, 2.0], 0)

    def test_nan_windows_flagged(self):
        patches = extract_patches([1.0, math.nan, 3.0, 4.0], 2)
        assert [p.valid for p in patches] == [False, False, True]

    @given(st.integers(min_value=1, max_value=60), st.data())
    @settings(max_examples=50)
    def test_count_property(self, length, data):
        window_len = data.draw(st.integers(min_value=1, max_value=length))
        series = np.arange(length, dtype=float)
        assert len(extract_patches(series, window_len)) == length - window_len + 1


class TestEmbedding:
    def test_hand_example(self):
        token = embed_patch(np.array([3.0, 4.0]))
        np.testing.assert_allclose(token.direction, [0.6, 0.8], rtol=1e-12)
        assert token.norm == pytest.approx(5.0, rel=1e-12)

    def test_zero_patch(self):
        token = embed_patch(np.array([0.0, 0.0]))
        assert token.direction.tolist() == [0.0, 0.0]
        assert token.norm == 0.0

    def test_decode_hand_example(self):
        token = EmbeddedToken(direction=np.array([0.6, 0.8]), norm=5.0)
        np.testing.assert_allclose(decode_embedding(token), [3.0, 4.0], rtol=1e-12)

    def test_decode_zero_token(self):
        token = EmbeddedToken(direction=np.array([0.0, 0.0]), norm=0.0)
        assert decode_embedding(token).tolist() == [0.0, 0.0]

    def test_invalid_patch_rejected(self):
        patch = Patch(start=0, values=np.array([1.0, math.nan]))
        assert not patch.valid
        with pytest.raises(NonFiniteInput):
            embed_patch(patch)

    def test_accepts_patch_objects(self):
        patch = Patch(start=3, values=np.array([3.0, 4.0]))
        token = embed_patch(patch)
        assert token.norm == pytest.approx(5.0, rel=1e-12)

    @given(st.lists(finite_floats, min_size=1, max_size=32))
    def test_round_trip(self, values):
        token = embed_patch(np.asarray(values))
        decoded = decode_embedding(token)
        scale = max(1.0, float(np.max(np.abs(values))))
        np.testing.assert_allclose(decoded, values, rtol=0, atol=1e-12 * scale)

    def test_unit_direction_invariant(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            patch = rng.normal(size=int(rng.integers(1, 20)))
            token = embed_patch(patch)
            if token.norm > 0:
                assert abs(float(np.linalg.norm(token.direction)) - 1.0) < 1e-12
