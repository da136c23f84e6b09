import math

import numpy as np
import pytest

from raf import (
    ConfigError,
    ForecastSamples,
    LengthMismatch,
    RetrievalCopyForecaster,
    ShapeMismatch,
    SweepAborted,
    SweepPoint,
    SynthConfig,
    ZeroForecaster,
    ZeroTruth,
    assemble_raf_query,
    generate_signal,
    make_instance,
    make_noisy_copy,
    scaled_mse,
    snr_sweep,
    write_sweep_csv,
)
from reference_impls import ref_scaled_mse


def small_config(**overrides):
    base = dict(
        context_len=8,
        horizon=5,
        f1=0.05,
        f2=0.13,
        phase=0.0,
        sigma=0.0,
        seed=0,
        num_instances=4,
    )
    base.update(overrides)
    return SynthConfig(**base)


class TestSynthConfig:
    def test_length(self):
        assert small_config(context_len=8, horizon=5).length == 13

    @pytest.mark.parametrize(
        "overrides",
        [
            {"context_len": 0},
            {"horizon": 0},
            {"sigma": -1.0},
            {"num_instances": 0},
            {"num_model_samples": 0},
            {"rotation_mode": "hadamard"},
        ],
    )
    def test_validation(self, overrides):
        with pytest.raises(ConfigError):
            small_config(**overrides)


class TestGenerateSignal:
    def test_identity_mode_equal_frequencies(self):
        config = small_config(f1=0.07, f2=0.07, rotation_mode="identity")
        signal, rotation = generate_signal(config, 3)
        t = np.arange(config.length, dtype=np.float64)
        np.testing.assert_allclose(signal, 2.0 * np.sin(np.pi * 0.07 * t), atol=1e-12)
        np.testing.assert_array_equal(rotation, np.eye(config.length))

    def test_rotation_preserves_norm(self):
        config = small_config()
        t = np.arange(config.length, dtype=np.float64)
        base = np.sin(np.pi * config.f1 * t) + np.sin(np.pi * config.f2 * t)
        for seed in range(10):
            signal, _ = generate_signal(config, seed)
            assert abs(np.linalg.norm(signal) - np.linalg.norm(base)) < 1e-10

    def test_rotations_are_orthonormal(self):
        config = small_config()
        eye = np.eye(config.length)
        for seed in range(20):
            _, rotation = generate_signal(config, seed)
            assert np.abs(rotation.T @ rotation - eye).max() < 1e-10

    def test_deterministic(self):
        config = small_config()
        first = generate_signal(config, 11)
        second = generate_signal(config, 11)
        np.testing.assert_array_equal(first[0], second[0])
        np.testing.assert_array_equal(first[1], second[1])

    def test_seed_sensitivity(self):
        config = small_config()
        a, _ = generate_signal(config, 1)
        b, _ = generate_signal(config, 2)
        assert not np.array_equal(a, b)


class TestMakeNoisyCopy:
    def test_zero_sigma_returns_signal_exactly(self):
        signal = np.array([1.0, -2.5, 3.25])
        noisy = make_noisy_copy(signal, 0.0, 5)
        np.testing.assert_array_equal(noisy, signal)
        noisy[0] = 99.0
        assert signal[0] == 1.0

    def test_noise_std_moment(self):
        noisy = make_noisy_copy(np.zeros(100_000), 1.0, 7)
        assert abs(float(np.std(noisy)) - 1.0) < 0.02

    def test_noise_seed_sensitivity(self):
        signal = np.zeros(16)
        assert not np.array_equal(
            make_noisy_copy(signal, 1.0, 1), make_noisy_copy(signal, 1.0, 2)
        )

    def test_negative_sigma(self):
        with pytest.raises(ConfigError):
            make_noisy_copy(np.zeros(4), -0.1, 0)


class TestAssembleQuery:
    def test_hand_concatenation(self):
        query = assemble_raf_query([10.0, 20.0, 30.0], [1.0, 2.0, 3.0], 2, 1)
        np.testing.assert_array_equal(query, [1.0, 2.0, 3.0, 10.0, 20.0])

    def test_noiseless_collapse(self):
        signal = np.array([4.0, 5.0, 6.0, 7.0])
        query = assemble_raf_query(signal, signal.copy(), 3, 1)
        np.testing.assert_array_equal(query, np.concatenate([signal, signal[:3]]))

    @pytest.mark.parametrize("c,h", [(1, 1), (2, 3), (8, 5), (12, 1)])
    def test_output_length(self, c, h):
        signal = np.arange(float(c + h))
        assert assemble_raf_query(signal, signal, c, h).size == c + h + c

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            assemble_raf_query(np.zeros(4), np.zeros(5), 3, 1)
        with pytest.raises(LengthMismatch):
            assemble_raf_query(np.zeros(5), np.zeros(5), 3, 1)


class TestMakeInstance:
    def test_shapes_and_layout(self):
        config = small_config()
        inst = make_instance(config, 0.3, 9)
        c, h = config.context_len, config.horizon
        assert inst.signal.size == c + h
        assert inst.query.size == c + h + c
        np.testing.assert_array_equal(inst.query[: c + h], inst.noisy)
        np.testing.assert_array_equal(inst.query[c + h :], inst.signal[:c])

    def test_rotation_orthonormal(self):
        inst = make_instance(small_config(), 0.3, 9)
        eye = np.eye(inst.rotation.shape[0])
        assert np.abs(inst.rotation.T @ inst.rotation - eye).max() < 1e-10

    def test_zero_sigma_instance(self):
        inst = make_instance(small_config(), 0.0, 2)
        np.testing.assert_array_equal(inst.noisy, inst.signal)


class TestScaledMse:
    def test_perfect_prediction(self):
        truth = np.array([0.5, -1.5, 2.0])
        assert scaled_mse(truth, truth) == 0.0

    def test_zero_prediction_is_exactly_one(self):
        truth = np.array([0.3, -0.7, 12.0, 1e-8])
        assert scaled_mse(np.zeros_like(truth), truth) == 1.0

    def test_hand_value(self):
        assert scaled_mse([0.0, 2.0], [1.0, 1.0]) == 1.0

    def test_matches_reference(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            h = int(rng.integers(1, 9))
            pred = rng.normal(size=h)
            truth = rng.normal(size=h)
            expected = ref_scaled_mse(pred.tolist(), truth.tolist())
            assert scaled_mse(pred, truth) == pytest.approx(expected, rel=1e-12)

    def test_zero_truth(self):
        with pytest.raises(ZeroTruth):
            scaled_mse([1.0, 2.0], [0.0, 0.0])

    def test_shape_mismatch(self):
        with pytest.raises(LengthMismatch):
            scaled_mse([1.0, 2.0], [1.0])


class TestSnrSweep:
    def test_zero_forecaster_scores_one(self):
        points = snr_sweep(small_config(num_instances=10), ZeroForecaster(), [0.5, 2.0])
        for p in points:
            assert p.mean_scaled_mse == pytest.approx(1.0, abs=1e-12)
            assert p.stderr == pytest.approx(0.0, abs=1e-12)

    def test_retrieval_copy_noiseless_is_exact(self):
        inst = make_instance(small_config(), 0.0, 4)
        c = small_config().context_len
        assert scaled_mse(inst.noisy[c:], inst.signal[c:]) < 1e-10

    def test_retrieval_copy_nonincreasing_in_snr(self):
        config = small_config(num_instances=100)
        points = snr_sweep(config, RetrievalCopyForecaster(), [0.1, 1.0, 10.0, 100.0])
        means = [p.mean_scaled_mse for p in points]
        assert means == sorted(means, reverse=True)
        for lo, hi in zip(points, points[1:]):
            slack = 2.326 * math.hypot(lo.stderr, hi.stderr)
            assert hi.mean_scaled_mse <= lo.mean_scaled_mse + slack

    def test_sigma_tracks_snr(self):
        points = snr_sweep(small_config(num_instances=20), ZeroForecaster(), [0.25, 4.0])
        # quadrupling the SNR halves sigma, modulo per-instance variation
        assert points[0].sigma > points[1].sigma
        assert points[0].snr == 0.25
        assert points[1].num_instances == 20

    def test_deterministic_rerun(self):
        config = small_config(num_instances=25, sigma=0.0)
        grid = [0.5, 5.0]
        first = snr_sweep(config, RetrievalCopyForecaster(), grid)
        second = snr_sweep(config, RetrievalCopyForecaster(), grid)
        assert first == second

    def test_matches_closed_form_expectation(self):
        config = small_config(num_instances=500)
        [point] = snr_sweep(config, RetrievalCopyForecaster(), [1.0])
        predicted = np.empty(config.num_instances)
        for inst_idx in range(config.num_instances):
            seed = np.random.SeedSequence((config.seed, 0, inst_idx))
            signal_seed, _ = seed.spawn(2)
            signal, _ = generate_signal(config, signal_seed)
            sigma2 = float(np.var(signal))  # snr = 1 makes sigma^2 = Var(s)
            truth = signal[config.context_len :]
            predicted[inst_idx] = sigma2 / float(np.mean(np.square(truth)))
        expected = float(np.mean(predicted))
        assert point.mean_scaled_mse == pytest.approx(expected, rel=0.10)

    def test_forecaster_failure_aborts_with_snr(self):
        class Exploding:
            name = "exploding"

            def forecast(self, request):
                raise ShapeMismatch("deliberate")

        with pytest.raises(SweepAborted) as info:
            snr_sweep(small_config(), Exploding(), [0.7, 2.0])
        assert info.value.snr == 0.7
        assert isinstance(info.value.cause, ShapeMismatch)

    def test_grid_must_be_positive(self):
        with pytest.raises(ConfigError):
            snr_sweep(small_config(), ZeroForecaster(), [1.0, 0.0])


class TestSweepCsv:
    def test_layout_and_round_trip(self, tmp_path):
        points = [
            SweepPoint(snr=0.1, sigma=1.7320508, mean_scaled_mse=0.25, stderr=0.01, num_instances=3),
            SweepPoint(snr=10.0, sigma=0.1732, mean_scaled_mse=0.0025, stderr=0.0001, num_instances=3),
        ]
        path = tmp_path / "sweep.csv"
        write_sweep_csv(points, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "snr,sigma,mean_scaled_mse,stderr,num_instances"
        assert len(lines) == 3
        first = lines[1].split(",")
        assert float(first[0]) == 0.1
        assert float(first[2]) == 0.25
        assert first[4] == "3"

    def test_rewrite_is_byte_identical(self, tmp_path):
        config = small_config(num_instances=10)
        points = snr_sweep(config, RetrievalCopyForecaster(), [0.5, 5.0])
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        write_sweep_csv(points, a)
        write_sweep_csv(snr_sweep(config, RetrievalCopyForecaster(), [0.5, 5.0]), b)
        assert a.read_bytes() == b.read_bytes()
