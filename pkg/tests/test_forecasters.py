import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raf import (
    ConfigError,
    EmptyInput,
    ForecastRequest,
    ForecastSamples,
    NonFiniteInput,
    RetrievalCopyForecaster,
    SeasonalNaiveForecaster,
    ShapeMismatch,
    ZeroForecaster,
    forecast,
    make_forecaster,
    point_forecast,
    quantile_forecast,
)
from reference_impls import ref_linear_quantile, ref_lower_median


def request(context, horizon, num_samples=1, **aux):
    return ForecastRequest(
        context=np.asarray(context, dtype=np.float64),
        horizon=horizon,
        num_samples=num_samples,
        auxiliary=aux or None,
    )


class TestRequestValidation:
    def test_fields(self):
        req = request([1.0, 2.0], 3, 5)
        assert req.horizon == 3
        assert req.num_samples == 5
        assert req.context.dtype == np.float64

    def test_context_not_writeable(self):
        req = request([1.0, 2.0], 1)
        with pytest.raises(ValueError):
            req.context[0] = 9.0

    def test_empty_context(self):
        with pytest.raises(EmptyInput):
            request([], 1)

    def test_nan_context(self):
        with pytest.raises(NonFiniteInput):
            request([1.0, np.nan], 1)

    @pytest.mark.parametrize("horizon,num_samples", [(0, 1), (1, 0)])
    def test_positive_counts(self, horizon, num_samples):
        with pytest.raises(ConfigError):
            request([1.0], horizon, num_samples)


class TestSamplesValidation:
    def test_shape_properties(self):
        samples = ForecastSamples(samples=np.zeros((3, 4)))
        assert samples.num_samples == 3
        assert samples.horizon == 4

    def test_rejects_one_dimensional(self):
        with pytest.raises(ShapeMismatch):
            ForecastSamples(samples=np.zeros(4))

    def test_rejects_non_finite(self):
        with pytest.raises(NonFiniteInput):
            ForecastSamples(samples=np.array([[1.0, np.inf]]))


class TestBuiltins:
    def test_zero_forecaster(self):
        out = forecast(ZeroForecaster(), request([5.0, 6.0], 4, 3))
        np.testing.assert_array_equal(out.samples, np.zeros((3, 4)))

    def test_seasonal_naive_hand_example(self):
        out = forecast(SeasonalNaiveForecaster(m=2), request([1.0, 2.0, 3.0, 4.0], 3))
        np.testing.assert_array_equal(out.samples, [[3.0, 4.0, 3.0]])

    def test_seasonal_naive_cycle_longer_than_context(self):
        out = forecast(SeasonalNaiveForecaster(m=10), request([7.0, 8.0], 5))
        np.testing.assert_array_equal(out.samples, [[7.0, 8.0, 7.0, 8.0, 7.0]])

    def test_seasonal_naive_m_one_repeats_last(self):
        out = forecast(SeasonalNaiveForecaster(m=1), request([4.0, 9.0], 3))
        np.testing.assert_array_equal(out.samples, [[9.0, 9.0, 9.0]])

    def test_seasonality_validated(self):
        with pytest.raises(ConfigError):
            SeasonalNaiveForecaster(m=0)

    def test_retrieval_copy(self):
        out = forecast(
            RetrievalCopyForecaster(),
            request([0.0], 2, 3, designated_future=[4.0, 5.0, 6.0]),
        )
        np.testing.assert_array_equal(out.samples, np.tile([4.0, 5.0], (3, 1)))

    def test_retrieval_copy_missing_future(self):
        with pytest.raises(EmptyInput):
            forecast(RetrievalCopyForecaster(), request([0.0], 2))

    def test_retrieval_copy_short_future(self):
        with pytest.raises(ShapeMismatch):
            forecast(
                RetrievalCopyForecaster(), request([0.0], 3, designated_future=[1.0])
            )

    def test_determinism(self):
        req = request([1.5, -2.5, 3.5], 4, 7)
        first = forecast(SeasonalNaiveForecaster(m=3), req)
        second = forecast(SeasonalNaiveForecaster(m=3), req)
        np.testing.assert_array_equal(first.samples, second.samples)

    def test_dispatch_enforces_shape(self):
        class WrongShape:
            name = "wrong"

            def forecast(self, req):
                return ForecastSamples(samples=np.zeros((req.num_samples, req.horizon + 1)))

        with pytest.raises(ShapeMismatch):
            forecast(WrongShape(), request([1.0], 2, 2))

    def test_dispatch_enforces_type(self):
        class WrongType:
            name = "wrong"

            def forecast(self, req):
                return np.zeros((req.num_samples, req.horizon))

        with pytest.raises(ShapeMismatch):
            forecast(WrongType(), request([1.0], 2, 2))


class TestPointForecast:
    def test_median_by_hand(self):
        samples = ForecastSamples(samples=np.array([[1.0], [3.0], [2.0]]))
        np.testing.assert_array_equal(point_forecast(samples), [2.0])

    def test_single_sample_identity(self):
        samples = ForecastSamples(samples=np.array([[4.0, 5.0, 6.0]]))
        np.testing.assert_array_equal(point_forecast(samples), [4.0, 5.0, 6.0])

    def test_identical_samples(self):
        samples = ForecastSamples(samples=np.tile([1.0, 2.0], (5, 1)))
        np.testing.assert_array_equal(point_forecast(samples), [1.0, 2.0])

    def test_even_count_takes_lower_median(self):
        samples = ForecastSamples(samples=np.array([[1.0], [2.0], [3.0], [4.0]]))
        np.testing.assert_array_equal(point_forecast(samples), [2.0])

    @given(
        st.lists(
            st.lists(
                st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6),
                min_size=3,
                max_size=3,
            ),
            min_size=1,
            max_size=9,
        )
    )
    def test_matches_reference_median(self, rows):
        samples = ForecastSamples(samples=np.asarray(rows))
        got = point_forecast(samples)
        for step in range(3):
            column = [row[step] for row in rows]
            assert got[step] == ref_lower_median(column)


class TestQuantileForecast:
    def test_constant_samples(self):
        samples = ForecastSamples(samples=np.full((4, 2), 3.5))
        qf = quantile_forecast(samples)
        assert qf.values.shape == (9, 2)
        np.testing.assert_array_equal(qf.values, np.full((9, 2), 3.5))

    def test_interpolation_halfway(self):
        samples = ForecastSamples(samples=np.array([[0.0], [10.0]]))
        qf = quantile_forecast(samples)
        mid = qf.values[qf.levels.index(0.5), 0]
        assert mid == pytest.approx(5.0, abs=1e-12)

    def test_default_levels(self):
        samples = ForecastSamples(samples=np.zeros((2, 1)))
        qf = quantile_forecast(samples)
        assert qf.levels == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

    def test_monotone_across_levels(self):
        rng = np.random.default_rng(53)
        for _ in range(100):
            samples = ForecastSamples(
                samples=rng.normal(size=(int(rng.integers(2, 12)), int(rng.integers(1, 6))))
            )
            qf = quantile_forecast(samples)
            assert (np.diff(qf.values, axis=0) >= 0).all()

    def test_median_level_equals_point_forecast_for_odd_counts(self):
        rng = np.random.default_rng(59)
        for n in (1, 3, 5, 9):
            samples = ForecastSamples(samples=rng.normal(size=(n, 4)))
            qf = quantile_forecast(samples)
            np.testing.assert_allclose(
                qf.values[qf.levels.index(0.5)], point_forecast(samples), atol=1e-12
            )

    def test_matches_reference_interpolation(self):
        rng = np.random.default_rng(61)
        for _ in range(50):
            column = rng.normal(size=int(rng.integers(2, 10)))
            samples = ForecastSamples(samples=column[:, None])
            qf = quantile_forecast(samples)
            for level, got in zip(qf.levels, qf.values[:, 0]):
                assert got == pytest.approx(
                    ref_linear_quantile(column.tolist(), level), rel=1e-12, abs=1e-12
                )


class TestMakeForecaster:
    def test_builtin_names(self):
        assert make_forecaster("zero").name == "zero"
        assert make_forecaster("seasonal-naive", seasonality=3).m == 3
        assert make_forecaster("retrieval-copy").name == "retrieval-copy"

    def test_adapter_needs_command(self):
        with pytest.raises(ConfigError):
            make_forecaster("adapter")

    def test_unknown_spec(self):
        with pytest.raises(ConfigError):
            make_forecaster("oracle")
