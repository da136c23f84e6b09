"""Synthetic retrieval experiment: how noise in the retrieved copy
degrades the forecast.

Each instance draws a two-frequency signal, rotates it by a random
orthonormal matrix, and hands the forecaster a query containing a noisy
copy of the whole signal next to the clean context. The retrieval-copy
forecaster reads the future straight out of the noisy copy; performance
is scaled MSE (1.0 means no better than predicting zero). With no noise
the copy is perfect; the sweep shows the degradation as SNR drops.

Run: python3 demos/04_snr_sweep.py
"""
import numpy as np

from raf import (
    ForecastRequest,
    SynthConfig,
    forecast,
    make_forecaster,
    make_instance,
    scaled_mse,
    snr_sweep,
)

config = SynthConfig(
    context_len=24, horizon=8, f1=0.05, f2=0.13, phase=0.0,
    sigma=0.0, seed=0, num_instances=100,
)
copier = make_forecaster("retrieval-copy")

inst = make_instance(config, 0.0, (config.seed, 0, 0))
request = ForecastRequest(
    context=inst.query,
    horizon=config.horizon,
    num_samples=1,
    auxiliary={"designated_future": inst.noisy[config.context_len :]},
)
pred = forecast(copier, request).samples[0]
noiseless = scaled_mse(pred, inst.signal[config.context_len :])
print(f"noiseless instance, retrieval-copy scaled MSE: {noiseless:.3e}")

grid = (0.1, 0.5, 1.0, 5.0, 10.0, 100.0)
print(f"\n{'snr':>8}  {'sigma':>8}  {'mean scaled MSE':>16}  {'stderr':>8}")
for point in snr_sweep(config, copier, grid):
    print(
        f"{point.snr:>8g}  {point.sigma:>8.4f}  "
        f"{point.mean_scaled_mse:>16.6f}  {point.stderr:>8.4f}"
    )

print(f"\n{'snr':>8}  zero forecaster stays at 1.0 by construction:")
for point in snr_sweep(config, make_forecaster("zero"), (0.1, 10.0)):
    print(f"{point.snr:>8g}  {point.mean_scaled_mse:.12f}")
