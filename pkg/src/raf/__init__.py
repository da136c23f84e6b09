"""Retrieval-augmented time-series forecasting toolkit.

Pipeline: index a database of sliding windows, match a query context by
L2 distance over instance-normalized windows, splice the retrieved
context and its future onto the query with endpoint alignment, forecast
from the augmented input, project back to original units, and score with
WQL / MASE. Also included: a constructive two-layer-attention solver for
the exact-motif retrieval problem, a synthetic noise-sweep experiment,
and a subprocess adapter protocol for external forecasting models.
"""
from .adapter import (
    AdapterClient,
    AdapterForecaster,
    ConformanceReport,
    adapter_embed,
    run_conformance,
)
from .bench import (
    AggregateReport,
    BenchConfig,
    BenchmarkSpec,
    CellFailure,
    ResultsTable,
    aggregate,
    format_summary,
    run_benchmark,
    write_aggregate_csv,
    write_cells_csv,
)
from .datasets import load_dataset, load_datasets, write_dataset
from .errors import *  # noqa: F401,F403 -- the errors module defines __all__
from .forecasters import (
    ForecastRequest,
    Forecaster,
    ForecastSamples,
    RetrievalCopyForecaster,
    SeasonalNaiveForecaster,
    ZeroForecaster,
    forecast,
    make_forecaster,
    point_forecast,
    quantile_forecast,
)
from .metrics import (
    DEFAULT_SEASONALITY,
    QUANTILE_LEVELS,
    EvalRecord,
    QuantileForecast,
    geometric_mean,
    mase,
    quantile_loss,
    relative_score,
    seasonality_for,
    wql,
)
from .retrieval import (
    RafQuery,
    RetrievedMatch,
    WindowIndex,
    build_index,
    form_raf_query,
    load_index,
    project_forecast,
    save_index,
    split_dataset,
    split_dataset_three,
    top_n,
)
from .series import (
    EmbeddedToken,
    NormStats,
    Patch,
    TimeSeries,
    decode_embedding,
    denormalize,
    embed_patch,
    extract_patches,
    instance_normalize,
)
from .synth import (
    SweepPoint,
    SynthConfig,
    SynthInstance,
    assemble_raf_query,
    generate_signal,
    make_instance,
    make_noisy_copy,
    scaled_mse,
    snr_sweep,
    write_sweep_csv,
)
from .tsr import (
    PosEncoding,
    TsrModel,
    TsrSolution,
    build_tsr_model,
    make_positional_encodings,
    softmax,
    solve_tsr,
)

__version__ = "0.1.0"
