"""Episodic N-way k-shot evaluation over precomputed embedding stores."""

from .classifiers import CosineCentroidClassifier, StackedFusionClassifier
from .errors import ConfigError, FsembedError, InferenceError, SamplingError, StoreError
from .harness import (
    EvaluationReport,
    RunConfig,
    TextRepresentationCache,
    aggregate,
    evaluate_episode,
    format_summary_line,
    read_report,
    run_evaluation,
    write_report,
)
from .inference import (
    DEFAULT_TEMPERATURE,
    METHODS,
    ClassRepresentationSet,
    PredictionBatch,
    accuracy,
    fuse,
    mean_by_slot,
    predict,
    renormalize_rows,
    similarity_matrix,
    softmax_rows,
    textual_representation,
    visual_representation,
)
from .sampling import (
    Episode,
    EpisodeSampler,
    SamplerConfig,
    episode_seed,
    episode_to_json,
    sample_episode,
    sample_varied_shape,
)
from .store import (
    ClassIndex,
    EmbeddingItem,
    EmbeddingStore,
    build_class_index,
    normalize,
    read_store,
    write_store,
)

__version__ = "0.1.0"

__all__ = [
    "ClassIndex",
    "ClassRepresentationSet",
    "ConfigError",
    "CosineCentroidClassifier",
    "DEFAULT_TEMPERATURE",
    "EmbeddingItem",
    "EmbeddingStore",
    "Episode",
    "EpisodeSampler",
    "EvaluationReport",
    "FsembedError",
    "InferenceError",
    "METHODS",
    "PredictionBatch",
    "RunConfig",
    "SamplerConfig",
    "SamplingError",
    "StackedFusionClassifier",
    "StoreError",
    "TextRepresentationCache",
    "accuracy",
    "aggregate",
    "build_class_index",
    "episode_seed",
    "episode_to_json",
    "evaluate_episode",
    "format_summary_line",
    "fuse",
    "mean_by_slot",
    "normalize",
    "predict",
    "read_report",
    "read_store",
    "renormalize_rows",
    "run_evaluation",
    "sample_episode",
    "sample_varied_shape",
    "similarity_matrix",
    "softmax_rows",
    "textual_representation",
    "visual_representation",
    "write_report",
    "write_store",
]
