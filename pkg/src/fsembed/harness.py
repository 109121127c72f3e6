"""Run orchestration: stores in, episode loop, statistical report out.

A run is defined by a RunConfig. The harness loads and normalizes the
stores, precomputes one prompt-mean representation per class on the
textual side (they are episode-independent), then scores every episode
of the configured stream. Episode results are collected in episode-index
order regardless of parallelism, so a report depends only on the config
and the store contents, never on scheduling. wall_time_seconds is the
single non-deterministic report field.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .errors import ConfigError, StoreError
from .inference import (
    DEFAULT_TEMPERATURE,
    METHODS,
    accuracy,
    fuse,
    mean_by_slot,
    predict,
    similarity_matrix,
    softmax_rows,
)
from .sampling import Episode, SamplerConfig, sample_episode
from .store import EmbeddingStore, build_class_index, normalize, read_store
from .validation import check_temperature

# Normal-distribution quantile for a two-sided 95% interval.
CI95_Z = 1.96


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one evaluation run."""

    method: str
    sampler: SamplerConfig
    image_store_path: str
    text_store_path: Optional[str] = None
    temperature: float = DEFAULT_TEMPERATURE
    parallelism: int = 1
    output_path: Optional[str] = None

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        self.sampler.validate()
        try:
            check_temperature(self.temperature)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if not isinstance(self.parallelism, int) or self.parallelism < 1:
            raise ConfigError(f"parallelism must be an integer >= 1, got {self.parallelism!r}")
        if not self.image_store_path:
            raise ConfigError("image_store_path is required")
        if self.method != "visual" and not self.text_store_path:
            raise ConfigError(f"text store required for method {self.method!r}")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "sampler": self.sampler.to_dict(),
            "image_store_path": self.image_store_path,
            "text_store_path": self.text_store_path,
            "temperature": self.temperature,
            "parallelism": self.parallelism,
            "output_path": self.output_path,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("run config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown run config keys: {sorted(unknown)}")
        if "method" not in raw:
            raise ConfigError("run config is missing 'method'")
        if "image_store_path" not in raw:
            raise ConfigError("run config is missing 'image_store_path'")
        kwargs = dict(raw)
        kwargs["sampler"] = SamplerConfig.from_dict(raw.get("sampler", {}))
        config = cls(**kwargs)
        config.validate()
        return config


@dataclass(frozen=True)
class EvaluationReport:
    """Per-episode accuracies plus their summary statistics.

    config_echo carries the resolved RunConfig dict and, under
    "dataset_name", the dataset the loaded stores declared, so a saved
    report is self-describing.
    """

    per_episode_accuracy: tuple[float, ...]
    mean_accuracy: float
    ci95_half_width: float
    episodes: int
    config_echo: dict
    wall_time_seconds: float

    def to_json(self) -> str:
        record = {
            "per_episode_accuracy": list(self.per_episode_accuracy),
            "mean_accuracy": self.mean_accuracy,
            "ci95_half_width": self.ci95_half_width,
            "episodes": self.episodes,
            "config_echo": self.config_echo,
            "wall_time_seconds": self.wall_time_seconds,
        }
        return json.dumps(record, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvaluationReport":
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"report is not valid JSON: {exc}") from exc
        required = {f.name for f in fields(cls)}
        if not isinstance(record, dict) or set(record) != required:
            raise ConfigError(f"report must be a JSON object with keys {sorted(required)}")
        return cls(
            per_episode_accuracy=tuple(float(a) for a in record["per_episode_accuracy"]),
            mean_accuracy=float(record["mean_accuracy"]),
            ci95_half_width=float(record["ci95_half_width"]),
            episodes=int(record["episodes"]),
            config_echo=record["config_echo"],
            wall_time_seconds=float(record["wall_time_seconds"]),
        )

    @property
    def dataset_name(self) -> str:
        return self.config_echo.get("dataset_name", "unknown")

    @property
    def method(self) -> str:
        return self.config_echo.get("method", "unknown")


@dataclass(frozen=True)
class TextRepresentationCache:
    """Prompt-mean representation per class, computed once per run.

    Textual class representations do not depend on the episode, so the
    whole text store collapses to one (n_classes, dim) float64 matrix up
    front; per-episode scoring just gathers rows.
    """

    labels: tuple[str, ...]
    matrix: np.ndarray

    @classmethod
    def from_store(cls, text_store: EmbeddingStore) -> "TextRepresentationCache":
        index = build_class_index(text_store)
        label_to_row = {label: row for row, label in enumerate(index.labels)}
        slots = np.array([label_to_row[label] for label in text_store.labels], dtype=np.int64)
        matrix = mean_by_slot(
            text_store.vectors.astype(np.float64), slots, len(index.labels), "prompt"
        )
        return cls(labels=index.labels, matrix=matrix)

    def __post_init__(self):
        object.__setattr__(
            self, "_row_of", {label: row for row, label in enumerate(self.labels)}
        )

    def __contains__(self, label: str) -> bool:
        return label in self._row_of

    def rows_for(self, class_ids) -> np.ndarray:
        """Representation matrix for an episode's classes, in slot order."""
        try:
            rows = [self._row_of[label] for label in class_ids]
        except KeyError as exc:
            raise StoreError(f"text store has no prompts for class {exc.args[0]!r}") from exc
        return self.matrix[np.array(rows, dtype=np.int64)]


def aggregate(per_episode) -> tuple[float, float]:
    """Sample mean and 1.96 * sample std / sqrt(E) half-width.

    A single episode has no sample standard deviation; its half-width is
    0 by convention.
    """
    arr = np.asarray(per_episode, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError("aggregate needs a non-empty 1-D sequence")
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    half = CI95_Z * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return mean, half


def format_summary_line(report: EvaluationReport) -> str:
    """One-line digest: method, dataset, accuracy percent and CI percent."""
    return (
        f"{report.method} {report.dataset_name}: "
        f"{report.mean_accuracy * 100:.2f} ± {report.ci95_half_width * 100:.2f}"
    )


def evaluate_episode(
    episode: Episode,
    image_vectors: np.ndarray,
    method: str,
    temperature: float,
    text_cache: Optional[TextRepresentationCache] = None,
) -> float:
    """Accuracy of one method on one episode's query set.

    Queries always come from the image store; the text side contributes
    only class representations.
    """
    queries = image_vectors[episode.query_positions]
    needs_visual = method in ("visual", "stacked_max", "stacked_avg")
    needs_text = method in ("textual", "stacked_max", "stacked_avg")

    visual_probs = None
    if needs_visual:
        support = image_vectors[episode.support_positions]
        reps = mean_by_slot(support, episode.support_slots, episode.n_way, "support")
        visual_probs = softmax_rows(similarity_matrix(queries, reps), temperature)

    text_probs = None
    if needs_text:
        if text_cache is None:
            raise ConfigError(f"method {method!r} needs textual representations")
        reps = text_cache.rows_for(episode.class_ids)
        text_probs = softmax_rows(similarity_matrix(queries, reps), temperature)

    if method == "visual":
        weights = visual_probs
    elif method == "textual":
        weights = text_probs
    else:
        weights = fuse(visual_probs, text_probs, "max" if method == "stacked_max" else "avg")
    return accuracy(predict(weights), episode.query_slots)


def _load_modality(path: str, modality: str) -> EmbeddingStore:
    store = read_store(path)
    if store.modality != modality:
        raise StoreError(
            f"expected a {modality} store at {path}, found modality {store.modality!r}"
        )
    return normalize(store)


def run_evaluation(config: RunConfig) -> EvaluationReport:
    """Execute a full evaluation run and write the report if configured.

    The per-episode accuracy sequence is deterministic for a given config
    and pair of stores; parallelism only changes the wall time.
    """
    config.validate()
    start = time.perf_counter()

    image_store = _load_modality(config.image_store_path, "image")
    class_index = build_class_index(image_store)
    image_vectors = image_store.vectors.astype(np.float64)

    text_cache = None
    if config.method != "visual":
        text_store = _load_modality(config.text_store_path, "text")
        if text_store.dim != image_store.dim:
            raise StoreError(
                f"store dimension mismatch: image dim {image_store.dim}, "
                f"text dim {text_store.dim}"
            )
        if text_store.dataset_name != image_store.dataset_name:
            raise StoreError(
                f"store dataset mismatch: image store is {image_store.dataset_name!r}, "
                f"text store is {text_store.dataset_name!r}"
            )
        text_cache = TextRepresentationCache.from_store(text_store)
        missing = [label for label in class_index.labels if label not in text_cache]
        if missing:
            raise StoreError(f"text store has no prompts for class {missing[0]!r}")

    def run_one(index: int) -> float:
        episode = sample_episode(index, config.sampler, class_index, config.sampler.seed)
        return evaluate_episode(
            episode, image_vectors, config.method, config.temperature, text_cache
        )

    episode_range = range(config.sampler.episodes)
    if config.parallelism == 1:
        per_episode = [run_one(i) for i in episode_range]
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            per_episode = list(pool.map(run_one, episode_range))

    mean, half = aggregate(per_episode)
    config_echo = config.to_dict()
    config_echo["dataset_name"] = image_store.dataset_name
    report = EvaluationReport(
        per_episode_accuracy=tuple(per_episode),
        mean_accuracy=mean,
        ci95_half_width=half,
        episodes=config.sampler.episodes,
        config_echo=config_echo,
        wall_time_seconds=time.perf_counter() - start,
    )
    if config.output_path:
        write_report(report, config.output_path)
    return report


def write_report(report: EvaluationReport, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    except OSError as exc:
        raise ConfigError(f"cannot write report to {path}: {exc}") from exc


def read_report(path) -> EvaluationReport:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return EvaluationReport.from_json(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read report file {path}: {exc}") from exc
