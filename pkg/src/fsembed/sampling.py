"""Deterministic N-way k-shot episode sampling over a class index.

Every episode is fully determined by (master seed, episode index, config,
class index): a per-episode sub-seed is derived with numpy's SeedSequence
spawn-key mechanism, so episodes can be generated independently, in any
order, and concurrently without sharing RNG state.

Draw order within an episode is part of the determinism contract:
fixed mode draws the class permutation, then one bucket permutation per
class in slot order; varied mode first draws N, then the class
permutation, then the shot count k_e, then the bucket permutations.

Query items are taken from the *tail* of each class's bucket permutation
and support items from the head. The tail slice does not depend on the
shot count, so two runs that differ only in k see identical query sets —
support-independent methods then score identically across k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Iterator

import numpy as np

from .errors import ConfigError, SamplingError
from .store import ClassIndex

SAMPLER_MODES = ("fixed", "varied")


@dataclass(frozen=True)
class SamplerConfig:
    """Episode-sampling parameters for fixed or varied N-way k-shot runs."""

    mode: str = "fixed"
    n_way: int = 5
    k_shot: int = 1
    q_queries: int = 15
    n_range: tuple[int, int] = (5, 50)
    k_range: tuple[int, int] = (1, 100)
    episodes: int = 600
    seed: int = 0

    def validate(self) -> None:
        if self.mode not in SAMPLER_MODES:
            raise ConfigError(f"sampler mode must be one of {SAMPLER_MODES}, got {self.mode!r}")
        if self.q_queries < 1:
            raise ConfigError(f"q_queries must be >= 1, got {self.q_queries}")
        if self.episodes < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes}")
        if not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.mode == "fixed":
            if self.n_way < 2:
                raise ConfigError(f"n_way must be >= 2, got {self.n_way}")
            if self.k_shot < 1:
                raise ConfigError(f"k_shot must be >= 1, got {self.k_shot}")
        else:
            n_lo, n_hi = self.n_range
            k_lo, k_hi = self.k_range
            if n_lo < 2 or n_lo > n_hi:
                raise ConfigError(f"n_range must satisfy 2 <= lo <= hi, got {self.n_range}")
            if k_lo < 1 or k_lo > k_hi:
                raise ConfigError(f"k_range must satisfy 1 <= lo <= hi, got {self.k_range}")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_way": self.n_way,
            "k_shot": self.k_shot,
            "q_queries": self.q_queries,
            "n_range": list(self.n_range),
            "k_range": list(self.k_range),
            "episodes": self.episodes,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SamplerConfig":
        if not isinstance(raw, dict):
            raise ConfigError("sampler config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown sampler config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        for key in ("n_range", "k_range"):
            if key in kwargs:
                val = kwargs[key]
                if not isinstance(val, (list, tuple)) or len(val) != 2:
                    raise ConfigError(f"{key} must be a two-element [lo, hi] list")
                kwargs[key] = (int(val[0]), int(val[1]))
        config = cls(**kwargs)
        config.validate()
        return config


@dataclass(frozen=True, eq=False)
class Episode:
    """One sampled task: N classes with disjoint support and query items.

    ``support`` and ``query`` are ``(rows, 2)`` int64 arrays of
    (item position, class slot) pairs, slot-major.
    """

    episode_index: int
    class_ids: tuple[str, ...]
    support: np.ndarray
    query: np.ndarray
    k_e: int

    @property
    def n_way(self) -> int:
        return len(self.class_ids)

    @property
    def support_positions(self) -> np.ndarray:
        return self.support[:, 0]

    @property
    def support_slots(self) -> np.ndarray:
        return self.support[:, 1]

    @property
    def query_positions(self) -> np.ndarray:
        return self.query[:, 0]

    @property
    def query_slots(self) -> np.ndarray:
        return self.query[:, 1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Episode):
            return NotImplemented
        return (
            self.episode_index == other.episode_index
            and self.class_ids == other.class_ids
            and self.k_e == other.k_e
            and np.array_equal(self.support, other.support)
            and np.array_equal(self.query, other.query)
        )


def episode_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Derive the per-episode sub-seed from the master seed and episode index.

    Uses SeedSequence's spawn-key construction, a splittable-counter
    scheme: stream `index` is addressable without generating its
    predecessors.
    """
    if not (0 <= master_seed < 2**64):
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {master_seed}")
    if index < 0:
        raise ConfigError(f"episode index must be non-negative, got {index}")
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))


def _episode_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(episode_seed(master_seed, index)))


def _eligible_labels(class_index: ClassIndex, min_size: int) -> list[str]:
    return [label for label in class_index.labels if class_index.bucket_size(label) >= min_size]


def _draw_varied(
    rng: np.random.Generator, config: SamplerConfig, class_index: ClassIndex
) -> tuple[int, int, tuple[str, ...]]:
    """Draw (N, k_e, class ids) for a varied-mode episode.

    N is uniform on [n_range lo, min(n_range hi, #eligible classes)] and
    k_e uniform on [k_range lo, min(k_range hi, S_min - q)] where S_min is
    the smallest bucket among the chosen classes. Eligibility (bucket >=
    k_lo + q) guarantees the k_e interval is non-empty.
    """
    q = config.q_queries
    n_lo, n_hi_cfg = config.n_range
    k_lo, k_hi_cfg = config.k_range

    labels = _eligible_labels(class_index, k_lo + q)
    n_hi = min(n_hi_cfg, len(labels))
    if n_hi < n_lo:
        raise SamplingError(
            f"dataset too small for varied config: {len(labels)} classes have >= "
            f"{k_lo + q} items, need at least {n_lo}"
        )
    n = int(rng.integers(n_lo, n_hi + 1))
    order = rng.permutation(len(labels))
    class_ids = tuple(labels[i] for i in order[:n])

    s_min = min(class_index.bucket_size(label) for label in class_ids)
    k_hi = min(k_hi_cfg, s_min - q)
    if k_hi < k_lo:  # unreachable behind the eligibility filter; kept as a guard
        raise SamplingError("dataset too small for varied config: no admissible shot count")
    k_e = int(rng.integers(k_lo, k_hi + 1))
    return n, k_e, class_ids


def sample_varied_shape(
    episode_sub_seed, config: SamplerConfig, class_index: ClassIndex
) -> tuple[int, int]:
    """Draw the (N, k_e) shape a varied-mode episode would use for this sub-seed."""
    config.validate()
    if config.mode != "varied":
        raise ConfigError("sample_varied_shape requires a varied-mode config")
    if not isinstance(episode_sub_seed, np.random.SeedSequence):
        episode_sub_seed = np.random.SeedSequence(entropy=episode_sub_seed)
    rng = np.random.Generator(np.random.PCG64(episode_sub_seed))
    n, k_e, _ = _draw_varied(rng, config, class_index)
    return n, k_e


def sample_episode(
    index: int, config: SamplerConfig, class_index: ClassIndex, rng_seed: int
) -> Episode:
    """Sample episode ``index`` of the stream defined by ``rng_seed``.

    Classes and within-class items are both drawn without replacement via
    seeded shuffling. Support and query positions are disjoint, each class
    slot receives exactly k_e support and q query items, and the result
    depends only on (rng_seed, index, config, class_index).
    """
    config.validate()
    rng = _episode_rng(rng_seed, index)
    q = config.q_queries

    if config.mode == "fixed":
        n, k_e = config.n_way, config.k_shot
        labels = _eligible_labels(class_index, k_e + q)
        if len(labels) < n:
            raise SamplingError(
                f"insufficient classes: need {n} with >= {k_e + q} items, "
                f"found {len(labels)} of {class_index.n_classes}"
            )
        order = rng.permutation(len(labels))
        class_ids = tuple(labels[i] for i in order[:n])
    else:
        n, k_e, class_ids = _draw_varied(rng, config, class_index)

    support_parts = []
    query_parts = []
    for label in class_ids:
        bucket = class_index.positions(label)
        perm = rng.permutation(bucket.size)
        support_parts.append(bucket[perm[:k_e]])
        query_parts.append(bucket[perm[bucket.size - q :]])

    support = np.column_stack(
        [np.concatenate(support_parts), np.repeat(np.arange(n, dtype=np.int64), k_e)]
    )
    query = np.column_stack(
        [np.concatenate(query_parts), np.repeat(np.arange(n, dtype=np.int64), q)]
    )
    return Episode(episode_index=index, class_ids=class_ids, support=support, query=query, k_e=k_e)


class EpisodeSampler:
    """Iterable view of the episode stream for one (config, class index) pair."""

    def __init__(self, config: SamplerConfig, class_index: ClassIndex):
        config.validate()
        self.config = config
        self.class_index = class_index

    def episode(self, index: int) -> Episode:
        return sample_episode(index, self.config, self.class_index, self.config.seed)

    def __iter__(self) -> Iterator[Episode]:
        for index in range(self.config.episodes):
            yield self.episode(index)

    def __len__(self) -> int:
        return self.config.episodes


def episode_to_json(episode: Episode) -> str:
    """Render one audit/replay dump line for an episode."""
    record = {
        "episode": episode.episode_index,
        "classes": list(episode.class_ids),
        "support": [int(p) for p in episode.support_positions],
        "query": [int(p) for p in episode.query_positions],
        "k": episode.k_e,
    }
    return json.dumps(record, separators=(",", ":"))
