"""Numerical kernels for embedding-space few-shot classification.

Class representations are plain means: the support centroid on the
visual side, the prompt mean on the textual side. Neither mean is
re-normalized; the cosine kernel divides by vector norms itself, so
scores are invariant to representation scale.

All kernels compute in float64 and validate their inputs. Softmax rows
are row-stochastic within PROBABILITY_TOL; max-fusion output is left
unnormalized (row sums in [1, 2]) because only its argmax is consumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InferenceError
from .validation import (
    check_matrix,
    check_nonempty_matrix,
    check_probability_rows,
    check_same_shape,
    check_temperature,
    row_norms,
)

METHODS = ("textual", "visual", "stacked_max", "stacked_avg")
FUSE_MODES = ("max", "avg")
REPRESENTATION_SOURCES = ("visual_centroid", "textual_prompt_mean")
DEFAULT_TEMPERATURE = 0.01

# Norms at or below this are treated as zero; cosine is undefined there.
ZERO_NORM_TOL = 1e-12


@dataclass(frozen=True)
class ClassRepresentationSet:
    """One representation row per class, in slot order.

    ``source`` records how the rows were built. Centroids of unit
    vectors have norms in (0, 1] by convexity; that bound is checked for
    the visual source since the engine only averages normalized stores.
    """

    class_ids: tuple[str, ...]
    vectors: np.ndarray
    source: str

    def __post_init__(self):
        if self.source not in REPRESENTATION_SOURCES:
            raise InferenceError(
                f"source must be one of {REPRESENTATION_SOURCES}, got {self.source!r}"
            )
        vectors = check_nonempty_matrix(self.vectors, "representation matrix")
        if vectors.shape[0] != len(self.class_ids):
            raise InferenceError(
                f"representation matrix has {vectors.shape[0]} rows "
                f"for {len(self.class_ids)} class ids"
            )
        if self.source == "visual_centroid":
            norms = row_norms(vectors)
            if norms.min() <= ZERO_NORM_TOL or norms.max() > 1.0 + 1e-6:
                raise InferenceError("visual centroid norms must lie in (0, 1]")


@dataclass(frozen=True)
class PredictionBatch:
    """Similarity scores and probabilities for one batch of queries.

    ``scores`` holds raw cosine similarities in [-1, 1]; ``probabilities``
    the post-softmax (or post-fusion) rows over the same class order.
    """

    query_positions: tuple[int, ...]
    class_ids: tuple[str, ...]
    scores: np.ndarray
    probabilities: np.ndarray
    temperature: float

    def __post_init__(self):
        check_temperature(self.temperature)
        scores = check_nonempty_matrix(self.scores, "score matrix")
        probs = check_nonempty_matrix(self.probabilities, "probability matrix")
        check_same_shape(scores, probs, "scores", "probabilities")
        if scores.shape != (len(self.query_positions), len(self.class_ids)):
            raise InferenceError(
                f"score matrix shape {scores.shape} does not match "
                f"{len(self.query_positions)} queries x {len(self.class_ids)} classes"
            )
        if scores.min() < -1.0 or scores.max() > 1.0:
            raise InferenceError("scores must lie in [-1, 1]")


def _mean_of_rows(vectors: np.ndarray, kind: str) -> np.ndarray:
    vectors = check_nonempty_matrix(vectors, f"{kind} matrix")
    return vectors.mean(axis=0)


def visual_representation(support_vectors: np.ndarray) -> np.ndarray:
    """Centroid of one class's support embeddings.

    The arithmetic mean of the (k, dim) rows, not re-normalized; the
    cosine kernel downstream is scale-invariant.
    """
    return _mean_of_rows(support_vectors, "support")


def textual_representation(prompt_vectors: np.ndarray) -> np.ndarray:
    """Mean of one class's prompt embeddings, one row per template.

    Averaging happens in embedding space before any similarity is
    computed, so a class with many templates still yields one vector.
    """
    return _mean_of_rows(prompt_vectors, "prompt")


def mean_by_slot(vectors: np.ndarray, slots: np.ndarray, n_classes: int, kind: str) -> np.ndarray:
    """Row means grouped by class slot, one output row per slot.

    Batched form of the per-class representation ops: row ``c`` equals
    ``visual_representation(vectors[slots == c])``. Every slot in
    [0, n_classes) must receive at least one row.
    """
    vectors = check_nonempty_matrix(vectors, f"{kind} matrix")
    slots = np.asarray(slots)
    if slots.ndim != 1 or slots.shape[0] != vectors.shape[0]:
        raise InferenceError(
            f"{kind} slots must be one int per row, got shape {slots.shape} "
            f"for {vectors.shape[0]} rows"
        )
    if not np.issubdtype(slots.dtype, np.integer):
        raise InferenceError(f"{kind} slots must be integers, got dtype {slots.dtype}")
    if slots.min() < 0 or slots.max() >= n_classes:
        raise InferenceError(f"{kind} slot out of range for {n_classes} classes")
    counts = np.bincount(slots, minlength=n_classes)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise InferenceError(f"class slot {int(empty[0])} has no {kind} rows")
    if slots.size and np.all(slots[:-1] <= slots[1:]):
        # Sorted slots let reduceat sum contiguous runs; every slot is
        # non-empty here, so run starts are well defined.
        starts = np.searchsorted(slots, np.arange(n_classes), side="left")
        sums = np.add.reduceat(vectors, starts, axis=0)
    else:
        sums = np.zeros((n_classes, vectors.shape[1]), dtype=np.float64)
        np.add.at(sums, slots, vectors)
    return sums / counts[:, None]


def similarity_matrix(queries: np.ndarray, representations: np.ndarray) -> np.ndarray:
    """Cosine similarity between every query and every class representation.

    Both sides are re-normalized here regardless of upstream guarantees.
    Results are clipped to [-1, 1] to absorb float rounding.

    Raises:
        InferenceError: if any row on either side has (near-)zero norm.
    """
    queries = check_nonempty_matrix(queries, "query matrix")
    representations = check_nonempty_matrix(representations, "representation matrix")
    if queries.shape[1] != representations.shape[1]:
        raise InferenceError(
            f"dimension mismatch: queries have dim {queries.shape[1]}, "
            f"representations have dim {representations.shape[1]}"
        )
    q_norms = row_norms(queries)
    r_norms = row_norms(representations)
    bad_q = np.flatnonzero(q_norms <= ZERO_NORM_TOL)
    if bad_q.size:
        raise InferenceError(f"zero-norm query vector at row {int(bad_q[0])}")
    bad_r = np.flatnonzero(r_norms <= ZERO_NORM_TOL)
    if bad_r.size:
        raise InferenceError(f"zero-norm class representation at row {int(bad_r[0])}")
    sims = (queries / q_norms[:, None]) @ (representations / r_norms[:, None]).T
    return np.clip(sims, -1.0, 1.0)


def softmax_rows(scores: np.ndarray, temperature: float = DEFAULT_TEMPERATURE) -> np.ndarray:
    """Temperature-scaled softmax applied independently to each row.

    Scores are divided by the temperature, then shifted by the row max
    before exponentiation so small temperatures cannot overflow.
    """
    scores = check_matrix(scores, "score matrix")
    check_temperature(temperature)
    scaled = scores / float(temperature)
    scaled -= scaled.max(axis=1, keepdims=True)
    exp = np.exp(scaled)
    return exp / exp.sum(axis=1, keepdims=True)


def fuse(visual_probs: np.ndarray, text_probs: np.ndarray, mode: str) -> np.ndarray:
    """Combine the two methods' probability rows class-wise.

    ``avg`` takes the element-wise mean, which is still row-stochastic.
    ``max`` takes the element-wise maximum and returns it unnormalized
    (row sums land in [1, 2]); classification applies argmax afterward,
    which renormalization could not change, and the raw maximum keeps
    the more confident side's value visible. ``renormalize_rows`` offers
    a reporting-only stochastic view.
    """
    if mode not in FUSE_MODES:
        raise ConfigError(f"fuse mode must be one of {FUSE_MODES}, got {mode!r}")
    visual_probs = check_probability_rows(visual_probs, "visual probabilities")
    text_probs = check_probability_rows(text_probs, "textual probabilities")
    check_same_shape(visual_probs, text_probs, "visual probabilities", "textual probabilities")
    if mode == "avg":
        return 0.5 * (visual_probs + text_probs)
    return np.maximum(visual_probs, text_probs)


def renormalize_rows(weights: np.ndarray) -> np.ndarray:
    """Scale each row of a nonnegative matrix to sum to 1 (reporting view)."""
    weights = check_nonempty_matrix(weights, "weight matrix")
    if weights.min() < 0:
        raise InferenceError("row renormalization requires nonnegative entries")
    sums = weights.sum(axis=1, keepdims=True)
    if (sums <= 0).any():
        raise InferenceError("cannot renormalize a row that sums to zero")
    return weights / sums


def predict(probabilities: np.ndarray) -> np.ndarray:
    """Most-probable class slot per row; ties go to the lowest slot index."""
    probabilities = check_nonempty_matrix(probabilities, "probability matrix")
    return np.argmax(probabilities, axis=1).astype(np.int64)


def accuracy(predictions: np.ndarray, true_slots: np.ndarray) -> float:
    """Fraction of rows whose predicted slot matches the true slot."""
    predictions = np.asarray(predictions)
    true_slots = np.asarray(true_slots)
    if predictions.shape != true_slots.shape or predictions.ndim != 1:
        raise InferenceError(
            f"predictions and true slots must be 1-D and equal length, "
            f"got {predictions.shape} and {true_slots.shape}"
        )
    if predictions.size == 0:
        raise InferenceError("accuracy of an empty batch is undefined")
    return float(np.mean(predictions == true_slots))
