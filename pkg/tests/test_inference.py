"""Inference kernels versus the scalar oracle, plus their edge rules."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fsembed import (
    ClassRepresentationSet,
    ConfigError,
    InferenceError,
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

from _oracle import o_fuse, o_mean_rows, o_predict, o_similarity, o_softmax

finite_rows = lambda rows, cols: arrays(  # noqa: E731
    np.float64,
    (rows, cols),
    elements=st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False),
)


class TestRepresentations:
    def test_single_row_identity(self):
        assert np.array_equal(visual_representation(np.array([[0.6, 0.8]])), [0.6, 0.8])

    def test_two_row_mean(self):
        rep = visual_representation(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert np.array_equal(rep, [0.5, 0.5])

    def test_textual_matches_visual_math(self):
        rng = np.random.default_rng(0)
        rows = rng.normal(size=(8, 5))
        assert np.array_equal(textual_representation(rows), visual_representation(rows))

    def test_matches_oracle_mean(self):
        rng = np.random.default_rng(1)
        rows = rng.normal(size=(100, 12))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        expected = o_mean_rows([list(map(float, r)) for r in rows])
        assert np.abs(visual_representation(rows) - np.array(expected)).max() <= 1e-6

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="at least one row"):
            visual_representation(np.zeros((0, 3)))

    def test_mean_by_slot_matches_per_class_op(self):
        rng = np.random.default_rng(2)
        vectors = rng.normal(size=(30, 4))
        slots = rng.integers(0, 5, size=30)
        slots[:5] = np.arange(5)  # every slot occupied
        grouped = mean_by_slot(vectors, slots, 5, "support")
        for c in range(5):
            assert np.allclose(grouped[c], visual_representation(vectors[slots == c]), atol=1e-12)

    def test_mean_by_slot_empty_slot_rejected(self):
        with pytest.raises(InferenceError, match="slot 1 has no support rows"):
            mean_by_slot(np.eye(3), np.array([0, 2, 2]), 3, "support")


class TestSimilarity:
    def test_orthonormal_case(self):
        sims = similarity_matrix(np.array([[1.0, 0.0]]), np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert np.allclose(sims, [[1.0, 0.0]], atol=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(3)
        queries = rng.normal(size=(6, 4))
        reps = rng.normal(size=(3, 4))
        base = similarity_matrix(queries, reps)
        scaled = similarity_matrix(queries * 7.5, reps * 0.002)
        assert np.abs(base - scaled).max() <= 1e-12

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(4)
        queries = rng.normal(size=(50, 10))
        reps = rng.normal(size=(10, 10))
        expected = o_similarity(
            [list(map(float, q)) for q in queries], [list(map(float, r)) for r in reps]
        )
        assert np.abs(similarity_matrix(queries, reps) - np.array(expected)).max() <= 1e-6

    def test_range_clipped(self):
        rng = np.random.default_rng(5)
        queries = rng.normal(size=(40, 3))
        sims = similarity_matrix(queries, queries)
        assert sims.min() >= -1.0 and sims.max() <= 1.0

    def test_zero_norm_query_names_side_and_row(self):
        with pytest.raises(InferenceError, match="zero-norm query vector at row 1"):
            similarity_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]), np.eye(2))

    def test_zero_norm_representation_names_side_and_row(self):
        with pytest.raises(InferenceError, match="zero-norm class representation at row 0"):
            similarity_matrix(np.eye(2), np.array([[0.0, 0.0], [1.0, 0.0]]))

    def test_dimension_mismatch(self):
        with pytest.raises(InferenceError, match="dimension mismatch"):
            similarity_matrix(np.eye(3), np.eye(2))


class TestSoftmax:
    def test_hand_value(self):
        probs = softmax_rows(np.array([[1.0, 0.0]]), temperature=1.0)
        assert np.abs(probs - np.array([[0.7311, 0.2689]])).max() <= 1e-4

    def test_uniform_on_equal_scores(self):
        probs = softmax_rows(np.full((3, 4), 0.25), temperature=0.5)
        assert np.abs(probs - 0.25).max() <= 1e-12

    def test_sharp_temperature_no_overflow(self):
        probs = softmax_rows(np.array([[1.0, 0.0]]), temperature=0.01)
        assert np.isfinite(probs).all()
        assert probs[0, 0] > 1 - 1e-10

    def test_matches_oracle(self):
        rng = np.random.default_rng(6)
        scores = np.clip(rng.normal(size=(25, 6)), -1, 1)
        for tau in (0.01, 0.5, 1.0, 100.0):
            expected = np.array(o_softmax([list(map(float, r)) for r in scores], tau))
            assert np.abs(softmax_rows(scores, tau) - expected).max() <= 1e-6

    @pytest.mark.parametrize("tau", [0.0, -1.0, float("nan")])
    def test_bad_temperature(self, tau):
        with pytest.raises(ValueError, match="temperature"):
            softmax_rows(np.eye(2), tau)

    def test_non_finite_scores_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            softmax_rows(np.array([[np.inf, 0.0]]), 1.0)

    @settings(max_examples=60, deadline=None)
    @given(scores=finite_rows(5, 4), tau=st.floats(min_value=1e-3, max_value=1e3))
    def test_rows_sum_to_one_property(self, scores, tau):
        probs = softmax_rows(scores, tau)
        assert np.abs(probs.sum(axis=1) - 1.0).max() <= 1e-6
        assert probs.min() >= 0.0 and probs.max() <= 1.0


class TestFuse:
    A = np.array([[0.8, 0.2]])
    B = np.array([[0.4, 0.6]])

    def test_avg_analytic(self):
        assert np.allclose(fuse(self.A, self.B, "avg"), [[0.6, 0.4]], atol=1e-12)

    def test_max_analytic_unnormalized(self):
        fused = fuse(self.A, self.B, "max")
        assert np.allclose(fused, [[0.8, 0.6]], atol=1e-12)
        assert predict(fused)[0] == 0  # the more confident side wins

    def test_idempotent_on_identical_inputs(self):
        d = np.array([[0.3, 0.7], [0.5, 0.5]])
        assert np.allclose(fuse(d, d, "avg"), d, atol=1e-12)
        assert np.allclose(fuse(d, d, "max"), d, atol=1e-12)

    def test_symmetry(self):
        for mode in ("avg", "max"):
            assert np.allclose(
                fuse(self.A, self.B, mode), fuse(self.B, self.A, mode), atol=1e-12
            )

    def test_max_row_sums_bounded(self):
        rng = np.random.default_rng(7)
        a = softmax_rows(rng.normal(size=(40, 6)), 1.0)
        b = softmax_rows(rng.normal(size=(40, 6)), 1.0)
        sums = fuse(a, b, "max").sum(axis=1)
        assert sums.min() >= 1.0 - 1e-9
        assert sums.max() <= 2.0 + 1e-9

    def test_avg_rows_still_stochastic(self):
        rng = np.random.default_rng(8)
        a = softmax_rows(rng.normal(size=(40, 6)), 1.0)
        b = softmax_rows(rng.normal(size=(40, 6)), 1.0)
        assert np.abs(fuse(a, b, "avg").sum(axis=1) - 1.0).max() <= 1e-6

    def test_matches_oracle(self):
        rng = np.random.default_rng(9)
        a = softmax_rows(rng.normal(size=(10, 4)), 1.0)
        b = softmax_rows(rng.normal(size=(10, 4)), 1.0)
        for mode in ("avg", "max"):
            expected = np.array(
                o_fuse([list(map(float, r)) for r in a], [list(map(float, r)) for r in b], mode)
            )
            assert np.abs(fuse(a, b, mode) - expected).max() <= 1e-12

    def test_bad_mode(self):
        with pytest.raises(ConfigError, match="fuse mode"):
            fuse(self.A, self.B, "geometric")

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            fuse(self.A, np.array([[0.2, 0.3, 0.5]]), "avg")

    def test_non_probability_input_rejected(self):
        with pytest.raises(ValueError, match="sum"):
            fuse(np.array([[0.9, 0.9]]), self.B, "avg")

    def test_renormalize_reporting_view(self):
        fused = fuse(self.A, self.B, "max")
        view = renormalize_rows(fused)
        assert np.abs(view.sum(axis=1) - 1.0).max() <= 1e-12
        assert predict(view).tolist() == predict(fused).tolist()


class TestPredict:
    def test_simple(self):
        assert predict(np.array([[0.1, 0.9]])).tolist() == [1]

    def test_tie_breaks_to_lowest_slot(self):
        assert predict(np.array([[0.5, 0.5]])).tolist() == [0]
        assert predict(np.array([[0.2, 0.4, 0.4]])).tolist() == [1]

    def test_matches_oracle(self):
        rng = np.random.default_rng(10)
        probs = softmax_rows(rng.normal(size=(30, 5)), 1.0)
        expected = o_predict([list(map(float, r)) for r in probs])
        assert predict(probs).tolist() == expected

    @settings(max_examples=60, deadline=None)
    @given(scores=finite_rows(6, 5))
    def test_temperature_argmax_invariance(self, scores):
        """On tie-free rows the prediction ignores the temperature."""
        tie_free = np.array(
            [len(np.unique(row)) == len(row) for row in np.round(scores, 12)]
        )
        if not tie_free.all():
            return
        raw = np.argmax(scores, axis=1)
        for tau in (0.01, 1.0, 100.0):
            assert np.array_equal(predict(softmax_rows(scores, tau)), raw)


class TestAccuracy:
    def test_fraction(self):
        assert accuracy(np.array([0, 1, 2, 1]), np.array([0, 1, 1, 1])) == 0.75

    def test_empty_rejected(self):
        with pytest.raises(InferenceError, match="empty"):
            accuracy(np.array([]), np.array([]))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InferenceError):
            accuracy(np.array([0, 1]), np.array([0]))


class TestDomainTypes:
    def test_representation_set_checks_rows(self):
        with pytest.raises(InferenceError, match="rows"):
            ClassRepresentationSet(("a", "b"), np.eye(3), "textual_prompt_mean")

    def test_representation_set_checks_source(self):
        with pytest.raises(InferenceError, match="source"):
            ClassRepresentationSet(("a",), np.eye(1), "other")

    def test_centroid_norm_bound(self):
        with pytest.raises(InferenceError, match="norms"):
            ClassRepresentationSet(("a",), np.array([[3.0]]), "visual_centroid")
        ClassRepresentationSet(("a",), np.array([[0.5]]), "visual_centroid")

    def test_prediction_batch_checks_score_range(self):
        probs = np.array([[0.5, 0.5]])
        with pytest.raises(InferenceError, match=r"\[-1, 1\]"):
            PredictionBatch((7,), ("a", "b"), np.array([[2.0, 0.0]]), probs, 0.01)

    def test_prediction_batch_checks_shape(self):
        probs = np.array([[0.5, 0.5]])
        with pytest.raises(InferenceError, match="shape"):
            PredictionBatch((7, 8), ("a", "b"), np.array([[0.1, 0.2]]), probs, 0.01)

    def test_prediction_batch_accepts_valid(self):
        PredictionBatch((7,), ("a", "b"), np.array([[0.1, 0.2]]), np.array([[0.5, 0.5]]), 0.01)
