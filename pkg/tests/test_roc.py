"""Curve construction, evaluation, geometry queries, CSV interchange."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rocbench.core import ConfusionCounts, RatePair, tally_confusion
from rocbench.roc import (
    RocCurve,
    build_roc,
    np_best_vertex,
    np_objective,
    read_roc_csv,
    write_roc_csv,
)


def two_segment():
    return RocCurve.from_pairs([(0.0, 0.0), (0.2, 0.8), (1.0, 1.0)])


def diagonal():
    return RocCurve.from_pairs([(0.0, 0.0), (1.0, 1.0)])


def hand_curve():
    """Six distinct scores, labels 1,1,0,1,0,0 in score order."""
    scores = np.array([0.9, 0.8, 0.7, 0.6, 0.5, 0.4])
    labels = np.array([1, 1, 0, 1, 0, 0])
    return build_roc(scores, labels)


class TestBuildRoc:
    def test_perfect_separation(self):
        roc = build_roc([0.9, 0.1], [1, 0])
        np.testing.assert_array_equal(roc.alphas, [0, 0, 1])
        np.testing.assert_array_equal(roc.betas, [0, 1, 1])
        assert roc.auc() == 1.0

    def test_constant_scores(self):
        roc = build_roc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0])
        assert roc.n_points == 2
        assert roc.auc() == 0.5

    def test_hand_curve_vertices(self):
        roc = hand_curve()
        np.testing.assert_allclose(roc.thresholds, [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, -0.6])
        np.testing.assert_allclose(roc.alphas, [0, 0, 0, 1 / 3, 1 / 3, 2 / 3, 1])
        np.testing.assert_allclose(roc.betas, [0, 1 / 3, 2 / 3, 2 / 3, 1, 1, 1])

    def test_hand_curve_auc(self):
        assert hand_curve().auc() == pytest.approx(8 / 9, abs=1e-12)

    def test_vertices_match_brute_force_tally(self):
        rng = np.random.default_rng(5)
        scores = rng.random(200)
        labels = rng.integers(0, 2, 200)
        roc = build_roc(scores, labels)
        for c, a, b in zip(roc.thresholds, roc.alphas, roc.betas):
            counts = tally_confusion(labels, (scores > c).astype(int))
            assert a == pytest.approx(counts.n01 / (counts.n01 + counts.n00))
            assert b == pytest.approx(counts.n11 / (counts.n11 + counts.n10))

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            build_roc([0.1, 0.9], [1, 1])

    def test_ties_group_into_one_vertex(self):
        roc = build_roc([0.5, 0.5, 0.9], [0, 1, 1])
        # distinct scores 0.9, 0.5 plus two anchors
        assert roc.n_points == 3
        np.testing.assert_allclose(roc.thresholds, [0.9, 0.5, -0.5])


class TestCurveEvaluation:
    def test_diagonal(self):
        assert diagonal().tpr_at_fpr(0.3) == pytest.approx(0.3)

    def test_interpolation(self):
        assert two_segment().tpr_at_fpr(0.1) == pytest.approx(0.4)

    def test_generalized_inverse(self):
        assert two_segment().fpr_at_tpr(0.8) == pytest.approx(0.2)

    def test_vertical_run_takes_top(self):
        # alpha = 0 runs from beta 0 up to 2/3; the function value is the top
        assert hand_curve().tpr_at_fpr(0.0) == pytest.approx(2 / 3)

    def test_chord_spans_run_top_to_next_bottom(self):
        assert hand_curve().tpr_at_fpr(1 / 6) == pytest.approx(2 / 3)

    def test_inverse_prefers_smallest_alpha(self):
        # beta = 0.5 is reached inside the vertical run at alpha 0
        assert hand_curve().fpr_at_tpr(0.5) == 0.0

    def test_inverse_of_value_leq_identity(self):
        roc = two_segment()
        for a in np.linspace(0, 1, 23):
            assert roc.fpr_at_tpr(roc.tpr_at_fpr(a)) <= a + 1e-12

    def test_vectorized_matches_scalar(self):
        roc = hand_curve()
        grid = np.linspace(0, 1, 37)
        np.testing.assert_allclose(
            roc.tpr_at_fpr(grid), [roc.tpr_at_fpr(float(a)) for a in grid]
        )

    def test_auc_trapezoid(self):
        roc = RocCurve.from_pairs([(0, 0), (0.5, 0.75), (1, 1)])
        assert roc.auc() == pytest.approx(0.625)

    def test_auc_ignores_collinear_points(self):
        a = RocCurve.from_pairs([(0, 0), (0.5, 0.5), (1, 1)])
        assert a.auc() == pytest.approx(diagonal().auc())


class TestSlope:
    def test_segment_slopes(self):
        roc = two_segment()
        assert roc.slope_at(0.1) == pytest.approx(4.0)
        assert roc.slope_at(0.5) == pytest.approx(0.25)

    def test_knot_uses_left_segment(self):
        assert two_segment().slope_at(0.2) == pytest.approx(4.0)

    def test_right_end(self):
        assert two_segment().slope_at(1.0) == pytest.approx(0.25)


class TestThresholds:
    def test_pair_at_threshold_vertex(self):
        roc = hand_curve()
        pair = roc.pair_at_threshold(0.6)
        assert pair == RatePair(pytest.approx(1 / 3), pytest.approx(2 / 3))

    def test_pair_at_threshold_interpolates(self):
        roc = hand_curve()
        pair = roc.pair_at_threshold(0.75)  # midway between 0.8 and 0.7
        assert pair.alpha == pytest.approx(0.0)
        assert pair.beta == pytest.approx(0.5)

    def test_threshold_at_point_on_vertical_run(self):
        assert hand_curve().threshold_at_point((0.0, 0.5)) == pytest.approx(0.75)

    def test_threshold_at_point_on_flat_segment(self):
        assert hand_curve().threshold_at_point((0.5, 1.0)) == pytest.approx(0.45)

    def test_threshold_round_trip(self):
        roc = hand_curve()
        for c in np.linspace(-0.5, 0.85, 28):
            pair = roc.pair_at_threshold(float(c))
            c_back = roc.threshold_at_point(pair)
            pair_back = roc.pair_at_threshold(c_back)
            assert pair_back.alpha == pytest.approx(pair.alpha, abs=1e-9)
            assert pair_back.beta == pytest.approx(pair.beta, abs=1e-9)


class TestDominatingSegment:
    def test_two_segment_example(self):
        seg = two_segment().dominating_segment((0.5, 0.5))
        assert seg.a_pair == RatePair(pytest.approx(0.5), pytest.approx(0.875))
        assert seg.b_pair == RatePair(pytest.approx(0.125), pytest.approx(0.5))
        assert seg.c_lower == pytest.approx(0.3125)
        assert seg.c_upper == pytest.approx(0.6875)

    def test_on_curve_point_has_no_segment(self):
        assert diagonal().dominating_segment((0.5, 0.5)) is None

    def test_above_curve_has_no_segment(self):
        assert two_segment().dominating_segment((0.1, 0.9)) is None

    def test_every_threshold_in_segment_dominates(self):
        roc = two_segment()
        q = (0.5, 0.5)
        seg = roc.dominating_segment(q)
        for c in np.linspace(seg.c_lower, seg.c_upper, 101):
            pair = roc.pair_at_threshold(float(c))
            assert pair.alpha <= q[0] + 1e-12
            assert pair.beta >= q[1] - 1e-12

    def test_matches_brute_force_on_random_curves(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            scores = rng.random(300)
            labels = (rng.random(300) < scores).astype(int)
            if labels.min() == labels.max():
                continue
            roc = build_roc(scores, labels)
            q = (float(rng.uniform(0.3, 0.9)), float(rng.uniform(0.05, 0.4)))
            seg = roc.dominating_segment(q)
            if roc.tpr_at_fpr(q[0]) <= q[1] + 1e-12:
                assert seg is None
                continue
            # dense threshold sweep: dominating thresholds form [c_lower, c_upper]
            cs = np.linspace(roc.thresholds[-1], roc.thresholds[0], 10001)
            dom = []
            for c in cs:
                p = roc.pair_at_threshold(float(c))
                dom.append(p.alpha <= q[0] + 1e-9 and p.beta >= q[1] - 1e-9)
            dom = np.asarray(dom)
            lo, hi = cs[dom].min(), cs[dom].max()
            step = cs[1] - cs[0]
            assert abs(seg.c_lower - lo) <= step + 1e-9
            assert abs(seg.c_upper - hi) <= step + 1e-9


class TestConcavity:
    def test_diagonal_clean(self):
        assert diagonal().concavity_violations() == []

    def test_violation_index(self):
        roc = RocCurve.from_pairs([(0, 0), (0.5, 0.2), (0.6, 0.9), (1, 1)])
        assert roc.concavity_violations() == [1]

    def test_concave_score_model_clean(self):
        rng = np.random.default_rng(3)
        x = rng.random(20000)
        roc = build_roc(x, (rng.random(20000) < x).astype(int))
        # empirical curves wiggle; the reference strictly concave family is clean
        grid = np.linspace(0, 1, 101)
        smooth = RocCurve.from_pairs(list(zip(grid, 2 * np.sqrt(grid) - grid)))
        assert smooth.concavity_violations() == []
        assert roc.auc() > 0.7


class TestNpObjective:
    def test_ideal_point(self):
        assert np_objective((0.0, 1.0), 1.0, 1.0) == 1.0

    def test_arithmetic(self):
        assert np_objective((0.2, 0.6), 2.0, 1.0) == pytest.approx(1.0)

    def test_nonpositive_weights_rejected(self):
        with pytest.raises(ValueError):
            np_objective((0.2, 0.6), 0.0, 1.0)

    def test_dominance_implies_higher_payoff(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            better = (rng.uniform(0, 0.5), rng.uniform(0.5, 1))
            worse = (better[0] + rng.uniform(0, 0.4), better[1] - rng.uniform(0, 0.4))
            phi, eta = rng.uniform(0.1, 5, 2)
            assert np_objective(better, phi, eta) >= np_objective(worse, phi, eta)

    def test_best_vertex_is_max(self):
        roc = two_segment()
        pair, value = np_best_vertex(roc, 1.0, 1.0)
        assert pair == RatePair(0.2, 0.8)
        assert value == pytest.approx(0.6)


class TestJensenGap:
    @given(st.sets(st.integers(1, 99), min_size=2, max_size=12))
    @settings(max_examples=40, deadline=None)
    def test_average_of_curve_points_falls_below(self, knots):
        # two adjacent vertices share a straight segment: no strict gap there
        assume(max(knots) - min(knots) >= 2)
        grid = np.linspace(0, 1, 101)
        roc = RocCurve.from_pairs(list(zip(grid, 2 * np.sqrt(grid) - grid)))
        alphas = grid[sorted(knots)]
        betas = np.array([roc.tpr_at_fpr(float(a)) for a in alphas])
        a_bar, b_bar = alphas.mean(), betas.mean()
        assert b_bar < roc.tpr_at_fpr(float(a_bar)) - 1e-9


class TestCurveValidation:
    def test_needs_anchor_points(self):
        with pytest.raises(ValueError):
            RocCurve(thresholds=[1.0, 0.0], alphas=[0.0, 0.9], betas=[0.0, 1.0])

    def test_thresholds_strictly_decreasing(self):
        with pytest.raises(ValueError):
            RocCurve(thresholds=[1.0, 1.0, 0.0], alphas=[0, 0.5, 1], betas=[0, 0.5, 1])

    def test_rates_monotone(self):
        with pytest.raises(ValueError):
            RocCurve(thresholds=[1.0, 0.5, 0.0], alphas=[0, 0.6, 1], betas=[0, 1.0, 0.9])

    def test_from_pairs_adds_anchors(self):
        roc = RocCurve.from_pairs([(0.2, 0.8)])
        np.testing.assert_allclose(roc.alphas, [0, 0.2, 1])
        np.testing.assert_allclose(roc.betas, [0, 0.8, 1])

    def test_from_pairs_with_thresholds(self):
        roc = RocCurve.from_pairs([(0.2, 0.8)], thresholds=[0.7])
        np.testing.assert_allclose(roc.thresholds, [1.7, 0.7, -0.3])


class TestRocCsv:
    def test_round_trip(self, tmp_path):
        roc = hand_curve()
        path = tmp_path / "roc.csv"
        write_roc_csv(path, roc)
        back = read_roc_csv(path)
        np.testing.assert_allclose(back.thresholds, roc.thresholds)
        np.testing.assert_allclose(back.alphas, roc.alphas)
        np.testing.assert_allclose(back.betas, roc.betas)

    def test_reemit_identical_bytes(self, tmp_path):
        rng = np.random.default_rng(8)
        scores = rng.random(150)
        labels = rng.integers(0, 2, 150)
        roc = build_roc(scores, labels)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_roc_csv(p1, roc)
        write_roc_csv(p2, read_roc_csv(p1))
        assert p1.read_bytes() == p2.read_bytes()

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n")
        with pytest.raises(ValueError, match="header"):
            read_roc_csv(path)
